#include "jdcev/config.hpp"

#include "jdcev/error.hpp"

#include <json.hpp>

#include <fstream>
#include <string_view>
#include <sstream>

namespace jdcev {

using nlohmann::json;

namespace {

const json* find(const json& root, const std::string& path) {
    const json* node = &root;
    std::size_t start = 0;
    while (start <= path.size()) {
        const std::size_t dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos
                                                                             : dot - start);
        if (!node->is_object()) return nullptr;
        auto it = node->find(key);
        if (it == node->end()) return nullptr;
        node = &*it;
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    return node;
}

double number(const json& node, const std::string& path) {
    if (!node.is_number()) fail(ErrorCategory::config, path + ": expected a number, got " + node.dump());
    return node.get<double>();
}

double required(const json& root, const std::string& path) {
    const json* n = find(root, path);
    if (n == nullptr || n->is_null()) fail(ErrorCategory::config, path + ": missing");
    return number(*n, path);
}

template <class T>
void optional_value(const json& root, const std::string& path, T& out) {
    const json* n = find(root, path);
    if (n == nullptr || n->is_null()) return;
    if constexpr (std::is_same_v<T, double>) {
        out = number(*n, path);
    } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!n->is_number_integer() && !n->is_number_unsigned())
            fail(ErrorCategory::config, path + ": expected an integer, got " + n->dump());
        if (!n->is_number_unsigned() && n->get<long long>() < 0 && std::is_unsigned_v<T>)
            fail(ErrorCategory::config, path + ": must be non-negative");
        out = n->get<T>();
    } else {
        if (!n->is_boolean()) fail(ErrorCategory::config, path + ": expected true or false");
        out = n->get<bool>();
    }
}

std::vector<double> number_list(const json& root, const std::string& path, bool must_exist) {
    const json* n = find(root, path);
    if (n == nullptr || n->is_null()) {
        if (must_exist) fail(ErrorCategory::config, path + ": missing");
        return {};
    }
    if (!n->is_array()) fail(ErrorCategory::config, path + ": expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < n->size(); ++i) {
        out.push_back(number((*n)[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

std::optional<double> nullable(const json& root, const std::string& path) {
    const json* n = find(root, path);
    if (n == nullptr || n->is_null()) return std::nullopt;
    return number(*n, path);
}

std::optional<std::string> nullable_string(const json& root, const std::string& path) {
    const json* n = find(root, path);
    if (n == nullptr || n->is_null()) return std::nullopt;
    if (!n->is_string()) fail(ErrorCategory::config, path + ": expected a string");
    return n->get<std::string>();
}

// Rethrows invariant violations of the model classes as config errors under `section`.
template <class F>
auto build(const std::string& section, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        if (std::string_view(e.what()).starts_with(section)) throw;
        fail(ErrorCategory::config, section + ": " + e.what());
    }
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
json optional_json(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

} // namespace

RunConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(ErrorCategory::config, std::string("invalid JSON: ") + e.what());
    }
    if (!root.is_object()) fail(ErrorCategory::config, "top level must be an object");

    RunConfig c;
    // Read in document order so the first missing key is the one reported.
    const double kappa = required(root, "model.rate.kappa");
    const double theta = required(root, "model.rate.theta");
    const double delta = required(root, "model.rate.delta");
    c.rates = build("model.rate", [&] { return RateParams(kappa, theta, delta); });
    const double a1 = required(root, "model.equity.a1");
    const double a2 = required(root, "model.equity.a2");
    const double b1 = required(root, "model.equity.b1");
    const double b2 = required(root, "model.equity.b2");
    const double cc = required(root, "model.equity.c");
    const double beta = required(root, "model.equity.beta");
    c.equity = build("model.equity", [&] { return EquityParams(a1, a2, b1, b2, cc, beta); });
    const double s0 = required(root, "model.market.S0");
    const double r0 = required(root, "model.market.r0");
    const double rho = required(root, "model.market.rho");
    c.market = build("model.market", [&] { return MarketState(s0, r0, rho); });
    const double face = required(root, "bond.face_value");
    auto dates = number_list(root, "bond.coupon_dates", true);
    auto amounts = number_list(root, "bond.coupon_amounts", true);
    const double recovery = required(root, "bond.recovery");
    c.bond = build("bond", [&] { return BondSpec(face, dates, amounts, recovery); });
    c.equity = build("model.equity", [&] {
        c.equity.check_horizon(c.bond.maturity());
        return c.equity;
    });

    c.s_max = nullable(root, "truncation.s_max");
    c.y_half = nullable(root, "truncation.y_half");

    optional_value(root, "numerics.mesh", c.mesh);
    if (c.mesh < 1) fail(ErrorCategory::config, "numerics.mesh: must be >= 1");
    optional_value(root, "numerics.steps_per_year", c.steps_per_year);
    if (!(c.steps_per_year >= 1.0))
        fail(ErrorCategory::config, "numerics.steps_per_year: must be >= 1");
    if (const json* n = find(root, "numerics.solver"); n != nullptr && !n->is_null()) {
        if (!n->is_string()) fail(ErrorCategory::config, "numerics.solver: expected a string");
        c.solver = build("numerics.solver", [&] { return solver_kind_from_string(n->get<std::string>()); });
    }
    optional_value(root, "numerics.workers", c.workers);
    if (const json* n = find(root, "numerics.sweep_meshes"); n != nullptr && !n->is_null()) {
        c.sweep_meshes.clear();
        for (double m : number_list(root, "numerics.sweep_meshes", true)) {
            if (m < 1 || m != static_cast<int>(m))
                fail(ErrorCategory::config, "numerics.sweep_meshes: entries must be positive integers");
            c.sweep_meshes.push_back(static_cast<int>(m));
        }
    }
    if (const json* n = find(root, "numerics.sweep_steps"); n != nullptr && !n->is_null()) {
        c.sweep_steps = number_list(root, "numerics.sweep_steps", true);
        for (double s : c.sweep_steps)
            if (!(s >= 1.0)) fail(ErrorCategory::config, "numerics.sweep_steps: entries must be >= 1");
    }

    optional_value(root, "mc.n_paths", c.mc_paths);
    if (c.mc_paths < 2) fail(ErrorCategory::config, "mc.n_paths: must be >= 2");
    optional_value(root, "mc.dt", c.mc_dt);
    if (!(c.mc_dt > 0.0)) fail(ErrorCategory::config, "mc.dt: must be positive");
    optional_value(root, "mc.seed", c.mc_seed);
    optional_value(root, "mc.antithetic", c.mc_antithetic);

    if (const json* n = find(root, "zcb.maturities"); n != nullptr && !n->is_null()) {
        c.zcb_maturities = number_list(root, "zcb.maturities", true);
        for (double t : c.zcb_maturities)
            if (!(t > 0.0)) fail(ErrorCategory::config, "zcb.maturities: entries must be positive");
    }

    c.result_path = nullable_string(root, "output.result");
    c.surface_path = nullable_string(root, "output.surface");
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCategory::io, "cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string dump_config(const RunConfig& c) {
    json j;
    j["model"]["rate"] = {{"kappa", c.rates.kappa()}, {"theta", c.rates.theta()},
                          {"delta", c.rates.delta()}};
    j["model"]["equity"] = {{"a1", c.equity.a1()}, {"a2", c.equity.a2()}, {"b1", c.equity.b1()},
                            {"b2", c.equity.b2()}, {"c", c.equity.c()},   {"beta", c.equity.beta()}};
    j["model"]["market"] = {{"S0", c.market.s0()}, {"r0", c.market.r0()}, {"rho", c.market.rho()}};
    j["bond"] = {{"face_value", c.bond.face_value()},
                 {"coupon_dates", c.bond.coupon_dates()},
                 {"coupon_amounts", c.bond.coupon_amounts()},
                 {"recovery", c.bond.recovery()}};
    j["truncation"] = {{"s_max", optional_json(c.s_max)}, {"y_half", optional_json(c.y_half)}};
    j["numerics"] = {{"mesh", c.mesh},
                     {"steps_per_year", c.steps_per_year},
                     {"solver", std::string(to_string(c.solver))},
                     {"workers", c.workers},
                     {"sweep_meshes", c.sweep_meshes},
                     {"sweep_steps", c.sweep_steps}};
    j["mc"] = {{"n_paths", c.mc_paths},
               {"dt", c.mc_dt},
               {"seed", c.mc_seed},
               {"antithetic", c.mc_antithetic}};
    j["zcb"]["maturities"] = c.zcb_maturities;
    j["output"] = {{"result", optional_json(c.result_path)},
                   {"surface", optional_json(c.surface_path)}};
    return j.dump(2) + "\n";
}

TruncationConfig truncation_for(const RunConfig& c, double horizon) {
    TruncationConfig t{};
    if (!c.s_max || !c.y_half) t = default_truncation(c.market, c.rates, horizon);
    if (c.s_max) t.s_max = *c.s_max;
    if (c.y_half) t.y_half = *c.y_half;
    return t;
}

PdeConfig pde_config(const RunConfig& c, double horizon) {
    std::optional<TruncationConfig> t;
    if (c.s_max || c.y_half) t = truncation_for(c, horizon);
    return PdeConfig{c.equity,         c.rates,  c.market,  t,      c.mesh,
                     c.steps_per_year, c.solver, c.workers, nullptr};
}

McConfig mc_config(const RunConfig& c) {
    McConfig m;
    m.n_paths = c.mc_paths;
    m.dt = c.mc_dt;
    m.seed = c.mc_seed;
    m.antithetic = c.mc_antithetic;
    m.workers = c.workers;
    return m;
}

McModel mc_model(const RunConfig& c, double horizon) {
    return McModel{c.equity, c.rates, c.market, truncation_for(c, horizon).s_max};
}

} // namespace jdcev
