// jdcev: command-line front end.
//
//   jdcev price   --config ubs.json [--sweep] [--mesh N] [--steps-per-year N] [--out result.json]
//   jdcev zcb     --config ubs.json
//   jdcev mc      --config ubs.json
//   jdcev compare --config ubs.json
//   jdcev surface --config ubs.json --out surface.csv
//   jdcev --config ubs.json --dump-config
//
// Failures print one line "error <category> <message>" to stderr and exit non-zero.

#include "jdcev/bond_pricer.hpp"
#include "jdcev/config.hpp"
#include "jdcev/error.hpp"
#include "jdcev/monte_carlo.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

using namespace jdcev;
using nlohmann::json;

namespace {

struct Options {
    std::string config_path;
    bool sweep = false;
    int mesh = 0;
    double steps_per_year = 0.0;
    std::string out;
    bool dump = false;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) fail(ErrorCategory::io, "cannot write " + path);
    f << text;
    if (!f) fail(ErrorCategory::io, "write failed for " + path);
}

std::string date_key(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", t);
    return buf;
}

json pricing_json(const PricingResult& r) {
    json j;
    j["bond_value"] = r.bond_value;
    j["integral_term"] = r.integral_term;
    j["mesh"] = r.mesh;
    j["steps_per_year"] = r.steps_per_year;
    j["truncation"] = {{"s_max", r.truncation.s_max}, {"y_half", r.truncation.y_half}};
    for (const auto& [t, v] : r.u1_values) j["u1"][date_key(t)] = v;
    for (const auto& [t, v] : r.u2_values) j["u2"][date_key(t)] = v;
    for (const auto& s : r.solves) {
        const auto& d = s.diagnostics;
        j["solves"].push_back({{"kind", std::string(to_string(s.kind))},
                               {"maturity", s.maturity},
                               {"value", s.value},
                               {"steps", d.steps},
                               {"clamped", d.trace.clamped},
                               {"traced", d.trace.traced},
                               {"edge_clamped", d.trace.edge_clamped},
                               {"edge_traced", d.trace.edge_traced},
                               {"max_residual", d.max_residual},
                               {"min_value", d.min_value}});
    }
    return j;
}

json estimate_json(const McEstimate& e) {
    return {{"mean", e.mean}, {"std_error", e.std_error}, {"ci95", {e.ci_low, e.ci_high}}};
}

std::optional<std::string> output_path(const Options& o, const std::optional<std::string>& fallback) {
    if (!o.out.empty()) return o.out;
    return fallback;
}

int cmd_price(const RunConfig& c, const Options& o) {
    const double horizon = c.bond.maturity();
    json out;
    out["command"] = "price";
    if (!o.sweep) {
        const auto t0 = std::chrono::steady_clock::now();
        const PricingResult r = price(c.bond, pde_config(c, horizon));
        std::printf("mesh %d, %.9g steps/year: bond value %.9g  (%.1f s)\n", c.mesh,
                    c.steps_per_year, r.bond_value, seconds_since(t0));
        out["result"] = pricing_json(r);
    } else {
        std::printf("%-16s", "steps/year");
        for (int m : c.sweep_meshes) std::printf("%16s", ("Mesh " + std::to_string(m)).c_str());
        std::printf("\n");
        for (double steps : c.sweep_steps) {
            std::printf("%-16.9g", steps);
            for (int m : c.sweep_meshes) {
                PdeConfig p = pde_config(c, horizon);
                p.mesh = m;
                p.steps_per_year = steps;
                const PricingResult r = price(c.bond, p);
                std::printf("%16.9g", r.bond_value);
                std::fflush(stdout);
                out["sweep"].push_back(pricing_json(r));
            }
            std::printf("\n");
        }
    }
    if (auto path = output_path(o, c.result_path)) write_file(*path, out.dump(2) + "\n");
    return 0;
}

int cmd_zcb(const RunConfig& c, const Options& o) {
    double horizon = 0.0;
    for (double t : c.zcb_maturities) horizon = std::max(horizon, t);
    const auto points = zcb_curve(c.zcb_maturities, pde_config(c, horizon));
    std::printf("%-10s%16s%16s%16s\n", "maturity", "pde", "analytic", "difference");
    json out;
    out["command"] = "zcb";
    for (const auto& p : points) {
        std::printf("%-10.9g%16.9g%16.9g%16.3e\n", p.maturity, p.pde, p.analytic, p.pde - p.analytic);
        out["curve"].push_back({{"maturity", p.maturity}, {"pde", p.pde}, {"analytic", p.analytic}});
    }
    if (auto path = output_path(o, c.result_path)) write_file(*path, out.dump(2) + "\n");
    return 0;
}

int cmd_mc(const RunConfig& c, const Options& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const McEstimate e = estimate_bond(c.bond, mc_config(c), mc_model(c, c.bond.maturity()));
    std::printf("paths %zu, dt %.9g: bond value %.9g  se %.9g  95%% CI [%.9g, %.9g]  (%.1f s)\n",
                c.mc_paths, c.mc_dt, e.mean, e.std_error, e.ci_low, e.ci_high, seconds_since(t0));
    json out;
    out["command"] = "mc";
    out["estimate"] = estimate_json(e);
    if (auto path = output_path(o, c.result_path)) write_file(*path, out.dump(2) + "\n");
    return 0;
}

int cmd_compare(const RunConfig& c, const Options& o) {
    const double horizon = c.bond.maturity();
    const PricingResult r = price(c.bond, pde_config(c, horizon));
    const McEstimate e = estimate_bond(c.bond, mc_config(c), mc_model(c, horizon));
    const bool inside = e.contains(r.bond_value);
    std::printf("%-16s%16s%34s%10s\n", "", "pde", "mc 95% CI", "inside");
    std::printf("%-16s%16.9g      [%12.9g, %12.9g]%10s\n", "bond", r.bond_value, e.ci_low,
                e.ci_high, inside ? "yes" : "no");
    json out;
    out["command"] = "compare";
    out["pde"] = pricing_json(r);
    out["mc"] = estimate_json(e);
    out["inside"] = inside;
    if (auto path = output_path(o, c.result_path)) write_file(*path, out.dump(2) + "\n");
    return 0;
}

int cmd_surface(const RunConfig& c, const Options& o) {
    const auto path = output_path(o, c.surface_path);
    if (!path) fail(ErrorCategory::config, "output.surface: missing (or pass --out)");
    const PricingResult r = price(c.bond, pde_config(c, c.bond.maturity()));
    const auto surface = bond_surface(c.bond, r);
    std::ofstream f(*path);
    if (!f) fail(ErrorCategory::io, "cannot write " + *path);
    f << "S,r,value\n";
    char line[96];
    for (const auto& p : surface) {
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", p.s, p.r, p.value);
        f << line;
    }
    if (!f) fail(ErrorCategory::io, "write failed for " + *path);
    std::printf("wrote %zu nodes to %s; bond value at (S0, r0) %.9g\n", surface.size(),
                path->c_str(), r.bond_value);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Defaultable coupon bond pricing under JDCEV with Vasicek rates"};
    Options o;
    app.add_option("--config", o.config_path, "JSON run configuration");
    app.add_flag("--sweep", o.sweep, "price over numerics.sweep_meshes x numerics.sweep_steps");
    app.add_option("--mesh", o.mesh, "elements per axis")->check(CLI::PositiveNumber);
    app.add_option("--steps-per-year", o.steps_per_year, "time steps per year")
        ->check(CLI::PositiveNumber);
    app.add_option("--out", o.out, "output file (result JSON, or CSV for surface)");
    app.add_flag("--dump-config", o.dump, "print the effective configuration and exit");
    app.fallthrough();
    app.require_subcommand(0, 1);
    auto* price_cmd = app.add_subcommand("price", "bond value, optionally as a mesh/step table");
    auto* zcb_cmd = app.add_subcommand("zcb", "zero-coupon curve: PDE without hazard vs analytic");
    auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo bond estimate");
    auto* compare_cmd = app.add_subcommand("compare", "PDE value against the Monte Carlo interval");
    auto* surface_cmd = app.add_subcommand("surface", "bond value at every mesh node as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error usage " << e.what() << "\n";
        return 2;
    }

    try {
        require(!o.config_path.empty(), ErrorCategory::config, "--config is required");
        RunConfig c = load_config(o.config_path);
        if (o.mesh > 0) c.mesh = o.mesh;
        if (o.steps_per_year > 0.0) c.steps_per_year = o.steps_per_year;

        if (o.dump) {
            std::cout << dump_config(c);
            return 0;
        }
        if (price_cmd->parsed()) return cmd_price(c, o);
        if (zcb_cmd->parsed()) return cmd_zcb(c, o);
        if (mc_cmd->parsed()) return cmd_mc(c, o);
        if (compare_cmd->parsed()) return cmd_compare(c, o);
        if (surface_cmd->parsed()) return cmd_surface(c, o);
        std::cerr << "error usage no subcommand given (price|zcb|mc|compare|surface)\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error " << category_name(e.category()) << " " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error internal " << e.what() << "\n";
        return 1;
    }
}
