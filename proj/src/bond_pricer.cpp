#include "jdcev/bond_pricer.hpp"

#include "jdcev/error.hpp"
#include "jdcev/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace jdcev {

TruncationConfig resolve_truncation(const PdeConfig& cfg, double horizon) {
    return cfg.truncation ? *cfg.truncation : default_truncation(cfg.market, cfg.rates, horizon);
}

Solution solve_problem(ProblemKind kind, double maturity, double horizon, const PdeConfig& cfg) {
    require(maturity > 0.0 && maturity <= horizon * (1.0 + 1e-12), ErrorCategory::domain,
            "maturity must lie in (0, horizon]");
    auto d = std::make_shared<const TransformedDomain>(cfg.equity, cfg.rates, cfg.market,
                                                       resolve_truncation(cfg, horizon), maturity);
    auto mesh = std::make_shared<const FemMesh>(build_mesh(cfg.mesh, cfg.mesh, *d));
    SolverOptions options;
    options.solver = cfg.solver;
    options.workers = 1;
    options.kernels = cfg.kernels;
    return solve_ibvp(kind, make_time_grid(maturity, cfg.steps_per_year), std::move(mesh),
                      std::move(d), options);
}

double price_u1(double maturity, const PdeConfig& cfg) {
    const Solution s = solve_problem(ProblemKind::U1, maturity, maturity, cfg);
    return s.evaluate(cfg.market.s0(), cfg.market.r0());
}

double price_u2(double tau1, const PdeConfig& cfg) {
    require(tau1 >= 0.0, ErrorCategory::domain, "price_u2: maturity must be non-negative");
    if (tau1 == 0.0) return cfg.market.r0();
    const Solution s = solve_problem(ProblemKind::U2, tau1, tau1, cfg);
    return s.evaluate(cfg.market.s0(), cfg.market.r0());
}

double trapezoid_integral(std::span<const double> values, double h) {
    require(values.size() >= 2, ErrorCategory::length_mismatch,
            "trapezoid rule needs M+1 >= 2 values, got " + std::to_string(values.size()));
    require(h > 0.0, ErrorCategory::domain, "trapezoid spacing must be positive");
    double inner = 0.0;
    for (std::size_t j = 1; j + 1 < values.size(); ++j) inner += values[j];
    return 0.5 * h * (values.front() + 2.0 * inner + values.back());
}

namespace {

double lookup(const std::map<double, double>& m, double date) {
    auto it = m.lower_bound(date - 1e-12);
    if (it == m.end() || std::abs(it->first - date) > 1e-12) {
        fail(ErrorCategory::missing_date, "no u1 value for date " + std::to_string(date));
    }
    return it->second;
}

} // namespace

double bond_value(const BondSpec& spec, const std::map<double, double>& u1, double integral) {
    require(std::isfinite(integral), ErrorCategory::domain, "integral term must be finite");
    double coupons = 0.0;
    for (std::size_t i = 0; i < spec.coupon_count(); ++i) {
        coupons += spec.coupon_amounts()[i] * lookup(u1, spec.coupon_dates()[i]);
    }
    const double u1_t = lookup(u1, spec.maturity());
    return spec.face_value() * (coupons + u1_t + spec.recovery() * (1.0 - u1_t - integral));
}

std::vector<double> trapezoid_dates(const BondSpec& spec) {
    const std::size_t m = spec.coupon_count();
    std::vector<double> k(m + 1);
    for (std::size_t j = 0; j <= m; ++j) k[j] = spec.maturity() * static_cast<double>(j) / m;
    k[m] = spec.maturity();
    return k;
}

PricingResult price(const BondSpec& spec, const PdeConfig& cfg) {
    const double horizon = spec.maturity();
    const auto& dates = spec.coupon_dates();
    const std::vector<double> k = trapezoid_dates(spec);

    struct Task {
        ProblemKind kind;
        double maturity;
    };
    std::vector<Task> tasks;
    for (double t : dates) tasks.push_back({ProblemKind::U1, t});
    for (std::size_t j = 1; j < k.size(); ++j) tasks.push_back({ProblemKind::U2, k[j]});

    std::vector<std::optional<Solution>> solved(tasks.size());
    parallel_for(tasks.size(), cfg.workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            solved[i].emplace(solve_problem(tasks[i].kind, tasks[i].maturity, horizon, cfg));
        }
    });

    PricingResult result;
    result.mesh = cfg.mesh;
    result.steps_per_year = cfg.steps_per_year;
    result.truncation = resolve_truncation(cfg, horizon);
    const double s0 = cfg.market.s0();
    const double r0 = cfg.market.r0();
    result.u2_values[0.0] = r0;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        Solution& s = *solved[i];
        const double v = s.evaluate(s0, r0);
        result.solves.push_back({tasks[i].kind, tasks[i].maturity, v, s.diagnostics()});
        if (tasks[i].kind == ProblemKind::U1) {
            result.u1_values[tasks[i].maturity] = v;
            result.u1_solutions.push_back(std::move(s));
        } else {
            result.u2_values[tasks[i].maturity] = v;
            result.u2_solutions.push_back(std::move(s));
        }
    }

    std::vector<double> u2(k.size());
    u2[0] = r0;
    for (std::size_t j = 1; j < k.size(); ++j) u2[j] = result.u2_values.at(k[j]);
    result.integral_term = trapezoid_integral(u2, horizon / static_cast<double>(k.size() - 1));
    result.bond_value = bond_value(spec, result.u1_values, result.integral_term);
    return result;
}

std::vector<SurfacePoint> bond_surface(const BondSpec& spec, const PricingResult& result) {
    require(!result.u1_solutions.empty() && !result.u2_solutions.empty(), ErrorCategory::domain,
            "surface needs the solution fields of a pricing run");
    const FemMesh& mesh = result.u1_solutions.front().mesh();
    const TransformedDomain& d = result.u1_solutions.front().domain();
    const std::size_t m = result.u2_solutions.size();
    const double h = spec.maturity() / static_cast<double>(m);

    std::vector<SurfacePoint> out(mesh.node_count());
    std::vector<double> u2(m + 1);
    for (std::size_t n = 0; n < mesh.node_count(); ++n) {
        const Vec2 sr = d.from_computational(mesh.node_x1(n), mesh.node_x2(n), 0.0);
        std::map<double, double> u1;
        auto sol = result.u1_solutions.begin();
        for (const auto& [date, value] : result.u1_values) u1[date] = (sol++)->field()[n];
        u2[0] = sr.x2;
        for (std::size_t j = 0; j < m; ++j) u2[j + 1] = result.u2_solutions[j].field()[n];
        out[n] = {sr.x1, sr.x2, bond_value(spec, u1, trapezoid_integral(u2, h))};
    }
    return out;
}

std::vector<ZcbPoint> zcb_curve(std::span<const double> maturities, const PdeConfig& cfg) {
    require(!maturities.empty(), ErrorCategory::length_mismatch, "no maturities given");
    for (double t : maturities) require(t > 0.0, ErrorCategory::domain, "maturities must be positive");
    PdeConfig rates_only = cfg;
    rates_only.equity = cfg.equity.without_hazard();

    std::vector<ZcbPoint> out(maturities.size());
    parallel_for(maturities.size(), cfg.workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double t = maturities[i];
            const Solution s = solve_problem(ProblemKind::U1, t, t, rates_only);
            out[i] = {t, s.evaluate(cfg.market.s0(), cfg.market.r0()),
                      vasicek_zcb(cfg.market.r0(), t, cfg.rates)};
        }
    });
    return out;
}

} // namespace jdcev
