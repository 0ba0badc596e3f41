#include "jdcev/monte_carlo.hpp"

#include "jdcev/bond_pricer.hpp"
#include "jdcev/error.hpp"
#include "jdcev/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace jdcev {

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t path) noexcept {
    std::uint64_t z = seed + (path + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<double> simulation_grid(double horizon, const std::vector<double>& dates, double dt) {
    require(dt > 0.0, ErrorCategory::invalid_param, "mc.dt > 0 violated");
    require(horizon > 0.0, ErrorCategory::domain, "simulation horizon must be positive");
    std::vector<double> grid;
    const auto n = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
    for (std::size_t i = 0; i <= n; ++i) grid.push_back(std::min(horizon, i * dt));
    for (double d : dates) {
        require(d >= 0.0 && d <= horizon * (1.0 + 1e-12), ErrorCategory::domain,
                "simulation dates must lie in [0, horizon]");
        grid.push_back(d);
    }
    std::sort(grid.begin(), grid.end());
    std::vector<double> out;
    for (double t : grid) {
        if (out.empty() || t - out.back() > 1e-12) out.push_back(t);
    }
    return out;
}

namespace {

constexpr std::size_t block_paths = 256;

// Grid indices of the requested dates.
std::vector<std::size_t> date_indices(const std::vector<double>& grid,
                                      const std::vector<double>& dates) {
    std::vector<std::size_t> idx;
    for (double d : dates) {
        auto it = std::lower_bound(grid.begin(), grid.end(), d - 1e-12);
        idx.push_back(static_cast<std::size_t>(it - grid.begin()));
    }
    return idx;
}

} // namespace

PathSample simulate_discounts(double horizon, const std::vector<double>& dates,
                              const McConfig& cfg, const McModel& model) {
    require(cfg.n_paths >= 2, ErrorCategory::invalid_param, "mc.n_paths >= 2 violated");
    require(!cfg.antithetic || cfg.n_paths % 2 == 0, ErrorCategory::invalid_param,
            "antithetic sampling needs an even path count");
    require(model.s_max > 1.0, ErrorCategory::invalid_param, "s_max > 1 violated");
    model.equity.check_horizon(horizon);

    const std::vector<double> grid = simulation_grid(horizon, dates, cfg.dt);
    const std::vector<std::size_t> at = date_indices(grid, dates);
    const simd::KernelTable& k = cfg.kernels != nullptr ? *cfg.kernels : simd::active_kernels();

    const auto& eq = model.equity;
    const auto& rt = model.rates;
    std::vector<simd::McStepConstants> steps(grid.size() - 1);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double t = grid[i];
        const double h = grid[i + 1] - t;
        const double kap = rt.kappa();
        const double var_factor = kap > 0.0 ? -std::expm1(-2.0 * kap * h) / (2.0 * kap) : h;
        steps[i] = {h,
                    std::sqrt(h),
                    eq.a(t),
                    eq.b(t),
                    eq.a(t + h),
                    eq.b(t + h),
                    eq.c(),
                    eq.beta(),
                    std::exp(-kap * h),
                    rt.theta(),
                    rt.delta() * std::sqrt(var_factor),
                    model.market.rho(),
                    std::sqrt(1.0 - model.market.rho() * model.market.rho()),
                    std::log(1.0 / model.s_max)};
    }

    PathSample out;
    out.dates = dates;
    out.n_paths = cfg.n_paths;
    out.discount.resize(cfg.n_paths * dates.size());
    out.rate.resize(cfg.n_paths * dates.size());

    const std::size_t n_blocks = (cfg.n_paths + block_paths - 1) / block_paths;
    const double x0 = std::log(model.market.s0());
    const double r0 = model.market.r0();

    parallel_for(n_blocks, cfg.workers, [&](std::size_t b_begin, std::size_t b_end) {
        std::vector<double> log_s(block_paths), rate(block_paths), integral(block_paths),
            alive(block_paths), z1(block_paths), z2(block_paths);
        std::vector<std::mt19937_64> engines;
        std::vector<std::normal_distribution<double>> normals;
        for (std::size_t b = b_begin; b < b_end; ++b) {
            const std::size_t first = b * block_paths;
            const std::size_t n = std::min(block_paths, cfg.n_paths - first);
            const std::size_t streams = cfg.antithetic ? n / 2 : n;
            engines.clear();
            normals.assign(streams, std::normal_distribution<double>(0.0, 1.0));
            for (std::size_t s = 0; s < streams; ++s) {
                const std::size_t id = cfg.antithetic ? first / 2 + s : first + s;
                engines.emplace_back(path_seed(cfg.seed, id));
            }
            std::fill_n(log_s.begin(), n, x0);
            std::fill_n(rate.begin(), n, r0);
            std::fill_n(integral.begin(), n, 0.0);
            std::fill_n(alive.begin(), n, 1.0);
            const simd::McState state{log_s.data(), rate.data(), integral.data(), alive.data()};

            auto record = [&](std::size_t grid_index) {
                for (std::size_t i = 0; i < at.size(); ++i) {
                    if (at[i] != grid_index) continue;
                    for (std::size_t p = 0; p < n; ++p) {
                        const std::size_t o = (first + p) * at.size() + i;
                        out.discount[o] = alive[p] * std::exp(-integral[p]);
                        out.rate[o] = rate[p];
                    }
                }
            };
            record(0);
            for (std::size_t g = 0; g < steps.size(); ++g) {
                if (cfg.antithetic) {
                    for (std::size_t s = 0; s < streams; ++s) {
                        const double a = normals[s](engines[s]);
                        const double c = normals[s](engines[s]);
                        z1[2 * s] = a;
                        z2[2 * s] = c;
                        z1[2 * s + 1] = -a;
                        z2[2 * s + 1] = -c;
                    }
                } else {
                    for (std::size_t s = 0; s < streams; ++s) {
                        z1[s] = normals[s](engines[s]);
                        z2[s] = normals[s](engines[s]);
                    }
                }
                k.mc_step(steps[g], n, state, z1.data(), z2.data());
                record(g + 1);
            }
        }
    });
    return out;
}

McEstimate summarize(const std::vector<double>& samples, bool antithetic) {
    std::vector<double> x;
    if (antithetic) {
        require(samples.size() % 2 == 0, ErrorCategory::length_mismatch,
                "antithetic samples come in pairs");
        for (std::size_t i = 0; i < samples.size(); i += 2)
            x.push_back(0.5 * (samples[i] + samples[i + 1]));
    } else {
        x = samples;
    }
    require(x.size() >= 2, ErrorCategory::length_mismatch, "need at least two samples");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
    const double se = sd / std::sqrt(static_cast<double>(x.size()));
    return {mean, se, mean - 1.96 * se, mean + 1.96 * se};
}

McEstimate estimate_u1(double maturity, const McConfig& cfg, const McModel& model) {
    require(maturity > 0.0, ErrorCategory::domain, "maturity must be positive");
    const PathSample s = simulate_discounts(maturity, {maturity}, cfg, model);
    return summarize(s.discount, cfg.antithetic);
}

McEstimate estimate_u2(double tau1, const McConfig& cfg, const McModel& model) {
    require(tau1 >= 0.0, ErrorCategory::domain, "maturity must be non-negative");
    if (tau1 == 0.0) {
        const double r0 = model.market.r0();
        return {r0, 0.0, r0, r0};
    }
    const PathSample s = simulate_discounts(tau1, {tau1}, cfg, model);
    std::vector<double> v(s.n_paths);
    for (std::size_t p = 0; p < s.n_paths; ++p) v[p] = s.discount[p] * s.rate[p];
    return summarize(v, cfg.antithetic);
}

McEstimate estimate_bond(const BondSpec& spec, const McConfig& cfg, const McModel& model) {
    const std::vector<double> k = trapezoid_dates(spec);
    std::vector<double> dates = spec.coupon_dates();
    dates.insert(dates.end(), k.begin() + 1, k.end());
    const std::size_t nc = spec.coupon_count();
    const std::size_t nd = dates.size();
    const PathSample s = simulate_discounts(spec.maturity(), dates, cfg, model);

    const double h = spec.maturity() / static_cast<double>(k.size() - 1);
    std::vector<double> payoff(s.n_paths);
    std::vector<double> u2(k.size());
    for (std::size_t p = 0; p < s.n_paths; ++p) {
        const double* disc = s.discount.data() + p * nd;
        const double* rate = s.rate.data() + p * nd;
        double coupons = 0.0;
        for (std::size_t i = 0; i < nc; ++i) coupons += spec.coupon_amounts()[i] * disc[i];
        const double d_t = disc[nc - 1];
        u2[0] = model.market.r0();
        for (std::size_t j = 1; j < k.size(); ++j) u2[j] = disc[nc + j - 1] * rate[nc + j - 1];
        const double integral = trapezoid_integral(u2, h);
        payoff[p] = spec.face_value()
                    * (coupons + d_t + spec.recovery() * (1.0 - d_t - integral));
    }
    return summarize(payoff, cfg.antithetic);
}

} // namespace jdcev
