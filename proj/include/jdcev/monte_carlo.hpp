#pragma once

// Monte Carlo estimates of u1, u2 and the bond value. Paths of (X = log S, r):
// exact Ornstein-Uhlenbeck transition for r, Euler-Maruyama for X, trapezoid rule
// for the running integral of r + lambda. A path whose price falls below 1/s_max is
// absorbed and its discount factor is 0 from then on.
//
// Path p draws from its own mt19937_64 seeded by splitmix64(seed, p), so estimates
// are bit-identical for any worker count.

#include "jdcev/model.hpp"
#include "jdcev/simd/kernels.hpp"

#include <cstdint>
#include <vector>

namespace jdcev {

struct McConfig {
    std::size_t n_paths = 100000;
    double dt = 1.0 / 360.0;
    std::uint64_t seed = 20240601;
    bool antithetic = false;  // path pairs (2k, 2k+1) use opposite normals
    unsigned workers = 0;     // 0 = hardware
    const simd::KernelTable* kernels = nullptr;
};

struct McModel {
    EquityParams equity;
    RateParams rates;
    MarketState market;
    double s_max;  // absorption floor at 1 / s_max
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0;   // mean - 1.96 se
    double ci_high = 0.0;  // mean + 1.96 se

    bool contains(double x) const noexcept { return ci_low <= x && x <= ci_high; }
};

/// Per-path discount factors D(t) = exp(-int_0^t (r + lambda)) and rates r(t) at `dates`.
/// Row-major: discount[p * dates.size() + i].
struct PathSample {
    std::vector<double> dates;
    std::size_t n_paths = 0;
    std::vector<double> discount;
    std::vector<double> rate;
};

/// 64-bit seed of path p's generator.
std::uint64_t path_seed(std::uint64_t seed, std::uint64_t path) noexcept;

/// Simulation grid: multiples of dt up to the horizon merged with the dates.
std::vector<double> simulation_grid(double horizon, const std::vector<double>& dates, double dt);

PathSample simulate_discounts(double horizon, const std::vector<double>& dates,
                              const McConfig& cfg, const McModel& model);

/// Mean and standard error of per-path samples (pair averages under antithetic).
McEstimate summarize(const std::vector<double>& samples, bool antithetic);

McEstimate estimate_u1(double maturity, const McConfig& cfg, const McModel& model);
/// tau1 = 0 gives (r0, 0).
McEstimate estimate_u2(double tau1, const McConfig& cfg, const McModel& model);
McEstimate estimate_bond(const BondSpec& spec, const McConfig& cfg, const McModel& model);

} // namespace jdcev
