#pragma once

// Bond value from the PDE building blocks
//
//   V = FV [ sum_i cp_i u1(t_i) + u1(T) + eta (1 - u1(T) - int_0^T u2(tau) dtau) ],
//
// u1(T_i) = E[exp(-int_0^{T_i} (r + lambda))], u2(tau) = E[exp(-int_0^tau (r + lambda)) r_tau],
// with the integral taken by the composite trapezoid rule on k_j = j T / M.

#include "jdcev/localization.hpp"
#include "jdcev/model.hpp"
#include "jdcev/semilag.hpp"

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace jdcev {

struct PdeConfig {
    EquityParams equity;
    RateParams rates;
    MarketState market;
    std::optional<TruncationConfig> truncation;  // default_truncation over the horizon if empty
    int mesh = 32;                                // elements per axis
    double steps_per_year = 360.0;
    SolverKind solver = SolverKind::direct;
    unsigned workers = 0;                         // concurrent solves, 0 = hardware
    const simd::KernelTable* kernels = nullptr;
};

/// Truncation used for a run whose longest maturity is `horizon`.
TruncationConfig resolve_truncation(const PdeConfig& cfg, double horizon);

/// Solves the IBVP of `kind` with maturity T1 on the truncation for `horizon`.
Solution solve_problem(ProblemKind kind, double maturity, double horizon, const PdeConfig& cfg);

/// u1(0, S0, r0; T).
double price_u1(double maturity, const PdeConfig& cfg);
/// u2(0, S0, r0; tau1); tau1 = 0 returns r0 without a solve.
double price_u2(double tau1, const PdeConfig& cfg);

/// (h/2) [v_0 + 2 sum v_j + v_M]. Throws length_mismatch for fewer than 2 values.
double trapezoid_integral(std::span<const double> values, double h);

/// Throws missing_date if u1 lacks a coupon date. Dates match to 1e-12.
double bond_value(const BondSpec& spec, const std::map<double, double>& u1, double integral);

/// Trapezoid nodes k_j = j T / M for j = 0..M.
std::vector<double> trapezoid_dates(const BondSpec& spec);

struct SolveRecord {
    ProblemKind kind;
    double maturity;
    double value;
    SolveDiagnostics diagnostics;
};

struct PricingResult {
    double bond_value = 0.0;
    std::map<double, double> u1_values;  // coupon date -> u1
    std::map<double, double> u2_values;  // trapezoid date -> u2, including 0 -> r0
    double integral_term = 0.0;
    int mesh = 0;
    double steps_per_year = 0.0;
    TruncationConfig truncation{};
    std::vector<SolveRecord> solves;     // U1 by date, then U2 by date
    std::vector<Solution> u1_solutions;  // aligned with u1_values
    std::vector<Solution> u2_solutions;  // aligned with u2_values minus the date 0
};

PricingResult price(const BondSpec& spec, const PdeConfig& cfg);

/// Bond value at every mesh node from the solution fields of `price`.
struct SurfacePoint {
    double s, r, value;
};
std::vector<SurfacePoint> bond_surface(const BondSpec& spec, const PricingResult& result);

struct ZcbPoint {
    double maturity;
    double pde;       // lambda = 0 U1 value at (S0, r0)
    double analytic;  // vasicek_zcb(r0, maturity)
};

/// Without an explicit truncation each maturity gets the default for its own horizon.
std::vector<ZcbPoint> zcb_curve(std::span<const double> maturities, const PdeConfig& cfg);

} // namespace jdcev
