#pragma once

// Run configuration stored as JSON. Keys:
//
//   model.rate.{kappa, theta, delta}
//   model.equity.{a1, a2, b1, b2, c, beta}
//   model.market.{S0, r0, rho}
//   bond.{face_value, coupon_dates, coupon_amounts, recovery}
//   truncation.{s_max, y_half}             null = default for the bond maturity
//   numerics.{mesh, steps_per_year, solver, workers, sweep_meshes, sweep_steps}
//   mc.{n_paths, dt, seed, antithetic}
//   zcb.maturities
//   output.{result, surface}               null = no file
//
// Missing optional keys take the defaults below; missing model and bond keys are
// errors naming the key path.

#include "jdcev/bond_pricer.hpp"
#include "jdcev/monte_carlo.hpp"

#include <optional>
#include <string>
#include <vector>

namespace jdcev {

struct RunConfig {
    RateParams rates{0.0, 0.0, 0.0};
    EquityParams equity{0.0, 0.0, 0.0, 0.0, 0.0, -1.0};
    MarketState market{1.0, 0.0, 0.0};
    BondSpec bond{1.0, {1.0}, {0.0}, 0.0};

    std::optional<double> s_max;
    std::optional<double> y_half;

    int mesh = 32;
    double steps_per_year = 360.0;
    SolverKind solver = SolverKind::direct;
    unsigned workers = 0;
    std::vector<int> sweep_meshes{4, 8, 16, 32};
    std::vector<double> sweep_steps{90.0, 180.0, 360.0};

    std::size_t mc_paths = 100000;
    double mc_dt = 1.0 / 360.0;
    std::uint64_t mc_seed = 20240601;
    bool mc_antithetic = false;

    std::vector<double> zcb_maturities{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

    std::optional<std::string> result_path;
    std::optional<std::string> surface_path;

    bool operator==(const RunConfig&) const = default;
};

/// Throws config error with the offending key path.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Pretty-printed JSON; parse_config(dump_config(c)) == c.
std::string dump_config(const RunConfig& c);

/// Truncation for a run whose longest maturity is `horizon`.
TruncationConfig truncation_for(const RunConfig& c, double horizon);

/// Leaves the truncation empty when neither bound is set, so solvers size it per horizon.
PdeConfig pde_config(const RunConfig& c, double horizon);
McConfig mc_config(const RunConfig& c);
McModel mc_model(const RunConfig& c, double horizon);

} // namespace jdcev
