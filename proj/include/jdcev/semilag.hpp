#pragma once

// Crank-Nicolson characteristics scheme for
//
//   du/dtau - Div(A grad u) + v . grad u + l u = 0,
//   u = f on x1 = 0, x2 = 0, x2 = x2_max;   du/dx1 = 0 on x1 = x1_max,
//
// with Q2 elements. Characteristic feet are traced at quadrature points with one
// backward midpoint step; feet leaving the rectangle are clamped and counted.

#include "jdcev/fem.hpp"
#include "jdcev/linear_solver.hpp"
#include "jdcev/localization.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace jdcev {

struct TimeGrid {
    double maturity;
    int steps;
    double dt;
};

/// steps = max(1, round(steps_per_year * maturity)).
TimeGrid make_time_grid(double maturity, double steps_per_year);

struct SolverOptions {
    SolverKind solver = SolverKind::direct;
    unsigned workers = 1;                        // threads inside one solve, 0 = hardware
    const simd::KernelTable* kernels = nullptr;  // nullptr = active_kernels()
};

/// Interior quadrature points and the points on the x1 = x1_max edge are counted
/// apart: edge points start on the boundary, so outward flow clamps them by design.
struct TraceStats {
    std::size_t traced = 0;
    std::size_t clamped = 0;
    std::size_t edge_traced = 0;
    std::size_t edge_clamped = 0;

    double clamped_fraction() const {
        return traced == 0 ? 0.0 : static_cast<double>(clamped) / static_cast<double>(traced);
    }
};

/// Backward midpoint step of dX/ds = v(s, X) from tau_next to tau_next - dt, written
/// to foot_x1/foot_x2. Intermediate and final points are clamped to the rectangle.
TraceStats trace_feet(const TransformedDomain& d, const simd::KernelTable& k, double tau_next,
                      double dt, std::span<const double> x1, std::span<const double> x2,
                      std::span<double> foot_x1, std::span<double> foot_x2);

/// Scalar convenience form for a single point.
Vec2 trace_foot(const TransformedDomain& d, double tau_next, double dt, Vec2 x, bool* clamped);

/// One time step of the scheme with reusable work arrays.
class SemiLagrangianStepper {
public:
    SemiLagrangianStepper(const TransformedDomain& d, const FemMesh& mesh, ProblemKind kind,
                          SolverOptions options = {});
    ~SemiLagrangianStepper();

    const FemMesh& mesh() const noexcept { return mesh_; }
    const TransformedDomain& domain() const noexcept { return domain_; }

    /// Right-hand side of the step tau_next - dt -> tau_next without boundary handling.
    std::vector<double> assemble_rhs(std::span<const double> u_prev, double tau_next, double dt);

    /// Implicit operator M/dt + K/2 + R/2 at tau_next.
    const SparseOperator& assemble_lhs(double tau_next, double dt);

    /// Symmetric elimination of the Dirichlet nodes: identity rows and columns, the known
    /// values moved to the right-hand side. Corners belong to the Dirichlet set.
    void apply_boundary(SparseOperator& lhs, std::span<double> rhs, double tau_next) const;

    /// Advances u in place; returns the linear solver's relative residual.
    double step(std::span<double> u, double tau_next, double dt, int step_index);

    const TraceStats& trace_stats() const noexcept { return stats_; }
    const std::vector<int>& dirichlet_nodes() const noexcept { return dirichlet_; }

private:
    void add_neumann_edge_terms(std::span<const double> u_prev, double tau_next, double dt,
                                std::span<double> rhs);

    const TransformedDomain& domain_;
    const FemMesh& mesh_;
    ProblemKind kind_;
    SolverOptions options_;
    const simd::KernelTable* kernels_;
    Assembler assembler_;
    LinearSolver solver_;
    SparseOperator lhs_;
    std::vector<int> dirichlet_;
    std::vector<char> is_dirichlet_;
    TraceStats stats_;
    std::vector<double> foot1_, foot2_, c0_, g1_, g2_;
    std::vector<double> cols_[9];
};

struct SolveDiagnostics {
    int steps = 0;
    TraceStats trace;
    double max_residual = 0.0;
    double min_value = 0.0;
};

/// Discrete solution at tau = T1 (calendar time 0).
class Solution {
public:
    Solution(std::shared_ptr<const TransformedDomain> d, std::shared_ptr<const FemMesh> mesh,
             ProblemKind kind, FieldVector field, SolveDiagnostics diagnostics);

    ProblemKind kind() const noexcept { return kind_; }
    const TransformedDomain& domain() const noexcept { return *domain_; }
    const FemMesh& mesh() const noexcept { return *mesh_; }
    const FieldVector& field() const noexcept { return field_; }
    const SolveDiagnostics& diagnostics() const noexcept { return diagnostics_; }

    /// Value at spot S and short rate r; throws out_of_domain outside the rectangle.
    double evaluate(double s, double r) const;

private:
    std::shared_ptr<const TransformedDomain> domain_;
    std::shared_ptr<const FemMesh> mesh_;
    ProblemKind kind_;
    FieldVector field_;
    SolveDiagnostics diagnostics_;
};

/// Full solve from tau = 0 to tau = grid.maturity; the domain maturity must match.
Solution solve_ibvp(ProblemKind kind, const TimeGrid& grid,
                    std::shared_ptr<const FemMesh> mesh,
                    std::shared_ptr<const TransformedDomain> d, SolverOptions options = {});

} // namespace jdcev
