#pragma once

#include "jdcev/fem.hpp"

#include <memory>
#include <span>
#include <string_view>

namespace jdcev {

enum class SolverKind {
    direct,  // sparse LDL^T, pattern analysed once and refactorized per call
    krylov,  // conjugate gradients, Jacobi preconditioner, warm start from x
};

std::string_view to_string(SolverKind kind) noexcept;
/// Throws config error for unknown names.
SolverKind solver_kind_from_string(std::string_view name);

/// Solver for the symmetric positive definite systems of the time stepper. The
/// operator pattern must stay the same between calls.
class LinearSolver {
public:
    explicit LinearSolver(SolverKind kind, double tolerance = 1e-12);
    ~LinearSolver();
    LinearSolver(LinearSolver&&) noexcept;
    LinearSolver& operator=(LinearSolver&&) noexcept;

    SolverKind kind() const noexcept;

    /// Solves a x = b. x holds the initial guess for krylov. Failures throw a solver
    /// error naming `step`.
    void solve(const SparseOperator& a, std::span<const double> b, std::span<double> x, int step);

    /// Relative residual ||b - a x|| / ||b|| of the last solve.
    double last_residual() const noexcept;
    int last_iterations() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace jdcev
