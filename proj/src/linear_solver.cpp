#include "jdcev/linear_solver.hpp"

#include "jdcev/error.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <string>

namespace jdcev {

std::string_view to_string(SolverKind kind) noexcept {
    return kind == SolverKind::direct ? "direct" : "krylov";
}

SolverKind solver_kind_from_string(std::string_view name) {
    if (name == "direct") return SolverKind::direct;
    if (name == "krylov") return SolverKind::krylov;
    fail(ErrorCategory::config, "unknown solver '" + std::string(name) + "' (direct|krylov)");
}

namespace {

// The operators are symmetric, so the CSR arrays read as CSC describe the same matrix.
using ColMap = Eigen::Map<const Eigen::SparseMatrix<double, Eigen::ColMajor, int>>;

ColMap as_eigen(const SparseOperator& a) {
    const auto n = static_cast<Eigen::Index>(a.size());
    return ColMap(n, n, static_cast<Eigen::Index>(a.nonzeros()), a.row_ptr().data(),
                  a.cols().data(), a.values().data());
}

} // namespace

struct LinearSolver::Impl {
    SolverKind kind;
    double tolerance;
    std::size_t pattern_nnz = 0;
    Eigen::SparseMatrix<double> matrix;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    double residual = 0.0;
    int iterations = 0;
};

LinearSolver::LinearSolver(SolverKind kind, double tolerance)
    : impl_(std::make_unique<Impl>()) {
    impl_->kind = kind;
    impl_->tolerance = tolerance;
}

LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

SolverKind LinearSolver::kind() const noexcept { return impl_->kind; }
double LinearSolver::last_residual() const noexcept { return impl_->residual; }
int LinearSolver::last_iterations() const noexcept { return impl_->iterations; }

void LinearSolver::solve(const SparseOperator& a, std::span<const double> b, std::span<double> x,
                         int step) {
    require(b.size() == a.size() && x.size() == a.size(), ErrorCategory::length_mismatch,
            "linear system size mismatch");
    Impl& s = *impl_;
    const bool fresh = s.pattern_nnz != a.nonzeros() || s.matrix.rows() != Eigen::Index(a.size());
    if (fresh) {
        s.matrix = as_eigen(a);
        s.matrix.makeCompressed();
        s.pattern_nnz = a.nonzeros();
        if (s.kind == SolverKind::direct) s.ldlt.analyzePattern(s.matrix);
    } else {
        std::copy(a.values().begin(), a.values().end(), s.matrix.valuePtr());
    }

    const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::Map<Eigen::VectorXd> sol(x.data(), static_cast<Eigen::Index>(x.size()));
    const std::string where = " at step " + std::to_string(step);

    if (s.kind == SolverKind::direct) {
        s.ldlt.factorize(s.matrix);
        require(s.ldlt.info() == Eigen::Success, ErrorCategory::solver,
                "sparse factorization failed" + where);
        sol = s.ldlt.solve(rhs);
        s.iterations = 1;
    } else {
        s.cg.setTolerance(s.tolerance);
        s.cg.setMaxIterations(10 * static_cast<int>(a.size()));
        s.cg.compute(s.matrix);
        const Eigen::VectorXd guess = sol;
        sol = s.cg.solveWithGuess(rhs, guess);
        s.iterations = static_cast<int>(s.cg.iterations());
        require(s.cg.info() == Eigen::Success, ErrorCategory::solver,
                "conjugate gradients did not converge" + where);
    }

    const double bn = rhs.norm();
    s.residual = (rhs - s.matrix * sol).norm() / (bn > 0 ? bn : 1.0);
    require(std::isfinite(s.residual), ErrorCategory::solver, "non-finite solution" + where);
}

} // namespace jdcev
