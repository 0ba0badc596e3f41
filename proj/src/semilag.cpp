#include "jdcev/semilag.hpp"

#include "jdcev/error.hpp"
#include "jdcev/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

namespace jdcev {

TimeGrid make_time_grid(double maturity, double steps_per_year) {
    require(std::isfinite(maturity) && maturity > 0.0, ErrorCategory::domain,
            "maturity must be positive");
    require(std::isfinite(steps_per_year) && steps_per_year > 0.0, ErrorCategory::domain,
            "steps per year must be positive");
    const int steps = std::max(1, static_cast<int>(std::lround(steps_per_year * maturity)));
    return {maturity, steps, maturity / steps};
}

namespace {

inline bool clamp_into(double& v, double hi) {
    if (v < 0.0) {
        v = 0.0;
        return true;
    }
    if (v > hi) {
        v = hi;
        return true;
    }
    return false;
}

} // namespace

TraceStats trace_feet(const TransformedDomain& d, const simd::KernelTable& k, double tau_next,
                      double dt, std::span<const double> x1, std::span<const double> x2,
                      std::span<double> foot_x1, std::span<double> foot_x2) {
    const std::size_t n = x1.size();
    require(x2.size() == n && foot_x1.size() == n && foot_x2.size() == n,
            ErrorCategory::length_mismatch, "trace_feet arrays differ in length");
    const double hi1 = d.x1_max();
    const double hi2 = d.x2_max();
    std::vector<double> v1(n), v2(n);

    k.velocity(d.pack(), tau_next, x1, x2, v1, v2);
    for (std::size_t i = 0; i < n; ++i) {
        foot_x1[i] = x1[i] - 0.5 * dt * v1[i];
        foot_x2[i] = x2[i] - 0.5 * dt * v2[i];
        clamp_into(foot_x1[i], hi1);
        clamp_into(foot_x2[i], hi2);
    }
    k.velocity(d.pack(), tau_next - 0.5 * dt, foot_x1, foot_x2, v1, v2);
    TraceStats stats;
    stats.traced = n;
    for (std::size_t i = 0; i < n; ++i) {
        foot_x1[i] = x1[i] - dt * v1[i];
        foot_x2[i] = x2[i] - dt * v2[i];
        const bool c1 = clamp_into(foot_x1[i], hi1);
        const bool c2 = clamp_into(foot_x2[i], hi2);
        if (c1 || c2) ++stats.clamped;
    }
    return stats;
}

Vec2 trace_foot(const TransformedDomain& d, double tau_next, double dt, Vec2 x, bool* clamped) {
    const Vec2 k1 = d.velocity(tau_next, x.x1, x.x2);
    Vec2 mid{x.x1 - 0.5 * dt * k1.x1, x.x2 - 0.5 * dt * k1.x2};
    clamp_into(mid.x1, d.x1_max());
    clamp_into(mid.x2, d.x2_max());
    const Vec2 k2 = d.velocity(tau_next - 0.5 * dt, mid.x1, mid.x2);
    Vec2 foot{x.x1 - dt * k2.x1, x.x2 - dt * k2.x2};
    const bool c1 = clamp_into(foot.x1, d.x1_max());
    const bool c2 = clamp_into(foot.x2, d.x2_max());
    if (clamped != nullptr) *clamped = c1 || c2;
    return foot;
}

SemiLagrangianStepper::SemiLagrangianStepper(const TransformedDomain& d, const FemMesh& mesh,
                                             ProblemKind kind, SolverOptions options)
    : domain_(d),
      mesh_(mesh),
      kind_(kind),
      options_(options),
      kernels_(options.kernels != nullptr ? options.kernels : &simd::active_kernels()),
      assembler_(mesh, options.workers, kernels_),
      solver_(options.solver) {
    require(std::abs(mesh.x1_max() - d.x1_max()) <= 1e-12 * d.x1_max()
                && std::abs(mesh.x2_max() - d.x2_max()) <= 1e-12 * d.x2_max(),
            ErrorCategory::invalid_param, "mesh does not cover the computational domain");
    lhs_ = assembler_.pattern().pattern;
    is_dirichlet_.assign(mesh.node_count(), 0);
    constexpr std::uint8_t dirichlet_faces = on_x1_lower | on_x2_lower | on_x2_upper;
    for (std::size_t n = 0; n < mesh.node_count(); ++n) {
        if (mesh.tag(n) & dirichlet_faces) {
            is_dirichlet_[n] = 1;
            dirichlet_.push_back(static_cast<int>(n));
        }
    }
    const std::size_t nq = mesh.element_count() * 9;
    for (auto* v : {&foot1_, &foot2_, &c0_, &g1_, &g2_}) v->resize(nq);
    for (auto& c : cols_) c.resize(nq);
}

SemiLagrangianStepper::~SemiLagrangianStepper() = default;

std::vector<double> SemiLagrangianStepper::assemble_rhs(std::span<const double> u_prev,
                                                        double tau_next, double dt) {
    require(u_prev.size() == mesh_.node_count(), ErrorCategory::length_mismatch,
            "field length differs from node count");
    const auto& quad = assembler_.quadrature();
    const std::size_t nq = quad.x1.size();
    const double tau_prev = tau_next - dt;

    std::atomic<std::size_t> clamped{0};
    parallel_for(nq, options_.workers, [&](std::size_t begin, std::size_t end) {
        const std::size_t n = end - begin;
        const TraceStats s = trace_feet(
            domain_, *kernels_, tau_next, dt, std::span<const double>(quad.x1.data() + begin, n),
            std::span<const double>(quad.x2.data() + begin, n),
            std::span<double>(foot1_.data() + begin, n), std::span<double>(foot2_.data() + begin, n));
        clamped += s.clamped;

        const simd::CoefficientColumns c{cols_[0].data() + begin, cols_[1].data() + begin,
                                         cols_[2].data() + begin, cols_[3].data() + begin,
                                         cols_[4].data() + begin, cols_[5].data() + begin,
                                         cols_[6].data() + begin, cols_[7].data() + begin,
                                         cols_[8].data() + begin};
        kernels_->point_coefficients(domain_.pack(), tau_prev,
                                     std::span<const double>(foot1_.data() + begin, n),
                                     std::span<const double>(foot2_.data() + begin, n), c);

        for (std::size_t i = begin; i < end; ++i) {
            const PointValue pv = evaluate_at(mesh_, u_prev, locate(mesh_, {foot1_[i], foot2_[i]}));
            const double a11 = cols_[0][i], a12 = cols_[1][i], a22 = cols_[2][i];
            const double f1 = a11 * pv.grad.x1 + a12 * pv.grad.x2;
            const double f2 = a12 * pv.grad.x1 + a22 * pv.grad.x2;
            const double lf1 = cols_[4][i] * f1 + cols_[5][i] * f2;
            const double lf2 = cols_[6][i] * f1;
            const double gdv_f = cols_[7][i] * f1 + cols_[8][i] * f2;
            c0_[i] = pv.value / dt - 0.5 * cols_[3][i] * pv.value - 0.5 * dt * gdv_f;
            g1_[i] = -0.5 * (f1 + dt * lf1);
            g2_[i] = -0.5 * (f2 + dt * lf2);
        }
    });
    stats_.traced += nq;
    stats_.clamped += clamped.load();

    std::vector<double> rhs(mesh_.node_count(), 0.0);
    assembler_.assemble_vector(rhs, c0_, g1_, g2_);
    add_neumann_edge_terms(u_prev, tau_next, dt, rhs);
    return rhs;
}

void SemiLagrangianStepper::add_neumann_edge_terms(std::span<const double> u_prev,
                                                   double tau_next, double dt,
                                                   std::span<double> rhs) {
    // x1 = x1_max edge of the last element column; local nodes with a = 2.
    const auto& ref = q2_reference();
    const double hy = mesh_.hy();
    const double x1 = mesh_.x1_max();
    const double tau_prev = tau_next - dt;
    const int nx = mesh_.nx();
    for (int ey = 0; ey < mesh_.ny(); ++ey) {
        const std::size_t e = static_cast<std::size_t>(ey) * nx + (nx - 1);
        const auto& conn = mesh_.element(e);
        for (int q = 0; q < 3; ++q) {
            const double eta = ref.nodes[q];
            const Vec2 x{x1, (ey + 0.5 * (eta + 1.0)) * hy};

            bool clamped = false;
            const Vec2 foot = trace_foot(domain_, tau_next, dt, x, &clamped);
            ++stats_.edge_traced;
            if (clamped) ++stats_.edge_clamped;
            const PointValue at_foot = evaluate_at(mesh_, u_prev, locate(mesh_, foot));
            const SymMat2 af = domain_.diffusion(tau_prev, foot.x1);
            const Mat2 l = domain_.velocity_jacobian(tau_prev, foot.x1, foot.x2);
            const double d2 = at_foot.grad.x2;
            const double traced = (1.0 + dt * l.m11) * af.a12 * d2 + dt * l.m12 * af.a22 * d2;

            const PointValue at_x = evaluate_at(mesh_, u_prev, {e, 1.0, eta});
            const double cross = domain_.diffusion(tau_next, x1).a12 * at_x.grad.x2;

            const double weight = ref.weights[q] * 0.5 * hy * 0.5 * (traced + cross);
            const auto phi = lagrange3(eta);
            for (int b = 0; b < 3; ++b) rhs[conn[b * 3 + 2]] += weight * phi[b];
        }
    }
}

const SparseOperator& SemiLagrangianStepper::assemble_lhs(double tau_next, double dt) {
    assembler_.assemble_lhs_into(lhs_, tau_next, dt, domain_);
    return lhs_;
}

void SemiLagrangianStepper::apply_boundary(SparseOperator& lhs, std::span<double> rhs,
                                           double tau_next) const {
    const auto& rp = lhs.row_ptr();
    const auto& cols = lhs.cols();
    const auto& transpose = assembler_.pattern().transpose;
    auto& val = lhs.values();

    std::vector<double> f(dirichlet_.size());
    for (std::size_t k = 0; k < dirichlet_.size(); ++k) {
        const int n = dirichlet_[k];
        f[k] = domain_.dirichlet_data(kind_, tau_next, mesh_.node_x1(n), mesh_.node_x2(n));
    }
    for (std::size_t k = 0; k < dirichlet_.size(); ++k) {
        const int d = dirichlet_[k];
        for (int s = rp[d]; s < rp[d + 1]; ++s) {
            if (!is_dirichlet_[cols[s]]) rhs[cols[s]] -= val[s] * f[k];
        }
    }
    for (std::size_t k = 0; k < dirichlet_.size(); ++k) {
        const int d = dirichlet_[k];
        for (int s = rp[d]; s < rp[d + 1]; ++s) {
            val[s] = 0.0;
            val[transpose[s]] = 0.0;
        }
        val[lhs.slot(d, d)] = 1.0;
        rhs[d] = f[k];
    }
}

double SemiLagrangianStepper::step(std::span<double> u, double tau_next, double dt,
                                   int step_index) {
    std::vector<double> rhs = assemble_rhs(u, tau_next, dt);
    assemble_lhs(tau_next, dt);
    apply_boundary(lhs_, rhs, tau_next);
    solver_.solve(lhs_, rhs, u, step_index);
    return solver_.last_residual();
}

Solution::Solution(std::shared_ptr<const TransformedDomain> d, std::shared_ptr<const FemMesh> mesh,
                   ProblemKind kind, FieldVector field, SolveDiagnostics diagnostics)
    : domain_(std::move(d)),
      mesh_(std::move(mesh)),
      kind_(kind),
      field_(std::move(field)),
      diagnostics_(diagnostics) {}

double Solution::evaluate(double s, double r) const {
    return interpolate(*mesh_, field_, domain_->to_computational(s, r, 0.0));
}

Solution solve_ibvp(ProblemKind kind, const TimeGrid& grid, std::shared_ptr<const FemMesh> mesh,
                    std::shared_ptr<const TransformedDomain> d, SolverOptions options) {
    require(std::abs(grid.maturity - d->maturity()) <= 1e-12 * d->maturity(),
            ErrorCategory::invalid_param, "time grid and domain maturities differ");
    require(grid.steps >= 1, ErrorCategory::size, "time grid needs at least one step");

    SemiLagrangianStepper stepper(*d, *mesh, kind, options);
    FieldVector u = interpolate_nodal(*mesh, [&](double x1, double x2) {
        return d->initial_data(kind, x1, x2);
    });

    SolveDiagnostics diag;
    diag.min_value = *std::min_element(u.begin(), u.end());
    for (int n = 0; n < grid.steps; ++n) {
        const double tau_next = (n + 1) * grid.dt;
        const double res = stepper.step(u, tau_next, grid.dt, n + 1);
        diag.max_residual = std::max(diag.max_residual, res);
        diag.min_value = std::min(diag.min_value, *std::min_element(u.begin(), u.end()));
    }
    diag.steps = grid.steps;
    diag.trace = stepper.trace_stats();
    return Solution(std::move(d), std::move(mesh), kind, std::move(u), diag);
}

} // namespace jdcev
