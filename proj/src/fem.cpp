#include "jdcev/fem.hpp"

#include "jdcev/error.hpp"
#include "jdcev/localization.hpp"
#include "jdcev/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace jdcev {

FemMesh::FemMesh(int nx, int ny, double x1_max, double x2_max)
    : nx_(nx), ny_(ny), x1_max_(x1_max), x2_max_(x2_max) {
    require(nx >= 1 && ny >= 1, ErrorCategory::size,
            "mesh needs at least one element per axis, got " + std::to_string(nx) + "x"
                + std::to_string(ny));
    require(x1_max > 0.0 && x2_max > 0.0, ErrorCategory::size, "mesh extents must be positive");

    const int mx = nodes_x();
    const int my = nodes_y();
    grid_x1_.resize(mx);
    grid_x2_.resize(my);
    for (int i = 0; i < mx; ++i) grid_x1_[i] = x1_max * i / (mx - 1);
    for (int j = 0; j < my; ++j) grid_x2_[j] = x2_max * j / (my - 1);

    connectivity_.resize(static_cast<std::size_t>(nx) * ny);
    for (int ey = 0; ey < ny; ++ey) {
        for (int ex = 0; ex < nx; ++ex) {
            auto& c = connectivity_[ey * nx + ex];
            for (int b = 0; b < 3; ++b)
                for (int a = 0; a < 3; ++a) c[b * 3 + a] = (2 * ey + b) * mx + 2 * ex + a;
        }
    }

    tags_.assign(static_cast<std::size_t>(mx) * my, 0);
    for (int j = 0; j < my; ++j) {
        for (int i = 0; i < mx; ++i) {
            std::uint8_t t = 0;
            if (i == 0) t |= on_x1_lower;
            if (i == mx - 1) t |= on_x1_upper;
            if (j == 0) t |= on_x2_lower;
            if (j == my - 1) t |= on_x2_upper;
            tags_[j * mx + i] = t;
        }
    }
}

FemMesh build_mesh(int nx, int ny, const TransformedDomain& d) {
    return FemMesh(nx, ny, d.x1_max(), d.x2_max());
}

SparseOperator::SparseOperator(std::size_t n, std::vector<int> row_ptr, std::vector<int> cols)
    : n_(n), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), values_(cols_.size(), 0.0) {}

int SparseOperator::slot(int i, int j) const {
    const auto begin = cols_.begin() + row_ptr_[i];
    const auto end = cols_.begin() + row_ptr_[i + 1];
    const auto it = std::lower_bound(begin, end, j);
    return (it != end && *it == j) ? static_cast<int>(it - cols_.begin()) : -1;
}

double SparseOperator::at(int i, int j) const {
    const int s = slot(i, j);
    return s < 0 ? 0.0 : values_[s];
}

std::vector<double> SparseOperator::multiply(std::span<const double> x) const {
    require(x.size() == n_, ErrorCategory::length_mismatch, "operator/vector size mismatch");
    std::vector<double> y(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        double acc = 0.0;
        for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) acc += values_[k] * x[cols_[k]];
        y[i] = acc;
    }
    return y;
}

std::array<double, 3> lagrange3(double xi) noexcept {
    return {0.5 * xi * (xi - 1.0), 1.0 - xi * xi, 0.5 * xi * (xi + 1.0)};
}

std::array<double, 3> lagrange3_deriv(double xi) noexcept {
    return {xi - 0.5, -2.0 * xi, xi + 0.5};
}

namespace {

Q2Reference make_reference() {
    Q2Reference r;
    const double g = std::sqrt(0.6);
    r.nodes = {-g, 0.0, g};
    r.weights = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    auto& t = r.tables;
    for (int qb = 0; qb < 3; ++qb) {
        for (int qa = 0; qa < 3; ++qa) {
            const int q = qb * 3 + qa;
            const double w = r.weights[qa] * r.weights[qb];
            const auto lx = lagrange3(r.nodes[qa]);
            const auto ly = lagrange3(r.nodes[qb]);
            const auto dx = lagrange3_deriv(r.nodes[qa]);
            const auto dy = lagrange3_deriv(r.nodes[qb]);
            std::array<double, 9> phi, dxi, deta;
            for (int b = 0; b < 3; ++b) {
                for (int a = 0; a < 3; ++a) {
                    phi[b * 3 + a] = lx[a] * ly[b];
                    dxi[b * 3 + a] = dx[a] * ly[b];
                    deta[b * 3 + a] = lx[a] * dy[b];
                }
            }
            for (int i = 0; i < 9; ++i) {
                t.wphi[q][i] = w * phi[i];
                t.wdxi[q][i] = w * dxi[i];
                t.wdeta[q][i] = w * deta[i];
                for (int j = 0; j < 9; ++j) {
                    t.mass[q][i * 9 + j] = w * phi[i] * phi[j];
                    t.g11[q][i * 9 + j] = w * dxi[i] * dxi[j];
                    t.g12[q][i * 9 + j] = w * (dxi[i] * deta[j] + deta[i] * dxi[j]);
                    t.g22[q][i * 9 + j] = w * deta[i] * deta[j];
                }
            }
        }
    }
    return r;
}

} // namespace

const Q2Reference& q2_reference() {
    static const Q2Reference ref = make_reference();
    return ref;
}

QuadratureCache::QuadratureCache(const FemMesh& mesh) {
    const auto& ref = q2_reference();
    const double hx = mesh.hx();
    const double hy = mesh.hy();
    det_j = 0.25 * hx * hy;
    dxi_dx1 = 2.0 / hx;
    deta_dx2 = 2.0 / hy;
    const std::size_t ne = mesh.element_count();
    x1.resize(ne * 9);
    x2.resize(ne * 9);
    for (std::size_t e = 0; e < ne; ++e) {
        const int ex = static_cast<int>(e % mesh.nx());
        const int ey = static_cast<int>(e / mesh.nx());
        for (int qb = 0; qb < 3; ++qb) {
            for (int qa = 0; qa < 3; ++qa) {
                x1[e * 9 + qb * 3 + qa] = (ex + 0.5 * (ref.nodes[qa] + 1.0)) * hx;
                x2[e * 9 + qb * 3 + qa] = (ey + 0.5 * (ref.nodes[qb] + 1.0)) * hy;
            }
        }
    }
}

Q2Pattern::Q2Pattern(const FemMesh& mesh) {
    const std::size_t n = mesh.node_count();
    std::vector<std::vector<int>> rows(n);
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        const auto& c = mesh.element(e);
        for (int i : c)
            for (int j : c) rows[i].push_back(j);
    }
    std::vector<int> row_ptr(n + 1, 0);
    std::vector<int> cols;
    for (std::size_t i = 0; i < n; ++i) {
        auto& r = rows[i];
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
        cols.insert(cols.end(), r.begin(), r.end());
        row_ptr[i + 1] = static_cast<int>(cols.size());
    }
    pattern = SparseOperator(n, std::move(row_ptr), std::move(cols));

    slots.resize(mesh.element_count() * 81);
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        const auto& c = mesh.element(e);
        for (int i = 0; i < 9; ++i)
            for (int j = 0; j < 9; ++j) slots[e * 81 + i * 9 + j] = pattern.slot(c[i], c[j]);
    }
    transpose.resize(pattern.nonzeros());
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = pattern.row_ptr()[i]; k < pattern.row_ptr()[i + 1]; ++k) {
            transpose[k] = pattern.slot(pattern.cols()[k], static_cast<int>(i));
        }
    }
}

Assembler::Assembler(const FemMesh& mesh, unsigned workers, const simd::KernelTable* kernels)
    : mesh_(&mesh),
      workers_(workers == 0 ? default_workers() : workers),
      kernels_(kernels != nullptr ? kernels : &simd::active_kernels()),
      quad_(mesh),
      pattern_(mesh) {
    const std::size_t nq = mesh.element_count() * 9;
    element_buffer_.resize(mesh.element_count() * 81);
    s_m_.resize(nq);
    s_11_.resize(nq);
    s_12_.resize(nq);
    s_22_.resize(nq);
    for (auto& c : col_) c.resize(nq);
}

SparseOperator Assembler::assemble(std::span<const double> m, std::span<const double> a11,
                                   std::span<const double> a12, std::span<const double> a22,
                                   std::optional<std::span<const std::size_t>> order) {
    SparseOperator out = pattern_.pattern;
    assemble_into(out, m, a11, a12, a22, order);
    return out;
}

void Assembler::assemble_into(SparseOperator& out, std::span<const double> m,
                              std::span<const double> a11, std::span<const double> a12,
                              std::span<const double> a22,
                              std::optional<std::span<const std::size_t>> order) {
    const std::size_t ne = mesh_->element_count();
    const std::size_t nq = ne * 9;
    require(m.size() == nq && a11.size() == nq && a12.size() == nq && a22.size() == nq,
            ErrorCategory::length_mismatch, "coefficient arrays must hold 9 entries per element");
    if (out.nonzeros() != pattern_.pattern.nonzeros()) out = pattern_.pattern;

    const double sx = quad_.dxi_dx1;
    const double sy = quad_.deta_dx2;
    const double dj = quad_.det_j;
    for (std::size_t i = 0; i < nq; ++i) {
        s_m_[i] = m[i] * dj;
        s_11_[i] = a11[i] * dj * sx * sx;
        s_12_[i] = a12[i] * dj * sx * sy;
        s_22_[i] = a22[i] * dj * sy * sy;
    }
    const auto& tables = q2_reference().tables;
    parallel_for(ne, workers_, [&](std::size_t begin, std::size_t end) {
        kernels_->element_matrices(tables, end - begin, s_m_.data() + begin * 9,
                                   s_11_.data() + begin * 9, s_12_.data() + begin * 9,
                                   s_22_.data() + begin * 9, element_buffer_.data() + begin * 81);
    });

    auto& values = out.values();
    std::fill(values.begin(), values.end(), 0.0);
    auto scatter = [&](std::size_t e) {
        const int* s = pattern_.slots.data() + e * 81;
        const double* em = element_buffer_.data() + e * 81;
        for (int k = 0; k < 81; ++k) values[s[k]] += em[k];
    };
    if (order) {
        require(order->size() == ne, ErrorCategory::length_mismatch,
                "element order must list every element once");
        for (std::size_t e : *order) scatter(e);
    } else {
        for (std::size_t e = 0; e < ne; ++e) scatter(e);
    }
}

void Assembler::assemble_vector(std::span<double> out, std::span<const double> c0,
                                std::span<const double> g1, std::span<const double> g2) {
    const std::size_t ne = mesh_->element_count();
    const std::size_t nq = ne * 9;
    require(out.size() == mesh_->node_count(), ErrorCategory::length_mismatch,
            "right-hand side must hold one entry per node");
    require(c0.size() == nq && g1.size() == nq && g2.size() == nq,
            ErrorCategory::length_mismatch, "coefficient arrays must hold 9 entries per element");

    const double dj = quad_.det_j;
    const double sx = quad_.dxi_dx1 * dj;
    const double sy = quad_.deta_dx2 * dj;
    for (std::size_t i = 0; i < nq; ++i) {
        s_m_[i] = c0[i] * dj;
        s_11_[i] = g1[i] * sx;
        s_22_[i] = g2[i] * sy;
    }
    const auto& tables = q2_reference().tables;
    parallel_for(ne, workers_, [&](std::size_t begin, std::size_t end) {
        kernels_->element_vectors(tables, end - begin, s_m_.data() + begin * 9,
                                  s_11_.data() + begin * 9, s_22_.data() + begin * 9,
                                  element_buffer_.data() + begin * 9);
    });
    for (std::size_t e = 0; e < ne; ++e) {
        const auto& c = mesh_->element(e);
        const double* ev = element_buffer_.data() + e * 9;
        for (int i = 0; i < 9; ++i) out[c[i]] += ev[i];
    }
}

void Assembler::assemble_lhs_into(SparseOperator& out, double tau_next, double dt,
                                  const TransformedDomain& d) {
    require(dt > 0.0, ErrorCategory::domain, "time step must be positive");
    const std::size_t nq = quad_.x1.size();
    const simd::CoefficientColumns cols{col_[0].data(), col_[1].data(), col_[2].data(),
                                        col_[3].data(), col_[4].data(), col_[5].data(),
                                        col_[6].data(), col_[7].data(), col_[8].data()};
    parallel_for(nq, workers_, [&](std::size_t begin, std::size_t end) {
        const std::size_t n = end - begin;
        const simd::CoefficientColumns c{cols.a11 + begin,      cols.a12 + begin,
                                         cols.a22 + begin,      cols.reaction + begin,
                                         cols.l11 + begin,      cols.l12 + begin,
                                         cols.l21 + begin,      cols.grad_div1 + begin,
                                         cols.grad_div2 + begin};
        kernels_->point_coefficients(d.pack(), tau_next,
                                     std::span<const double>(quad_.x1.data() + begin, n),
                                     std::span<const double>(quad_.x2.data() + begin, n), c);
    });
    // reuse the reaction column for the mass coefficient, halve the diffusion in place
    std::vector<double>& m = col_[3];
    for (std::size_t i = 0; i < nq; ++i) {
        m[i] = 1.0 / dt + 0.5 * m[i];
        col_[0][i] *= 0.5;
        col_[1][i] *= 0.5;
        col_[2][i] *= 0.5;
    }
    assemble_into(out, m, col_[0], col_[1], col_[2]);
}

SparseOperator assemble_mass(const FemMesh& mesh) {
    Assembler assembler(mesh, 1);
    const std::size_t nq = mesh.element_count() * 9;
    const std::vector<double> one(nq, 1.0), zero(nq, 0.0);
    return assembler.assemble(one, zero, zero, zero);
}

SparseOperator assemble_stiffness(double tau, const TransformedDomain& d, const FemMesh& mesh) {
    Assembler assembler(mesh, 1);
    const auto& q = assembler.quadrature();
    const std::size_t nq = q.x1.size();
    std::vector<double> zero(nq, 0.0), a11(nq), a12(nq), a22(nq);
    for (std::size_t i = 0; i < nq; ++i) {
        const SymMat2 a = d.diffusion(tau, q.x1[i]);
        a11[i] = a.a11;
        a12[i] = a.a12;
        a22[i] = a.a22;
    }
    return assembler.assemble(zero, a11, a12, a22);
}

SparseOperator assemble_lhs(double tau_next, double dt, const TransformedDomain& d,
                            const FemMesh& mesh) {
    Assembler assembler(mesh, 1);
    SparseOperator out = assembler.pattern().pattern;
    assembler.assemble_lhs_into(out, tau_next, dt, d);
    return out;
}

Location locate(const FemMesh& mesh, Vec2 p) {
    constexpr double tol = 1e-12;
    if (!(p.x1 >= -tol && p.x1 <= mesh.x1_max() + tol && p.x2 >= -tol
          && p.x2 <= mesh.x2_max() + tol)) {
        fail(ErrorCategory::out_of_domain, "point (" + std::to_string(p.x1) + ", "
                                               + std::to_string(p.x2)
                                               + ") lies outside the mesh");
    }
    const double hx = mesh.hx();
    const double hy = mesh.hy();
    const int ex = std::clamp(static_cast<int>(std::floor(p.x1 / hx)), 0, mesh.nx() - 1);
    const int ey = std::clamp(static_cast<int>(std::floor(p.x2 / hy)), 0, mesh.ny() - 1);
    return {static_cast<std::size_t>(ey) * mesh.nx() + ex, 2.0 * (p.x1 - ex * hx) / hx - 1.0,
            2.0 * (p.x2 - ey * hy) / hy - 1.0};
}

PointValue evaluate_at(const FemMesh& mesh, std::span<const double> u, const Location& loc) {
    const auto lx = lagrange3(loc.xi);
    const auto ly = lagrange3(loc.eta);
    const auto dx = lagrange3_deriv(loc.xi);
    const auto dy = lagrange3_deriv(loc.eta);
    const auto& c = mesh.element(loc.element);
    double v = 0.0, gx = 0.0, gy = 0.0;
    for (int b = 0; b < 3; ++b) {
        double row_v = 0.0, row_d = 0.0;
        for (int a = 0; a < 3; ++a) {
            const double ui = u[c[b * 3 + a]];
            row_v += lx[a] * ui;
            row_d += dx[a] * ui;
        }
        v += ly[b] * row_v;
        gx += ly[b] * row_d;
        gy += dy[b] * row_v;
    }
    return {v, {gx * 2.0 / mesh.hx(), gy * 2.0 / mesh.hy()}};
}

double interpolate(const FemMesh& mesh, std::span<const double> u, Vec2 p) {
    return evaluate_at(mesh, u, locate(mesh, p)).value;
}

Vec2 interpolate_grad(const FemMesh& mesh, std::span<const double> u, Vec2 p) {
    return evaluate_at(mesh, u, locate(mesh, p)).grad;
}

} // namespace jdcev
