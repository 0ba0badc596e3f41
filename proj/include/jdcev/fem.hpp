#pragma once

// Uniform Q2 (biquadratic Lagrange) finite elements on the computational rectangle.
//
// Nodes form a (2nx+1) x (2ny+1) tensor grid, node (i, j) has index j (2nx+1) + i.
// Element e = ey nx + ex owns local nodes k = b 3 + a (a, b in {0,1,2}), i.e. global
// node (2 ex + a, 2 ey + b). Quadrature point q = qb 3 + qa of the 3x3 Gauss rule.

#include "jdcev/coefficients.hpp"
#include "jdcev/simd/kernels.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace jdcev {

class TransformedDomain;

using FieldVector = std::vector<double>;

/// Bit flags for boundary node tags.
enum BoundaryTag : std::uint8_t {
    on_x1_lower = 1,
    on_x1_upper = 2,
    on_x2_lower = 4,
    on_x2_upper = 8,
};

class FemMesh {
public:
    /// Throws size error if nx or ny < 1 or the extents are not positive.
    FemMesh(int nx, int ny, double x1_max, double x2_max);

    int nx() const noexcept { return nx_; }
    int ny() const noexcept { return ny_; }
    double x1_max() const noexcept { return x1_max_; }
    double x2_max() const noexcept { return x2_max_; }
    double hx() const noexcept { return x1_max_ / nx_; }
    double hy() const noexcept { return x2_max_ / ny_; }

    std::size_t element_count() const noexcept { return connectivity_.size(); }
    std::size_t node_count() const noexcept { return tags_.size(); }
    int nodes_x() const noexcept { return 2 * nx_ + 1; }
    int nodes_y() const noexcept { return 2 * ny_ + 1; }

    const std::vector<double>& grid_x1() const noexcept { return grid_x1_; }
    const std::vector<double>& grid_x2() const noexcept { return grid_x2_; }
    double node_x1(std::size_t n) const { return grid_x1_[n % nodes_x()]; }
    double node_x2(std::size_t n) const { return grid_x2_[n / nodes_x()]; }

    const std::array<int, 9>& element(std::size_t e) const { return connectivity_[e]; }
    std::uint8_t tag(std::size_t n) const { return tags_[n]; }

private:
    int nx_, ny_;
    double x1_max_, x2_max_;
    std::vector<double> grid_x1_, grid_x2_;
    std::vector<std::array<int, 9>> connectivity_;
    std::vector<std::uint8_t> tags_;
};

FemMesh build_mesh(int nx, int ny, const TransformedDomain& d);

/// Nodal interpolant of f(x1, x2).
template <class F>
FieldVector interpolate_nodal(const FemMesh& mesh, F&& f) {
    FieldVector u(mesh.node_count());
    for (std::size_t n = 0; n < u.size(); ++n) u[n] = f(mesh.node_x1(n), mesh.node_x2(n));
    return u;
}

/// Compressed-row matrix over mesh nodes with sorted column indices.
class SparseOperator {
public:
    SparseOperator() = default;
    SparseOperator(std::size_t n, std::vector<int> row_ptr, std::vector<int> cols);

    std::size_t size() const noexcept { return n_; }
    std::size_t nonzeros() const noexcept { return cols_.size(); }

    const std::vector<int>& row_ptr() const noexcept { return row_ptr_; }
    const std::vector<int>& cols() const noexcept { return cols_; }
    std::vector<double>& values() noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }

    /// Position of (i, j) in values(), or -1 outside the pattern.
    int slot(int i, int j) const;
    /// Entry (i, j); zero outside the pattern.
    double at(int i, int j) const;

    std::vector<double> multiply(std::span<const double> x) const;

private:
    std::size_t n_ = 0;
    std::vector<int> row_ptr_, cols_;
    std::vector<double> values_;
};

/// Reference-element data of the 3x3 Gauss rule.
struct Q2Reference {
    std::array<double, 3> nodes;    // Gauss abscissae on [-1, 1]
    std::array<double, 3> weights;
    simd::ElementTables tables;
};

const Q2Reference& q2_reference();

/// 1-D quadratic Lagrange basis on nodes -1, 0, 1 and its derivative.
std::array<double, 3> lagrange3(double xi) noexcept;
std::array<double, 3> lagrange3_deriv(double xi) noexcept;

/// Physical coordinates of every quadrature point, index e * 9 + q.
struct QuadratureCache {
    explicit QuadratureCache(const FemMesh& mesh);

    std::vector<double> x1, x2;
    double det_j;     // hx hy / 4
    double dxi_dx1;   // 2 / hx
    double deta_dx2;  // 2 / hy
};

/// Scatter map from element-local entries to operator slots plus the CSR pattern.
struct Q2Pattern {
    explicit Q2Pattern(const FemMesh& mesh);

    SparseOperator pattern;    // values zero
    std::vector<int> slots;    // e * 81 + k -> index into values
    std::vector<int> transpose;  // slot of (j, i) for every slot of (i, j)
};

/// Assembles the form  sum_q [ m phi_i phi_j + A grad phi_j . grad phi_i ]  from
/// per-quadrature-point coefficients (index e * 9 + q). Elements are accumulated in
/// `order` when given, otherwise in index order.
class Assembler {
public:
    Assembler(const FemMesh& mesh, unsigned workers = 1,
              const simd::KernelTable* kernels = nullptr);

    const FemMesh& mesh() const noexcept { return *mesh_; }
    const QuadratureCache& quadrature() const noexcept { return quad_; }
    const Q2Pattern& pattern() const noexcept { return pattern_; }
    const simd::KernelTable& kernels() const noexcept { return *kernels_; }
    unsigned workers() const noexcept { return workers_; }

    SparseOperator assemble(std::span<const double> m, std::span<const double> a11,
                            std::span<const double> a12, std::span<const double> a22,
                            std::optional<std::span<const std::size_t>> order = std::nullopt);

    /// Same as assemble but writes into an operator built on pattern().
    void assemble_into(SparseOperator& out, std::span<const double> m,
                       std::span<const double> a11, std::span<const double> a12,
                       std::span<const double> a22,
                       std::optional<std::span<const std::size_t>> order = std::nullopt);

    /// b_i = sum_q [ c0 phi_i + g . grad phi_i ] accumulated into out (size node_count).
    void assemble_vector(std::span<double> out, std::span<const double> c0,
                         std::span<const double> g1, std::span<const double> g2);

    /// M / dt + K(tau_next) / 2 + R(tau_next) / 2.
    void assemble_lhs_into(SparseOperator& out, double tau_next, double dt,
                           const TransformedDomain& d);

private:
    const FemMesh* mesh_;
    unsigned workers_;
    const simd::KernelTable* kernels_;
    QuadratureCache quad_;
    Q2Pattern pattern_;
    std::vector<double> element_buffer_;
    std::vector<double> s_m_, s_11_, s_12_, s_22_;
    std::vector<double> col_[9];
};

SparseOperator assemble_mass(const FemMesh& mesh);
/// Stiffness matrix of diffusion(tau, .) on the mesh.
SparseOperator assemble_stiffness(double tau, const TransformedDomain& d, const FemMesh& mesh);
SparseOperator assemble_lhs(double tau_next, double dt, const TransformedDomain& d,
                            const FemMesh& mesh);

struct Location {
    std::size_t element;
    double xi, eta;  // local coordinates in [-1, 1]
};

/// Throws out_of_domain if p lies outside the closed rectangle by more than 1e-12.
Location locate(const FemMesh& mesh, Vec2 p);

double interpolate(const FemMesh& mesh, std::span<const double> u, Vec2 p);
Vec2 interpolate_grad(const FemMesh& mesh, std::span<const double> u, Vec2 p);

/// Value and gradient at a located point.
struct PointValue {
    double value;
    Vec2 grad;
};
PointValue evaluate_at(const FemMesh& mesh, std::span<const double> u, const Location& loc);

} // namespace jdcev
