#pragma once

// Batch kernels for the data-parallel inner loops of the solver and the Monte
// Carlo oracle. Every kernel has a scalar reference variant built on the formulas
// in jdcev/coefficients.hpp and, on x86-64, an AVX2+FMA variant. The variant is
// picked at runtime from CPUID; JDCEV_SIMD=scalar in the environment forces the
// reference path.
//
// Arrays are structure-of-arrays. Per-quadrature-point data of element e, point q
// lives at index e * 9 + q; element matrices are row-major 9x9 blocks.

#include "jdcev/coefficients.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

namespace jdcev::simd {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa) noexcept;

/// Output columns of point_coefficients. All must hold at least n entries.
struct CoefficientColumns {
    double* a11;
    double* a12;
    double* a22;
    double* reaction;
    double* l11;  // velocity Jacobian, l22 is identically zero
    double* l12;
    double* l21;
    double* grad_div1;
    double* grad_div2;
};

/// Q2 reference-element tables at the 3x3 Gauss points, Gauss weights folded in.
struct ElementTables {
    std::array<std::array<double, 81>, 9> mass;   // w phi_i phi_j
    std::array<std::array<double, 81>, 9> g11;    // w dxi phi_i dxi phi_j
    std::array<std::array<double, 81>, 9> g12;    // w (dxi phi_i deta phi_j + deta phi_i dxi phi_j)
    std::array<std::array<double, 81>, 9> g22;    // w deta phi_i deta phi_j
    std::array<std::array<double, 9>, 9> wphi;    // w phi_i
    std::array<std::array<double, 9>, 9> wdxi;    // w dxi phi_i
    std::array<std::array<double, 9>, 9> wdeta;   // w deta phi_i
};

/// Per-step constants of the Monte Carlo path update (same for every path).
struct McStepConstants {
    double dt;
    double sqrt_dt;
    double a_now, b_now;    // a(t), b(t)
    double a_next, b_next;  // a(t + dt), b(t + dt)
    double c;
    double beta;
    double decay;           // e^{-kappa dt}
    double theta;
    double rate_sd;         // delta sqrt((1 - e^{-2 kappa dt}) / (2 kappa))
    double rho;
    double rho_bar;         // sqrt(1 - rho^2)
    double log_floor;       // log(1 / s_max)
};

/// Path state. alive is 1.0 or 0.0; a path with log-price below log_floor is absorbed.
struct McState {
    double* log_s;
    double* rate;
    double* integral;  // running integral of r + lambda
    double* alive;
};

struct KernelTable {
    Isa isa;

    /// Elementwise exp / log. exp is only valid for |x| <= 700, log for normal x > 0.
    void (*exp)(std::span<const double> x, std::span<double> out);
    void (*log)(std::span<const double> x, std::span<double> out);

    void (*velocity)(const CoefficientPack& p, double tau, std::span<const double> x1,
                     std::span<const double> x2, std::span<double> v1, std::span<double> v2);

    void (*point_coefficients)(const CoefficientPack& p, double tau, std::span<const double> x1,
                               std::span<const double> x2, const CoefficientColumns& out);

    /// out[e*81 + k] = sum_q mass_c[e*9+q] mass[q][k] + k11 g11 + k12 g12 + k22 g22.
    void (*element_matrices)(const ElementTables& t, std::size_t n_elements, const double* mass_c,
                             const double* k11, const double* k12, const double* k22, double* out);

    /// out[e*9 + i] = sum_q c0[e*9+q] wphi[q][i] + g1 wdxi[q][i] + g2 wdeta[q][i].
    void (*element_vectors)(const ElementTables& t, std::size_t n_elements, const double* c0,
                            const double* g1, const double* g2, double* out);

    void (*mc_step)(const McStepConstants& k, std::size_t n_paths, const McState& state,
                    const double* z1, const double* z2);
};

bool supported(Isa isa) noexcept;

/// Throws domain error if the ISA is not available on this CPU or build.
const KernelTable& kernels(Isa isa);

/// Best supported table, honouring JDCEV_SIMD=scalar|avx2.
const KernelTable& active_kernels();

namespace detail {
extern const KernelTable scalar_table;
#if defined(JDCEV_HAVE_AVX2)
extern const KernelTable avx2_table;
#endif
} // namespace detail

} // namespace jdcev::simd
