// Reference variants: straight loops over the scalar coefficient formulas.

#include "jdcev/simd/kernels.hpp"

#include <cmath>

namespace jdcev::simd {
namespace {

void exp_scalar(std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::exp(x[i]);
}

void log_scalar(std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::log(x[i]);
}

void velocity_scalar(const CoefficientPack& p, double tau, std::span<const double> x1,
                     std::span<const double> x2, std::span<double> v1, std::span<double> v2) {
    for (std::size_t i = 0; i < x1.size(); ++i) {
        const Vec2 v = coeff::velocity(p, tau, x1[i], x2[i]);
        v1[i] = v.x1;
        v2[i] = v.x2;
    }
}

void point_coefficients_scalar(const CoefficientPack& p, double tau, std::span<const double> x1,
                               std::span<const double> x2, const CoefficientColumns& out) {
    for (std::size_t i = 0; i < x1.size(); ++i) {
        const SymMat2 a = coeff::diffusion(p, tau, x1[i]);
        const Mat2 l = coeff::velocity_jacobian(p, tau, x1[i], x2[i]);
        const Vec2 g = coeff::grad_div_velocity(p, tau, x1[i], x2[i]);
        out.a11[i] = a.a11;
        out.a12[i] = a.a12;
        out.a22[i] = a.a22;
        out.reaction[i] = coeff::reaction(p, tau, x1[i], x2[i]);
        out.l11[i] = l.m11;
        out.l12[i] = l.m12;
        out.l21[i] = l.m21;
        out.grad_div1[i] = g.x1;
        out.grad_div2[i] = g.x2;
    }
}

void element_matrices_scalar(const ElementTables& t, std::size_t n_elements, const double* mass_c,
                             const double* k11, const double* k12, const double* k22,
                             double* out) {
    for (std::size_t e = 0; e < n_elements; ++e) {
        double* m = out + e * 81;
        for (int k = 0; k < 81; ++k) m[k] = 0.0;
        for (int q = 0; q < 9; ++q) {
            const std::size_t iq = e * 9 + q;
            const double cm = mass_c[iq], c11 = k11[iq], c12 = k12[iq], c22 = k22[iq];
            for (int k = 0; k < 81; ++k) {
                m[k] += cm * t.mass[q][k];
                m[k] += c11 * t.g11[q][k];
                m[k] += c12 * t.g12[q][k];
                m[k] += c22 * t.g22[q][k];
            }
        }
    }
}

void element_vectors_scalar(const ElementTables& t, std::size_t n_elements, const double* c0,
                            const double* g1, const double* g2, double* out) {
    for (std::size_t e = 0; e < n_elements; ++e) {
        double* v = out + e * 9;
        for (int i = 0; i < 9; ++i) v[i] = 0.0;
        for (int q = 0; q < 9; ++q) {
            const std::size_t iq = e * 9 + q;
            for (int i = 0; i < 9; ++i) {
                v[i] += c0[iq] * t.wphi[q][i];
                v[i] += g1[iq] * t.wdxi[q][i];
                v[i] += g2[iq] * t.wdeta[q][i];
            }
        }
    }
}

void mc_step_scalar(const McStepConstants& k, std::size_t n_paths, const McState& s,
                    const double* z1, const double* z2) {
    for (std::size_t i = 0; i < n_paths; ++i) {
        const double x = s.log_s[i];
        const double r = s.rate[i];
        const double sigma = k.a_now * std::exp(k.beta * x);
        const double var = sigma * sigma;
        const double lambda = k.b_now + k.c * var;

        const double r_new = k.theta + (r - k.theta) * k.decay + k.rate_sd * z1[i];
        const double dw = k.sqrt_dt * (k.rho * z1[i] + k.rho_bar * z2[i]);
        const double x_new = x + (r - 0.5 * var + lambda) * k.dt + sigma * dw;

        const double sigma_new = k.a_next * std::exp(k.beta * x_new);
        const double lambda_new = k.b_next + k.c * sigma_new * sigma_new;
        s.integral[i] += 0.5 * (r + lambda + r_new + lambda_new) * k.dt;

        const bool survives = s.alive[i] != 0.0 && x_new >= k.log_floor;
        s.alive[i] = survives ? 1.0 : 0.0;
        // absorbed paths keep their last in-domain state so the integral stays finite
        s.log_s[i] = survives ? x_new : x;
        s.rate[i] = r_new;
    }
}

} // namespace

namespace detail {
const KernelTable scalar_table{Isa::scalar,
                               &exp_scalar,
                               &log_scalar,
                               &velocity_scalar,
                               &point_coefficients_scalar,
                               &element_matrices_scalar,
                               &element_vectors_scalar,
                               &mc_step_scalar};
} // namespace detail

} // namespace jdcev::simd
