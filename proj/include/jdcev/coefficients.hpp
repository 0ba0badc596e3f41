#pragma once

// Scalar coefficient formulas of the localized problem
//
//   du/dtau - Div(A grad u) + v . grad u + l u = 0   on (0,T1) x (0,x1_max) x (0,x2_max)
//
// in computational coordinates x1 = S - s_min, x2 = y + y_half (y = r e^{kappa t})
// and reversed time tau = T1 - t. These are the reference implementations; the
// batch kernels in jdcev/simd evaluate the same expressions over arrays.

#include <cmath>

namespace jdcev {

/// Flat parameter block shared by the scalar formulas and the batch kernels.
struct CoefficientPack {
    double a1, a2, b1, b2, c, beta;
    double kappa, theta, delta, rho;
    double s_min;     // 1 / s_max
    double y_half;
    double maturity;  // T1
};

struct Vec2 {
    double x1 = 0.0;
    double x2 = 0.0;
};

/// Row-major 2x2, m12 = d(row 1)/d(x2) for Jacobians.
struct Mat2 {
    double m11 = 0.0, m12 = 0.0, m21 = 0.0, m22 = 0.0;
};

struct SymMat2 {
    double a11 = 0.0, a12 = 0.0, a22 = 0.0;
};

namespace coeff {

inline double calendar_time(const CoefficientPack& p, double tau) { return p.maturity - tau; }

inline SymMat2 diffusion(const CoefficientPack& p, double tau, double x1) {
    const double t = calendar_time(p, tau);
    const double s = x1 + p.s_min;
    const double a = p.a1 * t + p.a2;
    const double sb1 = std::pow(s, p.beta + 1.0);
    const double ekt = std::exp(p.kappa * t);
    return {0.5 * a * a * sb1 * sb1, 0.5 * p.rho * p.delta * a * sb1 * ekt,
            0.5 * p.delta * p.delta * ekt * ekt};
}

/// lambda at calendar time t and price s.
inline double hazard(const CoefficientPack& p, double t, double s) {
    const double a = p.a1 * t + p.a2;
    return p.b1 * t + p.b2 + p.c * a * a * std::pow(s, 2.0 * p.beta);
}

inline double reaction(const CoefficientPack& p, double tau, double x1, double x2) {
    const double t = calendar_time(p, tau);
    return std::exp(-p.kappa * t) * (x2 - p.y_half) + hazard(p, t, x1 + p.s_min);
}

inline Vec2 velocity(const CoefficientPack& p, double tau, double x1, double x2) {
    const double t = calendar_time(p, tau);
    const double s = x1 + p.s_min;
    const double a = p.a1 * t + p.a2;
    const double sb = std::pow(s, p.beta);
    const double s2b = sb * sb;
    const double lambda = p.b1 * t + p.b2 + p.c * a * a * s2b;
    const double ekt = std::exp(p.kappa * t);
    const double rate = (x2 - p.y_half) / ekt;
    return {a * a * (p.beta + 1.0) * s2b * s - (rate + lambda) * s,
            (0.5 * p.rho * p.delta * a * (p.beta + 1.0) * sb - p.kappa * p.theta) * ekt};
}

inline Mat2 velocity_jacobian(const CoefficientPack& p, double tau, double x1, double x2) {
    const double t = calendar_time(p, tau);
    const double s = x1 + p.s_min;
    const double a = p.a1 * t + p.a2;
    const double b = p.b1 * t + p.b2;
    const double sb = std::pow(s, p.beta);
    const double ekt = std::exp(p.kappa * t);
    const double emkt = 1.0 / ekt;
    Mat2 j;
    j.m11 = (2.0 * p.beta + 1.0) * a * a * (p.beta + 1.0 - p.c) * sb * sb
            - emkt * (x2 - p.y_half) - b;
    j.m12 = -emkt * s;
    j.m21 = 0.5 * p.rho * p.delta * a * (p.beta + 1.0) * p.beta * (sb / s) * ekt;
    j.m22 = 0.0;
    return j;
}

inline Vec2 grad_div_velocity(const CoefficientPack& p, double tau, double x1, double /*x2*/) {
    const double t = calendar_time(p, tau);
    const double s = x1 + p.s_min;
    const double a = p.a1 * t + p.a2;
    const double sb = std::pow(s, p.beta);
    return {2.0 * p.beta * (2.0 * p.beta + 1.0) * a * a * (p.beta + 1.0 - p.c) * sb * sb / s,
            -std::exp(-p.kappa * t)};
}

} // namespace coeff
} // namespace jdcev
