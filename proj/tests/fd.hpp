#pragma once

// Finite-difference derivatives of the localized velocity field.

#include "jdcev/localization.hpp"

#include <cmath>

namespace jdcev::testing {

/// Central first differences of v with step h.
inline Mat2 fd_velocity_jacobian(const TransformedDomain& d, double tau, double x1, double x2,
                                 double h = 1e-6) {
    const Vec2 p1 = d.velocity(tau, x1 + h, x2), m1 = d.velocity(tau, x1 - h, x2);
    const Vec2 p2 = d.velocity(tau, x1, x2 + h), m2 = d.velocity(tau, x1, x2 - h);
    return {(p1.x1 - m1.x1) / (2 * h), (p2.x1 - m2.x1) / (2 * h), (p1.x2 - m1.x2) / (2 * h),
            (p2.x2 - m2.x2) / (2 * h)};
}

/// grad Div v from second differences of v, Richardson-extrapolated over steps k and k/2.
/// The x1 step is relative to S so that rounding stays small where the derivative is small.
inline Vec2 fd_grad_div_velocity(const TransformedDomain& d, double tau, double x1, double x2) {
    auto second = [&](double k1, double k2) {
        auto v1 = [&](double a, double b) { return d.velocity(tau, a, b).x1; };
        auto v2 = [&](double a, double b) { return d.velocity(tau, a, b).x2; };
        const double d11v1 = (v1(x1 + k1, x2) - 2 * v1(x1, x2) + v1(x1 - k1, x2)) / (k1 * k1);
        const double d12v2 = (v2(x1 + k1, x2 + k2) - v2(x1 + k1, x2 - k2) - v2(x1 - k1, x2 + k2)
                              + v2(x1 - k1, x2 - k2)) / (4 * k1 * k2);
        const double d21v1 = (v1(x1 + k1, x2 + k2) - v1(x1 + k1, x2 - k2) - v1(x1 - k1, x2 + k2)
                              + v1(x1 - k1, x2 - k2)) / (4 * k1 * k2);
        const double d22v2 = (v2(x1, x2 + k2) - 2 * v2(x1, x2) + v2(x1, x2 - k2)) / (k2 * k2);
        return Vec2{d11v1 + d12v2, d21v1 + d22v2};
    };
    const double k1 = 1e-2 * (x1 + d.s_min());
    const double k2 = 1e-2;
    const Vec2 coarse = second(k1, k2);
    const Vec2 fine = second(k1 / 2, k2 / 2);
    return {(4 * fine.x1 - coarse.x1) / 3, (4 * fine.x2 - coarse.x2) / 3};
}

} // namespace jdcev::testing
