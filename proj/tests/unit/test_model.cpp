#include "params.hpp"

#include "jdcev/error.hpp"
#include "jdcev/model.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace jdcev;
using namespace jdcev::testing;

namespace {

// Composite Simpson rule, independent of the closed-form antiderivative.
template <class F>
double simpson(F&& f, double a, double b, int n = 2000) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

// RK4 integration of the affine bond ODEs B' = 1 - kappa B, A' = -kappa theta B + delta^2 B^2 / 2.
double zcb_by_ode(double r, double tau, const RateParams& p, int steps = 4000) {
    double a = 0.0, b = 0.0;
    const double h = tau / steps;
    auto fb = [&](double bb) { return 1.0 - p.kappa() * bb; };
    auto fa = [&](double bb) {
        return -p.kappa() * p.theta() * bb + 0.5 * p.delta() * p.delta() * bb * bb;
    };
    for (int i = 0; i < steps; ++i) {
        const double k1b = fb(b), k1a = fa(b);
        const double k2b = fb(b + 0.5 * h * k1b), k2a = fa(b + 0.5 * h * k1b);
        const double k3b = fb(b + 0.5 * h * k2b), k3a = fa(b + 0.5 * h * k2b);
        const double k4b = fb(b + h * k3b), k4a = fa(b + h * k3b);
        b += h / 6.0 * (k1b + 2 * k2b + 2 * k3b + k4b);
        a += h / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a);
    }
    return std::exp(a - b * r);
}

} // namespace

TEST_CASE("volatility examples") {
    const auto p = ubs().equity;
    CHECK(volatility(0.0, 1.0, p) == doctest::Approx(0.0523625).epsilon(1e-15));
    CHECK(volatility(1.0, 1.0, p) == doctest::Approx(0.0861476).epsilon(1e-14));
    for (double t : {0.0, 0.7, 3.0}) CHECK(volatility(t, 1.0, p) == doctest::Approx(p.a(t)));
    CHECK_THROWS_AS(volatility(0.0, 0.0, p), Error);
}

TEST_CASE("hazard examples") {
    CHECK(hazard(0.0, 1.0, ubs().equity) == doctest::Approx(2.9163e-3).epsilon(1e-4));
    CHECK(hazard(0.0, 1.0, jpm().equity) == doctest::Approx(2.1628e-3).epsilon(1e-4));
    const EquityParams flat(0.03, 0.05, 0.0, 0.01, 0.0, -0.5);
    for (double t : {0.0, 1.0, 4.0})
        for (double s : {0.1, 1.0, 7.0}) CHECK(hazard(t, s, flat) == doctest::Approx(0.01));
    CHECK_THROWS_AS(hazard(0.0, -1.0, flat), Error);
}

TEST_CASE("hazard and volatility are decreasing in S and bounded below by b") {
    for (const auto& set : {ubs(), jpm()}) {
        const auto& p = set.equity;
        double prev_v = INFINITY, prev_h = INFINITY;
        for (double s = 0.1; s < 10.0; s *= 1.3) {
            const double v = volatility(2.0, s, p), h = hazard(2.0, s, p);
            CHECK(v < prev_v);
            CHECK(h < prev_h);
            CHECK(h >= p.b(2.0));
            prev_v = v;
            prev_h = h;
        }
    }
}

TEST_CASE("integrated hazard matches numerical quadrature") {
    const auto p = ubs().equity;
    CHECK(integrated_hazard(0.0, 1.0, 1.0, p) == doctest::Approx(4.3419e-3).epsilon(1e-4));
    CHECK(integrated_hazard(2.5, 2.5, 0.3, p) == 0.0);
    const EquityParams flat(0.03, 0.05, 0.0, 0.01, 0.0, -0.5);
    CHECK(integrated_hazard(0.0, 2.0, 1.0, flat) == doctest::Approx(0.02).epsilon(1e-14));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ut(0.0, 5.0), us(0.1, 10.0);
    for (const auto& set : {ubs(), jpm()}) {
        for (int i = 0; i < 200; ++i) {
            double t1 = ut(rng), t2 = ut(rng);
            if (t2 < t1) std::swap(t1, t2);
            const double s = us(rng);
            const double ref = simpson([&](double u) { return hazard(u, s, set.equity); }, t1, t2);
            CHECK(integrated_hazard(t1, t2, s, set.equity) == doctest::Approx(ref).epsilon(1e-12));
            const double t3 = t2 + 0.5;
            CHECK(integrated_hazard(t1, t3, s, set.equity)
                  == doctest::Approx(integrated_hazard(t1, t2, s, set.equity)
                                     + integrated_hazard(t2, t3, s, set.equity))
                         .epsilon(1e-14));
        }
    }
    CHECK_THROWS_AS(integrated_hazard(1.0, 0.5, 1.0, p), Error);
    CHECK_THROWS_AS(integrated_hazard(0.0, 1.0, 0.0, p), Error);
}

TEST_CASE("vasicek zcb against the affine ODEs") {
    const auto set = ubs();
    CHECK(vasicek_zcb(set.market.r0(), 1.0, set.rates) == doctest::Approx(1.006752).epsilon(1e-6));
    CHECK(vasicek_zcb(0.3, 0.0, set.rates) == 1.0);
    for (const auto& s : {ubs(), jpm()}) {
        for (double tau : {0.5, 1.0, 3.0, 7.0, 10.0}) {
            CHECK(vasicek_zcb(s.market.r0(), tau, s.rates)
                  == doctest::Approx(zcb_by_ode(s.market.r0(), tau, s.rates)).epsilon(1e-11));
        }
    }
    const RateParams det(0.3, 0.02, 0.0);
    CHECK(vasicek_zcb(0.02, 4.0, det) == doctest::Approx(std::exp(-0.08)).epsilon(1e-14));
    // d/dtau log P at tau = 0 is -r.
    const double h = 1e-6;
    CHECK((std::log(vasicek_zcb(0.05, h, set.rates)) / h) == doctest::Approx(-0.05).epsilon(1e-6));
}

TEST_CASE("parameter invariants") {
    CHECK_THROWS_AS(RateParams(-0.1, 0.0, 0.01), Error);
    CHECK_THROWS_AS(RateParams(0.1, 0.0, -0.01), Error);
    CHECK_THROWS_AS(EquityParams(0.0, 0.05, 0.0, 0.0, 0.1, 0.2), Error);
    CHECK_THROWS_AS(EquityParams(0.0, 0.05, 0.0, 0.0, -0.1, -0.2), Error);
    CHECK_THROWS_AS(EquityParams(-0.1, 0.05, 0.0, 0.0, 0.1, -0.2).check_horizon(1.0), Error);
    CHECK_THROWS_AS(MarketState(1.0, 0.0, 1.0), Error);
    CHECK_THROWS_AS(MarketState(0.0, 0.0, 0.0), Error);
    CHECK_THROWS_AS(BondSpec(100.0, {2.0, 1.0}, {0.1, 0.1}, 0.4), Error);
    CHECK_THROWS_AS(BondSpec(100.0, {1.0, 2.0}, {0.1}, 0.4), Error);
    CHECK_THROWS_AS(BondSpec(100.0, {1.0}, {0.1}, 1.5), Error);
    try {
        RateParams(0.1, 0.0, -1.0);
    } catch (const Error& e) {
        CHECK(e.category() == ErrorCategory::invalid_param);
        CHECK(std::string(e.what()).find("delta") != std::string::npos);
    }
    const auto p = ubs().equity.without_hazard();
    CHECK(hazard(3.0, 0.5, p) == 0.0);
    CHECK(p.a(2.0) == ubs().equity.a(2.0));
}
