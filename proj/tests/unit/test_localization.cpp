#include "fd.hpp"
#include "params.hpp"

#include "jdcev/error.hpp"
#include "jdcev/localization.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace jdcev;
using namespace jdcev::testing;

namespace {

TransformedDomain domain_for(const ParameterSet& s, double maturity = 5.0) {
    return TransformedDomain(s.equity, s.rates, s.market,
                             default_truncation(s.market, s.rates, maturity), maturity);
}

struct Sample {
    double tau, x1, x2;
};

std::vector<Sample> random_points(const TransformedDomain& d, int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Sample> out;
    for (int i = 0; i < n; ++i)
        out.push_back({u(rng) * d.maturity(), (0.01 + 0.98 * u(rng)) * d.x1_max(),
                       (0.01 + 0.98 * u(rng)) * d.x2_max()});
    return out;
}

bool close(double a, double b, double rel, double abs_floor) {
    return std::abs(a - b) <= rel * std::max(std::abs(b), abs_floor);
}

// Test function and its derivatives in computational coordinates.
struct Phi {
    double operator()(double x1, double x2) const { return std::sin(1.3 * x1 + 0.4) * std::exp(0.7 * x2); }
    double d1(double x1, double x2) const { return 1.3 * std::cos(1.3 * x1 + 0.4) * std::exp(0.7 * x2); }
    double d2(double x1, double x2) const { return 0.7 * (*this)(x1, x2); }
    double d11(double x1, double x2) const { return -1.69 * (*this)(x1, x2); }
    double d12(double x1, double x2) const { return 0.7 * d1(x1, x2); }
    double d22(double x1, double x2) const { return 0.49 * (*this)(x1, x2); }
};

} // namespace

TEST_CASE("default truncation") {
    const auto u = default_truncation(ubs().market, ubs().rates, 5.0);
    CHECK(u.s_max == 10.0);
    CHECK(u.y_half == doctest::Approx(0.6781).epsilon(1e-3));
    const auto j = default_truncation(jpm().market, jpm().rates, 5.0);
    CHECK(j.y_half == doctest::Approx(0.4078).epsilon(1e-3));
    CHECK(default_truncation(MarketState(3.0, 0.0, 0.0), ubs().rates, 1.0).s_max == 30.0);
}

TEST_CASE("coordinate maps") {
    const auto s = ubs();
    const TransformedDomain d(s.equity, s.rates, s.market, {10.0, 1.0}, 5.0);
    const Vec2 p = d.to_computational(1.0, 0.0, 0.0);
    CHECK(p.x1 == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(p.x2 == doctest::Approx(1.0).epsilon(1e-15));
    const double t = 2.0;
    const Vec2 corner = d.to_computational(0.1, -1.0 * std::exp(-s.rates.kappa() * t), t);
    CHECK(std::abs(corner.x1) < 1e-15);
    CHECK(std::abs(corner.x2) < 1e-15);
    CHECK(d.x1_max() == doctest::Approx(9.9));
    CHECK(d.x2_max() == doctest::Approx(2.0));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> us(0.1, 10.0), ur(-0.5, 0.5), ut(0.0, 5.0);
    for (int i = 0; i < 1000; ++i) {
        const double sp = us(rng), r = ur(rng), tt = ut(rng);
        const Vec2 x = d.to_computational(sp, r, tt);
        const Vec2 back = d.from_computational(x.x1, x.x2, tt);
        CHECK(std::abs(back.x1 - sp) <= 1e-14 * sp);
        CHECK(std::abs(back.x2 - r) <= 1e-14);
    }
    CHECK_THROWS_AS(d.to_computational(11.0, 0.0, 0.0), Error);
    CHECK_THROWS_AS(d.to_computational(1.0, 2.0, 0.0), Error);
}

TEST_CASE("diffusion, velocity and reaction examples") {
    const auto s = ubs();
    const auto d = domain_for(s);
    const Vec2 x = d.to_computational(1.0, s.market.r0(), 0.0);
    const double tau = d.maturity();
    const SymMat2 a = d.diffusion(tau, x.x1);
    CHECK(a.a11 == doctest::Approx(1.3709e-3).epsilon(1e-4));
    CHECK(a.a22 == doctest::Approx(2.3046e-4).epsilon(1e-4));
    CHECK(a.a12 == 0.0);
    const Vec2 v = d.velocity(tau, x.x1, x.x2);
    CHECK(v.x1 == doctest::Approx(0.008249).epsilon(1e-3));
    CHECK(v.x2 == doctest::Approx(-s.rates.kappa() * s.rates.theta()).epsilon(1e-14));
    CHECK(d.reaction(tau, x.x1, x.x2) == doctest::Approx(-0.0062436).epsilon(1e-4));

    // rho = 0: v2 independent of x.
    for (const auto& p : random_points(d, 50, 11)) {
        CHECK(d.velocity(p.tau, p.x1, p.x2).x2
              == doctest::Approx(-s.rates.kappa() * s.rates.theta()
                                 * std::exp(s.rates.kappa() * (d.maturity() - p.tau))));
    }
}

TEST_CASE("diffusion is positive semi-definite") {
    for (const auto& s : {ubs(), jpm()}) {
        const auto d = domain_for(s);
        for (const auto& p : random_points(d, 1000, 5)) {
            const SymMat2 a = d.diffusion(p.tau, p.x1);
            CHECK(a.a11 > 0.0);
            CHECK(a.a11 * a.a22 - a.a12 * a.a12 >= 0.0);
        }
    }
}

TEST_CASE("divergence form reproduces the pricing operator") {
    // Div(A grad phi) - v . grad phi - l phi must equal the non-divergence operator
    // written in (S, r) and mapped through S = x1 + 1/s_max, r = (x2 - y_half) e^{-kappa t}.
    const Phi phi;
    for (const auto& s : {ubs(), jpm()}) {
        const auto d = domain_for(s);
        const auto& e = s.equity;
        const double kap = s.rates.kappa(), th = s.rates.theta(), del = s.rates.delta();
        const double rho = s.market.rho();
        for (const auto& p : random_points(d, 1000, 17)) {
            const double t = d.maturity() - p.tau;
            const double sp = p.x1 + d.s_min();
            const double r = (p.x2 - d.truncation().y_half) * std::exp(-kap * t);
            const double a = e.a(t);
            const double lam = hazard(t, sp, e);
            const double ekt = std::exp(kap * t);
            const double pricing = 0.5 * a * a * std::pow(sp, 2 * e.beta() + 2) * phi.d11(p.x1, p.x2)
                                   + rho * del * a * std::pow(sp, e.beta() + 1) * ekt * phi.d12(p.x1, p.x2)
                                   + 0.5 * del * del * ekt * ekt * phi.d22(p.x1, p.x2)
                                   + (r + lam) * sp * phi.d1(p.x1, p.x2)
                                   + kap * th * ekt * phi.d2(p.x1, p.x2)
                                   - (r + lam) * phi(p.x1, p.x2);

            const double h = 1e-5;
            auto flux = [&](double x1, double x2) {
                const SymMat2 m = d.diffusion(p.tau, x1);
                return Vec2{m.a11 * phi.d1(x1, x2) + m.a12 * phi.d2(x1, x2),
                            m.a12 * phi.d1(x1, x2) + m.a22 * phi.d2(x1, x2)};
            };
            const double div = (flux(p.x1 + h, p.x2).x1 - flux(p.x1 - h, p.x2).x1) / (2 * h)
                               + (flux(p.x1, p.x2 + h).x2 - flux(p.x1, p.x2 - h).x2) / (2 * h);
            const Vec2 v = d.velocity(p.tau, p.x1, p.x2);
            const double divergence_form = div - v.x1 * phi.d1(p.x1, p.x2)
                                           - v.x2 * phi.d2(p.x1, p.x2)
                                           - d.reaction(p.tau, p.x1, p.x2) * phi(p.x1, p.x2);
            const double scale = std::abs(pricing) + std::abs(div) + 1e-3;
            CHECK(std::abs(divergence_form - pricing) <= 1e-6 * scale);
        }
    }
}

TEST_CASE("velocity derivatives match finite differences") {
    for (const auto& s : {ubs(), jpm()}) {
        const auto d = domain_for(s);
        int failures = 0;
        for (const auto& p : random_points(d, 1000, 23)) {
            const Mat2 j = d.velocity_jacobian(p.tau, p.x1, p.x2);
            const Mat2 f = fd_velocity_jacobian(d, p.tau, p.x1, p.x2);
            failures += !close(f.m11, j.m11, 1e-5, 1e-6);
            failures += !close(f.m12, j.m12, 1e-5, 1e-6);
            failures += !close(f.m21, j.m21, 1e-5, 1e-6);
            failures += !close(f.m22, j.m22, 1e-5, 1e-6);
            const Vec2 g = d.grad_div_velocity(p.tau, p.x1, p.x2);
            const Vec2 fg = fd_grad_div_velocity(d, p.tau, p.x1, p.x2);
            failures += !close(fg.x1, g.x1, 1e-5, 1e-6);
            failures += !close(fg.x2, g.x2, 1e-5, 1e-6);
        }
        CHECK(failures == 0);
    }
}

TEST_CASE("linear velocity field has constant grad Div") {
    const auto s = ubs();
    const EquityParams flat(0.0, 1e-12, 0.0, 0.0, 0.0, -0.5);
    const TransformedDomain d(flat, s.rates, s.market, {10.0, 0.7}, 3.0);
    for (const auto& p : random_points(d, 20, 2)) {
        const Vec2 g = d.grad_div_velocity(p.tau, p.x1, p.x2);
        CHECK(std::abs(g.x1) < 1e-20);
        CHECK(g.x2 == doctest::Approx(-std::exp(-s.rates.kappa() * (3.0 - p.tau))));
        const Mat2 j = d.velocity_jacobian(p.tau, p.x1, p.x2);
        CHECK(j.m21 == 0.0);
        CHECK(j.m22 == 0.0);
        CHECK(j.m12 == doctest::Approx(-std::exp(-s.rates.kappa() * (3.0 - p.tau)) * (p.x1 + 0.1)));
    }
}

TEST_CASE("initial and boundary data") {
    const auto s = ubs();
    const auto d = domain_for(s);
    for (const auto& p : random_points(d, 50, 9)) {
        CHECK(d.dirichlet_data(ProblemKind::U1, 0.0, p.x1, p.x2) == 1.0);
        CHECK(d.dirichlet_data(ProblemKind::U2, 0.0, p.x1, p.x2)
              == doctest::Approx(d.initial_data(ProblemKind::U2, p.x1, p.x2)));
        CHECK(d.initial_data(ProblemKind::U2, p.x1, p.x2)
              == doctest::Approx(std::exp(-s.rates.kappa() * 5.0) * (p.x2 - d.truncation().y_half)));
    }
    // Frozen-coefficient solution along x1 = 0 for lambda = 0 and a tiny kappa uses the series.
    const RateParams slow(1e-10, 0.0, 0.01);
    const TransformedDomain z(s.equity.without_hazard(), slow, s.market, {10.0, 0.5}, 2.0);
    const double f = z.dirichlet_data(ProblemKind::U1, 1.5, 0.0, 0.8);
    CHECK(f == doctest::Approx(std::exp(-(0.8 - 0.5) * 1.5)).epsilon(1e-9));
}

TEST_CASE("fichera classification") {
    for (const auto& s : {ubs(), jpm()}) {
        const auto d = domain_for(s);
        const FicheraResult f = fichera_classify(d);
        for (Face face : {Face::x1_lower, Face::x1_upper, Face::x2_lower, Face::x2_upper}) {
            CHECK(f[face].sigma1);
            CHECK_FALSE(f[face].sigma2);
            CHECK(f[face].needs_data);
        }
        for (Face face : {Face::t_lower, Face::t_upper}) {
            CHECK(f[face].sigma0);
            CHECK_FALSE(f[face].sigma1);
        }
        CHECK(f[Face::t_upper].sigma2);
        CHECK_FALSE(f[Face::t_lower].sigma2);
        CHECK(f[Face::t_upper].needs_data);
        CHECK_FALSE(f[Face::t_lower].needs_data);
    }
}

TEST_CASE("fichera classification without rate diffusion") {
    // delta = 0: the r-faces degenerate, the drift kappa theta e^{kappa t} decides:
    // it points into the domain at x2 = 0 and out of it at x2 = x2_max.
    const auto s = ubs();
    const RateParams frozen(s.rates.kappa(), s.rates.theta(), 0.0);
    const TransformedDomain d(s.equity, frozen, s.market, {10.0, 0.7}, 5.0);
    const FicheraResult f = fichera_classify(d);
    CHECK(f[Face::x2_lower].sigma0);
    CHECK(f[Face::x2_upper].sigma0);
    CHECK_FALSE(f[Face::x2_lower].sigma2);
    CHECK(f[Face::x2_upper].sigma2);
    CHECK(f[Face::x2_lower].min_fichera > 0.0);
}
