#include "params.hpp"

#include "jdcev/fem.hpp"
#include "jdcev/localization.hpp"
#include "jdcev/simd/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace jdcev;
using namespace jdcev::testing;
using simd::Isa;

namespace {

std::vector<double> uniform(std::size_t n, double lo, double hi, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b, double floor) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]) / std::max(std::abs(b[i]), floor));
    return m;
}

CoefficientPack pack_for(const ParameterSet& s) {
    return TransformedDomain(s.equity, s.rates, s.market, default_truncation(s.market, s.rates, 5.0), 5.0)
        .pack();
}

} // namespace

TEST_CASE("scalar kernels are always available") {
    CHECK(simd::supported(Isa::scalar));
    CHECK(simd::kernels(Isa::scalar).isa == Isa::scalar);
    CHECK(simd::to_string(Isa::avx2) == "avx2");
    const auto x = uniform(37, -30.0, 30.0, 1);
    std::vector<double> out(x.size()), lg(x.size()), pos = uniform(37, 1e-3, 1e3, 2);
    simd::kernels(Isa::scalar).exp(x, out);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(out[i] == std::exp(x[i]));
    simd::kernels(Isa::scalar).log(pos, lg);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(lg[i] == std::log(pos[i]));
}

TEST_CASE("avx2 kernels match the scalar reference") {
    if (!simd::supported(Isa::avx2)) {
        MESSAGE("avx2 not available on this CPU or build; skipped");
        return;
    }
    const auto& sc = simd::kernels(Isa::scalar);
    const auto& av = simd::kernels(Isa::avx2);
    CHECK(av.isa == Isa::avx2);

    SUBCASE("exp and log") {
        // odd length exercises the tail lanes
        for (std::size_t n : {1u, 3u, 4u, 1001u}) {
            const auto x = uniform(n, -700.0, 700.0, n);
            std::vector<double> a(n), b(n);
            sc.exp(x, a);
            av.exp(x, b);
            CHECK(max_rel_diff(b, a, 0.0) <= 4e-16);
            const auto y = uniform(n, 1e-300, 1e300, n + 7);
            const auto z = uniform(n, 0.5, 2.0, n + 9);
            for (const auto* in : {&y, &z}) {
                sc.log(*in, a);
                av.log(*in, b);
                double worst = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(std::abs(a[i]), 1.0));
                CHECK(worst <= 4e-16);
            }
        }
        std::vector<double> one{1.0}, out(1);
        av.log(one, out);
        CHECK(out[0] == 0.0);
        std::vector<double> zero{0.0};
        av.exp(zero, out);
        CHECK(out[0] == 1.0);
    }

    for (const auto& set : {ubs(), jpm()}) {
        const CoefficientPack p = pack_for(set);
        const std::size_t n = 1003;
        const auto x1 = uniform(n, 0.0, 10.0 - 0.1, 3);
        const auto x2 = uniform(n, 0.0, 2.0 * p.y_half, 4);

        SUBCASE("velocity") {
            std::vector<double> a1(n), a2(n), b1(n), b2(n);
            sc.velocity(p, 1.7, x1, x2, a1, a2);
            av.velocity(p, 1.7, x1, x2, b1, b2);
            CHECK(max_rel_diff(b1, a1, 1e-3) <= 1e-13);
            CHECK(max_rel_diff(b2, a2, 1e-3) <= 1e-13);
        }

        SUBCASE("point coefficients") {
            std::vector<std::vector<double>> a(9, std::vector<double>(n)), b(9, std::vector<double>(n));
            auto cols = [](std::vector<std::vector<double>>& v) {
                return simd::CoefficientColumns{v[0].data(), v[1].data(), v[2].data(),
                                                v[3].data(), v[4].data(), v[5].data(),
                                                v[6].data(), v[7].data(), v[8].data()};
            };
            sc.point_coefficients(p, 3.1, x1, x2, cols(a));
            av.point_coefficients(p, 3.1, x1, x2, cols(b));
            for (int c = 0; c < 9; ++c) CHECK(max_rel_diff(b[c], a[c], 1e-6) <= 1e-13);
        }
    }

    SUBCASE("element matrices and vectors") {
        const auto& t = q2_reference().tables;
        const std::size_t ne = 13;
        const auto m = uniform(ne * 9, 0.5, 2.0, 5), k11 = uniform(ne * 9, 0.1, 1.0, 6),
                   k12 = uniform(ne * 9, -0.1, 0.1, 7), k22 = uniform(ne * 9, 0.1, 1.0, 8);
        std::vector<double> a(ne * 81), b(ne * 81);
        sc.element_matrices(t, ne, m.data(), k11.data(), k12.data(), k22.data(), a.data());
        av.element_matrices(t, ne, m.data(), k11.data(), k12.data(), k22.data(), b.data());
        double scale = 0.0, diff = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            scale = std::max(scale, std::abs(a[i]));
            diff = std::max(diff, std::abs(a[i] - b[i]));
        }
        CHECK(diff <= 1e-14 * scale);

        std::vector<double> va(ne * 9), vb(ne * 9);
        sc.element_vectors(t, ne, m.data(), k12.data(), k22.data(), va.data());
        av.element_vectors(t, ne, m.data(), k12.data(), k22.data(), vb.data());
        scale = diff = 0.0;
        for (std::size_t i = 0; i < va.size(); ++i) {
            scale = std::max(scale, std::abs(va[i]));
            diff = std::max(diff, std::abs(va[i] - vb[i]));
        }
        CHECK(diff <= 1e-14 * scale);
    }

    SUBCASE("monte carlo step") {
        const auto set = jpm();
        const std::size_t n = 1001;
        const double dt = 1.0 / 360.0, k = set.rates.kappa();
        const simd::McStepConstants c{dt,
                                      std::sqrt(dt),
                                      set.equity.a(0.5),
                                      set.equity.b(0.5),
                                      set.equity.a(0.5 + dt),
                                      set.equity.b(0.5 + dt),
                                      set.equity.c(),
                                      set.equity.beta(),
                                      std::exp(-k * dt),
                                      set.rates.theta(),
                                      set.rates.delta() * std::sqrt(-std::expm1(-2 * k * dt) / (2 * k)),
                                      set.market.rho(),
                                      std::sqrt(1 - set.market.rho() * set.market.rho()),
                                      std::log(0.1)};
        auto logs = uniform(n, std::log(0.1) - 0.01, 2.0, 9);
        auto rate = uniform(n, -0.05, 0.1, 10);
        auto integral = uniform(n, 0.0, 0.3, 11);
        std::vector<double> alive(n, 1.0);
        alive[5] = 0.0;
        const auto z1 = uniform(n, -3.0, 3.0, 12), z2 = uniform(n, -3.0, 3.0, 13);
        auto l2 = logs, r2 = rate, i2 = integral, al2 = alive;
        sc.mc_step(c, n, {logs.data(), rate.data(), integral.data(), alive.data()}, z1.data(), z2.data());
        av.mc_step(c, n, {l2.data(), r2.data(), i2.data(), al2.data()}, z1.data(), z2.data());
        CHECK(alive == al2);
        CHECK(max_rel_diff(l2, logs, 1.0) <= 1e-14);
        CHECK(max_rel_diff(r2, rate, 1e-3) <= 1e-14);
        CHECK(max_rel_diff(i2, integral, 1e-3) <= 1e-14);
        CHECK(alive[5] == 0.0);
    }
}

TEST_CASE("active kernels honour the environment") {
    const auto& k = simd::active_kernels();
    if (simd::supported(Isa::avx2)) {
        const char* env = std::getenv("JDCEV_SIMD");
        CHECK(k.isa == (env != nullptr && std::string(env) == "scalar" ? Isa::scalar : Isa::avx2));
    } else {
        CHECK(k.isa == Isa::scalar);
        CHECK_THROWS(simd::kernels(Isa::avx2));
    }
}
