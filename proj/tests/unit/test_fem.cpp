#include "params.hpp"

#include "jdcev/error.hpp"
#include "jdcev/fem.hpp"
#include "jdcev/localization.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <random>

using namespace jdcev;
using namespace jdcev::testing;

namespace {

std::vector<double> constant(std::size_t n, double v) { return std::vector<double>(n, v); }

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

TransformedDomain ubs_domain() {
    const auto s = ubs();
    return TransformedDomain(s.equity, s.rates, s.market, default_truncation(s.market, s.rates, 5.0), 5.0);
}

} // namespace

TEST_CASE("mesh sizes") {
    const auto d = ubs_domain();
    for (auto [n, elems, nodes] : {std::tuple{4, 16u, 81u}, {32, 1024u, 4225u}, {1, 1u, 9u}}) {
        const FemMesh m = build_mesh(n, n, d);
        CHECK(m.element_count() == elems);
        CHECK(m.node_count() == nodes);
    }
    CHECK_THROWS_AS(FemMesh(0, 3, 1.0, 1.0), Error);
    CHECK_THROWS_AS(FemMesh(2, 2, -1.0, 1.0), Error);

    const FemMesh m(3, 2, 3.0, 2.0);
    for (std::size_t i = 1; i < m.grid_x1().size(); ++i) CHECK(m.grid_x1()[i] > m.grid_x1()[i - 1]);
    for (std::size_t e = 0; e < m.element_count(); ++e)
        for (int n : m.element(e)) {
            CHECK(n >= 0);
            CHECK(static_cast<std::size_t>(n) < m.node_count());
        }
    // element 4 = (ex 1, ey 1): local node 0 is global grid point (2, 2).
    CHECK(m.element(4)[0] == 2 * m.nodes_x() + 2);
    CHECK(m.element(4)[8] == 4 * m.nodes_x() + 4);
    CHECK((m.tag(0) & on_x1_lower) != 0);
    CHECK((m.tag(0) & on_x2_lower) != 0);
    CHECK((m.tag(m.node_count() - 1) & on_x1_upper) != 0);
    CHECK((m.tag(m.node_count() - 1) & on_x2_upper) != 0);
    CHECK(m.tag(m.nodes_x() + 1) == 0);
}

TEST_CASE("mass matrix integrates exactly") {
    const FemMesh m(5, 3, 2.0, 1.5);
    const SparseOperator mass = assemble_mass(m);
    const auto ones = constant(m.node_count(), 1.0);
    const auto m1 = mass.multiply(ones);
    CHECK(std::accumulate(m1.begin(), m1.end(), 0.0) == doctest::Approx(3.0).epsilon(1e-12));
    // integral of x1^2 x2^2 over the rectangle: (2^3 / 3)(1.5^3 / 3).
    const auto u = interpolate_nodal(m, [](double a, double b) { return a * a * b * b; });
    const auto mu = mass.multiply(u);
    CHECK(std::accumulate(mu.begin(), mu.end(), 0.0)
          == doctest::Approx(8.0 / 3.0 * 3.375 / 3.0).epsilon(1e-12));
    for (std::size_t i = 0; i < m.node_count(); ++i)
        for (std::size_t j = 0; j < m.node_count(); ++j)
            CHECK(mass.at(i, j) == doctest::Approx(mass.at(j, i)).epsilon(1e-15));
}

TEST_CASE("stiffness annihilates constants and is symmetric") {
    for (const auto& set : {ubs(), jpm()}) {
        const TransformedDomain dd(set.equity, set.rates, set.market,
                                   default_truncation(set.market, set.rates, 5.0), 5.0);
        const FemMesh m = build_mesh(6, 6, dd);
        const SparseOperator k = assemble_stiffness(1.3, dd, m);
        const auto k1 = k.multiply(constant(m.node_count(), 1.0));
        double scale = 0.0;
        for (double v : k.values()) scale = std::max(scale, std::abs(v));
        for (double v : k1) CHECK(std::abs(v) <= 1e-12 * scale);
        for (int i = 0; i < static_cast<int>(k.size()); ++i)
            for (int s = k.row_ptr()[i]; s < k.row_ptr()[i + 1]; ++s)
                CHECK(std::abs(k.values()[s] - k.at(k.cols()[s], i)) <= 1e-13 * scale);
    }
}

TEST_CASE("laplacian stiffness is positive semi-definite") {
    const FemMesh m(4, 4, 1.0, 1.0);
    Assembler as(m);
    const std::size_t nq = m.element_count() * 9;
    const SparseOperator k =
        as.assemble(constant(nq, 0.0), constant(nq, 1.0), constant(nq, 0.0), constant(nq, 1.0));
    const int n = static_cast<int>(k.size());
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int s = k.row_ptr()[i]; s < k.row_ptr()[i + 1]; ++s) dense(i, k.cols()[s]) = k.values()[s];
    CHECK(dense.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
    CHECK(k.size() == 81);
    for (int i = 0; i < n; ++i) CHECK(k.row_ptr()[i + 1] - k.row_ptr()[i] <= 25);
}

TEST_CASE("assembly does not depend on element order or worker count") {
    const auto d = ubs_domain();
    const FemMesh m = build_mesh(8, 8, d);
    Assembler serial(m, 1);
    const auto& q = serial.quadrature();
    const std::size_t nq = q.x1.size();
    std::vector<double> c(nq), a11(nq), a12(nq), a22(nq);
    for (std::size_t i = 0; i < nq; ++i) {
        c[i] = 1.0 + q.x1[i] * q.x2[i];
        a11[i] = 0.3 + std::sin(q.x1[i]);
        a12[i] = 0.1 * std::cos(q.x2[i]);
        a22[i] = 0.5 + q.x2[i] * q.x2[i];
    }
    const SparseOperator natural = serial.assemble(c, a11, a12, a22);
    std::vector<std::size_t> order(m.element_count());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), std::mt19937_64(4));
    const SparseOperator shuffled = serial.assemble(c, a11, a12, a22, order);
    CHECK(max_abs_diff(natural.values(), shuffled.values()) <= 1e-13);

    Assembler threaded(m, 3);
    CHECK(threaded.assemble(c, a11, a12, a22).values() == natural.values());
}

TEST_CASE("point location") {
    const FemMesh m(4, 5, 2.0, 1.0);
    Location l = locate(m, {0.0, 0.0});
    CHECK(l.element == 0);
    CHECK(l.xi == -1.0);
    CHECK(l.eta == -1.0);
    l = locate(m, {0.25 + 0.5, 0.1 + 0.2 * 2});
    CHECK(l.element == 2 * 4 + 1);
    CHECK(std::abs(l.xi) < 1e-14);
    CHECK(std::abs(l.eta) < 1e-14);
    l = locate(m, {2.0, 1.0});
    CHECK(l.element == m.element_count() - 1);
    CHECK(l.xi == 1.0);

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> ux(0.0, 2.0), uy(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const Vec2 p{ux(rng), uy(rng)};
        const Location loc = locate(m, p);
        const int ex = static_cast<int>(loc.element) % m.nx(), ey = static_cast<int>(loc.element) / m.nx();
        const double x = (ex + 0.5 * (loc.xi + 1.0)) * m.hx();
        const double y = (ey + 0.5 * (loc.eta + 1.0)) * m.hy();
        CHECK(std::abs(x - p.x1) < 1e-12);
        CHECK(std::abs(y - p.x2) < 1e-12);
    }
    CHECK_THROWS_AS(locate(m, {2.1, 0.5}), Error);
    CHECK_THROWS_AS(locate(m, {0.5, -1e-9}), Error);
    CHECK_NOTHROW(locate(m, {2.0 + 1e-13, 0.5}));
}

TEST_CASE("Q2 interpolation reproduces biquadratics") {
    const FemMesh m(3, 4, 1.5, 2.0);
    const auto one = constant(m.node_count(), 1.0);
    const auto u = interpolate_nodal(m, [](double a, double b) { return a * a * b * b + 2.0 * a - b; });
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> ux(0.0, 1.5), uy(0.0, 2.0);
    for (int i = 0; i < 100; ++i) {
        const Vec2 p{ux(rng), uy(rng)};
        CHECK(interpolate(m, one, p) == doctest::Approx(1.0).epsilon(1e-14));
        const Vec2 g1 = interpolate_grad(m, one, p);
        CHECK(std::abs(g1.x1) < 1e-12);
        CHECK(std::abs(g1.x2) < 1e-12);
        const double exact = p.x1 * p.x1 * p.x2 * p.x2 + 2.0 * p.x1 - p.x2;
        CHECK(std::abs(interpolate(m, u, p) - exact) < 1e-12);
        const Vec2 g = interpolate_grad(m, u, p);
        CHECK(std::abs(g.x1 - (2.0 * p.x1 * p.x2 * p.x2 + 2.0)) < 1e-11);
        CHECK(std::abs(g.x2 - (2.0 * p.x1 * p.x1 * p.x2 - 1.0)) < 1e-11);
    }
    for (std::size_t n = 0; n < m.node_count(); ++n)
        CHECK(interpolate(m, u, {m.node_x1(n), m.node_x2(n)}) == doctest::Approx(u[n]).epsilon(1e-14));
}

TEST_CASE("Q2 interpolation error is third order") {
    auto error = [](int n) {
        const FemMesh m(n, n, 1.0, 1.0);
        const auto u = interpolate_nodal(m, [](double a, double) { return a * a * a; });
        double e = 0.0;
        for (int i = 0; i <= 997; ++i) {
            const double x = i / 997.0;
            e = std::max(e, std::abs(interpolate(m, u, {x, 0.37}) - x * x * x));
        }
        return e;
    };
    const double ratio = error(8) / error(16);
    CHECK(ratio >= 6.0);
    CHECK(ratio <= 10.0);
}

TEST_CASE("left-hand operator combines mass, stiffness and reaction") {
    const auto d = ubs_domain();
    const FemMesh m = build_mesh(4, 4, d);
    const double dt = 0.01, tau = 2.0;
    const SparseOperator lhs = assemble_lhs(tau, dt, d, m);
    const SparseOperator mass = assemble_mass(m);
    const SparseOperator k = assemble_stiffness(tau, d, m);
    // With a field of ones only the mass and reaction parts remain.
    const auto ones = constant(m.node_count(), 1.0);
    const auto l1 = lhs.multiply(ones);
    const auto m1 = mass.multiply(ones);
    const auto k1 = k.multiply(ones);
    Assembler as(m);
    const auto& q = as.quadrature();
    std::vector<double> react(q.x1.size()), zero(q.x1.size(), 0.0);
    for (std::size_t i = 0; i < react.size(); ++i) react[i] = d.reaction(tau, q.x1[i], q.x2[i]);
    const auto r1 = as.assemble(react, zero, zero, zero).multiply(ones);
    for (std::size_t i = 0; i < ones.size(); ++i)
        CHECK(l1[i] == doctest::Approx(m1[i] / dt + 0.5 * k1[i] + 0.5 * r1[i]).epsilon(1e-12));
}
