#include "jdcev/localization.hpp"

#include "jdcev/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace jdcev {

TruncationConfig default_truncation(const MarketState& market, const RateParams& rates,
                                    double horizon) {
    require(rates.kappa() > 0.0, ErrorCategory::invalid_param,
            "default truncation needs kappa > 0; set truncation explicitly");
    const double s_max = 10.0 * std::max(1.0, market.s0());
    const double spread = 6.0 * rates.delta() / std::sqrt(2.0 * rates.kappa());
    const double y_half = (std::abs(market.r0()) + std::abs(rates.theta()) + spread)
                          * std::exp(rates.kappa() * horizon);
    return {s_max, y_half};
}

std::string_view to_string(ProblemKind kind) noexcept {
    return kind == ProblemKind::U1 ? "u1" : "u2";
}

std::string_view to_string(Face face) noexcept {
    switch (face) {
        case Face::t_lower: return "Gamma0-";
        case Face::t_upper: return "Gamma0+";
        case Face::x1_lower: return "Gamma1-";
        case Face::x1_upper: return "Gamma1+";
        case Face::x2_lower: return "Gamma2-";
        case Face::x2_upper: return "Gamma2+";
    }
    return "?";
}

TransformedDomain::TransformedDomain(EquityParams equity, RateParams rates, MarketState market,
                                     TruncationConfig truncation, double maturity)
    : equity_(equity), rates_(rates), market_(market), truncation_(truncation) {
    require(std::isfinite(maturity) && maturity > 0.0, ErrorCategory::invalid_param,
            "maturity must be positive");
    require(truncation.s_max > std::max(1.0, market.s0()), ErrorCategory::invalid_param,
            "truncation.s_max > max(1, S0) violated");
    require(truncation.y_half > 0.0, ErrorCategory::invalid_param, "truncation.y_half > 0 violated");
    const double y_reach = std::abs(market.r0()) * std::exp(rates.kappa() * maturity);
    require(y_reach < truncation.y_half, ErrorCategory::invalid_param,
            "truncation.y_half must contain r0 e^{kappa t} for t in [0, T]");
    equity_.check_horizon(maturity);

    pack_ = CoefficientPack{equity.a1(),    equity.a2(),    equity.b1(),  equity.b2(),
                            equity.c(),     equity.beta(),  rates.kappa(), rates.theta(),
                            rates.delta(),  market.rho(),   1.0 / truncation.s_max,
                            truncation.y_half, maturity};
    x1_max_ = truncation.s_max - pack_.s_min;
    x2_max_ = 2.0 * truncation.y_half;
}

Vec2 TransformedDomain::to_computational(double s, double r, double t) const {
    const Vec2 x{s - pack_.s_min, r * std::exp(rates_.kappa() * t) + pack_.y_half};
    constexpr double tol = 1e-12;
    if (!(x.x1 >= -tol && x.x1 <= x1_max_ + tol && x.x2 >= -tol && x.x2 <= x2_max_ + tol)) {
        fail(ErrorCategory::out_of_domain,
             "point (S=" + std::to_string(s) + ", r=" + std::to_string(r)
                 + ") lies outside the truncated domain");
    }
    return x;
}

Vec2 TransformedDomain::from_computational(double x1, double x2, double t) const {
    return {x1 + pack_.s_min, (x2 - pack_.y_half) * std::exp(-rates_.kappa() * t)};
}

double TransformedDomain::initial_data(ProblemKind kind, double /*x1*/, double x2) const {
    if (kind == ProblemKind::U1) return 1.0;
    return std::exp(-rates_.kappa() * pack_.maturity) * (x2 - pack_.y_half);
}

double TransformedDomain::dirichlet_data(ProblemKind kind, double tau, double x1, double x2) const {
    const double t1 = pack_.maturity;
    const double k = rates_.kappa();
    // integral of e^{-kappa u} over [T1 - tau, T1]
    double discount_weight;
    if (k < 1e-8) {
        const double kt = k * tau;
        discount_weight = std::exp(-k * t1) * tau * (1.0 + kt / 2.0 + kt * kt / 6.0);
    } else {
        discount_weight = std::exp(-k * t1) * std::expm1(k * tau) / k;
    }
    const double rate_integral = (x2 - pack_.y_half) * discount_weight;
    const double hazard_integral = integrated_hazard(t1 - tau, t1, x1 + pack_.s_min, equity_);
    return std::exp(-(rate_integral + hazard_integral)) * initial_data(kind, x1, x2);
}

std::array<std::array<double, 3>, 3>
TransformedDomain::oleinik_b_matrix(double t, double x1, double /*x2*/) const {
    // B in forward time equals the diffusion matrix A at tau = T1 - t.
    const SymMat2 a = coeff::diffusion(pack_, pack_.maturity - t, x1);
    return {{{0.0, 0.0, 0.0}, {0.0, a.a11, a.a12}, {0.0, a.a12, a.a22}}};
}

std::array<double, 3> TransformedDomain::oleinik_b_vector(double t, double x1, double x2) const {
    const double s = x1 + pack_.s_min;
    const double discount = std::exp(-pack_.kappa * t) * (x2 - pack_.y_half)
                            + coeff::hazard(pack_, t, s);
    return {1.0, discount * s, pack_.kappa * pack_.theta * std::exp(pack_.kappa * t)};
}

double TransformedDomain::oleinik_b0(double t, double x1, double x2) const {
    return -(std::exp(-pack_.kappa * t) * (x2 - pack_.y_half)
             + coeff::hazard(pack_, t, x1 + pack_.s_min));
}

namespace {

constexpr std::array<double, 5> gauss5_nodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                             0.5384693101056831, 0.9061798459386640};

// sum_j d b_ij / d x_j by central differences of B.
std::array<double, 3> divergence_of_b(const TransformedDomain& d, double t, double x1, double x2) {
    const std::array<double, 3> x{t, x1, x2};
    std::array<double, 3> div{0.0, 0.0, 0.0};
    for (int j = 0; j < 3; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
        auto xp = x;
        auto xm = x;
        xp[j] += h;
        xm[j] -= h;
        const auto bp = d.oleinik_b_matrix(xp[0], xp[1], xp[2]);
        const auto bm = d.oleinik_b_matrix(xm[0], xm[1], xm[2]);
        for (int i = 0; i < 3; ++i) div[i] += (bp[i][j] - bm[i][j]) / (2.0 * h);
    }
    return div;
}

} // namespace

FicheraResult fichera_classify(const TransformedDomain& d) {
    constexpr double tol = 1e-12;
    const std::array<double, 3> upper{d.maturity(), d.x1_max(), d.x2_max()};
    FicheraResult result;

    for (int f = 0; f < 6; ++f) {
        const int axis = f / 2;
        const bool at_upper = (f % 2) == 1;
        std::array<double, 3> normal{0.0, 0.0, 0.0};
        normal[axis] = at_upper ? -1.0 : 1.0;  // inward

        const int u_axis = (axis + 1) % 3;
        const int v_axis = (axis + 2) % 3;

        FaceClassification fc;
        fc.face = static_cast<Face>(f);
        fc.min_normal_diffusion = INFINITY;
        fc.min_fichera = INFINITY;
        fc.max_fichera = -INFINITY;
        int degenerate = 0;
        int samples = 0;
        bool negative = false;
        bool positive = false;
        for (double gu : gauss5_nodes) {
            for (double gv : gauss5_nodes) {
                std::array<double, 3> x{};
                x[axis] = at_upper ? upper[axis] : 0.0;
                x[u_axis] = 0.5 * (gu + 1.0) * upper[u_axis];
                x[v_axis] = 0.5 * (gv + 1.0) * upper[v_axis];
                ++samples;

                const auto bm = d.oleinik_b_matrix(x[0], x[1], x[2]);
                double mbm = 0.0;
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) mbm += bm[i][j] * normal[i] * normal[j];
                fc.min_normal_diffusion = std::min(fc.min_normal_diffusion, std::abs(mbm));
                if (std::abs(mbm) > tol) continue;

                ++degenerate;
                const auto bv = d.oleinik_b_vector(x[0], x[1], x[2]);
                const auto div = divergence_of_b(d, x[0], x[1], x[2]);
                double fichera = 0.0;
                for (int i = 0; i < 3; ++i) fichera += (bv[i] - div[i]) * normal[i];
                fc.min_fichera = std::min(fc.min_fichera, fichera);
                fc.max_fichera = std::max(fc.max_fichera, fichera);
                negative = negative || fichera < -tol;
                positive = positive || fichera > tol;
            }
        }
        if (negative && positive) {
            fail(ErrorCategory::inconclusive_classification,
                 "Fichera function changes sign on face " + std::string(to_string(fc.face)));
        }
        fc.sigma1 = degenerate < samples;
        fc.sigma0 = degenerate == samples;
        fc.sigma2 = fc.sigma0 && negative;
        fc.needs_data = fc.sigma1 || fc.sigma2 || negative;
        result.faces[f] = fc;
    }
    return result;
}

} // namespace jdcev
