#pragma once

// Localization of the pricing problem to a bounded rectangle.
//
// Financial coordinates (S, r, t) map to computational ones through
//   y  = r e^{kappa t},  x1 = S - 1/s_max,  x2 = y + y_half,  tau = T1 - t,
// giving Omega = (0, s_max - 1/s_max) x (0, 2 y_half).

#include "jdcev/coefficients.hpp"
#include "jdcev/model.hpp"

#include <array>
#include <string_view>

namespace jdcev {

struct TruncationConfig {
    double s_max;   // upper price truncation, the lower one is 1/s_max
    double y_half;  // half-width of the y interval

    bool operator==(const TruncationConfig&) const = default;
};

/// s_max = 10 max(1, S0), y_half = (|r0| + |theta| + 6 delta / sqrt(2 kappa)) e^{kappa T}.
TruncationConfig default_truncation(const MarketState& market, const RateParams& rates,
                                    double horizon);

enum class ProblemKind {
    U1,  // terminal payoff 1
    U2,  // terminal payoff e^{-kappa T1} y, i.e. the short rate at T1
};

std::string_view to_string(ProblemKind kind) noexcept;

class TransformedDomain {
public:
    TransformedDomain(EquityParams equity, RateParams rates, MarketState market,
                      TruncationConfig truncation, double maturity);

    const EquityParams& equity() const noexcept { return equity_; }
    const RateParams& rates() const noexcept { return rates_; }
    const MarketState& market() const noexcept { return market_; }
    const TruncationConfig& truncation() const noexcept { return truncation_; }
    const CoefficientPack& pack() const noexcept { return pack_; }

    double maturity() const noexcept { return pack_.maturity; }
    double s_min() const noexcept { return pack_.s_min; }
    double x1_max() const noexcept { return x1_max_; }
    double x2_max() const noexcept { return x2_max_; }

    /// (S, r) at calendar time t to (x1, x2). Throws out_of_domain outside the closed rectangle.
    Vec2 to_computational(double s, double r, double t) const;
    /// Inverse of to_computational; returns (S, r).
    Vec2 from_computational(double x1, double x2, double t) const;

    SymMat2 diffusion(double tau, double x1) const { return coeff::diffusion(pack_, tau, x1); }
    Vec2 velocity(double tau, double x1, double x2) const {
        return coeff::velocity(pack_, tau, x1, x2);
    }
    Mat2 velocity_jacobian(double tau, double x1, double x2) const {
        return coeff::velocity_jacobian(pack_, tau, x1, x2);
    }
    Vec2 grad_div_velocity(double tau, double x1, double x2) const {
        return coeff::grad_div_velocity(pack_, tau, x1, x2);
    }
    double reaction(double tau, double x1, double x2) const {
        return coeff::reaction(pack_, tau, x1, x2);
    }

    double initial_data(ProblemKind kind, double x1, double x2) const;
    /// Frozen-coefficient solution used as Dirichlet data on x1 = 0 and x2 = 0, x2_max.
    double dirichlet_data(ProblemKind kind, double tau, double x1, double x2) const;

    // Forward-time second-order form sum b_ij d_ij u + sum b_j d_j u + b0 u in
    // coordinates (x0 = t, x1, x2); row/column 0 of B is zero.
    std::array<std::array<double, 3>, 3> oleinik_b_matrix(double t, double x1, double x2) const;
    std::array<double, 3> oleinik_b_vector(double t, double x1, double x2) const;
    double oleinik_b0(double t, double x1, double x2) const;

private:
    EquityParams equity_;
    RateParams rates_;
    MarketState market_;
    TruncationConfig truncation_;
    CoefficientPack pack_;
    double x1_max_;
    double x2_max_;
};

/// Faces of the space-time box (0,T1) x Omega, named after the coordinate they fix.
enum class Face { t_lower, t_upper, x1_lower, x1_upper, x2_lower, x2_upper };

std::string_view to_string(Face face) noexcept;

struct FaceClassification {
    Face face;
    bool sigma0 = false;      // normal-normal diffusion vanishes on every sample
    bool sigma1 = false;      // normal-normal diffusion is non-zero somewhere
    bool sigma2 = false;      // in sigma0 with negative Fichera function
    bool needs_data = false;  // sigma1 or sigma2
    double min_normal_diffusion = 0.0;
    double min_fichera = 0.0;
    double max_fichera = 0.0;
};

struct FicheraResult {
    std::array<FaceClassification, 6> faces;

    const FaceClassification& operator[](Face f) const { return faces[static_cast<int>(f)]; }
};

/// Oleinik-Radkevich classification of the faces, sampled on 5x5 Gauss points per face.
/// Throws inconclusive_classification if the Fichera function changes sign on a sigma0 face.
FicheraResult fichera_classify(const TransformedDomain& d);

} // namespace jdcev
