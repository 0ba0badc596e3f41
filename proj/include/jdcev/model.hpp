#pragma once

// Model parameters of the extended JDCEV equity/credit model with Vasicek short
// rate, and the closed-form scalar functions built on them.
//
//   dr = kappa (theta - r) dt + delta dW1
//   dS = (r + lambda(t,S)) S dt + sigma(t,S) S dW2,   dW1 dW2 = rho dt
//   sigma(t,S) = a(t) S^beta,   lambda(t,S) = b(t) + c sigma(t,S)^2
//   a(t) = a1 t + a2,           b(t) = b1 t + b2

#include <vector>

namespace jdcev {

class RateParams {
public:
    /// kappa = 0 or delta = 0 describe degenerate (oracle) configurations.
    RateParams(double kappa, double theta, double delta);

    double kappa() const noexcept { return kappa_; }
    double theta() const noexcept { return theta_; }
    double delta() const noexcept { return delta_; }

    bool operator==(const RateParams&) const = default;

private:
    double kappa_;
    double theta_;
    double delta_;
};

class EquityParams {
public:
    EquityParams(double a1, double a2, double b1, double b2, double c, double beta);

    double a1() const noexcept { return a1_; }
    double a2() const noexcept { return a2_; }
    double b1() const noexcept { return b1_; }
    double b2() const noexcept { return b2_; }
    double c() const noexcept { return c_; }
    double beta() const noexcept { return beta_; }

    double a(double t) const noexcept { return a1_ * t + a2_; }
    double b(double t) const noexcept { return b1_ * t + b2_; }

    /// Throws invalid_param unless a(t) >= 0 and b(t) >= 0 on [0, horizon].
    void check_horizon(double horizon) const;

    /// Copy with b1 = b2 = c = 0, i.e. lambda identically zero.
    EquityParams without_hazard() const;

    bool operator==(const EquityParams&) const = default;

private:
    double a1_, a2_, b1_, b2_, c_, beta_;
};

class MarketState {
public:
    MarketState(double s0, double r0, double rho);

    double s0() const noexcept { return s0_; }
    double r0() const noexcept { return r0_; }
    double rho() const noexcept { return rho_; }

    bool operator==(const MarketState&) const = default;

private:
    double s0_;
    double r0_;
    double rho_;
};

/// Coupon amounts are fractions of face value (0.0125 for a 1.25% annual coupon).
class BondSpec {
public:
    BondSpec(double face_value, std::vector<double> coupon_dates,
             std::vector<double> coupon_amounts, double recovery);

    double face_value() const noexcept { return face_value_; }
    const std::vector<double>& coupon_dates() const noexcept { return coupon_dates_; }
    const std::vector<double>& coupon_amounts() const noexcept { return coupon_amounts_; }
    double recovery() const noexcept { return recovery_; }
    double maturity() const noexcept { return coupon_dates_.back(); }
    std::size_t coupon_count() const noexcept { return coupon_dates_.size(); }

    bool operator==(const BondSpec&) const = default;

private:
    double face_value_;
    std::vector<double> coupon_dates_;
    std::vector<double> coupon_amounts_;
    double recovery_;
};

/// a(t) S^beta.
double volatility(double t, double s, const EquityParams& p);

/// b(t) + c a(t)^2 S^(2 beta).
double hazard(double t, double s, const EquityParams& p);

/// Integral of hazard(u, s) over u in [t1, t2], exact polynomial antiderivative.
double integrated_hazard(double t1, double t2, double s, const EquityParams& p);

/// Affine Vasicek zero-coupon bond price exp(A(tau) - B(tau) r). Requires kappa > 0.
double vasicek_zcb(double r, double tau, const RateParams& p);

} // namespace jdcev
