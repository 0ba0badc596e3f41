#include "jdcev/model.hpp"

#include "jdcev/error.hpp"

#include <cmath>
#include <string>

namespace jdcev {

std::string_view category_name(ErrorCategory c) noexcept {
    switch (c) {
        case ErrorCategory::domain: return "domain";
        case ErrorCategory::invalid_param: return "invalid_param";
        case ErrorCategory::out_of_domain: return "out_of_domain";
        case ErrorCategory::size: return "size";
        case ErrorCategory::length_mismatch: return "length_mismatch";
        case ErrorCategory::missing_date: return "missing_date";
        case ErrorCategory::inconclusive_classification: return "inconclusive_classification";
        case ErrorCategory::solver: return "solver";
        case ErrorCategory::config: return "config";
        case ErrorCategory::io: return "io";
    }
    return "unknown";
}

namespace {

void check_finite(double v, const char* name) {
    require(std::isfinite(v), ErrorCategory::invalid_param, std::string(name) + " must be finite");
}

} // namespace

RateParams::RateParams(double kappa, double theta, double delta)
    : kappa_(kappa), theta_(theta), delta_(delta) {
    check_finite(kappa, "kappa");
    check_finite(theta, "theta");
    check_finite(delta, "delta");
    require(kappa >= 0.0, ErrorCategory::invalid_param, "kappa >= 0 violated");
    require(delta >= 0.0, ErrorCategory::invalid_param, "delta >= 0 violated");
}

EquityParams::EquityParams(double a1, double a2, double b1, double b2, double c, double beta)
    : a1_(a1), a2_(a2), b1_(b1), b2_(b2), c_(c), beta_(beta) {
    check_finite(a1, "a1");
    check_finite(a2, "a2");
    check_finite(b1, "b1");
    check_finite(b2, "b2");
    check_finite(c, "c");
    check_finite(beta, "beta");
    require(c >= 0.0, ErrorCategory::invalid_param, "c >= 0 violated");
    require(beta < 0.0, ErrorCategory::invalid_param, "beta < 0 violated");
    check_horizon(0.0);
}

void EquityParams::check_horizon(double horizon) const {
    require(horizon >= 0.0, ErrorCategory::invalid_param, "horizon must be non-negative");
    // a and b are affine, so the endpoints decide.
    for (double t : {0.0, horizon}) {
        require(a(t) >= 0.0, ErrorCategory::invalid_param,
                "a(t) >= 0 violated at t=" + std::to_string(t));
        require(b(t) >= 0.0, ErrorCategory::invalid_param,
                "b(t) >= 0 violated at t=" + std::to_string(t));
    }
}

EquityParams EquityParams::without_hazard() const {
    return EquityParams(a1_, a2_, 0.0, 0.0, 0.0, beta_);
}

MarketState::MarketState(double s0, double r0, double rho) : s0_(s0), r0_(r0), rho_(rho) {
    check_finite(s0, "S0");
    check_finite(r0, "r0");
    check_finite(rho, "rho");
    require(s0 > 0.0, ErrorCategory::invalid_param, "S0 > 0 violated");
    require(std::abs(rho) < 1.0, ErrorCategory::invalid_param, "|rho| < 1 violated");
}

BondSpec::BondSpec(double face_value, std::vector<double> coupon_dates,
                   std::vector<double> coupon_amounts, double recovery)
    : face_value_(face_value),
      coupon_dates_(std::move(coupon_dates)),
      coupon_amounts_(std::move(coupon_amounts)),
      recovery_(recovery) {
    require(std::isfinite(face_value_) && face_value_ > 0.0, ErrorCategory::invalid_param,
            "face_value > 0 violated");
    require(!coupon_dates_.empty(), ErrorCategory::invalid_param,
            "coupon_dates must contain at least the maturity");
    require(coupon_dates_.size() == coupon_amounts_.size(), ErrorCategory::invalid_param,
            "coupon_amounts must have the same length as coupon_dates");
    require(coupon_dates_.front() > 0.0, ErrorCategory::invalid_param,
            "coupon dates must be positive");
    for (std::size_t i = 1; i < coupon_dates_.size(); ++i) {
        require(coupon_dates_[i] > coupon_dates_[i - 1], ErrorCategory::invalid_param,
                "coupon_dates must be strictly increasing");
    }
    for (double cp : coupon_amounts_) check_finite(cp, "coupon amount");
    require(recovery_ >= 0.0 && recovery_ <= 1.0, ErrorCategory::invalid_param,
            "recovery in [0,1] violated");
}

double volatility(double t, double s, const EquityParams& p) {
    require(s > 0.0, ErrorCategory::domain, "volatility: S must be positive");
    return p.a(t) * std::pow(s, p.beta());
}

double hazard(double t, double s, const EquityParams& p) {
    require(s > 0.0, ErrorCategory::domain, "hazard: S must be positive");
    const double a = p.a(t);
    return p.b(t) + p.c() * a * a * std::pow(s, 2.0 * p.beta());
}

double integrated_hazard(double t1, double t2, double s, const EquityParams& p) {
    require(s > 0.0, ErrorCategory::domain, "integrated_hazard: S must be positive");
    require(t2 >= t1, ErrorCategory::domain, "integrated_hazard: t2 < t1");
    const double d1 = t2 - t1;
    const double d2 = d1 * (t2 + t1);                 // t2^2 - t1^2
    const double d3 = d1 * (t2 * t2 + t2 * t1 + t1 * t1);  // t2^3 - t1^3
    const double base = 0.5 * p.b1() * d2 + p.b2() * d1;
    // (a1 u + a2)^2 = a1^2 u^2 + 2 a1 a2 u + a2^2
    const double a_sq = p.a1() * p.a1() * d3 / 3.0 + p.a1() * p.a2() * d2 + p.a2() * p.a2() * d1;
    return base + p.c() * std::pow(s, 2.0 * p.beta()) * a_sq;
}

double vasicek_zcb(double r, double tau, const RateParams& p) {
    require(tau >= 0.0, ErrorCategory::domain, "vasicek_zcb: tau must be non-negative");
    require(p.kappa() > 0.0, ErrorCategory::domain, "vasicek_zcb: kappa must be positive");
    const double k = p.kappa();
    const double d2 = p.delta() * p.delta();
    const double b = -std::expm1(-k * tau) / k;
    const double a = (p.theta() - d2 / (2.0 * k * k)) * (b - tau) - d2 * b * b / (4.0 * k);
    return std::exp(a - b * r);
}

} // namespace jdcev
