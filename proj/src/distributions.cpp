#include "mllab/distributions.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mllab {

double stable_density_at_zero(double d) {
  if (!(d > 0.0 && d <= 2.0)) {
    throw std::domain_error("stability index must lie in (0, 2], got " + std::to_string(d));
  }
  if (d == 2.0) return 1.0 / std::sqrt(2.0 * std::numbers::pi);
  // (1/pi) * integral_0^inf exp(-u^d) du
  return std::tgamma(1.0 + 1.0 / d) / std::numbers::pi;
}

StableLawSpec StableLawSpec::standardized(double d) {
  return StableLawSpec{d, true, stable_density_at_zero(d)};
}

MittagLeffler::MittagLeffler(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("Mittag-Leffler order must lie in (0, 1), got " +
                            std::to_string(alpha));
  }
  gamma_1p_alpha_ = std::tgamma(1.0 + alpha);
}

double MittagLeffler::moment(unsigned p) const {
  const double dp = static_cast<double>(p);
  return std::exp(std::lgamma(dp + 1.0) + dp * std::log(gamma_1p_alpha_) -
                  std::lgamma(1.0 + dp * alpha_));
}

double zolotarev_kernel(double alpha, double phi) {
  const double one_minus = 1.0 - alpha;
  const double log_a = std::log(std::sin(alpha * phi)) - std::log(std::sin(phi));
  return std::exp(log_a / one_minus) * std::sin(one_minus * phi) / std::sin(alpha * phi);
}

double MittagLeffler::cdf(double x) const {
  if (!(x > 0.0)) return 0.0;
  if (std::isinf(x)) return 1.0;
  // P(Y <= x) = P(X >= s) with s = (x / Gamma(1+a))^(-1/a), and
  // P(X <= s) = (1/pi) int_0^pi exp(-A(phi) s^(-a/(1-a))) dphi.
  const double z = std::pow(x / gamma_1p_alpha_, 1.0 / (1.0 - alpha_));
  const double a = alpha_;
  const double eps = 1e-300;
  auto integrand = [a, z, eps](double phi) {
    phi = std::clamp(phi, eps, std::numbers::pi - 1e-15);
    const double k = zolotarev_kernel(a, phi);
    if (!std::isfinite(k)) return 1.0;
    return -std::expm1(-k * z);
  };
  using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double integral = Quad::integrate(integrand, 0.0, std::numbers::pi, 20, 1e-13);
  return std::clamp(integral / std::numbers::pi, 0.0, 1.0);
}

double MittagLeffler::sample(RandomStream& rng) const {
  const double phi = std::numbers::pi * rng.uniform_open();
  const double e = rng.exponential();
  // X = (A/E)^((1-a)/a)  =>  X^(-a) = (E/A)^(1-a)
  return gamma_1p_alpha_ * std::pow(e / zolotarev_kernel(alpha_, phi), 1.0 - alpha_);
}

}  // namespace mllab
