#pragma once

#include "mllab/rng.hpp"

namespace mllab {

/// Symmetric stable law Z_d at the standardization used throughout:
/// d = 2 is N(0, 1); d < 2 has characteristic function exp(-|u|^d).
struct StableLawSpec {
  double d = 2.0;
  bool symmetric_standardized = true;
  double g0 = 0.0;

  static StableLawSpec standardized(double d);
};

/// Density at zero of the standardized symmetric stable law of index d.
/// Throws std::domain_error unless 0 < d <= 2.
double stable_density_at_zero(double d);

/// Mittag-Leffler law of order alpha normalized to mean one: the law of
/// Gamma(1 + alpha) * X^(-alpha) with X standard positive alpha-stable
/// (Laplace transform exp(-s^alpha)).
class MittagLeffler {
 public:
  explicit MittagLeffler(double alpha);

  double alpha() const noexcept { return alpha_; }

  /// p! Gamma(1+alpha)^p / Gamma(1+p alpha).
  double moment(unsigned p) const;

  /// Evaluated through Zolotarev's integral representation of the positive
  /// stable CDF; absolute error below 1e-9 on [0, 10].
  double cdf(double x) const;

  /// Kanter's representation of the positive stable variate.
  double sample(RandomStream& rng) const;

 private:
  double alpha_;
  double gamma_1p_alpha_;
};

inline double ml_moment(const MittagLeffler& ml, unsigned p) { return ml.moment(p); }
inline double ml_cdf(const MittagLeffler& ml, double x) { return ml.cdf(x); }
inline double ml_sample(const MittagLeffler& ml, RandomStream& rng) {
  return ml.sample(rng);
}

/// Zolotarev / Kanter kernel
///   A(phi) = (sin(a phi)/sin phi)^(1/(1-a)) * sin((1-a) phi)/sin(a phi),
/// for 0 < phi < pi. Increasing in phi.
double zolotarev_kernel(double alpha, double phi);

}  // namespace mllab
