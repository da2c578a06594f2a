#include "mllab/calibrate.hpp"

#include "mllab/distributions.hpp"
#include "mllab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mllab {

CalibrationReport calibrate(const ProcessSpec& spec, std::size_t horizon) {
  if (!spec.is_iid_walk()) throw std::invalid_argument("calibration needs an i.i.d. walk");
  if (horizon < 20) throw std::invalid_argument("calibration horizon must be at least 20");
  const double d = spec.kind == ProcessKind::LazyWalk ? 2.0 : spec.d;
  const double beta = 1.0 / d;

  CalibrationReport r;
  r.horizon = horizon;
  WalkOracle oracle(spec, horizon, default_oracle_radius(spec, horizon));
  const std::size_t first = std::max<std::size_t>(1, horizon / 10);
  for (std::size_t n = 1; n <= horizon; ++n) {
    oracle.step();
    if (n >= first) {
      r.n_values.push_back(n);
      r.p_zero.push_back(oracle.prob(0));
    }
  }

  CompensatedSum intercept;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double count = static_cast<double>(r.n_values.size());
  for (std::size_t i = 0; i < r.n_values.size(); ++i) {
    const double lx = std::log(static_cast<double>(r.n_values[i]));
    const double ly = std::log(r.p_zero[i]);
    intercept += ly + beta * lx;
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  r.ratio_g0_over_c = std::exp(intercept.value() / count);
  r.fitted_exponent = -(count * sxy - sx * sy) / (count * sxx - sx * sx);
  for (std::size_t i = 0; i < r.n_values.size(); ++i) {
    const double model =
        r.ratio_g0_over_c * std::pow(static_cast<double>(r.n_values[i]), -beta);
    r.max_relative_residual = std::max(r.max_relative_residual, std::abs(r.p_zero[i] / model - 1.0));
  }
  if (r.max_relative_residual > 0.05) {
    throw CalibrationError("calibration residual " + std::to_string(r.max_relative_residual) +
                           " exceeds 5%; increase the horizon");
  }
  const double g0 = stable_density_at_zero(d);
  r.scheme = ScalingScheme::make(d, g0 / r.ratio_g0_over_c, g0);
  if (spec.kind == ProcessKind::LazyWalk) {
    r.closed_form_c_over_g0 = std::sqrt(0.5) * std::sqrt(2.0 * std::acos(-1.0));
    r.closed_form_deviation =
        std::abs((1.0 / r.ratio_g0_over_c) / r.closed_form_c_over_g0 - 1.0);
  }
  return r;
}

}  // namespace mllab
