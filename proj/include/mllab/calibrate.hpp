#pragma once

#include "mllab/localtime.hpp"
#include "mllab/processes.hpp"

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mllab {

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CalibrationReport {
  ScalingScheme scheme;
  std::size_t horizon = 0;
  std::vector<std::size_t> n_values;
  std::vector<double> p_zero;    // exact P(S_n = 0)
  double ratio_g0_over_c = 0.0;  // fitted with beta = 1/d fixed
  double fitted_exponent = 0.0;  // free log-log slope, sign flipped
  double max_relative_residual = 0.0;
  /// d = 2 only: closed form sigma * g0^-1 and the relative deviation of the fit from it.
  double closed_form_c_over_g0 = 0.0;
  double closed_form_deviation = 0.0;
};

/// Fits P(S_n = 0) ~ (g0 / c) n^(-1/d) over n in [horizon/10, horizon] on the
/// exact oracle. Only g0 / c is identifiable from P(S_n = 0), so g0 is fixed
/// to the standardized stable density at zero and c follows. Throws
/// CalibrationError if the relative residual exceeds 5%.
CalibrationReport calibrate(const ProcessSpec& spec, std::size_t horizon);

}  // namespace mllab
