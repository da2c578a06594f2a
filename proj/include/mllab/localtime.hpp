#pragma once

#include "mllab/processes.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <ostream>
#include <vector>

namespace mllab {

/// l(k, level) for k = 1..n (entry k-1) and the 1-based return times.
struct LocalTimeProfile {
  std::int64_t level = 0;
  std::vector<std::int64_t> counts;
  std::vector<std::size_t> return_times;
};

/// Visits are counted from i = 1; S_0 = 0 is not a visit.
LocalTimeProfile local_time(const IntTrajectory& traj, std::int64_t level);

/// CSV "step,count".
void write_profile_csv(std::ostream& os, const LocalTimeProfile& profile);

/// B_n = scale_c * n^beta_exp with beta_exp = 1/d, and
/// a_n = g0 * sum_{k <= n} 1 / B_k.
struct ScalingScheme {
  double d = 2.0;
  double beta_exp = 0.5;
  double scale_c = 1.0;
  double g0 = 1.0;

  /// Throws std::invalid_argument unless beta in [1/2, 1), c > 0, g0 > 0.
  static ScalingScheme make(double d, double scale_c, double g0);
  /// Increments in {-1, 0, 1} w.p. 1/4, 1/2, 1/4: c = sqrt(1/2), g0 = 1/sqrt(2 pi).
  static ScalingScheme lazy_walk();

  double alpha() const noexcept { return 1.0 - beta_exp; }
  double scale(double n) const;
};

/// a_n by direct summation. Throws for n < 1.
double normalizer(const ScalingScheme& scheme, std::size_t n);

/// Prefix sums of a_n up to a fixed horizon; O(1) queries.
class ReturnSequence {
 public:
  ReturnSequence(const ScalingScheme& scheme, std::size_t horizon);

  std::size_t horizon() const noexcept { return prefix_.size() - 1; }
  const ScalingScheme& scheme() const noexcept { return scheme_; }

  /// a_n, 1 <= n <= horizon.
  double operator()(std::size_t n) const;
  /// a at a real argument u >= 1, defined as a_floor(u).
  double at(double u) const;

 private:
  ScalingScheme scheme_;
  std::vector<double> prefix_;
};

/// Streaming exact distribution of S_m for an i.i.d. walk on [-radius, radius].
/// Mass leaving the window is absorbed in two overflow cells.
class WalkOracle {
 public:
  static constexpr double kMaxCells = 1e9;

  /// `horizon` only enters the n * radius guard.
  WalkOracle(const ProcessSpec& spec, std::size_t horizon, std::int64_t radius);
  ~WalkOracle();
  WalkOracle(WalkOracle&&) noexcept;
  WalkOracle& operator=(WalkOracle&&) noexcept;

  /// Advances from S_m to S_{m+1}.
  void step();

  std::size_t time() const noexcept { return time_; }
  std::int64_t radius() const noexcept { return radius_; }
  /// P(S_m = x) for |x| <= radius, 0 outside.
  double prob(std::int64_t x) const;
  const Eigen::VectorXd& row() const noexcept { return row_; }
  double overflow_low() const noexcept { return overflow_low_; }
  double overflow_high() const noexcept { return overflow_high_; }
  double total_mass() const;

  struct Convolver;

 private:
  ProcessSpec spec_;
  std::int64_t radius_;
  std::size_t time_ = 0;
  Eigen::VectorXd row_;
  double overflow_low_ = 0.0;
  double overflow_high_ = 0.0;
  std::unique_ptr<Convolver> convolver_;
};

/// Table P(S_m = x), m = 0..n, |x| <= radius (column x + radius).
struct WalkDistribution {
  std::int64_t radius = 0;
  Eigen::MatrixXd prob;
  Eigen::VectorXd overflow_low;
  Eigen::VectorXd overflow_high;

  std::size_t horizon() const noexcept { return static_cast<std::size_t>(prob.rows()) - 1; }
  double operator()(std::size_t m, std::int64_t x) const;
};

/// Dense table; additionally refuses tables above 2^28 cells.
WalkDistribution exact_walk_distribution(const ProcessSpec& spec, std::size_t n,
                                         std::int64_t radius);

/// CSV "m,x,prob".
void write_oracle_csv(std::ostream& os, const WalkDistribution& table);

/// A window wide enough that the absorbed mass is negligible for the
/// quantities checked here, capped by the cell guard.
std::int64_t default_oracle_radius(const ProcessSpec& spec, std::size_t n);

struct ExpectedLocalTimeReport {
  std::size_t n = 0;
  double expected_local_time = 0.0;
  double normalizer = 0.0;
  double ratio = 0.0;
  std::vector<std::size_t> checkpoints;
  std::vector<double> expected_at;
  std::vector<double> ratio_at;
};

/// E[l_n] = sum_{i <= n} P(S_i = 0) from the exact oracle, against a_n.
ExpectedLocalTimeReport expected_local_time_check(const ProcessSpec& spec,
                                                  const ScalingScheme& scheme, std::size_t n);

/// 1, 2, 5, 10, 20, 50, ... up to and including n.
std::vector<std::size_t> log_checkpoints(std::size_t n);

}  // namespace mllab
