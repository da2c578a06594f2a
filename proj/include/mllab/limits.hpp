#pragma once

#include "mllab/distributions.hpp"
#include "mllab/ensemble.hpp"
#include "mllab/localtime.hpp"
#include "mllab/numerics.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace mllab {

enum class Verdict { Pass, Fail, OutsideRegime, Observational };
std::string to_string(Verdict v);

using Cdf = std::function<double(double)>;

/// sup |F_n - F| by the order-statistics sweep; ties are grouped so the
/// empirical CDF jumps once per distinct value.
double ks_statistic(std::span<const double> samples, const Cdf& cdf);
/// Same with the empirical CDF built from nonnegative weights.
double weighted_ks_statistic(std::span<const double> samples, std::span<const double> weights,
                             const Cdf& cdf);

/// A bounded test function g with sup |g| <= bound.
struct BoundedFunction {
  std::function<double(double)> fn;
  double bound = 1.0;
  std::string name;

  /// min(u, cap).
  static BoundedFunction capped_identity(double cap = 2.0);
  static BoundedFunction constant(double c);
  void validate() const;
};

/// A bounded functional of the shifted increment stream X_{s+1}..X_{s+window}.
struct ShiftFunctional {
  std::function<double(std::span<const std::int64_t>)> fn;
  std::size_t window = 1;
  double bound = 1.0;
  std::string name;

  /// X_{s+1}, bounded by `bound` (the caller vouches for it).
  static ShiftFunctional first_increment(double bound = 1.0);
  static ShiftFunctional constant(double c);
  void validate() const;
};

// --- Mittag-Leffler convergence --------------------------------------------

struct MLTolerances {
  double ks = 0.05;
  double mean = 0.05;
  double second_moment = 0.1;
};

struct CheckpointFit {
  std::size_t n = 0;
  double normalizer = 0.0;
  double ks = 0.0;
  double mean = 0.0;
  double second_moment = 0.0;
  double ks_first_step = 0.0;      // reweighted by PathDensity::FirstStepSign
  double ks_early_position = 0.0;  // reweighted by PathDensity::EarlyPositionSign
};

struct MLConvergenceReport {
  double alpha = 0.5;
  std::size_t paths = 0;
  std::size_t terminal_n = 0;
  std::vector<CheckpointFit> checkpoints;
  MLTolerances tolerances;
  double expected_mean = 1.0;
  double expected_second_moment = 0.0;
  bool moments_pass = false;
  bool ks_pass = false;
  bool strong_form_pass = false;
  Verdict verdict = Verdict::Fail;

  const CheckpointFit& terminal() const { return checkpoints.back(); }
};

MLConvergenceReport verify_ml_convergence(const EnsembleResult& ensemble,
                                          const MittagLeffler& ml, std::size_t terminal_n,
                                          const MLTolerances& tol = {});

// --- Deviation band ---------------------------------------------------------

struct BinomialInterval {
  double lo = 0.0;
  double hi = 1.0;
};
/// Wilson score interval at two-sided level given by z.
BinomialInterval wilson_interval(std::size_t successes, std::size_t trials,
                                 double z = 1.959963984540054);

struct DeviationReport {
  std::size_t n = 0;
  double t = 0.0;
  double gamma = 0.0;
  double alpha = 0.0;
  double threshold = 0.0;
  std::size_t exceedances = 0;
  std::size_t trials = 0;
  double empirical_prob = 0.0;
  BinomialInterval interval;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  Verdict verdict = Verdict::Fail;
};

/// exp(-gamma (1-alpha) t) and exp(-(1-alpha) t / gamma).
std::pair<double, double> deviation_bounds(double alpha, double t, double gamma);
/// Gamma(1+alpha) / alpha^alpha * t * a_floor(n/t).
double deviation_threshold(const ReturnSequence& a, std::size_t n, double t);

/// At the ensemble's terminal checkpoint. t must lie in [2, (log log n)^2],
/// otherwise the report is marked OutsideRegime without a verdict.
DeviationReport deviation_band(const EnsembleResult& ensemble, double t, double gamma);

// --- Upper limit ------------------------------------------------------------

/// Gamma(1+alpha) / (alpha^alpha (1-alpha)^(1-alpha)).
double k_alpha(double alpha);

struct LimsupReport {
  double k_alpha = 0.0;
  std::vector<std::size_t> checkpoints;  // those >= 16 actually used
  std::vector<double> statistic;         // l_n / (a_floor(n/L2) L2)
  std::vector<double> running_max;
  std::vector<std::size_t> skipped;      // checkpoints below 16
  Verdict verdict = Verdict::Observational;
};

LimsupReport limsup_estimate(const IntTrajectory& traj, const ScalingScheme& scheme,
                             std::vector<std::size_t> checkpoints);
/// Streams a single path given by spec.seed without storing it.
LimsupReport limsup_estimate(const ProcessSpec& spec, const ScalingScheme& scheme,
                             std::vector<std::size_t> checkpoints);

// --- Almost sure CLT --------------------------------------------------------

/// Online (1/log N) sum_{k<=N} (1/k) 1{l_k <= x a_k} for a grid of x.
class LogAverageAccumulator {
 public:
  explicit LogAverageAccumulator(std::vector<double> x_grid);
  void observe(std::size_t k, std::int64_t ell, double a_k);
  /// Log averages at horizon N (the last k observed).
  Eigen::VectorXd averages(std::size_t N) const;

 private:
  std::vector<double> x_grid_;
  std::vector<CompensatedSum> sums_;
};

struct ASCLTReport {
  std::vector<double> x_grid;
  Eigen::VectorXd log_averages;
  std::size_t N = 0;
  std::size_t paths = 1;
  Eigen::VectorXd reference;  // ml_cdf at x_grid
  double max_abs_error() const;
};

ASCLTReport asclt_log_average(const IntTrajectory& traj, const ScalingScheme& scheme,
                              std::vector<double> x_grid);
ASCLTReport asclt_log_average(const ProcessSpec& spec, const ScalingScheme& scheme,
                              std::vector<double> x_grid, std::size_t N);

/// Indicator replaced by the across-path frequency at every k. By linearity
/// this is the path mean of the single-path log averages, computed at full
/// k resolution.
ASCLTReport averaged_version(std::span<const IntTrajectory> paths, const ScalingScheme& scheme,
                             std::vector<double> x_grid);
ASCLTReport averaged_version(const ProcessSpec& spec, const ScalingScheme& scheme,
                             std::vector<double> x_grid, std::size_t N, std::size_t paths,
                             std::uint64_t master_seed, unsigned threads = 1);

struct VarianceProbeReport {
  std::vector<std::size_t> horizons;
  std::vector<double> variances;
  std::vector<double> decrease;     // v_i - v_{i+1}
  std::vector<double> decrease_se;  // paired standard error of that difference
  std::size_t paths = 0;
  double z_required = 2.0;
  Verdict verdict = Verdict::Fail;
};

/// Across-path variance of (1/log N) sum_{k<=N} (1/k) g(l_k/a_k). Pass iff
/// every successive decrease is positive and at least z_required paired
/// standard errors.
VarianceProbeReport asclt_variance_probe(std::span<const IntTrajectory> paths,
                                         const ScalingScheme& scheme, const BoundedFunction& g,
                                         std::vector<std::size_t> horizons);
VarianceProbeReport asclt_variance_probe(const ProcessSpec& spec, const ScalingScheme& scheme,
                                         const BoundedFunction& g,
                                         std::vector<std::size_t> horizons, std::size_t paths,
                                         std::uint64_t master_seed, unsigned threads = 1);

// --- Mixing conditions ------------------------------------------------------

struct Cond1Row {
  std::size_t k = 0;
  double covariance = 0.0;
  double se = 0.0;
  double envelope = 0.0;  // C (log log k)^(-1-delta)
  bool within = false;
};

struct Cond1Report {
  double delta = 0.5;
  double fitted_c = 0.0;
  std::size_t paths = 0;
  std::vector<Cond1Row> rows;
  Verdict verdict = Verdict::Fail;
};

/// cov(g(l_k/a_k), F(X_{2k+1}, ...)). C is fitted on the first k as
/// (|cov| + 3 se) (log log k)^(1+delta) and frozen; later rows pass when
/// |cov| <= envelope + 3 se. Every k must be >= 16.
Cond1Report cond1_estimate(const ProcessSpec& spec, const ScalingScheme& scheme,
                           const BoundedFunction& g, const ShiftFunctional& F,
                           std::vector<std::size_t> k_list, std::size_t paths,
                           std::uint64_t master_seed, unsigned threads = 1,
                           double delta = 0.5);

/// sum_{n<=m} |P(S_n = x) - P(S_n = 0)| for m = 1..N (entry m-1).
std::vector<double> cond2_partial_sum_sequence(const ProcessSpec& spec, std::int64_t x,
                                               std::size_t N);

struct Cond2Row {
  std::int64_t x = 0;
  double terminal = 0.0;
  double bound = 0.0;  // K (1 + |x|^(alpha/(1-alpha)))
  double ratio = 0.0;  // terminal / bound
  bool nondecreasing = true;
  std::vector<std::size_t> checkpoints;
  std::vector<double> partial_sums;
};

struct Cond2Report {
  std::size_t N = 0;
  double alpha = 0.5;
  double fitted_k = 0.0;  // from x = 1, then frozen
  double ratio_limit = 1.5;
  std::vector<Cond2Row> rows;
  Verdict verdict = Verdict::Fail;
};

Cond2Report cond2_partial_sums(const ProcessSpec& spec, double alpha,
                               std::vector<std::int64_t> levels, std::size_t N,
                               double ratio_limit = 1.5);

/// (l_j - l(j, S_2k) - l_2k + l(2k, S_2k)) for one path; j > 2k.
double second_diff_term(const IntTrajectory& traj, std::size_t k, std::size_t j);

struct SecondDiffRow {
  std::size_t j = 0;
  double left = 0.0;   // E (...)^2
  double right = 0.0;  // a_j E|S_2k|^(alpha/(1-alpha))
  double ratio = 0.0;
};

struct SecondDiffReport {
  std::size_t k = 0;
  std::size_t paths = 0;
  std::vector<SecondDiffRow> rows;
  double ratio_limit = 10.0;
  double stability_factor = 2.0;
  Verdict verdict = Verdict::Fail;
};

SecondDiffReport second_diff_moment(const ProcessSpec& spec, const ScalingScheme& scheme,
                                    std::size_t k, std::vector<std::size_t> j_list,
                                    std::size_t paths, std::uint64_t master_seed,
                                    unsigned threads = 1);

}  // namespace mllab
