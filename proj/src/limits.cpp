#include "mllab/limits.hpp"

#include "mllab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace mllab {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::OutsideRegime: return "outside-regime";
    case Verdict::Observational: return "observational";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

double weighted_ks_statistic(std::span<const double> samples, std::span<const double> weights,
                             const Cdf& cdf) {
  if (samples.empty()) throw std::invalid_argument("KS statistic of an empty sample");
  if (weights.size() != samples.size()) throw std::invalid_argument("weight count mismatch");
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return samples[a] < samples[b]; });
  CompensatedSum total_acc;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
    total_acc += w;
  }
  const double total = total_acc.value();
  if (!(total > 0.0)) throw std::invalid_argument("weights sum to zero");

  double d = 0.0;
  CompensatedSum cum;
  std::size_t i = 0;
  while (i < order.size()) {
    const double v = samples[order[i]];
    const double before = cum.value() / total;
    while (i < order.size() && samples[order[i]] == v) cum += weights[order[i++]];
    const double after = std::min(1.0, cum.value() / total);
    const double f = cdf(v);
    d = std::max({d, std::abs(f - before), std::abs(after - f)});
  }
  return d;
}

double ks_statistic(std::span<const double> samples, const Cdf& cdf) {
  const std::vector<double> ones(samples.size(), 1.0);
  return weighted_ks_statistic(samples, ones, cdf);
}

// ---------------------------------------------------------------------------
// Test functions

BoundedFunction BoundedFunction::capped_identity(double cap) {
  return {[cap](double u) { return std::min(u, cap); }, cap, "min(u," + std::to_string(cap) + ")"};
}

BoundedFunction BoundedFunction::constant(double c) {
  return {[c](double) { return c; }, std::abs(c), "constant"};
}

void BoundedFunction::validate() const {
  if (!fn) throw std::invalid_argument("test function missing");
  if (!std::isfinite(bound) || bound < 0.0) throw std::invalid_argument("test function must be bounded");
}

ShiftFunctional ShiftFunctional::first_increment(double bound) {
  return {[](std::span<const std::int64_t> xs) { return static_cast<double>(xs.front()); }, 1,
          bound, "first shifted increment"};
}

ShiftFunctional ShiftFunctional::constant(double c) {
  return {[c](std::span<const std::int64_t>) { return c; }, 1, std::abs(c), "constant"};
}

void ShiftFunctional::validate() const {
  if (!fn || window == 0) throw std::invalid_argument("shift functional missing");
  if (!std::isfinite(bound) || bound < 0.0) throw std::invalid_argument("shift functional must be bounded");
}

// ---------------------------------------------------------------------------
// Mittag-Leffler convergence

MLConvergenceReport verify_ml_convergence(const EnsembleResult& ensemble,
                                          const MittagLeffler& ml, std::size_t terminal_n,
                                          const MLTolerances& tol) {
  if (ensemble.terminal() != terminal_n) {
    throw std::invalid_argument("ensemble terminal checkpoint " +
                                std::to_string(ensemble.terminal()) + " != requested " +
                                std::to_string(terminal_n));
  }
  MLConvergenceReport report;
  report.alpha = ml.alpha();
  report.paths = ensemble.paths();
  report.terminal_n = terminal_n;
  report.tolerances = tol;
  report.expected_mean = ml.moment(1);
  report.expected_second_moment = ml.moment(2);

  const Eigen::VectorXd w1 = ensemble.weights(PathDensity::FirstStepSign);
  const Eigen::VectorXd w2 = ensemble.weights(PathDensity::EarlyPositionSign);
  const std::span<const double> w1s(w1.data(), static_cast<std::size_t>(w1.size()));
  const std::span<const double> w2s(w2.data(), static_cast<std::size_t>(w2.size()));
  const Cdf cdf = [&ml](double x) { return ml.cdf(x); };

  for (std::size_t c = 0; c < ensemble.checkpoints.size(); ++c) {
    const Eigen::VectorXd y = ensemble.scaled(c);
    const std::span<const double> ys(y.data(), static_cast<std::size_t>(y.size()));
    CheckpointFit fit;
    fit.n = ensemble.checkpoints[c];
    fit.normalizer = ensemble.normalizers(static_cast<Eigen::Index>(c));
    fit.ks = ks_statistic(ys, cdf);
    CompensatedSum m1, m2;
    for (double v : ys) {
      m1 += v;
      m2 += v * v;
    }
    fit.mean = m1.value() / static_cast<double>(ys.size());
    fit.second_moment = m2.value() / static_cast<double>(ys.size());
    fit.ks_first_step = weighted_ks_statistic(ys, w1s, cdf);
    fit.ks_early_position = weighted_ks_statistic(ys, w2s, cdf);
    report.checkpoints.push_back(fit);
  }
  const CheckpointFit& last = report.terminal();
  report.ks_pass = last.ks <= tol.ks;
  report.moments_pass = std::abs(last.mean - report.expected_mean) <= tol.mean &&
                        std::abs(last.second_moment - report.expected_second_moment) <=
                            tol.second_moment;
  report.strong_form_pass = last.ks_first_step <= tol.ks && last.ks_early_position <= tol.ks;
  report.verdict = (report.ks_pass && report.moments_pass && report.strong_form_pass)
                       ? Verdict::Pass
                       : Verdict::Fail;
  return report;
}

// ---------------------------------------------------------------------------
// Deviation band

BinomialInterval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) throw std::invalid_argument("binomial interval with zero trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

std::pair<double, double> deviation_bounds(double alpha, double t, double gamma) {
  return {std::exp(-gamma * (1.0 - alpha) * t), std::exp(-(1.0 - alpha) * t / gamma)};
}

double deviation_threshold(const ReturnSequence& a, std::size_t n, double t) {
  const double alpha = a.scheme().alpha();
  return std::tgamma(1.0 + alpha) / std::pow(alpha, alpha) * t *
         a.at(static_cast<double>(n) / t);
}

DeviationReport deviation_band(const EnsembleResult& ensemble, double t, double gamma) {
  if (!(gamma > 1.0)) throw std::invalid_argument("deviation band needs gamma > 1");
  DeviationReport r;
  r.n = ensemble.terminal();
  r.t = t;
  r.gamma = gamma;
  r.alpha = ensemble.scheme.alpha();
  std::tie(r.lower_bound, r.upper_bound) = deviation_bounds(r.alpha, t, gamma);
  const double l2 = std::log(std::log(static_cast<double>(r.n)));
  if (!(t >= 2.0 && t <= l2 * l2 && t <= static_cast<double>(r.n))) {
    r.verdict = Verdict::OutsideRegime;
    return r;
  }
  const ReturnSequence a(ensemble.scheme, r.n);
  r.threshold = deviation_threshold(a, r.n, t);
  const auto col = ensemble.local_times.col(
      static_cast<Eigen::Index>(ensemble.checkpoints.size() - 1));
  r.trials = ensemble.paths();
  for (Eigen::Index i = 0; i < col.size(); ++i) {
    if (static_cast<double>(col(i)) >= r.threshold) ++r.exceedances;
  }
  r.empirical_prob = static_cast<double>(r.exceedances) / static_cast<double>(r.trials);
  r.interval = wilson_interval(r.exceedances, r.trials);
  const bool meets = r.interval.hi >= r.lower_bound && r.interval.lo <= r.upper_bound;
  r.verdict = meets ? Verdict::Pass : Verdict::Fail;
  return r;
}

// ---------------------------------------------------------------------------
// Upper limit

double k_alpha(double alpha) {
  return std::tgamma(1.0 + alpha) /
         (std::pow(alpha, alpha) * std::pow(1.0 - alpha, 1.0 - alpha));
}

namespace {

constexpr std::size_t kLimsupMinimum = 16;

class LimsupTracker {
 public:
  LimsupTracker(const ScalingScheme& scheme, std::vector<std::size_t> checkpoints)
      : a_(scheme, checkpoints.empty() ? 1 : *std::max_element(checkpoints.begin(),
                                                               checkpoints.end())) {
    std::sort(checkpoints.begin(), checkpoints.end());
    checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
    report_.k_alpha = k_alpha(scheme.alpha());
    for (std::size_t n : checkpoints) {
      if (n < kLimsupMinimum) {
        report_.skipped.push_back(n);
      } else {
        report_.checkpoints.push_back(n);
      }
    }
  }

  std::size_t horizon() const { return a_.horizon(); }

  void observe(std::size_t n, std::int64_t ell) {
    if (next_ >= report_.checkpoints.size() || report_.checkpoints[next_] != n) return;
    const double l2 = std::log(std::log(static_cast<double>(n)));
    const double stat = static_cast<double>(ell) / (a_.at(static_cast<double>(n) / l2) * l2);
    const double prev = report_.running_max.empty() ? stat : report_.running_max.back();
    report_.statistic.push_back(stat);
    report_.running_max.push_back(std::max(prev, stat));
    ++next_;
  }

  LimsupReport take() { return std::move(report_); }

 private:
  ReturnSequence a_;
  LimsupReport report_;
  std::size_t next_ = 0;
};

}  // namespace

LimsupReport limsup_estimate(const IntTrajectory& traj, const ScalingScheme& scheme,
                             std::vector<std::size_t> checkpoints) {
  LimsupTracker tracker(scheme, std::move(checkpoints));
  if (tracker.horizon() > traj.size()) throw std::invalid_argument("checkpoint beyond path");
  std::int64_t ell = 0;
  for (std::size_t k = 0; k < tracker.horizon(); ++k) {
    ell += traj.partial_sums[k] == 0;
    tracker.observe(k + 1, ell);
  }
  return tracker.take();
}

LimsupReport limsup_estimate(const ProcessSpec& spec, const ScalingScheme& scheme,
                             std::vector<std::size_t> checkpoints) {
  LimsupTracker tracker(scheme, std::move(checkpoints));
  stream_path(spec, tracker.horizon(),
              [&](std::size_t k, std::int64_t, std::int64_t, std::int64_t ell) {
                tracker.observe(k, ell);
              });
  return tracker.take();
}

// ---------------------------------------------------------------------------
// Almost sure CLT

LogAverageAccumulator::LogAverageAccumulator(std::vector<double> x_grid)
    : x_grid_(std::move(x_grid)), sums_(x_grid_.size()) {}

void LogAverageAccumulator::observe(std::size_t k, std::int64_t ell, double a_k) {
  const double w = 1.0 / static_cast<double>(k);
  const double l = static_cast<double>(ell);
  for (std::size_t i = 0; i < x_grid_.size(); ++i) {
    const double x = x_grid_[i];
    if (x == std::numeric_limits<double>::infinity() || l <= x * a_k) sums_[i] += w;
  }
}

Eigen::VectorXd LogAverageAccumulator::averages(std::size_t N) const {
  if (N < 2) throw std::invalid_argument("log average needs N >= 2");
  const double log_n = std::log(static_cast<double>(N));
  Eigen::VectorXd out(static_cast<Eigen::Index>(sums_.size()));
  for (std::size_t i = 0; i < sums_.size(); ++i) out(static_cast<Eigen::Index>(i)) = sums_[i].value() / log_n;
  return out;
}

double ASCLTReport::max_abs_error() const {
  return (log_averages - reference).cwiseAbs().maxCoeff();
}

namespace {

Eigen::VectorXd reference_cdf(const ScalingScheme& scheme, const std::vector<double>& x_grid) {
  const MittagLeffler ml(scheme.alpha());
  Eigen::VectorXd ref(static_cast<Eigen::Index>(x_grid.size()));
  for (std::size_t i = 0; i < x_grid.size(); ++i) ref(static_cast<Eigen::Index>(i)) = ml.cdf(x_grid[i]);
  return ref;
}

Eigen::VectorXd path_log_averages(const ProcessSpec& spec, const ReturnSequence& a,
                                  const std::vector<double>& x_grid, std::size_t N) {
  LogAverageAccumulator acc(x_grid);
  stream_path(spec, N, [&](std::size_t k, std::int64_t, std::int64_t, std::int64_t ell) {
    acc.observe(k, ell, a(k));
  });
  return acc.averages(N);
}

Eigen::VectorXd trajectory_log_averages(const IntTrajectory& traj, const ReturnSequence& a,
                                        const std::vector<double>& x_grid) {
  LogAverageAccumulator acc(x_grid);
  std::int64_t ell = 0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    ell += traj.partial_sums[k] == 0;
    acc.observe(k + 1, ell, a(k + 1));
  }
  return acc.averages(traj.size());
}

Eigen::VectorXd column_means(const Eigen::MatrixXd& rows) {
  Eigen::VectorXd out(rows.cols());
  for (Eigen::Index c = 0; c < rows.cols(); ++c) {
    CompensatedSum s;
    for (Eigen::Index r = 0; r < rows.rows(); ++r) s += rows(r, c);
    out(c) = s.value() / static_cast<double>(rows.rows());
  }
  return out;
}

}  // namespace

ASCLTReport asclt_log_average(const IntTrajectory& traj, const ScalingScheme& scheme,
                              std::vector<double> x_grid) {
  const ReturnSequence a(scheme, traj.size());
  ASCLTReport r;
  r.log_averages = trajectory_log_averages(traj, a, x_grid);
  r.N = traj.size();
  r.reference = reference_cdf(scheme, x_grid);
  r.x_grid = std::move(x_grid);
  return r;
}

ASCLTReport asclt_log_average(const ProcessSpec& spec, const ScalingScheme& scheme,
                              std::vector<double> x_grid, std::size_t N) {
  const ReturnSequence a(scheme, N);
  ASCLTReport r;
  r.log_averages = path_log_averages(spec, a, x_grid, N);
  r.N = N;
  r.reference = reference_cdf(scheme, x_grid);
  r.x_grid = std::move(x_grid);
  return r;
}

ASCLTReport averaged_version(std::span<const IntTrajectory> paths, const ScalingScheme& scheme,
                             std::vector<double> x_grid) {
  if (paths.empty()) throw std::invalid_argument("averaged_version needs at least one path");
  const std::size_t N = paths.front().size();
  for (const auto& p : paths) {
    if (p.size() != N) throw std::invalid_argument("paths must share one horizon");
  }
  const ReturnSequence a(scheme, N);
  Eigen::MatrixXd per_path(static_cast<Eigen::Index>(paths.size()),
                           static_cast<Eigen::Index>(x_grid.size()));
  for (std::size_t p = 0; p < paths.size(); ++p) {
    per_path.row(static_cast<Eigen::Index>(p)) =
        trajectory_log_averages(paths[p], a, x_grid).transpose();
  }
  ASCLTReport r;
  r.log_averages = column_means(per_path);
  r.N = N;
  r.paths = paths.size();
  r.reference = reference_cdf(scheme, x_grid);
  r.x_grid = std::move(x_grid);
  return r;
}

ASCLTReport averaged_version(const ProcessSpec& spec, const ScalingScheme& scheme,
                             std::vector<double> x_grid, std::size_t N, std::size_t paths,
                             std::uint64_t master_seed, unsigned threads) {
  if (paths < 1) throw std::invalid_argument("averaged_version needs at least one path");
  const ReturnSequence a(scheme, N);
  Eigen::MatrixXd per_path(static_cast<Eigen::Index>(paths),
                           static_cast<Eigen::Index>(x_grid.size()));
  parallel_for(paths, threads, [&](std::size_t p) {
    per_path.row(static_cast<Eigen::Index>(p)) =
        path_log_averages(path_spec(spec, master_seed, p), a, x_grid, N).transpose();
  });
  ASCLTReport r;
  r.log_averages = column_means(per_path);
  r.N = N;
  r.paths = paths;
  r.reference = reference_cdf(scheme, x_grid);
  r.x_grid = std::move(x_grid);
  return r;
}

namespace {

void check_horizons(std::vector<std::size_t>& horizons) {
  if (horizons.size() < 3) throw std::invalid_argument("variance probe needs >= 3 horizons");
  if (!std::is_sorted(horizons.begin(), horizons.end()) ||
      std::adjacent_find(horizons.begin(), horizons.end()) != horizons.end()) {
    throw std::invalid_argument("variance probe horizons must be strictly increasing");
  }
  if (horizons.front() < 2) throw std::invalid_argument("variance probe horizons must be >= 2");
}

/// Functional values y(p, i) = (1/log N_i) sum_{k<=N_i} g(l_k/a_k)/k.
template <class Feed>
Eigen::RowVectorXd functional_row(Feed&& feed, const ReturnSequence& a, const BoundedFunction& g,
                                  const std::vector<std::size_t>& horizons) {
  Eigen::RowVectorXd out(static_cast<Eigen::Index>(horizons.size()));
  CompensatedSum s;
  std::size_t next = 0;
  feed([&](std::size_t k, std::int64_t ell) {
    s += g.fn(static_cast<double>(ell) / a(k)) / static_cast<double>(k);
    if (next < horizons.size() && horizons[next] == k) {
      out(static_cast<Eigen::Index>(next)) = s.value() / std::log(static_cast<double>(k));
      ++next;
    }
  });
  return out;
}

VarianceProbeReport summarize_variance(const Eigen::MatrixXd& y,
                                       const std::vector<std::size_t>& horizons) {
  VarianceProbeReport r;
  r.horizons = horizons;
  r.paths = static_cast<std::size_t>(y.rows());
  const auto P = static_cast<double>(y.rows());
  std::vector<double> means(horizons.size());
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    const Eigen::VectorXd col = y.col(static_cast<Eigen::Index>(i));
    const auto mv = mean_variance(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())));
    means[i] = mv.mean;
    r.variances.push_back(mv.variance);
  }
  bool pass = true;
  for (std::size_t i = 0; i + 1 < horizons.size(); ++i) {
    // Paired per-path contributions to v_i - v_{i+1}.
    std::vector<double> z(static_cast<std::size_t>(y.rows()));
    for (Eigen::Index p = 0; p < y.rows(); ++p) {
      const double d0 = y(p, static_cast<Eigen::Index>(i)) - means[i];
      const double d1 = y(p, static_cast<Eigen::Index>(i + 1)) - means[i + 1];
      z[static_cast<std::size_t>(p)] = d0 * d0 - d1 * d1;
    }
    const auto mv = mean_variance(z);
    const double diff = r.variances[i] - r.variances[i + 1];
    const double se = std::sqrt(mv.variance / P) * P / (P - 1.0);
    r.decrease.push_back(diff);
    r.decrease_se.push_back(se);
    if (!(diff > 0.0 && diff >= r.z_required * se)) pass = false;
  }
  r.verdict = pass ? Verdict::Pass : Verdict::Fail;
  return r;
}

}  // namespace

VarianceProbeReport asclt_variance_probe(std::span<const IntTrajectory> paths,
                                         const ScalingScheme& scheme, const BoundedFunction& g,
                                         std::vector<std::size_t> horizons) {
  g.validate();
  check_horizons(horizons);
  if (paths.size() < 2) throw std::invalid_argument("variance probe needs at least 2 paths");
  const ReturnSequence a(scheme, horizons.back());
  Eigen::MatrixXd y(static_cast<Eigen::Index>(paths.size()),
                    static_cast<Eigen::Index>(horizons.size()));
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const IntTrajectory& traj = paths[p];
    if (traj.size() < horizons.back()) throw std::invalid_argument("path shorter than horizon");
    y.row(static_cast<Eigen::Index>(p)) = functional_row(
        [&](auto&& sink) {
          std::int64_t ell = 0;
          for (std::size_t k = 0; k < horizons.back(); ++k) {
            ell += traj.partial_sums[k] == 0;
            sink(k + 1, ell);
          }
        },
        a, g, horizons);
  }
  return summarize_variance(y, horizons);
}

VarianceProbeReport asclt_variance_probe(const ProcessSpec& spec, const ScalingScheme& scheme,
                                         const BoundedFunction& g,
                                         std::vector<std::size_t> horizons, std::size_t paths,
                                         std::uint64_t master_seed, unsigned threads) {
  g.validate();
  check_horizons(horizons);
  if (paths < 2) throw std::invalid_argument("variance probe needs at least 2 paths");
  const ReturnSequence a(scheme, horizons.back());
  Eigen::MatrixXd y(static_cast<Eigen::Index>(paths), static_cast<Eigen::Index>(horizons.size()));
  parallel_for(paths, threads, [&](std::size_t p) {
    const ProcessSpec ps = path_spec(spec, master_seed, p);
    y.row(static_cast<Eigen::Index>(p)) = functional_row(
        [&](auto&& sink) {
          stream_path(ps, horizons.back(),
                      [&](std::size_t k, std::int64_t, std::int64_t, std::int64_t ell) {
                        sink(k, ell);
                      });
        },
        a, g, horizons);
  });
  return summarize_variance(y, horizons);
}

// ---------------------------------------------------------------------------
// Condition on covariance decay

Cond1Report cond1_estimate(const ProcessSpec& spec, const ScalingScheme& scheme,
                           const BoundedFunction& g, const ShiftFunctional& F,
                           std::vector<std::size_t> k_list, std::size_t paths,
                           std::uint64_t master_seed, unsigned threads, double delta) {
  g.validate();
  F.validate();
  if (paths < 2) throw std::invalid_argument("covariance estimate needs at least 2 paths");
  if (k_list.empty()) throw std::invalid_argument("empty k list");
  std::sort(k_list.begin(), k_list.end());
  if (k_list.front() < 16) throw std::invalid_argument("cond1 needs k >= 16 (log log k > 1)");

  Cond1Report report;
  report.delta = delta;
  report.paths = paths;
  const ReturnSequence a(scheme, k_list.back());
  bool pass = true;
  for (std::size_t idx = 0; idx < k_list.size(); ++idx) {
    const std::size_t k = k_list[idx];
    const std::size_t n = 2 * k + F.window;
    std::vector<double> gv(paths), fv(paths);
    parallel_for(paths, threads, [&](std::size_t p) {
      std::vector<std::int64_t> window;
      window.reserve(F.window);
      double g_val = 0.0;
      stream_path(path_spec(spec, master_seed, p), n,
                  [&](std::size_t step, std::int64_t x, std::int64_t, std::int64_t ell) {
                    if (step == k) g_val = g.fn(static_cast<double>(ell) / a(k));
                    if (step > 2 * k) window.push_back(x);
                  });
      gv[p] = g_val;
      fv[p] = F.fn(window);
    });
    const double gm = mean_variance(gv).mean;
    const double fm = mean_variance(fv).mean;
    std::vector<double> prod(paths);
    for (std::size_t p = 0; p < paths; ++p) prod[p] = (gv[p] - gm) * (fv[p] - fm);
    const auto mv = mean_variance(prod);
    const double P = static_cast<double>(paths);
    Cond1Row row;
    row.k = k;
    row.covariance = mv.mean * P / (P - 1.0);
    row.se = std::sqrt(mv.variance / P);
    const double ll = std::log(std::log(static_cast<double>(k)));
    if (idx == 0) {
      report.fitted_c = (std::abs(row.covariance) + 3.0 * row.se) * std::pow(ll, 1.0 + delta);
    }
    row.envelope = report.fitted_c * std::pow(ll, -1.0 - delta);
    row.within = std::abs(row.covariance) <= row.envelope + 3.0 * row.se;
    pass = pass && row.within;
    report.rows.push_back(row);
  }
  report.verdict = pass ? Verdict::Pass : Verdict::Fail;
  return report;
}

// ---------------------------------------------------------------------------
// Potential-kernel condition

std::vector<double> cond2_partial_sum_sequence(const ProcessSpec& spec, std::int64_t x,
                                               std::size_t N) {
  WalkOracle oracle(spec, N, std::max<std::int64_t>(default_oracle_radius(spec, N),
                                                    std::abs(x) + 1));
  std::vector<double> out(N);
  CompensatedSum s;
  for (std::size_t m = 1; m <= N; ++m) {
    oracle.step();
    s += std::abs(oracle.prob(x) - oracle.prob(0));
    out[m - 1] = s.value();
  }
  return out;
}

Cond2Report cond2_partial_sums(const ProcessSpec& spec, double alpha,
                               std::vector<std::int64_t> levels, std::size_t N,
                               double ratio_limit) {
  if (N < 1) throw std::invalid_argument("cond2 horizon must be at least 1");
  if (std::find(levels.begin(), levels.end(), 1) == levels.end()) levels.insert(levels.begin(), 1);
  std::int64_t widest = 1;
  for (auto x : levels) widest = std::max(widest, std::abs(x));
  WalkOracle oracle(spec, N, std::max(default_oracle_radius(spec, N), widest + 1));

  Cond2Report report;
  report.N = N;
  report.alpha = alpha;
  report.ratio_limit = ratio_limit;
  const auto checkpoints = log_checkpoints(N);
  std::vector<CompensatedSum> sums(levels.size());
  std::vector<double> last(levels.size(), 0.0);
  report.rows.resize(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) report.rows[i].x = levels[i];
  std::size_t next = 0;
  for (std::size_t m = 1; m <= N; ++m) {
    oracle.step();
    const double p0 = oracle.prob(0);
    for (std::size_t i = 0; i < levels.size(); ++i) {
      sums[i] += std::abs(oracle.prob(levels[i]) - p0);
      const double v = sums[i].value();
      if (v < last[i]) report.rows[i].nondecreasing = false;
      last[i] = v;
    }
    if (next < checkpoints.size() && checkpoints[next] == m) {
      for (std::size_t i = 0; i < levels.size(); ++i) {
        report.rows[i].checkpoints.push_back(m);
        report.rows[i].partial_sums.push_back(sums[i].value());
      }
      ++next;
    }
  }
  const double expo = alpha / (1.0 - alpha);
  const auto one = static_cast<std::size_t>(
      std::find(levels.begin(), levels.end(), 1) - levels.begin());
  report.fitted_k = sums[one].value() / 2.0;
  bool pass = true;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    Cond2Row& row = report.rows[i];
    row.terminal = sums[i].value();
    row.bound = report.fitted_k * (1.0 + std::pow(std::abs(static_cast<double>(row.x)), expo));
    row.ratio = row.bound > 0.0 ? row.terminal / row.bound : 0.0;
    pass = pass && row.ratio <= ratio_limit;
  }
  report.verdict = pass ? Verdict::Pass : Verdict::Fail;
  return report;
}

// ---------------------------------------------------------------------------
// Second-difference moment

double second_diff_term(const IntTrajectory& traj, std::size_t k, std::size_t j) {
  if (j <= 2 * k) throw std::invalid_argument("second difference needs j > 2k");
  if (traj.size() < j || k == 0) throw std::invalid_argument("path shorter than j");
  const std::int64_t y = traj.partial_sums[2 * k - 1];
  std::int64_t zero_before = 0, level_before = 0, zero_after = 0, level_after = 0;
  for (std::size_t i = 0; i < j; ++i) {
    const std::int64_t s = traj.partial_sums[i];
    if (i < 2 * k) {
      zero_before += s == 0;
      level_before += s == y;
    }
    zero_after += s == 0;
    level_after += s == y;
  }
  return static_cast<double>((zero_after - level_after) - (zero_before - level_before));
}

SecondDiffReport second_diff_moment(const ProcessSpec& spec, const ScalingScheme& scheme,
                                    std::size_t k, std::vector<std::size_t> j_list,
                                    std::size_t paths, std::uint64_t master_seed,
                                    unsigned threads) {
  if (j_list.empty()) throw std::invalid_argument("empty j list");
  std::sort(j_list.begin(), j_list.end());
  if (k == 0 || j_list.front() <= 2 * k) throw std::invalid_argument("second difference needs j > 2k");
  if (paths < 2) throw std::invalid_argument("second difference needs at least 2 paths");
  const std::size_t n = j_list.back();
  const double expo = scheme.alpha() / (1.0 - scheme.alpha());

  Eigen::MatrixXd squares(static_cast<Eigen::Index>(paths), static_cast<Eigen::Index>(j_list.size()));
  std::vector<double> level_power(paths);
  parallel_for(paths, threads, [&](std::size_t p) {
    const IntTrajectory traj = generate(path_spec(spec, master_seed, p), n);
    const std::int64_t y = traj.partial_sums[2 * k - 1];
    level_power[p] = std::pow(std::abs(static_cast<double>(y)), expo);
    std::int64_t zero = 0, level = 0, base = 0;
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
      zero += traj.partial_sums[i] == 0;
      level += traj.partial_sums[i] == y;
      if (i + 1 == 2 * k) base = zero - level;
      if (next < j_list.size() && j_list[next] == i + 1) {
        const double dv = static_cast<double>((zero - level) - base);
        squares(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(next)) = dv * dv;
        ++next;
      }
    }
  });

  SecondDiffReport report;
  report.k = k;
  report.paths = paths;
  const ReturnSequence a(scheme, n);
  const double level_mean = mean_variance(level_power).mean;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  bool bounded = true;
  for (std::size_t i = 0; i < j_list.size(); ++i) {
    const Eigen::VectorXd col = squares.col(static_cast<Eigen::Index>(i));
    SecondDiffRow row;
    row.j = j_list[i];
    row.left = mean_variance(std::span<const double>(col.data(), paths)).mean;
    row.right = a(row.j) * level_mean;
    row.ratio = row.right > 0.0 ? row.left / row.right : 0.0;
    bounded = bounded && row.ratio <= report.ratio_limit;
    lo = std::min(lo, row.ratio);
    hi = std::max(hi, row.ratio);
    report.rows.push_back(row);
  }
  const bool stable = lo > 0.0 && hi / lo <= report.stability_factor;
  report.verdict = (bounded && stable) ? Verdict::Pass : Verdict::Fail;
  return report;
}

}  // namespace mllab
