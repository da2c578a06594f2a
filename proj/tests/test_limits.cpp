#include "doctest.h"

#include "mllab/distributions.hpp"
#include "mllab/ensemble.hpp"
#include "mllab/limits.hpp"

#include <cmath>
#include <numbers>

using namespace mllab;

namespace {

double uniform_cdf(double x) { return std::clamp(x, 0.0, 1.0); }

double lazy_prob(std::size_t n, std::int64_t x) {
  const double N = 2.0 * n, k = static_cast<double>(n) + x;
  if (k < 0 || k > N) return 0.0;
  return std::exp(std::lgamma(N + 1) - std::lgamma(k + 1) - std::lgamma(N - k + 1) -
                  N * std::log(2.0));
}

}  // namespace

TEST_CASE("ks statistic by hand") {
  std::vector<double> one{0.5};
  CHECK(ks_statistic(one, uniform_cdf) == doctest::Approx(0.5));
  // F_n jumps to 1/3, 2/3, 1 at 0.1, 0.4, 0.7: max gap is 1 - 0.7 = 0.3.
  std::vector<double> three{0.7, 0.1, 0.4};
  CHECK(ks_statistic(three, uniform_cdf) == doctest::Approx(0.3));
  // Ties jump once: {0.5, 0.5} gives F_n = 1 at 0.5 and sup 0.5.
  std::vector<double> ties{0.5, 0.5};
  CHECK(ks_statistic(ties, uniform_cdf) == doctest::Approx(0.5));
  std::vector<double> w{1.0, 1.0, 1.0};
  CHECK(weighted_ks_statistic(three, w, uniform_cdf) == doctest::Approx(ks_statistic(three, uniform_cdf)));
  std::vector<double> w2{0.0, 0.0, 3.0};  // all mass on 0.4
  CHECK(weighted_ks_statistic(three, w2, uniform_cdf) == doctest::Approx(0.6));
}

TEST_CASE("ks statistic on direct mittag-leffler samples calibrates the harness") {
  const MittagLeffler ml(0.5);
  RandomStream rng(404);
  std::vector<double> y(10000);
  for (double& v : y) v = ml.sample(rng);
  CHECK(ks_statistic(y, [&](double x) { return ml.cdf(x); }) < 0.02);
}

TEST_CASE("wilson interval") {
  const BinomialInterval z = wilson_interval(0, 10);
  CHECK(z.lo == 0.0);
  CHECK(z.hi == doctest::Approx(0.27753).epsilon(1e-4));
  const BinomialInterval h = wilson_interval(50, 100);
  CHECK(h.lo == doctest::Approx(0.40383).epsilon(1e-4));
  CHECK(h.hi == doctest::Approx(0.59617).epsilon(1e-4));
}

TEST_CASE("deviation bounds are ordered for gamma above one") {
  for (double a : {0.1, 0.3, 0.5}) {
    for (double g : {1.01, 1.5, 3.0}) {
      for (double t : {2.0, 3.0, 5.0, 10.0}) {
        const auto [lo, hi] = deviation_bounds(a, t, g);
        CHECK(lo < hi);
        CHECK(lo == doctest::Approx(std::exp(-g * (1 - a) * t)));
      }
    }
  }
  const auto [lo, hi] = deviation_bounds(0.5, 3.0, 1.5);
  CHECK(lo == doctest::Approx(std::exp(-2.25)));
  CHECK(hi == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("deviation threshold and regime") {
  const ScalingScheme s = ScalingScheme::lazy_walk();
  const ReturnSequence a(s, 1000);
  const double expect = std::tgamma(1.5) / std::sqrt(0.5) * 4.0 * a(250);
  CHECK(deviation_threshold(a, 1000, 4.0) == doctest::Approx(expect));
  const EnsembleResult ens = run_local_time_ensemble(ProcessSpec{}, s, {100000}, 20, 1);
  CHECK(deviation_band(ens, 1.0, 1.5).verdict == Verdict::OutsideRegime);
  CHECK(deviation_band(ens, 7.0, 1.5).verdict == Verdict::OutsideRegime);
  CHECK(deviation_band(ens, 3.0, 1.5).verdict != Verdict::OutsideRegime);
  CHECK_THROWS(deviation_band(ens, 3.0, 1.0));
}

TEST_CASE("k alpha") {
  CHECK(k_alpha(0.5) == doctest::Approx(std::sqrt(std::numbers::pi)));
  const double a = 0.3;
  CHECK(k_alpha(a) == doctest::Approx(std::tgamma(1 + a) / (std::pow(a, a) * std::pow(1 - a, 1 - a))));
}

TEST_CASE("limsup running maximum") {
  ProcessSpec spec;
  spec.seed = 5;
  const LimsupReport r = limsup_estimate(spec, ScalingScheme::lazy_walk(), log_checkpoints(100000));
  CHECK(r.verdict == Verdict::Observational);
  CHECK(r.skipped == std::vector<std::size_t>{1, 2, 5, 10});
  REQUIRE(r.statistic.size() == r.running_max.size());
  for (std::size_t i = 0; i < r.statistic.size(); ++i) {
    CHECK(r.running_max[i] >= r.statistic[i]);
    if (i) CHECK(r.running_max[i] >= r.running_max[i - 1]);
  }
  // streaming and stored paths agree
  const LimsupReport q = limsup_estimate(generate(spec, 100000), ScalingScheme::lazy_walk(),
                                         log_checkpoints(100000));
  CHECK(q.statistic == r.statistic);
}

TEST_CASE("log average accumulator against the direct sum") {
  ProcessSpec spec;
  spec.seed = 9;
  const IntTrajectory t = generate(spec, 5000);
  const ScalingScheme s = ScalingScheme::lazy_walk();
  const std::vector<double> xs{0.5, 1.0, 2.0};
  const ASCLTReport r = asclt_log_average(t, s, xs);
  for (std::size_t j = 0; j < xs.size(); ++j) {
    double direct = 0.0;
    std::int64_t ell = 0;
    for (std::size_t k = 1; k <= 5000; ++k) {
      ell += t.partial_sums[k - 1] == 0;
      if (static_cast<double>(ell) <= xs[j] * normalizer(s, k)) direct += 1.0 / k;
    }
    CHECK(r.log_averages(static_cast<Eigen::Index>(j)) ==
          doctest::Approx(direct / std::log(5000.0)).epsilon(1e-12));
  }
  const ASCLTReport streamed = asclt_log_average(spec, s, xs, 5000);
  CHECK(streamed.log_averages == r.log_averages);
}

TEST_CASE("averaged version of a one-path ensemble is that path's log average") {
  ProcessSpec spec;
  spec.seed = 10;
  std::vector<IntTrajectory> one{generate(spec, 3000)};
  const ScalingScheme s = ScalingScheme::lazy_walk();
  const ASCLTReport avg = averaged_version(one, s, {0.3, 1.0, 1.7});
  const ASCLTReport single = asclt_log_average(one[0], s, {0.3, 1.0, 1.7});
  CHECK(avg.log_averages == single.log_averages);
}

TEST_CASE("averaged version equals the mean over paths") {
  const ScalingScheme s = ScalingScheme::lazy_walk();
  std::vector<IntTrajectory> paths;
  for (std::size_t i = 0; i < 5; ++i) paths.push_back(generate(path_spec(ProcessSpec{}, 3, i), 2000));
  const ASCLTReport avg = averaged_version(paths, s, {1.0});
  double mean = 0.0;
  for (const auto& p : paths) mean += asclt_log_average(p, s, {1.0}).log_averages(0) / 5.0;
  CHECK(avg.log_averages(0) == doctest::Approx(mean).epsilon(1e-14));
  const ASCLTReport streamed = averaged_version(ProcessSpec{}, s, {1.0}, 2000, 5, 3, 2);
  CHECK(streamed.log_averages(0) == doctest::Approx(mean).epsilon(1e-14));
}

TEST_CASE("variance probe with a constant function has nothing to shrink") {
  const VarianceProbeReport r =
      asclt_variance_probe(ProcessSpec{}, ScalingScheme::lazy_walk(), BoundedFunction::constant(0.5),
                           {100, 300, 1000}, 50, 1);
  for (double v : r.variances) CHECK(v == 0.0);
  CHECK(r.verdict == Verdict::Fail);
}

TEST_CASE("bounded function and shift functional validation") {
  BoundedFunction g = BoundedFunction::capped_identity(2.0);
  CHECK(g.fn(5.0) == 2.0);
  CHECK(g.fn(0.5) == 0.5);
  g.bound = -1.0;
  CHECK_THROWS(g.validate());
  const ShiftFunctional f = ShiftFunctional::first_increment(1.0);
  std::vector<std::int64_t> x{-1, 1};
  CHECK(f.fn(x) == -1.0);
  CHECK_THROWS(cond1_estimate(ProcessSpec{}, ScalingScheme::lazy_walk(), BoundedFunction::capped_identity(),
                              f, {8, 64}, 100, 1));
}

TEST_CASE("covariance decay with an independent future is within its envelope") {
  const Cond1Report r = cond1_estimate(ProcessSpec{}, ScalingScheme::lazy_walk(),
                                       BoundedFunction::capped_identity(2.0),
                                       ShiftFunctional::first_increment(1.0), {16, 64, 256}, 4000, 7);
  CHECK(r.rows.size() == 3);
  CHECK(r.fitted_c > 0.0);
  // X_{2k+1} is independent of l_k for an i.i.d. walk.
  for (const auto& row : r.rows) CHECK(std::abs(row.covariance) <= 4.0 * row.se);
}

TEST_CASE("potential partial sums") {
  ProcessSpec spec;
  const auto zero = cond2_partial_sum_sequence(spec, 0, 100);
  for (double v : zero) CHECK(v == 0.0);
  const auto one = cond2_partial_sum_sequence(spec, 1, 1);
  CHECK(one[0] == doctest::Approx(0.25).epsilon(1e-15));
  const auto seq = cond2_partial_sum_sequence(spec, 3, 300);
  double acc = 0.0;
  for (std::size_t m = 1; m <= 300; ++m) {
    acc += std::abs(lazy_prob(m, 3) - lazy_prob(m, 0));
    REQUIRE(seq[m - 1] == doctest::Approx(acc).epsilon(1e-11));
    if (m > 1) REQUIRE(seq[m - 1] >= seq[m - 2]);
  }
  const Cond2Report r = cond2_partial_sums(spec, 0.5, {2, 4}, 200);
  CHECK(r.rows.front().x == 1);  // x = 1 is added for the fit
  CHECK(r.fitted_k == doctest::Approx(r.rows.front().terminal / 2.0));
  for (const auto& row : r.rows) CHECK(row.nondecreasing);
}

TEST_CASE("second difference") {
  // S_2 = 0 here (k = 1): the four terms cancel.
  const IntTrajectory t = IntTrajectory::from_increments({1, -1, 1, 1, -1, -1, 0}, ProcessSpec{});
  CHECK(second_diff_term(t, 1, 7) == 0.0);
  CHECK_THROWS(second_diff_term(t, 2, 4));
  CHECK_THROWS(second_diff_moment(ProcessSpec{}, ScalingScheme::lazy_walk(), 50, {100}, 10, 1));
  const SecondDiffReport r = second_diff_moment(ProcessSpec{}, ScalingScheme::lazy_walk(), 10,
                                                {1000, 10000}, 2000, 3);
  for (const auto& row : r.rows) {
    CHECK(row.left >= 0.0);
    CHECK(row.right > 0.0);
  }
}

TEST_CASE("verify-ml report and reweighting densities") {
  const ScalingScheme s = ScalingScheme::lazy_walk();
  const EnsembleResult ens = run_local_time_ensemble(ProcessSpec{}, s, {100, 10000}, 2000, 11);
  const Eigen::VectorXd w1 = ens.weights(PathDensity::FirstStepSign);
  const Eigen::VectorXd w2 = ens.weights(PathDensity::EarlyPositionSign);
  CHECK(w1.mean() == doctest::Approx(1.0));
  CHECK(w2.mean() == doctest::Approx(1.0));
  CHECK(w1.minCoeff() >= 0.0);
  const MLConvergenceReport r = verify_ml_convergence(ens, MittagLeffler(0.5), 10000);
  CHECK(r.checkpoints.size() == 2);
  CHECK(r.terminal().ks < 0.05);
  CHECK_THROWS(verify_ml_convergence(ens, MittagLeffler(0.5), 100));
  // empirical CDF endpoints
  CHECK(r.terminal().ks >= 0.0);
  CHECK(r.terminal().ks <= 1.0);
}

TEST_CASE("ensemble output does not depend on the thread count") {
  const ScalingScheme s = ScalingScheme::lazy_walk();
  const auto a = run_local_time_ensemble(ProcessSpec{}, s, {10, 1000}, 301, 77, 1);
  const auto b = run_local_time_ensemble(ProcessSpec{}, s, {10, 1000}, 301, 77, 4);
  CHECK(a.local_times == b.local_times);
  CHECK(a.seeds == b.seeds);
}
