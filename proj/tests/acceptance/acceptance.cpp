// Acceptance suite: one PASS/FAIL line per criterion. Every tolerance is a
// constant below; nothing is read from the environment.

#include "mllab/distributions.hpp"
#include "mllab/ensemble.hpp"
#include "mllab/harness.hpp"
#include "mllab/limits.hpp"
#include "mllab/localtime.hpp"
#include "mllab/parallel.hpp"
#include "mllab/transferop.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace mllab;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kMasterSeed = 271828;

// criterion 1, 2
constexpr std::size_t kMLHorizon = 100000;
constexpr std::size_t kMLPaths = 10000;
constexpr double kMLKs = 0.05;
constexpr double kMLMeanTol = 0.05;
constexpr double kMLSecondTol = 0.1;
constexpr double kMLBudgetSeconds = 120.0;

// criterion 3
constexpr std::size_t kDevHorizon = 100000;
constexpr std::size_t kDevPaths = 100000;
constexpr double kDevGamma = 1.5;
constexpr double kDevBudgetSeconds = 600.0;

// criterion 4
constexpr std::size_t kAsN = 1000000;
constexpr double kAsSingleTol = 0.15;
constexpr std::size_t kAsEnsN = 100000;
constexpr std::size_t kAsEnsPaths = 1000;
constexpr double kAsEnsTol = 0.1;

// criterion 5
constexpr std::size_t kProbePaths = 1000;

// criterion 6
constexpr std::size_t kLm1N = 10000;
constexpr double kLm1Lo = 0.9;
constexpr double kLm1Hi = 1.1;
constexpr double kLm1BudgetSeconds = 30.0;

// criterion 7
constexpr std::size_t kCond2N = 10000;
constexpr double kCond2Ratio = 1.5;

// criterion 8
constexpr Eigen::Index kUlamM = 4096;
constexpr double kClosedFormTol = 1e-3;
constexpr double kMinK = 0.12;
constexpr int kCurvePoints = 65;

// criterion 9
constexpr double kDensityTol = 1e-3;
constexpr double kWirsing = 0.3036;
constexpr double kWirsingTol = 0.02;

struct Line {
  int id;
  bool pass;
  std::string detail;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

void emit(const Line& l) {
  std::printf("criterion %2d: %s  %s\n", l.id, l.pass ? "PASS" : "FAIL", l.detail.c_str());
  std::fflush(stdout);
}

unsigned threads() { return default_thread_count(); }

// 1 and 2 share one ensemble.
std::vector<Line> ml_convergence() {
  Timer timer;
  const ScalingScheme s = ScalingScheme::lazy_walk();
  const EnsembleResult ens =
      run_local_time_ensemble(ProcessSpec{}, s, {kMLHorizon}, kMLPaths, kMasterSeed, threads());
  const MLConvergenceReport r = verify_ml_convergence(ens, MittagLeffler(0.5), kMLHorizon,
                                                      {kMLKs, kMLMeanTol, kMLSecondTol});
  const double secs = timer.seconds();
  const CheckpointFit& f = r.terminal();
  const bool c1 = f.ks <= kMLKs && std::abs(f.mean - 1.0) <= kMLMeanTol &&
                  std::abs(f.second_moment - std::numbers::pi / 2) <= kMLSecondTol &&
                  secs <= kMLBudgetSeconds;
  const bool c2 = f.ks_first_step <= kMLKs && f.ks_early_position <= kMLKs;
  std::ostringstream d1, d2;
  d1 << "KS=" << fmt("%.4f", f.ks) << " (<= " << kMLKs << ") mean=" << fmt("%.4f", f.mean)
     << " m2=" << fmt("%.4f", f.second_moment) << " (pi/2=" << fmt("%.4f", std::numbers::pi / 2)
     << ") time=" << fmt("%.1f", secs) << "s";
  d2 << "KS under sign(X_1) density=" << fmt("%.4f", f.ks_first_step)
     << ", under sign(S_16) density=" << fmt("%.4f", f.ks_early_position) << " (<= " << kMLKs << ")";
  return {{1, c1, d1.str()}, {2, c2, d2.str()}};
}

Line deviation() {
  Timer timer;
  const ScalingScheme s = ScalingScheme::lazy_walk();
  const EnsembleResult ens =
      run_local_time_ensemble(ProcessSpec{}, s, {kDevHorizon}, kDevPaths, kMasterSeed, threads());
  bool ok = true;
  std::ostringstream d;
  for (double t : {3.0, 4.0, 5.0}) {
    const DeviationReport r = deviation_band(ens, t, kDevGamma);
    ok = ok && r.verdict == Verdict::Pass;
    d << "t=" << t << ": P in [" << fmt("%.4f", r.interval.lo) << "," << fmt("%.4f", r.interval.hi)
      << "] vs [" << fmt("%.4f", r.lower_bound) << "," << fmt("%.4f", r.upper_bound) << "] "
      << to_string(r.verdict) << "; ";
  }
  const double secs = timer.seconds();
  ok = ok && secs <= kDevBudgetSeconds;
  d << "time=" << fmt("%.1f", secs) << "s";
  return {3, ok, d.str()};
}

Line asclt() {
  const ScalingScheme s = ScalingScheme::lazy_walk();
  const std::vector<double> xs{0.5, 1.0, 2.0};
  const ProcessSpec single = path_spec(ProcessSpec{}, kMasterSeed, 0);
  const ASCLTReport one = asclt_log_average(single, s, xs, kAsN);
  const ASCLTReport avg =
      averaged_version(ProcessSpec{}, s, xs, kAsEnsN, kAsEnsPaths, kMasterSeed, threads());
  std::ostringstream d;
  d << "single path N=1e6 max|M-ML|=" << fmt("%.4f", one.max_abs_error()) << " (<= " << kAsSingleTol
    << ") [";
  for (Eigen::Index i = 0; i < 3; ++i) d << fmt("%.3f", one.log_averages(i)) << (i < 2 ? "," : "");
  d << " vs ";
  for (Eigen::Index i = 0; i < 3; ++i) d << fmt("%.3f", one.reference(i)) << (i < 2 ? "," : "");
  d << "]; averaged 1e3 paths N=1e5 max err=" << fmt("%.4f", avg.max_abs_error()) << " (<= "
    << kAsEnsTol << ")";
  return {4, one.max_abs_error() <= kAsSingleTol && avg.max_abs_error() <= kAsEnsTol, d.str()};
}

Line variance_probe() {
  const VarianceProbeReport r = asclt_variance_probe(
      ProcessSpec{}, ScalingScheme::lazy_walk(), BoundedFunction::capped_identity(2.0),
      {1000, 10000, 100000}, kProbePaths, kMasterSeed, threads());
  std::ostringstream d;
  d << "var at N=1e3,1e4,1e5: ";
  for (std::size_t i = 0; i < r.variances.size(); ++i) d << fmt("%.5f", r.variances[i]) << " ";
  d << "decrease/se: ";
  for (std::size_t i = 0; i < r.decrease.size(); ++i) d << fmt("%.1f", r.decrease[i] / r.decrease_se[i]) << " ";
  d << "(each > " << r.z_required << ")";
  return {5, r.verdict == Verdict::Pass, d.str()};
}

Line expected_local_time() {
  Timer timer;
  const ExpectedLocalTimeReport r =
      expected_local_time_check(ProcessSpec{}, ScalingScheme::lazy_walk(), kLm1N);
  const double secs = timer.seconds();
  std::ostringstream d;
  d << "E[l_n]/a_n=" << fmt("%.5f", r.ratio) << " in [" << kLm1Lo << "," << kLm1Hi
    << "] time=" << fmt("%.2f", secs) << "s";
  return {6, r.ratio >= kLm1Lo && r.ratio <= kLm1Hi && secs <= kLm1BudgetSeconds, d.str()};
}

Line potential_sums() {
  const Cond2Report r = cond2_partial_sums(ProcessSpec{}, 0.5, {1, 2, 4, 8}, kCond2N, kCond2Ratio);
  std::ostringstream d;
  d << "K=" << fmt("%.4f", r.fitted_k) << " ratios:";
  bool ok = r.verdict == Verdict::Pass;
  for (const Cond2Row& row : r.rows) {
    d << " x=" << row.x << ":" << fmt("%.3f", row.ratio);
    ok = ok && row.ratio <= kCond2Ratio;
  }
  d << " (<= " << kCond2Ratio << ")";
  return {7, ok, d.str()};
}

Line doubling_closed_form() {
  const UlamOperator<double> op = ulam_discretize(MapSpec::doubling(), kUlamM);
  double err = 0.0;
  for (double t : {0.0, 0.5, 1.0, 2.0, 3.0}) {
    const Complex lam = leading_eigenvalue(perturbed_matrix(op, t)).lambda;
    err = std::max(err, std::abs(lam - (1.0 + std::polar(1.0, t)) / 2.0));
  }
  const SpectralSummary s = eigenvalue_curve_check(
      MapSpec::doubling(), kUlamM, symmetric_grid(std::numbers::pi / 2, kCurvePoints), 2.0);
  std::ostringstream d;
  d << "max|lambda_t-(1+e^it)/2|=" << fmt("%.2e", err) << " (<= " << kClosedFormTol
    << "); fitted K=" << fmt("%.6f", s.k_bound) << " (>= " << kMinK << ")";
  return {8, err <= kClosedFormTol && s.k_bound >= kMinK, d.str()};
}

Line gauss_spectrum() {
  const UlamOperator<double> lo = ulam_discretize(MapSpec::gauss(), kUlamM / 2);
  const UlamOperator<double> hi = ulam_discretize(MapSpec::gauss(), kUlamM);
  const double sup = gauss_density_sup_error(invariant_density(hi));
  const double s_lo = leading_eigenvalue(lo).second_abs;
  const double s_hi = leading_eigenvalue(hi).second_abs;
  // first-order Richardson step from m/2 to m
  const double extrapolated = 2.0 * s_hi - s_lo;
  std::ostringstream d;
  d << "density sup err=" << fmt("%.2e", sup) << " (<= " << kDensityTol << "); |lambda_2| m=2048:"
    << fmt("%.5f", s_lo) << " m=4096:" << fmt("%.5f", s_hi) << " extrapolated:"
    << fmt("%.5f", extrapolated) << " (" << kWirsing << " +- " << kWirsingTol << ")";
  return {9, sup <= kDensityTol && std::abs(extrapolated - kWirsing) <= kWirsingTol, d.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Line reproducibility() {
  const fs::path root = fs::temp_directory_path() / "mllab_acceptance_repro";
  fs::remove_all(root);
  bool ok = true;
  std::size_t compared = 0;
  for (Experiment e : {Experiment::VerifyML, Experiment::Deviation, Experiment::ASCLT,
                       Experiment::Conditions, Experiment::Spectrum, Experiment::Simulate}) {
    ExperimentConfig c = ExperimentConfig::defaults(e);
    c.paths = 500;
    c.horizon = 5000;
    c.ensemble_horizon = 5000;
    c.probe_horizons = {500, 2000, 5000};
    c.lm2_paths = 500;
    c.lm2_k = 20;
    c.lm2_j = {500, 5000};
    c.cond1_k = {16, 64};
    c.resolution = 512;
    RunOptions first{1, root / (to_string(e) + "_t1")};
    RunOptions second{4, root / (to_string(e) + "_t4")};
    RunOptions replay{3, root / (to_string(e) + "_replay")};
    run_experiment(c, first);
    run_experiment(c, second);
    run_experiment(config_from_manifest(first.output_dir / "manifest.json"), replay);
    for (const auto& entry : fs::directory_iterator(first.output_dir)) {
      const std::string name = entry.path().filename().string();
      const std::string body = slurp(entry.path());
      ok = ok && body == slurp(second.output_dir / name) && body == slurp(replay.output_dir / name);
      ++compared;
    }
  }
  fs::remove_all(root);
  return {10, ok && compared > 0,
          std::to_string(compared) + " files across 6 experiments compared byte for byte "
          "(threads 1 vs 4, and manifest replay on 3 threads)"};
}

}  // namespace

int main() {
  std::printf("acceptance suite, master seed %llu, %u threads\n",
              static_cast<unsigned long long>(kMasterSeed), threads());
  std::vector<Line> lines;
  auto run = [&](const std::function<Line()>& f) {
    lines.push_back(f());
    emit(lines.back());
  };
  for (const Line& l : ml_convergence()) {
    lines.push_back(l);
    emit(l);
  }
  run(deviation);
  run(asclt);
  run(variance_probe);
  run(expected_local_time);
  run(potential_sums);
  run(doubling_closed_form);
  run(gauss_spectrum);
  run(reproducibility);

  int failed = 0;
  for (const Line& l : lines) failed += !l.pass;
  std::printf("%d of %zu criteria passed\n", static_cast<int>(lines.size()) - failed, lines.size());
  return failed == 0 ? 0 : 1;
}
