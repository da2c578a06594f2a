#include "mllab/harness.hpp"

#include "mllab/calibrate.hpp"
#include "mllab/distributions.hpp"
#include "mllab/ensemble.hpp"
#include "mllab/limits.hpp"
#include "mllab/localtime.hpp"
#include "mllab/processes.hpp"
#include "mllab/transferop.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace mllab {

namespace {

using Json = nlohmann::ordered_json;

// Numbers that are not finite become null.
Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string verdict_name(Verdict v) { return to_string(v); }

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// CSV builder: '.' decimal, LF endings, %.17g floats.
class Csv {
 public:
  explicit Csv(const std::string& header) { out_ << header << '\n'; }
  template <class... Ts>
  void row(const Ts&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }
  std::string str() const { return out_.str(); }

 private:
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(bool b) { return b ? "1" : "0"; }
  template <class I>
    requires std::is_integral_v<I>
  static std::string cell(I v) {
    return std::to_string(v);
  }
  std::ostringstream out_;
};

ProcessSpec process_template(const ExperimentConfig& c) {
  ProcessSpec spec;
  spec.kind = c.process;
  spec.d = c.d;
  spec.beta = c.beta;
  spec.seed = 0;
  spec.validate();
  return spec;
}

struct ResolvedScheme {
  ScalingScheme scheme;
  std::string source;
  Json calibration;  // null unless calibrated
};

double stability_index(const ProcessSpec& spec) {
  switch (spec.kind) {
    case ProcessKind::HeavyTailWalk:
      return spec.d;
    case ProcessKind::GaussCFPair:
      return 1.0;
    default:
      return 2.0;
  }
}

Json calibration_json(const CalibrationReport& r) {
  Json j;
  j["horizon"] = r.horizon;
  j["ratio_g0_over_c"] = num(r.ratio_g0_over_c);
  j["fitted_exponent"] = num(r.fitted_exponent);
  j["max_relative_residual"] = num(r.max_relative_residual);
  if (r.closed_form_c_over_g0 > 0.0) {
    j["closed_form_c_over_g0"] = num(r.closed_form_c_over_g0);
    j["closed_form_deviation"] = num(r.closed_form_deviation);
  }
  return j;
}

ResolvedScheme resolve_scheme(const ExperimentConfig& c, const ProcessSpec& spec) {
  const double d = stability_index(spec);
  const bool lazy_law = spec.kind == ProcessKind::LazyWalk ||
                        (spec.kind == ProcessKind::BetaPair && spec.beta == 2.0);
  if (c.scheme == "manual") {
    return {ScalingScheme::make(d, c.scale_c, c.g0), "manual", nullptr};
  }
  if (c.scheme == "auto" && lazy_law) {
    return {ScalingScheme::lazy_walk(), "closed_form", nullptr};
  }
  if (!spec.is_iid_walk()) {
    throw ConfigError("process '" + to_string(spec.kind) +
                      "' has no calibrated scaling; use scheme = manual with scale_c and g0");
  }
  const CalibrationReport r = calibrate(spec, c.calibration_horizon);
  return {r.scheme, "calibrated", calibration_json(r)};
}

Json scheme_json(const ResolvedScheme& s) {
  Json j;
  j["source"] = s.source;
  j["d"] = num(s.scheme.d);
  j["beta_exp"] = num(s.scheme.beta_exp);
  j["alpha"] = num(s.scheme.alpha());
  j["scale_c"] = num(s.scheme.scale_c);
  j["g0"] = num(s.scheme.g0);
  if (!s.calibration.is_null()) j["calibration"] = s.calibration;
  return j;
}

std::vector<std::size_t> resolve_checkpoints(const ExperimentConfig& c) {
  std::vector<std::size_t> cp = c.checkpoints.empty() ? log_checkpoints(c.horizon) : c.checkpoints;
  cp.push_back(c.horizon);
  std::sort(cp.begin(), cp.end());
  cp.erase(std::unique(cp.begin(), cp.end()), cp.end());
  return cp;
}

struct Outcome {
  Json summary;
  std::map<std::string, std::string> files;
  bool all_pass = true;
  std::size_t path_count = 0;

  void check(const std::string& name, bool pass) {
    summary["checks"][name] = pass ? "pass" : "fail";
    all_pass = all_pass && pass;
  }
  void check(const std::string& name, Verdict v) {
    summary["checks"][name] = verdict_name(v);
    if (v == Verdict::Fail) all_pass = false;
  }
};

// --- simulate ---------------------------------------------------------------

void run_simulate(const ExperimentConfig& c, Outcome& out) {
  const ProcessSpec spec = path_spec(process_template(c), c.master_seed, 0);
  out.path_count = 1;
  const IntTrajectory traj = generate(spec, c.horizon);
  const LocalTimeProfile profile = local_time(traj, 0);
  const SkewProductTrack track = skew_product_trajectory(traj);

  std::ostringstream t, p;
  write_trajectory_csv(t, traj);
  write_profile_csv(p, profile);
  out.files["trajectory.csv"] = t.str();
  out.files["profile.csv"] = p.str();

  bool identity = track.fiber == traj.partial_sums;
  for (std::size_t k = 1; k <= traj.size() && identity; ++k) {
    identity = track.visits_up_to(k) == profile.counts[k - 1];
  }

  Json& s = out.summary;
  s["seed"] = spec.seed;
  s["n"] = traj.size();
  s["final_partial_sum"] = traj.partial_sums.back();
  s["local_time_at_zero"] = profile.counts.back();
  s["return_count"] = profile.return_times.size();
  out.check("partial_sums_consistent", traj.consistent());
  out.check("skew_product_representation", identity);

  if (spec.is_iid_walk()) {
    const std::size_t m = c.oracle_horizon;
    const WalkDistribution table = exact_walk_distribution(spec, m, default_oracle_radius(spec, m));
    std::ostringstream o;
    write_oracle_csv(o, table);
    out.files["oracle.csv"] = o.str();
    s["oracle_horizon"] = m;
    s["oracle_p_zero_at_horizon"] = num(table(m, 0));
  }
}

// --- verify-ml --------------------------------------------------------------

void run_verify_ml(const ExperimentConfig& c, unsigned threads, Outcome& out) {
  const ProcessSpec spec = process_template(c);
  const ResolvedScheme rs = resolve_scheme(c, spec);
  const EnsembleResult ens = run_local_time_ensemble(spec, rs.scheme, resolve_checkpoints(c),
                                                     c.paths, c.master_seed, threads);
  out.path_count = c.paths;
  const MittagLeffler ml(rs.scheme.alpha());
  const MLConvergenceReport r = verify_ml_convergence(ens, ml, c.horizon);

  Csv csv("n,normalizer,ks,mean,second_moment,ks_first_step,ks_early_position");
  for (const CheckpointFit& f : r.checkpoints) {
    csv.row(f.n, f.normalizer, f.ks, f.mean, f.second_moment, f.ks_first_step,
            f.ks_early_position);
  }
  out.files["ml_checkpoints.csv"] = csv.str();

  Json& s = out.summary;
  s["scheme"] = scheme_json(rs);
  s["parameters"] = {{"alpha", num(r.alpha)}, {"paths", r.paths}, {"n", r.terminal_n}};
  const CheckpointFit& last = r.terminal();
  s["estimates"] = {{"ks", num(last.ks)},
                    {"mean", num(last.mean)},
                    {"second_moment", num(last.second_moment)},
                    {"ks_first_step_density", num(last.ks_first_step)},
                    {"ks_early_position_density", num(last.ks_early_position)}};
  s["bounds"] = {{"ks_max", num(r.tolerances.ks)},
                 {"mean", num(r.expected_mean)},
                 {"mean_tolerance", num(r.tolerances.mean)},
                 {"second_moment", num(r.expected_second_moment)},
                 {"second_moment_tolerance", num(r.tolerances.second_moment)}};
  out.check("ks", r.ks_pass);
  out.check("moments", r.moments_pass);
  out.check("strong_form", r.strong_form_pass);
}

// --- deviation --------------------------------------------------------------

void run_deviation(const ExperimentConfig& c, unsigned threads, Outcome& out) {
  const ProcessSpec spec = process_template(c);
  const ResolvedScheme rs = resolve_scheme(c, spec);
  const EnsembleResult ens =
      run_local_time_ensemble(spec, rs.scheme, {c.horizon}, c.paths, c.master_seed, threads);
  out.path_count = c.paths;

  Csv csv("t,threshold,exceedances,trials,empirical_prob,ci_lo,ci_hi,lower_bound,upper_bound,verdict");
  Json rows = Json::array();
  for (double t : c.t_values) {
    const DeviationReport r = deviation_band(ens, t, c.gamma);
    csv.row(r.t, r.threshold, r.exceedances, r.trials, r.empirical_prob, r.interval.lo,
            r.interval.hi, r.lower_bound, r.upper_bound, verdict_name(r.verdict));
    rows.push_back({{"t", num(r.t)},
                    {"threshold", num(r.threshold)},
                    {"exceedances", r.exceedances},
                    {"trials", r.trials},
                    {"empirical_prob", num(r.empirical_prob)},
                    {"interval", {num(r.interval.lo), num(r.interval.hi)}},
                    {"bounds", {num(r.lower_bound), num(r.upper_bound)}},
                    {"verdict", verdict_name(r.verdict)}});
    out.check("t=" + format_double(t), r.verdict);
  }
  out.files["deviation.csv"] = csv.str();
  Json& s = out.summary;
  s["scheme"] = scheme_json(rs);
  s["parameters"] = {{"n", c.horizon}, {"paths", c.paths}, {"gamma", num(c.gamma)}};
  s["rows"] = rows;
}

// --- limsup -----------------------------------------------------------------

void run_limsup(const ExperimentConfig& c, Outcome& out) {
  const ProcessSpec spec = path_spec(process_template(c), c.master_seed, 0);
  const ResolvedScheme rs = resolve_scheme(c, spec);
  out.path_count = 1;
  const LimsupReport r = limsup_estimate(spec, rs.scheme, resolve_checkpoints(c));

  Csv csv("n,statistic,running_max");
  for (std::size_t i = 0; i < r.checkpoints.size(); ++i) {
    csv.row(r.checkpoints[i], r.statistic[i], r.running_max[i]);
  }
  out.files["limsup.csv"] = csv.str();

  const bool monotone = std::is_sorted(r.running_max.begin(), r.running_max.end());
  Json& s = out.summary;
  s["scheme"] = scheme_json(rs);
  s["parameters"] = {{"n", c.horizon}, {"seed", spec.seed}};
  s["estimates"] = {{"k_alpha", num(r.k_alpha)},
                    {"final_statistic", r.statistic.empty() ? Json(nullptr) : num(r.statistic.back())},
                    {"running_max", r.running_max.empty() ? Json(nullptr) : num(r.running_max.back())}};
  s["skipped_checkpoints"] = r.skipped;
  out.check("upper_limit", r.verdict);
  out.check("running_max_monotone", monotone);
}

// --- asclt ------------------------------------------------------------------

void run_asclt(const ExperimentConfig& c, unsigned threads, Outcome& out) {
  const ProcessSpec tmpl = process_template(c);
  const ResolvedScheme rs = resolve_scheme(c, tmpl);
  const ProcessSpec single = path_spec(tmpl, c.master_seed, 0);
  out.path_count = c.paths;

  const ASCLTReport one = asclt_log_average(single, rs.scheme, c.x_grid, c.horizon);
  const ASCLTReport avg = averaged_version(tmpl, rs.scheme, c.x_grid, c.ensemble_horizon,
                                           c.paths, c.master_seed, threads);
  const VarianceProbeReport probe =
      asclt_variance_probe(tmpl, rs.scheme, BoundedFunction::capped_identity(2.0),
                           c.probe_horizons, c.paths, c.master_seed, threads);

  Csv csv("x,single_path,averaged,reference");
  for (std::size_t i = 0; i < c.x_grid.size(); ++i) {
    const auto e = static_cast<Eigen::Index>(i);
    csv.row(c.x_grid[i], one.log_averages(e), avg.log_averages(e), one.reference(e));
  }
  out.files["asclt.csv"] = csv.str();

  Csv pv("N,variance,decrease,decrease_se");
  for (std::size_t i = 0; i < probe.horizons.size(); ++i) {
    const bool has = i < probe.decrease.size();
    pv.row(probe.horizons[i], probe.variances[i], has ? probe.decrease[i] : 0.0,
           has ? probe.decrease_se[i] : 0.0);
  }
  out.files["asclt_variance.csv"] = pv.str();

  constexpr double kSingleTol = 0.15;
  constexpr double kAveragedTol = 0.1;
  Json& s = out.summary;
  s["scheme"] = scheme_json(rs);
  s["parameters"] = {{"single_path_N", c.horizon},
                     {"single_path_seed", single.seed},
                     {"ensemble_N", c.ensemble_horizon},
                     {"paths", c.paths},
                     {"test_function", "min(u, 2)"}};
  s["estimates"] = {{"single_path_max_error", num(one.max_abs_error())},
                    {"averaged_max_error", num(avg.max_abs_error())},
                    {"variances", probe.variances}};
  s["bounds"] = {{"single_path_tolerance", kSingleTol},
                 {"averaged_tolerance", kAveragedTol},
                 {"variance_decrease_z", num(probe.z_required)}};
  out.check("single_path", one.max_abs_error() <= kSingleTol);
  out.check("averaged", avg.max_abs_error() <= kAveragedTol);
  out.check("variance_probe", probe.verdict);
}

// --- conditions -------------------------------------------------------------

void run_conditions(const ExperimentConfig& c, unsigned threads, Outcome& out) {
  const ProcessSpec spec = process_template(c);
  const ResolvedScheme rs = resolve_scheme(c, spec);
  out.path_count = std::max(c.paths, c.lm2_paths);
  Json& s = out.summary;
  s["scheme"] = scheme_json(rs);

  if (spec.is_iid_walk()) {
    const ExpectedLocalTimeReport lm1 = expected_local_time_check(spec, rs.scheme, c.horizon);
    Csv csv("n,expected_local_time,ratio");
    for (std::size_t i = 0; i < lm1.checkpoints.size(); ++i) {
      csv.row(lm1.checkpoints[i], lm1.expected_at[i], lm1.ratio_at[i]);
    }
    out.files["lm1.csv"] = csv.str();
    s["expected_local_time"] = {{"n", lm1.n},
                                {"expected", num(lm1.expected_local_time)},
                                {"normalizer", num(lm1.normalizer)},
                                {"ratio", num(lm1.ratio)},
                                {"interval", {0.9, 1.1}}};
    out.check("expected_local_time", lm1.ratio >= 0.9 && lm1.ratio <= 1.1);

    const Cond2Report c2 = cond2_partial_sums(spec, rs.scheme.alpha(), c.levels, c.horizon);
    Csv csv2("x,n,partial_sum");
    Json rows = Json::array();
    for (const Cond2Row& row : c2.rows) {
      for (std::size_t i = 0; i < row.checkpoints.size(); ++i) {
        csv2.row(row.x, row.checkpoints[i], row.partial_sums[i]);
      }
      rows.push_back({{"x", row.x},
                      {"terminal", num(row.terminal)},
                      {"bound", num(row.bound)},
                      {"ratio", num(row.ratio)},
                      {"nondecreasing", row.nondecreasing}});
    }
    out.files["cond2.csv"] = csv2.str();
    s["potential_sums"] = {{"N", c2.N},
                           {"fitted_k", num(c2.fitted_k)},
                           {"ratio_limit", num(c2.ratio_limit)},
                           {"rows", rows}};
    out.check("potential_sums", c2.verdict);
  } else {
    s["expected_local_time"] = "skipped: needs an i.i.d. walk";
    s["potential_sums"] = "skipped: needs an i.i.d. walk";
  }

  ShiftFunctional sign;
  sign.fn = [](std::span<const std::int64_t> x) {
    return static_cast<double>((x[0] > 0) - (x[0] < 0));
  };
  sign.window = 1;
  sign.bound = 1.0;
  sign.name = "sign(X_{2k+1})";
  const Cond1Report c1 = cond1_estimate(spec, rs.scheme, BoundedFunction::capped_identity(2.0),
                                        sign, c.cond1_k, c.paths, c.master_seed, threads);
  Csv csv1("k,covariance,se,envelope,within");
  for (const Cond1Row& row : c1.rows) {
    csv1.row(row.k, row.covariance, row.se, row.envelope, row.within);
  }
  out.files["cond1.csv"] = csv1.str();
  s["covariance_decay"] = {{"delta", num(c1.delta)},
                           {"fitted_c", num(c1.fitted_c)},
                           {"paths", c1.paths},
                           {"g", "min(u, 2)"},
                           {"F", sign.name}};
  out.check("covariance_decay", c1.verdict);

  const SecondDiffReport lm2 = second_diff_moment(spec, rs.scheme, c.lm2_k, c.lm2_j,
                                                  c.lm2_paths, c.master_seed, threads);
  Csv csv3("j,left,right,ratio");
  for (const SecondDiffRow& row : lm2.rows) csv3.row(row.j, row.left, row.right, row.ratio);
  out.files["lm2.csv"] = csv3.str();
  s["second_difference"] = {{"k", lm2.k},
                            {"paths", lm2.paths},
                            {"ratio_limit", num(lm2.ratio_limit)},
                            {"stability_factor", num(lm2.stability_factor)}};
  out.check("second_difference", lm2.verdict);
}

// --- spectrum ---------------------------------------------------------------

MapSpec map_spec(const ExperimentConfig& c) {
  MapSpec m;
  m.kind = c.map;
  m.beta = c.map == MapKind::BetaMap ? c.map_beta : 2.0;
  m.digit_cutoff = c.digit_cutoff;
  m.validate();
  return m;
}

void run_spectrum(const ExperimentConfig& c, Outcome& out) {
  const MapSpec map = map_spec(c);
  const Eigen::Index m = c.resolution;
  const SpectralSummary curve =
      eigenvalue_curve_check(map, m, symmetric_grid(c.delta, 2 * c.t_points + 1), c.d_exp);

  std::vector<double> tail_grid;
  const double pi = std::numbers::pi;
  for (int k = 1; k <= c.t_points; ++k) {
    const double t = c.delta + (pi - c.delta) * k / c.t_points;
    tail_grid.push_back(-t);
    tail_grid.push_back(t);
  }
  std::sort(tail_grid.begin(), tail_grid.end());
  const TailNormReport tail = tail_norm_check(map, m, tail_grid, c.delta);

  std::vector<SpectralPoint> all = curve.curve;
  all.insert(all.end(), tail.curve.begin(), tail.curve.end());
  std::sort(all.begin(), all.end(),
            [](const SpectralPoint& a, const SpectralPoint& b) { return a.t < b.t; });
  std::ostringstream csv;
  write_spectrum_csv(csv, all);
  out.files["spectrum.csv"] = csv.str();

  Json& s = out.summary;
  s["parameters"] = {{"map", to_string(map.kind)},
                     {"resolution", c.resolution},
                     {"delta", num(c.delta)},
                     {"d_exp", num(c.d_exp)}};
  if (map.kind == MapKind::BetaMap) s["parameters"]["beta"] = num(map.beta);
  if (map.kind == MapKind::Gauss) s["parameters"]["digit_cutoff"] = map.digit_cutoff;
  s["estimates"] = {{"lambda_at_zero", {num(curve.lambda_at_zero.real()), num(curve.lambda_at_zero.imag())}},
                    {"gap", num(curve.gap)},
                    {"theta1", num(curve.theta1)},
                    {"theta2", num(tail.theta2)},
                    {"k_bound", num(curve.k_bound)},
                    {"conjugate_symmetry_error", num(curve.conjugate_symmetry_error)}};
  if (map.kind == MapKind::Doubling) {
    double err = 0.0;
    for (const SpectralPoint& p : all) {
      err = std::max(err, std::abs(p.lambda - (1.0 + std::polar(1.0, p.t)) / 2.0));
    }
    s["estimates"]["closed_form_max_error"] = num(err);
  }
  if (map.kind == MapKind::Gauss) {
    const UlamOperator<double> op = ulam_discretize(map, m);
    s["estimates"]["density_sup_error"] = num(gauss_density_sup_error(invariant_density(op)));
  }
  out.check("eigenvalue_curve", curve.pass);
  out.check("tail_norm", tail.pass);
}

// --- calibrate --------------------------------------------------------------

void run_calibrate(const ExperimentConfig& c, Outcome& out) {
  const ProcessSpec spec = process_template(c);
  if (!spec.is_iid_walk()) throw ConfigError("calibrate needs process = lazy or heavy");
  const CalibrationReport r = calibrate(spec, c.horizon);
  const double slope = r.scheme.beta_exp;
  Csv csv("n,p_zero,fit");
  for (std::size_t i = 0; i < r.n_values.size(); ++i) {
    const double n = static_cast<double>(r.n_values[i]);
    csv.row(r.n_values[i], r.p_zero[i], r.ratio_g0_over_c * std::pow(n, -slope));
  }
  out.files["calibrate.csv"] = csv.str();
  Json& s = out.summary;
  s["scheme"] = scheme_json({r.scheme, "calibrated", nullptr});
  s["estimates"] = calibration_json(r);
  s["parameters"] = {{"process", to_string(spec.kind)}, {"d", num(spec.d)}, {"horizon", c.horizon}};
  out.check("residual", r.max_relative_residual <= 0.05);
  if (r.closed_form_c_over_g0 > 0.0) out.check("closed_form", r.closed_form_deviation <= 0.02);
}

Json manifest_json(const ExperimentConfig& c, const Outcome& out) {
  Json m;
  m["artifact"] = kArtifactName;
  m["version"] = kArtifactVersion;
  m["experiment"] = to_string(c.experiment);
  m["config_hash"] = c.hash();
  Json cfg = Json::object();
  for (const auto& [k, v] : c.to_key_values()) cfg[k] = v;
  m["config"] = cfg;
  Json seeds;
  seeds["master_seed"] = c.master_seed;
  seeds["derivation"] = "splitmix64 finalizer of master_seed ^ ((i + 1) * 0x9e3779b97f4a7c15)";
  seeds["path_count"] = out.path_count;
  Json first = Json::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(out.path_count, 4); ++i) {
    first.push_back(derive_path_seed(c.master_seed, i));
  }
  seeds["first_path_seeds"] = first;
  m["seeds"] = seeds;
  Json files = Json::object();
  for (const auto& [name, body] : out.files) files[name] = fnv1a_hex(body);
  m["files"] = files;
  return m;
}

}  // namespace

ExperimentOutput execute(const ExperimentConfig& config, unsigned threads) {
  config.validate();
  if (threads == 0) threads = 1;
  Outcome out;
  out.summary["experiment"] = to_string(config.experiment);
  out.summary["process"] = to_string(config.process);
  out.summary["checks"] = Json::object();
  switch (config.experiment) {
    case Experiment::Simulate:
      run_simulate(config, out);
      break;
    case Experiment::VerifyML:
      run_verify_ml(config, threads, out);
      break;
    case Experiment::Deviation:
      run_deviation(config, threads, out);
      break;
    case Experiment::Limsup:
      run_limsup(config, out);
      break;
    case Experiment::ASCLT:
      run_asclt(config, threads, out);
      break;
    case Experiment::Conditions:
      run_conditions(config, threads, out);
      break;
    case Experiment::Spectrum:
      run_spectrum(config, out);
      break;
    case Experiment::Calibrate:
      run_calibrate(config, out);
      break;
  }
  out.summary["verdict"] = out.all_pass ? "pass" : "fail";
  out.files["summary.json"] = out.summary.dump(2) + "\n";
  out.files["manifest.json"] = manifest_json(config, out).dump(2) + "\n";

  ExperimentOutput result;
  result.files = std::move(out.files);
  result.all_pass = out.all_pass;
  return result;
}

int run_experiment(const ExperimentConfig& config, const RunOptions& run) {
  const ExperimentOutput out = execute(config, run.threads);
  namespace fs = std::filesystem;
  fs::create_directories(run.output_dir);
  std::vector<fs::path> written;
  try {
    for (const auto& [name, body] : out.files) {
      const fs::path target = run.output_dir / name;
      const fs::path tmp = run.output_dir / (name + ".tmp");
      written.push_back(tmp);
      {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        f.write(body.data(), static_cast<std::streamsize>(body.size()));
        f.flush();
        if (!f) throw std::runtime_error("write failed for " + tmp.string());
      }
      fs::rename(tmp, target);
      written.back() = target;
    }
  } catch (...) {
    std::error_code ec;
    for (const fs::path& p : written) fs::remove(p, ec);
    throw;
  }
  return out.all_pass ? 0 : 1;
}

}  // namespace mllab
