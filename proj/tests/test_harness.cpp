#include "doctest.h"

#include "mllab/calibrate.hpp"
#include "mllab/harness.hpp"
#include "mllab/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace mllab;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mllab_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_verify_ml() {
  ExperimentConfig c = ExperimentConfig::defaults(Experiment::VerifyML);
  c.paths = 300;
  c.horizon = 3000;
  return c;
}

}  // namespace

TEST_CASE("path seeds are pure and distinct") {
  CHECK(derive_path_seed(1, 2) == derive_path_seed(1, 2));
  const std::size_t n = 1000000;
  for (std::uint64_t master : {0ULL, 42ULL, 0xffffffffffffffffULL}) {
    std::vector<std::uint64_t> seeds(n);
    for (std::size_t i = 0; i < n; ++i) seeds[i] = derive_path_seed(master, i);
    std::sort(seeds.begin(), seeds.end());
    CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());
  }
}

TEST_CASE("path seed avalanche") {
  RandomStream rng(123);
  double flipped = 0.0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t s = rng.bits();
    const std::uint64_t bit = 1ULL << (rng.bits() % 64);
    const std::uint64_t i = rng.bits() % 1000000;
    flipped += std::popcount(derive_path_seed(s, i) ^ derive_path_seed(s ^ bit, i));
  }
  CHECK(flipped / trials >= 20.0);
}

TEST_CASE("config text parsing") {
  const auto kv = parse_config_text("# comment\nhorizon = 500\n\n paths=7 # trailing\n");
  CHECK(kv.at("horizon") == "500");
  CHECK(kv.at("paths") == "7");
  CHECK_THROWS_AS(parse_config_text("pathcount = 10\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("horizon 10\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("horizon = 1\nhorizon = 2\n"), ConfigError);

  ExperimentConfig c = ExperimentConfig::defaults(Experiment::Deviation);
  CHECK_THROWS_AS(c.set("pathcount", "10"), ConfigError);
  CHECK_THROWS_AS(c.set("horizon", "ten"), ConfigError);
  CHECK_THROWS_AS(c.set("horizon", "-3"), ConfigError);
  CHECK_THROWS_AS(c.set("gamma", "1.5x"), ConfigError);
  CHECK_THROWS_AS(c.set("process", "levy"), ConfigError);
  c.set("t_values", "2.5, 3");
  CHECK(c.t_values == std::vector<double>{2.5, 3.0});
  c.set("master_seed", "0x10");
  CHECK(c.master_seed == 16);
}

TEST_CASE("unknown key is rejected before any compute") {
  const fs::path dir = scratch_dir("typo");
  fs::create_directories(dir);
  std::ofstream(dir / "run.cfg") << "pathcount = 10\n";
  CHECK_THROWS_AS(read_config_file(dir / "run.cfg"), ConfigError);
  CHECK_FALSE(fs::exists(dir / "summary.json"));
}

TEST_CASE("settings layer in order") {
  ExperimentConfig c = ExperimentConfig::defaults(Experiment::VerifyML);
  RunOptions run;
  apply_settings(c, run, {{"paths", "10"}, {"horizon", "100"}});
  std::string e1 = "ML_LAB_PATHS=20", e2 = "ML_LAB_THREADS=3", e3 = "HOME=/root";
  std::vector<char*> env{e1.data(), e2.data(), e3.data(), nullptr};
  apply_settings(c, run, environment_overrides(env.data()));
  CHECK(c.paths == 20);
  CHECK(c.horizon == 100);
  CHECK(run.threads == 3);
  apply_settings(c, run, {{"paths", "30"}, {"output_dir", "x"}});
  CHECK(c.paths == 30);
  CHECK(run.output_dir == fs::path("x"));

  std::string bad = "ML_LAB_PATHCOUNT=1";
  std::vector<char*> env2{bad.data(), nullptr};
  CHECK_THROWS_AS(environment_overrides(env2.data()), ConfigError);
}

TEST_CASE("config round trip and hash") {
  ExperimentConfig c = ExperimentConfig::defaults(Experiment::Conditions);
  c.set("levels", "1,3");
  c.set("delta", "0.7");
  ExperimentConfig d = ExperimentConfig::defaults(Experiment::Conditions);
  for (const auto& [k, v] : c.to_key_values()) d.set(k, v);
  CHECK(d.hash() == c.hash());
  CHECK(d.to_key_values() == c.to_key_values());
  d.set("paths", "11");
  CHECK(d.hash() != c.hash());
  CHECK(c.hash().size() == 16);
}

TEST_CASE("validation") {
  ExperimentConfig c = ExperimentConfig::defaults(Experiment::VerifyML);
  c.gamma = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = ExperimentConfig::defaults(Experiment::VerifyML);
  c.scheme = "manual";
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.scale_c = 1.0;
  c.g0 = 0.4;
  CHECK_NOTHROW(c.validate());
  c.checkpoints = {0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("verify-ml creates its files") {
  const fs::path dir = scratch_dir("files");
  RunOptions run;
  run.output_dir = dir;
  const int rc = run_experiment(small_verify_ml(), run);
  CHECK((rc == 0 || rc == 1));
  CHECK(fs::exists(dir / "summary.json"));
  CHECK(fs::exists(dir / "ml_checkpoints.csv"));
  CHECK(fs::exists(dir / "manifest.json"));
  const std::string csv = slurp(dir / "ml_checkpoints.csv");
  CHECK(csv.rfind("n,normalizer,ks,mean,second_moment,ks_first_step,ks_early_position\n", 0) == 0);
  CHECK(csv.find('\r') == std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("outputs do not depend on the thread count and replay from the manifest") {
  for (Experiment e : {Experiment::VerifyML, Experiment::Deviation, Experiment::ASCLT,
                       Experiment::Conditions, Experiment::Simulate}) {
    ExperimentConfig c = ExperimentConfig::defaults(e);
    c.paths = 200;
    c.horizon = 2000;
    c.ensemble_horizon = 2000;
    c.probe_horizons = {100, 500, 1000};
    c.lm2_paths = 200;
    c.lm2_j = {200, 1000};
    c.lm2_k = 20;
    c.cond1_k = {16, 64};
    const ExperimentOutput a = execute(c, 1);
    const ExperimentOutput b = execute(c, 3);
    INFO(to_string(e));
    CHECK(a.files == b.files);

    const fs::path dir = scratch_dir("replay");
    RunOptions run;
    run.output_dir = dir;
    run.threads = 2;
    run_experiment(c, run);
    const ExperimentConfig back = config_from_manifest(dir / "manifest.json");
    CHECK(back.hash() == c.hash());
    const ExperimentOutput r = execute(back, 4);
    for (const auto& [name, body] : r.files) CHECK(slurp(dir / name) == body);
    fs::remove_all(dir);
  }
}

TEST_CASE("failed write removes partial outputs") {
  const fs::path dir = scratch_dir("partial");
  fs::create_directories(dir / "ml_checkpoints.csv.tmp");  // blocks the second file
  std::ofstream(dir / "ml_checkpoints.csv.tmp" / "x") << "x";
  RunOptions run;
  run.output_dir = dir;
  CHECK_THROWS(run_experiment(small_verify_ml(), run));
  CHECK_FALSE(fs::exists(dir / "manifest.json"));
  CHECK_FALSE(fs::exists(dir / "summary.json"));
  CHECK_FALSE(fs::exists(dir / "ml_checkpoints.csv"));
  fs::remove_all(dir);
}

TEST_CASE("exit status follows the verdicts") {
  // x = 1 alone gives a ratio of 1 and passes; the lazy-walk potential
  // sums at x = 8 exceed the frozen bound.
  ExperimentConfig c = ExperimentConfig::defaults(Experiment::Conditions);
  c.paths = 200;
  c.lm2_paths = 200;
  c.lm2_j = {200, 1000};
  c.lm2_k = 20;
  c.cond1_k = {16, 64};
  c.horizon = 2000;
  c.levels = {8};
  const ExperimentOutput out = execute(c, 1);
  CHECK(out.files.at("summary.json").find("\"potential_sums\": \"fail\"") != std::string::npos);
  CHECK_FALSE(out.all_pass);
}

TEST_CASE("calibration of the lazy walk") {
  const CalibrationReport r = calibrate(ProcessSpec{}, 10000);
  const double expect = std::sqrt(0.5) * std::sqrt(2.0 * std::numbers::pi);
  CHECK(std::abs(r.scheme.scale_c / r.scheme.g0 / expect - 1.0) < 0.02);
  CHECK(r.max_relative_residual < 0.05);
  // local CLT: P(S_n = 0) sigma sqrt(2 pi n) -> 1
  const std::size_t last = r.n_values.size() - 1;
  CHECK(r.n_values[last] == 10000);
  CHECK(std::abs(r.p_zero[last] * std::sqrt(0.5) * std::sqrt(2 * std::numbers::pi * 10000.0) - 1.0) < 0.01);
}

TEST_CASE("calibration of the heavy-tailed walk") {
  ProcessSpec s;
  s.kind = ProcessKind::HeavyTailWalk;
  s.d = 1.5;
  const CalibrationReport r = calibrate(s, 2000);
  CHECK(std::abs(r.fitted_exponent - 1.0 / 1.5) <= 0.02);
  CHECK(r.scheme.beta_exp == doctest::Approx(1.0 / 1.5));
  ProcessSpec cf;
  cf.kind = ProcessKind::GaussCFPair;
  CHECK_THROWS(calibrate(cf, 100));
}

TEST_CASE("manifest mismatch is detected") {
  const fs::path dir = scratch_dir("manifest");
  fs::create_directories(dir);
  std::ofstream(dir / "m.json") << R"({"experiment": "verify-ml", "config": {"paths": "5"}, "config_hash": "0000000000000000"})";
  CHECK_THROWS_AS(config_from_manifest(dir / "m.json"), ConfigError);
  std::ofstream(dir / "n.json") << R"({"experiment": "verify-ml", "config": {"pathz": "5"}})";
  CHECK_THROWS_AS(config_from_manifest(dir / "n.json"), ConfigError);
  fs::remove_all(dir);
}
