#pragma once

#include "mllab/processes.hpp"
#include "mllab/transferop.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace mllab {

inline constexpr const char* kArtifactName = "ml_lab";
inline constexpr const char* kArtifactVersion = "1.0.0";

/// Bad key, bad value, unreadable file. Raised before any compute starts.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Experiment { Simulate, VerifyML, Deviation, Limsup, ASCLT, Conditions, Spectrum, Calibrate };
std::string to_string(Experiment e);
Experiment parse_experiment(const std::string& name);
const std::vector<std::string>& experiment_names();

/// Every recorded setting of a run. Defaults depend on the experiment (see
/// ExperimentConfig::defaults); threads and output_dir are run options and
/// are not part of the recorded configuration.
struct ExperimentConfig {
  Experiment experiment = Experiment::VerifyML;

  // process
  ProcessKind process = ProcessKind::LazyWalk;
  double d = 2.0;
  double beta = 2.0;

  // scaling: "auto" (closed form for the lazy walk, calibrated otherwise),
  // "calibrate", or "manual" (scale_c and g0 taken as given)
  std::string scheme = "auto";
  double scale_c = 0.0;
  double g0 = 0.0;
  std::size_t calibration_horizon = 2000;

  std::uint64_t master_seed = 271828;
  std::size_t horizon = 100000;
  std::size_t paths = 10000;
  std::vector<std::size_t> checkpoints;  // empty: 1, 2, 5, 10, ... up to horizon

  // deviation
  double gamma = 1.5;
  std::vector<double> t_values{3.0, 4.0, 5.0};

  // asclt
  std::vector<double> x_grid{0.5, 1.0, 2.0};
  std::size_t ensemble_horizon = 100000;
  std::vector<std::size_t> probe_horizons{1000, 10000, 100000};

  // conditions
  std::vector<std::int64_t> levels{1, 2, 4, 8};
  std::vector<std::size_t> cond1_k{16, 64, 256, 1024};
  std::size_t lm2_k = 50;
  std::vector<std::size_t> lm2_j{1000, 10000, 100000};
  std::size_t lm2_paths = 10000;

  // spectrum
  MapKind map = MapKind::Doubling;
  double map_beta = 1.618033988749895;
  long digit_cutoff = 10000;
  long resolution = 4096;
  double delta = 1.5707963267948966;
  int t_points = 17;
  double d_exp = 2.0;

  // simulate
  std::size_t oracle_horizon = 100;

  /// Defaults for one experiment.
  static ExperimentConfig defaults(Experiment e);

  /// Sets one key from its textual value; throws ConfigError on unknown
  /// keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  /// Canonical key/value text of every recorded setting (sorted by key).
  std::map<std::string, std::string> to_key_values() const;
  /// FNV-1a 64 over the canonical "key=value\n" lines, as 16 hex digits.
  std::string hash() const;
  /// Checks cross-field ranges; throws ConfigError.
  void validate() const;
};

/// Settings that steer a run but do not change any output byte.
struct RunOptions {
  unsigned threads = 1;
  std::filesystem::path output_dir = "out";
};

/// Key names accepted by ExperimentConfig::set, with one-line docs.
const std::map<std::string, std::string>& config_key_docs();

/// "key = value" lines, '#' starts a comment, blank lines ignored.
std::map<std::string, std::string> parse_config_text(const std::string& text,
                                                     const std::string& origin = "config");
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// ML_LAB_<KEY> variables from the environment (key lower-cased). Unknown
/// ML_LAB_ variables are rejected. ML_LAB_THREADS and ML_LAB_OUTPUT_DIR are
/// returned under "threads" and "output_dir".
std::map<std::string, std::string> environment_overrides(char** envp);

/// Applies layered settings in order; "threads" and "output_dir" go to
/// `run`, everything else to `config`.
void apply_settings(ExperimentConfig& config, RunOptions& run,
                    const std::map<std::string, std::string>& settings);

/// Rebuilds the configuration recorded in a manifest.json.
ExperimentConfig config_from_manifest(const std::filesystem::path& manifest);

/// Files produced by one experiment, kept in memory until the run ends.
struct ExperimentOutput {
  std::map<std::string, std::string> files;  // name -> contents
  bool all_pass = true;                      // no failed PASS/FAIL verdict
};

/// Runs the experiment entirely in memory.
ExperimentOutput execute(const ExperimentConfig& config, unsigned threads);

/// execute() then writes every file into run.output_dir. On a write error
/// the files already written are removed and the error is rethrown.
/// Returns 0 if every verdict passed and 1 otherwise.
int run_experiment(const ExperimentConfig& config, const RunOptions& run);

/// Formats like printf("%.17g").
std::string format_double(double v);

}  // namespace mllab
