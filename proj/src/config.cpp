#include "mllab/harness.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace mllab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected) {
  throw ConfigError("bad value for '" + key + "': '" + value + "' (expected " + expected + ")");
}

template <class T>
T parse_integer(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  T v{};
  int base = 10;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    first += 2;
  }
  const auto [ptr, ec] = std::from_chars(first, last, v, base);
  if (s.empty() || ec != std::errc() || ptr != last) bad_value(key, text, "an integer");
  return v;
}

double parse_real(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    bad_value(key, text, "a finite real");
  }
  return v;
}

template <class T, class Parse>
std::vector<T> parse_list(const std::string& key, const std::string& text, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) bad_value(key, text, "a comma-separated list");
    out.push_back(parse(key, item));
  }
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& key, const std::string& text) {
  return parse_list<std::size_t>(key, text, parse_integer<std::size_t>);
}

std::vector<double> parse_reals(const std::string& key, const std::string& text) {
  return parse_list<double>(key, text, parse_real);
}

template <class T, class Fmt>
std::string join(const std::vector<T>& v, Fmt fmt) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt(v[i]);
  }
  return out;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
  return join(v, [](std::size_t x) { return std::to_string(x); });
}

std::string join_reals(const std::vector<double>& v) { return join(v, format_double); }

struct KeySpec {
  std::string doc;
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define MLLAB_SIZE_KEY(name, doc)                                                              \
  {#name,                                                                                     \
   {doc, [](ExperimentConfig& c, const std::string& k, const std::string& v) {                \
      c.name = parse_integer<std::size_t>(k, v);                                              \
    },                                                                                        \
    [](const ExperimentConfig& c) { return std::to_string(c.name); }}}

#define MLLAB_REAL_KEY(name, doc)                                                             \
  {#name,                                                                                     \
   {doc, [](ExperimentConfig& c, const std::string& k, const std::string& v) {                \
      c.name = parse_real(k, v);                                                              \
    },                                                                                        \
    [](const ExperimentConfig& c) { return format_double(c.name); }}}

const std::map<std::string, KeySpec>& key_table() {
  static const std::map<std::string, KeySpec> table = {
      {"process",
       {"lazy | heavy | cf | beta",
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          try {
            c.process = parse_process_kind(trim(v));
          } catch (const std::exception&) {
            bad_value(k, v, "lazy, heavy, cf or beta");
          }
        },
        [](const ExperimentConfig& c) { return to_string(c.process); }}},
      MLLAB_REAL_KEY(d, "stability index of the heavy-tailed walk, in (1, 2]"),
      MLLAB_REAL_KEY(beta, "base of the beta-transformation pair, > 1"),
      {"scheme",
       {"auto | calibrate | manual",
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          const std::string s = trim(v);
          if (s != "auto" && s != "calibrate" && s != "manual") {
            bad_value(k, v, "auto, calibrate or manual");
          }
          c.scheme = s;
        },
        [](const ExperimentConfig& c) { return c.scheme; }}},
      MLLAB_REAL_KEY(scale_c, "c in B_n = c n^(1/d) when scheme = manual"),
      MLLAB_REAL_KEY(g0, "limit density at zero when scheme = manual"),
      {"master_seed",
       {"64-bit master seed (decimal or 0x hex)",
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.master_seed = parse_integer<std::uint64_t>(k, v);
        },
        [](const ExperimentConfig& c) { return std::to_string(c.master_seed); }}},
      MLLAB_SIZE_KEY(horizon, "path length n"),
      MLLAB_SIZE_KEY(paths, "number of independent paths"),
      {"checkpoints",
       {"comma list of n, or auto for 1, 2, 5, 10, ... up to horizon",
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.checkpoints = trim(v) == "auto" ? std::vector<std::size_t>{} : parse_sizes(k, v);
        },
        [](const ExperimentConfig& c) {
          return c.checkpoints.empty() ? std::string("auto") : join_sizes(c.checkpoints);
        }}},
      MLLAB_REAL_KEY(gamma, "deviation band parameter, > 1"),
      {"t_values",
       {"comma list of deviation levels t",
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.t_values = parse_reals(k, v);
        },
        [](const ExperimentConfig& c) { return join_reals(c.t_values); }}},
      {"x_grid",
       {"comma list of x for the log-average CDF",
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.x_grid = parse_reals(k, v);
        },
        [](const ExperimentConfig& c) { return join_reals(c.x_grid); }}},
      MLLAB_SIZE_KEY(ensemble_horizon, "path length of the averaged log-average ensemble"),
      {"probe_horizons",
       {"comma list of N for the log-average variance probe",
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.probe_horizons = parse_sizes(k, v);
        },
        [](const ExperimentConfig& c) { return join_sizes(c.probe_horizons); }}},
      {"levels",
       {"comma list of levels x for the potential sums",
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.levels = parse_list<std::int64_t>(k, v, parse_integer<std::int64_t>);
        },
        [](const ExperimentConfig& c) {
          return join(c.levels, [](std::int64_t x) { return std::to_string(x); });
        }}},
      {"cond1_k",
       {"comma list of k (>= 16) for the covariance decay",
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.cond1_k = parse_sizes(k, v);
        },
        [](const ExperimentConfig& c) { return join_sizes(c.cond1_k); }}},
      MLLAB_SIZE_KEY(lm2_k, "k of the second-difference moment"),
      {"lm2_j",
       {"comma list of j > 2k for the second-difference moment",
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.lm2_j = parse_sizes(k, v);
        },
        [](const ExperimentConfig& c) { return join_sizes(c.lm2_j); }}},
      MLLAB_SIZE_KEY(lm2_paths, "paths for the second-difference moment"),
      MLLAB_SIZE_KEY(calibration_horizon, "oracle horizon used when the scheme is calibrated"),
      {"map",
       {"doubling | gauss | beta",
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          try {
            c.map = parse_map_kind(trim(v));
          } catch (const std::exception&) {
            bad_value(k, v, "doubling, gauss or beta");
          }
        },
        [](const ExperimentConfig& c) { return to_string(c.map); }}},
      MLLAB_REAL_KEY(map_beta, "beta of the beta map, > 1"),
      {"digit_cutoff",
       {"largest Gauss digit resolved by its own branch",
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.digit_cutoff = parse_integer<long>(k, v);
        },
        [](const ExperimentConfig& c) { return std::to_string(c.digit_cutoff); }}},
      {"resolution",
       {"number of Ulam cells",
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.resolution = parse_integer<long>(k, v);
        },
        [](const ExperimentConfig& c) { return std::to_string(c.resolution); }}},
      MLLAB_REAL_KEY(delta, "half-width of the small-t window"),
      {"t_points",
       {"grid points on each side of the spectral sweeps (total is 2 t_points + 1)",
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.t_points = parse_integer<int>(k, v);
        },
        [](const ExperimentConfig& c) { return std::to_string(c.t_points); }}},
      MLLAB_REAL_KEY(d_exp, "exponent d in |lambda_t| <= 1 - K |t|^d"),
      MLLAB_SIZE_KEY(oracle_horizon, "horizon of the exact distribution dumped by simulate"),
  };
  return table;
}

#undef MLLAB_SIZE_KEY
#undef MLLAB_REAL_KEY

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_string(Experiment e) {
  return experiment_names().at(static_cast<std::size_t>(e));
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"simulate", "verify-ml", "deviation",
                                                 "limsup",   "asclt",     "conditions",
                                                 "spectrum", "calibrate"};
  return names;
}

Experiment parse_experiment(const std::string& name) {
  const auto& names = experiment_names();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ConfigError("unknown experiment '" + name + "'");
  return static_cast<Experiment>(it - names.begin());
}

ExperimentConfig ExperimentConfig::defaults(Experiment e) {
  ExperimentConfig c;
  c.experiment = e;
  switch (e) {
    case Experiment::Simulate:
      c.horizon = 1000;
      c.paths = 1;
      break;
    case Experiment::VerifyML:
      c.horizon = 100000;
      c.paths = 10000;
      break;
    case Experiment::Deviation:
      c.horizon = 100000;
      c.paths = 100000;
      break;
    case Experiment::Limsup:
      c.horizon = 1000000;
      c.paths = 1;
      break;
    case Experiment::ASCLT:
      c.horizon = 1000000;
      c.paths = 1000;
      break;
    case Experiment::Conditions:
      c.horizon = 10000;
      c.paths = 10000;
      break;
    case Experiment::Spectrum:
      c.horizon = 1;
      c.paths = 1;
      break;
    case Experiment::Calibrate:
      c.horizon = 10000;
      c.paths = 1;
      break;
  }
  return c;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  const auto& table = key_table();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second.set(*this, key, value);
}

std::map<std::string, std::string> ExperimentConfig::to_key_values() const {
  std::map<std::string, std::string> out;
  for (const auto& [key, spec] : key_table()) out[key] = spec.get(*this);
  return out;
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
  };
  feed("experiment=" + to_string(experiment) + "\n");
  for (const auto& [k, v] : to_key_values()) feed(k + "=" + v + "\n");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  ProcessSpec spec;
  spec.kind = process;
  spec.d = d;
  spec.beta = beta;
  try {
    spec.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  require(horizon >= 1, "horizon must be >= 1");
  require(paths >= 1, "paths must be >= 1");
  require(scheme != "manual" || (scale_c > 0.0 && g0 > 0.0),
          "scheme = manual needs scale_c > 0 and g0 > 0");
  for (std::size_t n : checkpoints) {
    require(n >= 1 && n <= horizon, "checkpoints must lie in [1, horizon]");
  }
  require(gamma > 1.0, "gamma must be > 1");
  require(!t_values.empty(), "t_values is empty");
  require(!x_grid.empty(), "x_grid is empty");
  require(ensemble_horizon >= 1, "ensemble_horizon must be >= 1");
  require(probe_horizons.size() >= 3, "probe_horizons needs at least three entries");
  require(!levels.empty(), "levels is empty");
  require(!cond1_k.empty(), "cond1_k is empty");
  for (std::size_t k : cond1_k) require(k >= 16, "cond1_k entries must be >= 16");
  require(lm2_k >= 1, "lm2_k must be >= 1");
  require(!lm2_j.empty(), "lm2_j is empty");
  for (std::size_t j : lm2_j) require(j > 2 * lm2_k, "lm2_j entries must exceed 2 lm2_k");
  require(lm2_paths >= 2, "lm2_paths must be >= 2");
  require(calibration_horizon >= 20, "calibration_horizon must be >= 20");
  require(map_beta > 1.0, "map_beta must be > 1");
  require(digit_cutoff >= 1, "digit_cutoff must be >= 1");
  require(resolution >= 2, "resolution must be >= 2");
  require(delta > 0.0 && delta < 3.141592653589793, "delta must lie in (0, pi)");
  require(t_points >= 4, "t_points must be >= 4");
  require(d_exp > 0.0, "d_exp must be > 0");
  require(oracle_horizon >= 1, "oracle_horizon must be >= 1");
}

const std::map<std::string, std::string>& config_key_docs() {
  static const std::map<std::string, std::string> docs = [] {
    std::map<std::string, std::string> m;
    for (const auto& [k, spec] : key_table()) m[k] = spec.doc;
    m["threads"] = "worker threads (does not change any output)";
    m["output_dir"] = "directory for result files";
    return m;
  }();
  return docs;
}

std::map<std::string, std::string> parse_config_text(const std::string& text,
                                                     const std::string& origin) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!config_key_docs().count(key)) {
      throw ConfigError(where + ": unknown config key '" + key + "'");
    }
    if (out.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    out[key] = value;
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

std::map<std::string, std::string> environment_overrides(char** envp) {
  std::map<std::string, std::string> out;
  if (!envp) return out;
  const std::string prefix = "ML_LAB_";
  for (char** e = envp; *e; ++e) {
    const std::string entry = *e;
    if (entry.rfind(prefix, 0) != 0) continue;
    const auto eq = entry.find('=');
    std::string key = entry.substr(prefix.size(), eq - prefix.size());
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (!config_key_docs().count(key)) {
      throw ConfigError("unknown environment override " + entry.substr(0, eq));
    }
    out[key] = eq == std::string::npos ? std::string() : entry.substr(eq + 1);
  }
  return out;
}

void apply_settings(ExperimentConfig& config, RunOptions& run,
                    const std::map<std::string, std::string>& settings) {
  for (const auto& [key, value] : settings) {
    if (key == "threads") {
      const unsigned t = parse_integer<unsigned>(key, value);
      if (t == 0) bad_value(key, value, "a positive integer");
      run.threads = t;
    } else if (key == "output_dir") {
      if (trim(value).empty()) bad_value(key, value, "a directory");
      run.output_dir = trim(value);
    } else {
      config.set(key, value);
    }
  }
}

ExperimentConfig config_from_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest, std::ios::binary);
  if (!in) throw ConfigError("cannot read manifest " + manifest.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("manifest " + manifest.string() + " is not valid JSON: " + e.what());
  }
  if (!j.contains("experiment") || !j.contains("config") || !j["config"].is_object()) {
    throw ConfigError("manifest " + manifest.string() + " lacks experiment/config");
  }
  ExperimentConfig c = ExperimentConfig::defaults(parse_experiment(j["experiment"].get<std::string>()));
  for (const auto& [k, v] : j["config"].items()) {
    if (!v.is_string()) throw ConfigError("manifest config value for '" + k + "' is not a string");
    c.set(k, v.get<std::string>());
  }
  if (j.contains("config_hash") && j["config_hash"].get<std::string>() != c.hash()) {
    throw ConfigError("manifest config hash does not match its config");
  }
  return c;
}

}  // namespace mllab
