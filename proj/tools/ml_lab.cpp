#include "mllab/harness.hpp"
#include "mllab/parallel.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

extern char** environ;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<std::size_t> horizon;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  std::vector<std::string> sets;
};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config, "flat key = value config file")->check(CLI::ExistingFile);
  sub->add_option("--seed", f.seed, "master seed");
  sub->add_option("--paths", f.paths, "number of paths");
  sub->add_option("--horizon", f.horizon, "path length");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--set", f.sets, "extra key=value setting (repeatable)");
}

std::map<std::string, std::string> cli_settings(const CommonFlags& f) {
  std::map<std::string, std::string> s;
  for (const std::string& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw mllab::ConfigError("--set expects key=value, got '" + kv + "'");
    s[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  if (f.seed) s["master_seed"] = std::to_string(*f.seed);
  if (f.paths) s["paths"] = std::to_string(*f.paths);
  if (f.horizon) s["horizon"] = std::to_string(*f.horizon);
  if (f.out) s["output_dir"] = *f.out;
  if (f.threads) s["threads"] = std::to_string(*f.threads);
  return s;
}

int report(int status, const mllab::RunOptions& run) {
  std::fprintf(stderr, "%s: results in %s\n", status == 0 ? "pass" : "FAIL",
               run.output_dir.string().c_str());
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local-time limit laws: simulation and verification"};
  app.require_subcommand(1);

  std::map<std::string, CommonFlags> flags;
  std::map<std::string, CLI::App*> subs;
  for (const std::string& name : mllab::experiment_names()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    add_common(sub, flags[name]);
    subs[name] = sub;
  }

  std::string manifest;
  std::optional<std::string> replay_out;
  std::optional<unsigned> replay_threads;
  CLI::App* replay = app.add_subcommand("replay", "re-run an experiment from its manifest.json");
  replay->add_option("--manifest", manifest, "manifest.json of a previous run")
      ->required()
      ->check(CLI::ExistingFile);
  replay->add_option("--out", replay_out, "output directory");
  replay->add_option("--threads", replay_threads, "worker threads")->check(CLI::PositiveNumber);

  CLI::App* keys = app.add_subcommand("keys", "list config keys");

  CLI11_PARSE(app, argc, argv);

  try {
    if (keys->parsed()) {
      for (const auto& [k, doc] : mllab::config_key_docs()) std::cout << k << "\t" << doc << "\n";
      return 0;
    }
    mllab::RunOptions run;
    run.threads = mllab::default_thread_count();
    if (replay->parsed()) {
      const mllab::ExperimentConfig config = mllab::config_from_manifest(manifest);
      if (replay_out) run.output_dir = *replay_out;
      if (replay_threads) run.threads = *replay_threads;
      return report(mllab::run_experiment(config, run), run);
    }
    for (const auto& [name, sub] : subs) {
      if (!sub->parsed()) continue;
      const CommonFlags& f = flags[name];
      mllab::ExperimentConfig config =
          mllab::ExperimentConfig::defaults(mllab::parse_experiment(name));
      if (!f.config.empty()) mllab::apply_settings(config, run, mllab::read_config_file(f.config));
      mllab::apply_settings(config, run, mllab::environment_overrides(environ));
      mllab::apply_settings(config, run, cli_settings(f));
      config.validate();
      return report(mllab::run_experiment(config, run), run);
    }
  } catch (const mllab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
