#pragma once

#include "mllab/localtime.hpp"
#include "mllab/parallel.hpp"
#include "mllab/processes.hpp"
#include "mllab/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace mllab {

/// Streams one path of length n, calling
///   obs(k, increment_k, partial_sum_k, local_time_at_zero_k)
/// for k = 1..n. Lazy walks are generated on the fly from the same bit
/// stream gen_lazy_walk uses; other processes are generated first.
template <class Observer>
void stream_path(const ProcessSpec& spec, std::size_t n, Observer&& obs) {
  if (spec.kind == ProcessKind::LazyWalk) {
    RandomStream rng(spec.seed);
    std::int64_t s = 0;
    std::int64_t ell = 0;
    std::size_t k = 0;
    for_each_lazy_increment(rng, n, [&](int x) {
      s += x;
      ell += (s == 0);
      obs(++k, static_cast<std::int64_t>(x), s, ell);
    });
    return;
  }
  const IntTrajectory traj = generate(spec, n);
  std::int64_t ell = 0;
  for (std::size_t k = 0; k < n; ++k) {
    ell += (traj.partial_sums[k] == 0);
    obs(k + 1, traj.increments[k], traj.partial_sums[k], ell);
  }
}

inline ProcessSpec path_spec(const ProcessSpec& tmpl, std::uint64_t master_seed,
                             std::size_t path_index) {
  ProcessSpec spec = tmpl;
  spec.seed = derive_path_seed(master_seed, path_index);
  return spec;
}

/// Bounded densities on path space used to reweight an ensemble. Each has
/// mean one under every symmetric process: they tilt by the sign of X_1 or
/// of S_16.
enum class PathDensity { Uniform, FirstStepSign, EarlyPositionSign };

/// Local times at checkpoints for a family of independent paths.
struct EnsembleResult {
  ProcessSpec spec;
  ScalingScheme scheme;
  std::vector<std::size_t> checkpoints;
  std::vector<std::uint64_t> seeds;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> local_times;  // paths x checkpoints
  Eigen::VectorXd normalizers;                                             // a at checkpoints
  std::vector<std::int8_t> first_step_sign;
  std::vector<std::int8_t> early_position_sign;

  std::size_t paths() const noexcept { return seeds.size(); }
  std::size_t terminal() const noexcept { return checkpoints.back(); }
  /// Index of checkpoint n, or throws std::invalid_argument.
  std::size_t checkpoint_index(std::size_t n) const;
  /// l_n / a_n across paths at checkpoint index c.
  Eigen::VectorXd scaled(std::size_t c) const;
  /// Per-path weights of a density, normalized to mean one.
  Eigen::VectorXd weights(PathDensity density) const;
};

/// Path i uses seed derive_path_seed(master_seed, i). Output does not depend
/// on the thread count.
EnsembleResult run_local_time_ensemble(const ProcessSpec& spec, const ScalingScheme& scheme,
                                       std::vector<std::size_t> checkpoints, std::size_t paths,
                                       std::uint64_t master_seed, unsigned threads = 1);

}  // namespace mllab
