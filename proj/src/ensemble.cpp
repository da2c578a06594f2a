#include "mllab/ensemble.hpp"

#include <stdexcept>
#include <string>

namespace mllab {

std::size_t EnsembleResult::checkpoint_index(std::size_t n) const {
  const auto it = std::find(checkpoints.begin(), checkpoints.end(), n);
  if (it == checkpoints.end()) {
    throw std::invalid_argument("checkpoint " + std::to_string(n) + " not in ensemble");
  }
  return static_cast<std::size_t>(it - checkpoints.begin());
}

Eigen::VectorXd EnsembleResult::scaled(std::size_t c) const {
  const auto col = static_cast<Eigen::Index>(c);
  return local_times.col(col).cast<double>() / normalizers(col);
}

Eigen::VectorXd EnsembleResult::weights(PathDensity density) const {
  const auto n = static_cast<Eigen::Index>(paths());
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    switch (density) {
      case PathDensity::Uniform: w(i) = 1.0; break;
      case PathDensity::FirstStepSign: w(i) = 1.0 + first_step_sign[i]; break;
      case PathDensity::EarlyPositionSign: w(i) = 1.0 + early_position_sign[i]; break;
    }
  }
  const double mean = w.mean();
  if (!(mean > 0.0)) throw std::runtime_error("reweighting density vanishes on every path");
  return w / mean;
}

namespace {
constexpr std::size_t kEarlyPositionTime = 16;

std::int8_t sign_of(std::int64_t v) { return static_cast<std::int8_t>((v > 0) - (v < 0)); }
}  // namespace

EnsembleResult run_local_time_ensemble(const ProcessSpec& spec, const ScalingScheme& scheme,
                                       std::vector<std::size_t> checkpoints, std::size_t paths,
                                       std::uint64_t master_seed, unsigned threads) {
  spec.validate();
  if (paths < 2) throw std::invalid_argument("an ensemble needs at least 2 paths");
  if (checkpoints.empty()) throw std::invalid_argument("no checkpoints given");
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  if (checkpoints.front() < 1) throw std::invalid_argument("checkpoints start at 1");

  EnsembleResult result;
  result.spec = spec;
  result.scheme = scheme;
  result.checkpoints = checkpoints;
  const std::size_t n = checkpoints.back();
  const ReturnSequence a(scheme, n);
  const auto nc = static_cast<Eigen::Index>(checkpoints.size());
  result.normalizers.resize(nc);
  for (Eigen::Index c = 0; c < nc; ++c) result.normalizers(c) = a(checkpoints[c]);

  result.seeds.resize(paths);
  result.local_times.resize(static_cast<Eigen::Index>(paths), nc);
  result.first_step_sign.assign(paths, 0);
  result.early_position_sign.assign(paths, 0);

  parallel_for(paths, threads, [&](std::size_t p) {
    const ProcessSpec ps = path_spec(spec, master_seed, p);
    result.seeds[p] = ps.seed;
    std::size_t next = 0;
    std::vector<std::int64_t> row(checkpoints.size());
    std::int8_t first = 0, early = 0;
    stream_path(ps, n, [&](std::size_t k, std::int64_t x, std::int64_t s, std::int64_t ell) {
      if (k == 1) first = sign_of(x);
      if (k == kEarlyPositionTime) early = sign_of(s);
      if (next < row.size() && k == checkpoints[next]) row[next++] = ell;
    });
    for (std::size_t c = 0; c < row.size(); ++c) {
      result.local_times(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(c)) = row[c];
    }
    result.first_step_sign[p] = first;
    result.early_position_sign[p] = early;
  });
  return result;
}

}  // namespace mllab
