#include "mllab/processes.hpp"

#include "mllab/continued_fraction.hpp"
#include "mllab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace mllab {

std::string to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::LazyWalk: return "lazy";
    case ProcessKind::HeavyTailWalk: return "heavy";
    case ProcessKind::GaussCFPair: return "cf";
    case ProcessKind::BetaPair: return "beta";
  }
  return "unknown";
}

ProcessKind parse_process_kind(const std::string& name) {
  if (name == "lazy") return ProcessKind::LazyWalk;
  if (name == "heavy") return ProcessKind::HeavyTailWalk;
  if (name == "cf") return ProcessKind::GaussCFPair;
  if (name == "beta") return ProcessKind::BetaPair;
  throw std::invalid_argument("unknown process '" + name + "' (expected lazy, heavy, cf, beta)");
}

void ProcessSpec::validate() const {
  if (kind == ProcessKind::HeavyTailWalk && !(d > 1.0 && d <= 2.0)) {
    throw std::invalid_argument("heavy-tail walk needs d in (1, 2]");
  }
  if (kind == ProcessKind::BetaPair && !(beta > 1.0)) {
    throw std::invalid_argument("beta transformation needs beta > 1");
  }
}

bool IntTrajectory::consistent() const noexcept {
  if (increments.size() != partial_sums.size()) return false;
  std::int64_t prev = 0;
  for (std::size_t k = 0; k < increments.size(); ++k) {
    if (partial_sums[k] - prev != increments[k]) return false;
    prev = partial_sums[k];
  }
  return true;
}

IntTrajectory IntTrajectory::from_increments(std::vector<std::int64_t> increments,
                                             const ProcessSpec& spec) {
  IntTrajectory traj;
  traj.partial_sums.resize(increments.size());
  std::int64_t s = 0;
  for (std::size_t k = 0; k < increments.size(); ++k) {
    s += increments[k];
    traj.partial_sums[k] = s;
  }
  traj.increments = std::move(increments);
  traj.spec = spec;
  return traj;
}

namespace {

void require_length(std::size_t n) {
  if (n == 0) throw std::invalid_argument("trajectory length must be at least 1");
}

}  // namespace

IntTrajectory gen_lazy_walk(std::size_t n, RandomStream& rng) {
  require_length(n);
  std::vector<std::int64_t> inc;
  inc.reserve(n);
  for_each_lazy_increment(rng, n, [&](int x) { inc.push_back(x); });
  return IntTrajectory::from_increments(std::move(inc), {ProcessKind::LazyWalk});
}

// ---------------------------------------------------------------------------
// Heavy-tailed walk

HeavyTailLaw::HeavyTailLaw(double d, std::int64_t cutoff) : d_(d), cutoff_(cutoff) {
  if (!(d > 1.0 && d <= 2.0)) throw std::invalid_argument("heavy-tail walk needs d in (1, 2]");
  if (cutoff < 1) throw std::invalid_argument("heavy-tail cutoff must be positive");
  // Midpoint Euler-Maclaurin remainder of sum_{k > K} k^-(1+d).
  tail_beyond_cutoff_ = std::pow(static_cast<double>(cutoff) + 0.5, -d) / d;

  // Backward accumulation: smallest terms first.
  std::vector<double> tail_sum(static_cast<std::size_t>(cutoff) + 1);
  CompensatedSum acc;
  acc += tail_beyond_cutoff_;
  tail_sum[static_cast<std::size_t>(cutoff)] = acc.value();
  for (std::int64_t k = cutoff; k >= 1; --k) {
    acc += std::pow(static_cast<double>(k), -(1.0 + d));
    tail_sum[static_cast<std::size_t>(k - 1)] = acc.value();
  }
  zeta_ = tail_sum[0];
  magnitude_survival_.resize(tail_sum.size());
  for (std::size_t k = 0; k < tail_sum.size(); ++k) magnitude_survival_[k] = tail_sum[k] / zeta_;
  magnitude_survival_[0] = 1.0;
}

std::shared_ptr<const HeavyTailLaw> HeavyTailLaw::cached(double d) {
  static std::mutex mutex;
  static std::map<double, std::shared_ptr<const HeavyTailLaw>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[d];
  if (!slot) slot = std::make_shared<const HeavyTailLaw>(d);
  return slot;
}

double HeavyTailLaw::pmf(std::int64_t k) const {
  if (k == 0) return 0.0;
  const double m = static_cast<double>(k < 0 ? -k : k);
  return 0.5 * std::pow(m, -(1.0 + d_)) / zeta_;
}

double HeavyTailLaw::upper_tail(std::int64_t k) const {
  if (k < 0) throw std::invalid_argument("upper_tail expects k >= 0");
  if (k <= cutoff_) return 0.5 * magnitude_survival_[static_cast<std::size_t>(k)];
  return 0.5 * std::pow(static_cast<double>(k) + 0.5, -d_) / d_ / zeta_;
}

double HeavyTailLaw::truncated_variance() const {
  CompensatedSum s;
  for (std::int64_t k = cutoff_; k >= 1; --k) {
    const double m = static_cast<double>(k);
    s += 2.0 * m * m * pmf(k);
  }
  return s.value();
}

std::int64_t HeavyTailLaw::sample(RandomStream& rng) const {
  const double u = rng.uniform_open();
  const bool negative = (rng.bits() >> 63) != 0;
  std::int64_t magnitude;
  const double beyond = magnitude_survival_.back();
  if (u <= beyond) {
    // Continuous Pareto extension of the tail beyond the table.
    const double v = u / beyond;
    const double k0 = static_cast<double>(cutoff_) + 0.5;
    const double m = std::floor(k0 * std::pow(v, -1.0 / d_) + 0.5);
    magnitude = static_cast<std::int64_t>(std::min(m, 0x1.0p50));
    magnitude = std::max(magnitude, cutoff_ + 1);
  } else {
    // Smallest k with P(|X| > k) < u; the table is decreasing.
    auto it = std::lower_bound(magnitude_survival_.begin(), magnitude_survival_.end(), u,
                               [](double s, double target) { return s >= target; });
    magnitude = static_cast<std::int64_t>(it - magnitude_survival_.begin());
  }
  return negative ? -magnitude : magnitude;
}

IntTrajectory gen_heavy_tail_walk(std::size_t n, double d, RandomStream& rng) {
  require_length(n);
  ProcessSpec spec{ProcessKind::HeavyTailWalk, d};
  spec.validate();
  const auto law = HeavyTailLaw::cached(d);
  std::vector<std::int64_t> inc(n);
  for (auto& x : inc) x = law->sample(rng);
  return IntTrajectory::from_increments(std::move(inc), spec);
}

// ---------------------------------------------------------------------------
// Digit-difference pairs

IntTrajectory gen_cf_pair(std::size_t n, RandomStream& rng) {
  require_length(n);
  const auto x = gauss_digits(rng, n);
  const auto y = gauss_digits(rng, n);
  std::vector<std::int64_t> inc(n);
  for (std::size_t i = 0; i < n; ++i) inc[i] = x[i] - y[i];
  return IntTrajectory::from_increments(std::move(inc), {ProcessKind::GaussCFPair});
}

std::vector<int> beta_digits(double x, double beta, std::size_t n) {
  std::vector<int> digits(n);
  for (auto& c : digits) {
    const double bx = beta * x;
    const double k = std::floor(bx);
    c = static_cast<int>(k);
    x = bx - k;
  }
  return digits;
}

namespace {

constexpr int kBetaBurnIn = 1000;

double beta_orbit_start(double beta, RandomStream& rng) {
  double x = rng.uniform();
  for (int i = 0; i < kBetaBurnIn; ++i) {
    const double bx = beta * x;
    x = bx - std::floor(bx);
  }
  return x;
}

}  // namespace

IntTrajectory gen_beta_pair(std::size_t n, double beta, RandomStream& rng) {
  require_length(n);
  ProcessSpec spec{ProcessKind::BetaPair, 2.0, beta};
  spec.validate();
  std::vector<std::int64_t> inc;
  inc.reserve(n);
  if (beta == 2.0) {
    // Exact: the binary digits of two independent uniform points.
    for_each_lazy_increment(rng, n, [&](int x) { inc.push_back(x); });
  } else {
    // Floating-point orbits; a distributional proxy only.
    const double x0 = beta_orbit_start(beta, rng);
    const double y0 = beta_orbit_start(beta, rng);
    const auto dx = beta_digits(x0, beta, n);
    const auto dy = beta_digits(y0, beta, n);
    for (std::size_t i = 0; i < n; ++i) inc.push_back(dx[i] - dy[i]);
  }
  return IntTrajectory::from_increments(std::move(inc), spec);
}

IntTrajectory generate(const ProcessSpec& spec, std::size_t n) {
  spec.validate();
  RandomStream rng(spec.seed);
  IntTrajectory traj;
  switch (spec.kind) {
    case ProcessKind::LazyWalk: traj = gen_lazy_walk(n, rng); break;
    case ProcessKind::HeavyTailWalk: traj = gen_heavy_tail_walk(n, spec.d, rng); break;
    case ProcessKind::GaussCFPair: traj = gen_cf_pair(n, rng); break;
    case ProcessKind::BetaPair: traj = gen_beta_pair(n, spec.beta, rng); break;
  }
  traj.spec = spec;
  return traj;
}

// ---------------------------------------------------------------------------

std::int64_t SkewProductTrack::visits_up_to(std::size_t k) const {
  std::int64_t count = 0;
  for (std::size_t i = 0; i < k && i < visits.size(); ++i) count += visits[i];
  return count;
}

SkewProductTrack skew_product_trajectory(const IntTrajectory& traj) {
  SkewProductTrack track;
  track.fiber = traj.partial_sums;
  track.visits.resize(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    track.visits[k] = traj.partial_sums[k] == 0 ? 1 : 0;
  }
  return track;
}

void write_trajectory_csv(std::ostream& os, const IntTrajectory& traj) {
  os << "step,increment,partial_sum\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    os << (k + 1) << ',' << traj.increments[k] << ',' << traj.partial_sums[k] << '\n';
  }
}

}  // namespace mllab
