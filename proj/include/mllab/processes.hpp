#pragma once

#include "mllab/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace mllab {

enum class ProcessKind { LazyWalk, HeavyTailWalk, GaussCFPair, BetaPair };

std::string to_string(ProcessKind kind);
ProcessKind parse_process_kind(const std::string& name);

struct ProcessSpec {
  ProcessKind kind = ProcessKind::LazyWalk;
  double d = 2.0;     // HeavyTailWalk stability index, in (1, 2]
  double beta = 2.0;  // BetaPair base, > 1
  std::uint64_t seed = 0;

  bool is_iid_walk() const noexcept {
    return kind == ProcessKind::LazyWalk || kind == ProcessKind::HeavyTailWalk;
  }
  /// Throws std::invalid_argument on out-of-range parameters.
  void validate() const;
};

/// Path S_1..S_n together with its increments X_1..X_n.
struct IntTrajectory {
  std::vector<std::int64_t> increments;
  std::vector<std::int64_t> partial_sums;
  ProcessSpec spec;

  std::size_t size() const noexcept { return increments.size(); }
  /// S_k - S_{k-1} == X_k for all k, with S_0 = 0.
  bool consistent() const noexcept;

  static IntTrajectory from_increments(std::vector<std::int64_t> increments,
                                       const ProcessSpec& spec);
};

/// Invokes f(x) with the lazy-walk increments x in {-1, 0, 1}.
/// Each block of 64 steps consumes two words a, b and uses bit i of each:
/// x_i = a_i - b_i. This is also the beta = 2 digit-difference process.
template <class F>
void for_each_lazy_increment(RandomStream& rng, std::size_t n, F&& f) {
  for (std::size_t i = 0; i < n; i += 64) {
    const std::uint64_t a = rng.bits();
    const std::uint64_t b = rng.bits();
    const std::size_t block = (n - i < 64) ? n - i : 64;
    for (std::size_t j = 0; j < block; ++j) {
      f(static_cast<int>((a >> j) & 1U) - static_cast<int>((b >> j) & 1U));
    }
  }
}

IntTrajectory gen_lazy_walk(std::size_t n, RandomStream& rng);
IntTrajectory gen_heavy_tail_walk(std::size_t n, double d, RandomStream& rng);
IntTrajectory gen_cf_pair(std::size_t n, RandomStream& rng);
IntTrajectory gen_beta_pair(std::size_t n, double beta, RandomStream& rng);

/// Dispatches on spec.kind with a stream seeded by spec.seed.
IntTrajectory generate(const ProcessSpec& spec, std::size_t n);

/// Digits floor(beta * T^(i-1) x) of the beta-transformation orbit of x.
std::vector<int> beta_digits(double x, double beta, std::size_t n);

/// Symmetric integer law with P(X = +-k) = k^-(1+d) / (2 zeta_hat(1+d)).
/// The magnitude survival function is tabulated up to `cutoff`; beyond it
/// the tail is the analytic remainder (K + 1/2)^-d / d of the zeta sum.
class HeavyTailLaw {
 public:
  static constexpr std::int64_t kDefaultCutoff = 1'000'000;

  explicit HeavyTailLaw(double d, std::int64_t cutoff = kDefaultCutoff);

  /// Shared immutable instance for the default cutoff.
  static std::shared_ptr<const HeavyTailLaw> cached(double d);

  double d() const noexcept { return d_; }
  std::int64_t cutoff() const noexcept { return cutoff_; }
  double normalizer() const noexcept { return zeta_; }

  /// P(X = k) for any integer k (P(X = 0) = 0).
  double pmf(std::int64_t k) const;
  /// P(X > k) for k >= 0.
  double upper_tail(std::int64_t k) const;
  /// Sum over |k| <= cutoff of k^2 P(X = k).
  double truncated_variance() const;

  std::int64_t sample(RandomStream& rng) const;

 private:
  double d_;
  std::int64_t cutoff_;
  double zeta_;
  double tail_beyond_cutoff_;           // sum_{k > cutoff} k^-(1+d)
  std::vector<double> magnitude_survival_;  // [k] = P(|X| > k), k = 0..cutoff
};

/// Z-coordinate of the skew product started at fiber 0 and the indicator
/// of visits to the zero fiber, indexed by k = 1..n (entry k-1).
struct SkewProductTrack {
  std::vector<std::int64_t> fiber;
  std::vector<std::uint8_t> visits;

  std::int64_t visits_up_to(std::size_t k) const;
};

SkewProductTrack skew_product_trajectory(const IntTrajectory& traj);

/// CSV "step,increment,partial_sum", one row per step.
void write_trajectory_csv(std::ostream& os, const IntTrajectory& traj);

}  // namespace mllab
