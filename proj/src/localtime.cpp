#include "mllab/localtime.hpp"

#include "mllab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mllab {

LocalTimeProfile local_time(const IntTrajectory& traj, std::int64_t level) {
  LocalTimeProfile profile;
  profile.level = level;
  profile.counts.resize(traj.size());
  std::int64_t count = 0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    if (traj.partial_sums[k] == level) {
      ++count;
      profile.return_times.push_back(k + 1);
    }
    profile.counts[k] = count;
  }
  return profile;
}

void write_profile_csv(std::ostream& os, const LocalTimeProfile& profile) {
  os << "step,count\n";
  for (std::size_t k = 0; k < profile.counts.size(); ++k) {
    os << (k + 1) << ',' << profile.counts[k] << '\n';
  }
}

ScalingScheme ScalingScheme::make(double d, double scale_c, double g0) {
  if (!(d > 0.0 && d <= 2.0)) throw std::invalid_argument("stability index must lie in (0, 2]");
  const double beta = 1.0 / d;
  if (!(beta >= 0.5 && beta < 1.0)) {
    throw std::invalid_argument("scaling exponent 1/d = " + std::to_string(beta) +
                                " outside [1/2, 1); a_n would not diverge regularly");
  }
  if (!(scale_c > 0.0) || !(g0 > 0.0)) {
    throw std::invalid_argument("scale constant and g(0) must be positive");
  }
  return ScalingScheme{d, beta, scale_c, g0};
}

ScalingScheme ScalingScheme::lazy_walk() {
  return make(2.0, std::sqrt(0.5), 1.0 / std::sqrt(2.0 * std::numbers::pi));
}

double ScalingScheme::scale(double n) const { return scale_c * std::pow(n, beta_exp); }

double normalizer(const ScalingScheme& scheme, std::size_t n) {
  if (n < 1) throw std::invalid_argument("normalizer index must be at least 1");
  CompensatedSum s;
  for (std::size_t k = 1; k <= n; ++k) s += 1.0 / scheme.scale(static_cast<double>(k));
  return scheme.g0 * s.value();
}

ReturnSequence::ReturnSequence(const ScalingScheme& scheme, std::size_t horizon)
    : scheme_(scheme), prefix_(horizon + 1, 0.0) {
  CompensatedSum s;
  for (std::size_t k = 1; k <= horizon; ++k) {
    s += 1.0 / scheme.scale(static_cast<double>(k));
    prefix_[k] = scheme.g0 * s.value();
  }
}

double ReturnSequence::operator()(std::size_t n) const {
  if (n < 1 || n > horizon()) {
    throw std::out_of_range("a_n requested at n = " + std::to_string(n) + " outside [1, " +
                            std::to_string(horizon()) + "]");
  }
  return prefix_[n];
}

double ReturnSequence::at(double u) const {
  if (!(u >= 1.0)) throw std::out_of_range("a_u requires u >= 1");
  return (*this)(static_cast<std::size_t>(std::floor(u)));
}

// ---------------------------------------------------------------------------

double WalkDistribution::operator()(std::size_t m, std::int64_t x) const {
  if (x < -radius || x > radius) return 0.0;
  return prob(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(x + radius));
}

WalkDistribution exact_walk_distribution(const ProcessSpec& spec, std::size_t n,
                                         std::int64_t radius) {
  WalkOracle oracle(spec, n, radius);
  const double cells = static_cast<double>(n + 1) * static_cast<double>(2 * radius + 1);
  if (cells > 0x1.0p28) {
    throw std::invalid_argument("dense oracle table too large; use WalkOracle to stream rows");
  }
  WalkDistribution table;
  table.radius = radius;
  table.prob.resize(static_cast<Eigen::Index>(n + 1), 2 * radius + 1);
  table.overflow_low.resize(static_cast<Eigen::Index>(n + 1));
  table.overflow_high.resize(static_cast<Eigen::Index>(n + 1));
  for (std::size_t m = 0; m <= n; ++m) {
    if (m > 0) oracle.step();
    const auto i = static_cast<Eigen::Index>(m);
    table.prob.row(i) = oracle.row().transpose();
    table.overflow_low(i) = oracle.overflow_low();
    table.overflow_high(i) = oracle.overflow_high();
  }
  return table;
}

void write_oracle_csv(std::ostream& os, const WalkDistribution& table) {
  os << "m,x,prob\n";
  char buf[64];
  for (std::size_t m = 0; m <= table.horizon(); ++m) {
    for (std::int64_t x = -table.radius; x <= table.radius; ++x) {
      std::snprintf(buf, sizeof buf, "%.17g", table(m, x));
      os << m << ',' << x << ',' << buf << '\n';
    }
  }
}

std::int64_t default_oracle_radius(const ProcessSpec& spec, std::size_t n) {
  const auto cap = static_cast<std::int64_t>(WalkOracle::kMaxCells / static_cast<double>(n));
  std::int64_t want;
  if (spec.kind == ProcessKind::LazyWalk) {
    want = static_cast<std::int64_t>(n);  // exact: the walk cannot leave [-n, n]
  } else {
    want = std::max<std::int64_t>(
        256, static_cast<std::int64_t>(32.0 * std::pow(static_cast<double>(n), 1.0 / spec.d)));
  }
  return std::max<std::int64_t>(1, std::min(want, cap));
}

std::vector<std::size_t> log_checkpoints(std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t decade = 1; decade <= n; decade *= 10) {
    for (std::size_t m : {1, 2, 5}) {
      if (m * decade <= n) out.push_back(m * decade);
    }
    if (decade > n / 10) break;
  }
  if (out.empty() || out.back() != n) out.push_back(n);
  return out;
}

ExpectedLocalTimeReport expected_local_time_check(const ProcessSpec& spec,
                                                  const ScalingScheme& scheme, std::size_t n) {
  if (n < 1) throw std::invalid_argument("horizon must be at least 1");
  WalkOracle oracle(spec, n, default_oracle_radius(spec, n));
  const ReturnSequence a(scheme, n);
  ExpectedLocalTimeReport report;
  report.n = n;
  report.checkpoints = log_checkpoints(n);
  CompensatedSum expected;
  std::size_t next = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    oracle.step();
    expected += oracle.prob(0);
    if (next < report.checkpoints.size() && report.checkpoints[next] == i) {
      report.expected_at.push_back(expected.value());
      report.ratio_at.push_back(expected.value() / a(i));
      ++next;
    }
  }
  report.expected_local_time = expected.value();
  report.normalizer = a(n);
  report.ratio = report.expected_local_time / report.normalizer;
  return report;
}

}  // namespace mllab
