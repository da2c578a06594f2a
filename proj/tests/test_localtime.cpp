#include "doctest.h"

#include "mllab/localtime.hpp"
#include "mllab/numerics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace mllab;

namespace {

ProcessSpec lazy() { return ProcessSpec{}; }

ProcessSpec heavy(double d) {
  ProcessSpec s;
  s.kind = ProcessKind::HeavyTailWalk;
  s.d = d;
  return s;
}

// Lazy walk S_n = A - B with A, B ~ Bin(n, 1/2), so
// P(S_n = x) = C(2n, n + x) / 4^n.
double lazy_prob(std::size_t n, std::int64_t x) {
  const double N = 2.0 * n, k = static_cast<double>(n) + x;
  if (k < 0 || k > N) return 0.0;
  return std::exp(std::lgamma(N + 1) - std::lgamma(k + 1) - std::lgamma(N - k + 1) -
                  N * std::log(2.0));
}

}  // namespace

TEST_CASE("local time profile of a hand-written path") {
  const IntTrajectory t = IntTrajectory::from_increments({1, -1, 1, -1}, lazy());
  const LocalTimeProfile p = local_time(t, 0);
  CHECK(p.counts == std::vector<std::int64_t>{0, 1, 1, 2});
  CHECK(p.return_times == std::vector<std::size_t>{2, 4});
  const LocalTimeProfile q = local_time(t, 1);
  CHECK(q.counts == std::vector<std::int64_t>{1, 1, 2, 2});
  std::ostringstream os;
  write_profile_csv(os, p);
  CHECK(os.str() == "step,count\n1,0\n2,1\n3,1\n4,2\n");
}

TEST_CASE("scaling scheme constants") {
  const ScalingScheme s = ScalingScheme::lazy_walk();
  CHECK(s.d == 2.0);
  CHECK(s.alpha() == 0.5);
  CHECK(s.scale_c == doctest::Approx(std::sqrt(0.5)));
  CHECK(s.g0 == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)));
  CHECK(s.scale(4.0) == doctest::Approx(2.0 * std::sqrt(0.5)));
  CHECK_THROWS(ScalingScheme::make(1.0, 1.0, 1.0));
  CHECK_THROWS(ScalingScheme::make(2.5, 1.0, 1.0));
  CHECK_THROWS(ScalingScheme::make(2.0, 0.0, 1.0));
  CHECK_THROWS(ScalingScheme::make(2.0, 1.0, -1.0));
  CHECK(ScalingScheme::make(1.5, 1.0, 1.0).alpha() == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("return sequence against direct sums and its asymptote") {
  const ScalingScheme s = ScalingScheme::lazy_walk();
  CHECK(normalizer(s, 1) == doctest::Approx(s.g0 / s.scale_c).epsilon(1e-15));
  const ReturnSequence a(s, 100000);
  for (std::size_t n : {1UL, 2UL, 17UL, 1000UL, 100000UL}) {
    CompensatedSum direct;
    for (std::size_t k = 1; k <= n; ++k) direct += s.g0 / (s.scale_c * std::sqrt(double(k)));
    CHECK(a(n) == doctest::Approx(direct.value()).epsilon(1e-13));
    CHECK(normalizer(s, n) == doctest::Approx(direct.value()).epsilon(1e-13));
  }
  // sum_{k<=n} k^-1/2 = 2 sqrt(n) + zeta(1/2) + n^-1/2 / 2 + O(n^-3/2).
  const double zeta_half = -1.4603545088095868;
  const double n = 100000.0;
  CHECK(a(100000) == doctest::Approx(s.g0 / s.scale_c * (2.0 * std::sqrt(n) + zeta_half + 0.5 / std::sqrt(n))).epsilon(1e-10));
  CHECK(a.at(2.7) == a(2));
  CHECK_THROWS(normalizer(s, 0));
}

TEST_CASE("exact lazy-walk distribution matches the binomial closed form") {
  const WalkDistribution w = exact_walk_distribution(lazy(), 60, 60);
  CHECK(w(2, 0) == doctest::Approx(3.0 / 8.0).epsilon(1e-15));
  CHECK(w(1, 1) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(w(0, 0) == 1.0);
  for (std::size_t m = 0; m <= 60; ++m) {
    double mass = 0.0;
    for (std::int64_t x = -60; x <= 60; ++x) {
      REQUIRE(w(m, x) == doctest::Approx(lazy_prob(m, x)).epsilon(1e-12));
      mass += w(m, x);
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-13));
  }
  WalkOracle o(lazy(), 10000, 10000);
  for (int i = 0; i < 10000; ++i) o.step();
  CHECK(o.prob(0) == doctest::Approx(lazy_prob(10000, 0)).epsilon(1e-10));
  CHECK(o.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("heavy-tailed oracle by hand convolution") {
  const HeavyTailLaw& law = *HeavyTailLaw::cached(1.5);
  // Two steps: P(S_2 = x) = sum_y p(y) p(x - y), truncated at |y| <= 4000.
  auto two_step = [&](std::int64_t x) {
    CompensatedSum s;
    for (std::int64_t y = -4000; y <= 4000; ++y) s += law.pmf(y) * law.pmf(x - y);
    return s.value();
  };
  for (std::int64_t radius : {64, 300}) {  // direct and FFT convolution paths
    WalkOracle o(heavy(1.5), 2, radius);
    o.step();
    CHECK(o.prob(3) == doctest::Approx(law.pmf(3)).epsilon(1e-12));
    o.step();
    for (std::int64_t x : {0, 1, 5, 20}) {
      // Window loss: mass that left [-R, R] after step one cannot come back.
      INFO("radius " << radius << " x " << x);
      CHECK(std::abs(o.prob(x) - two_step(x)) < 2.0 * law.upper_tail(radius - 20) + 1e-12);
    }
    CHECK(o.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
  }
  // FFT and direct paths agree on a common window.
  WalkOracle a(heavy(1.3), 30, 128), b(heavy(1.3), 30, 129);
  for (int i = 0; i < 30; ++i) {
    a.step();
    b.step();
  }
  for (std::int64_t x = -10; x <= 10; ++x) CHECK(a.prob(x) == doctest::Approx(b.prob(x)).epsilon(1e-3));
}

TEST_CASE("exact oracle guards") {
  ProcessSpec cf;
  cf.kind = ProcessKind::GaussCFPair;
  CHECK_THROWS(WalkOracle(cf, 10, 10));
  CHECK_THROWS(exact_walk_distribution(lazy(), 100000, 100000));
}

TEST_CASE("oracle csv") {
  const WalkDistribution w = exact_walk_distribution(lazy(), 1, 1);
  std::ostringstream os;
  write_oracle_csv(os, w);
  CHECK(os.str().rfind("m,x,prob\n", 0) == 0);
  CHECK(os.str().find("1,1,0.25\n") != std::string::npos);
}

TEST_CASE("expected local time from the oracle") {
  const ExpectedLocalTimeReport r = expected_local_time_check(lazy(), ScalingScheme::lazy_walk(), 10000);
  CompensatedSum e;
  for (std::size_t i = 1; i <= 10000; ++i) e += lazy_prob(i, 0);
  CHECK(r.expected_local_time == doctest::Approx(e.value()).epsilon(1e-10));
  CHECK(r.ratio >= 0.9);
  CHECK(r.ratio <= 1.1);
  CHECK(r.checkpoints.back() == 10000);
}

TEST_CASE("log checkpoints") {
  CHECK(log_checkpoints(100) == std::vector<std::size_t>{1, 2, 5, 10, 20, 50, 100});
  CHECK(log_checkpoints(30) == std::vector<std::size_t>{1, 2, 5, 10, 20, 30});
  CHECK(log_checkpoints(1) == std::vector<std::size_t>{1});
}
