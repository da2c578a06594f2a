#pragma once

#include <cmath>
#include <span>

namespace mllab {

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  CompensatedSum& operator+=(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) noexcept {
  CompensatedSum s;
  for (double x : xs) s += x;
  return s.value();
}

/// Sample mean and unbiased variance, both accumulated in index order.
struct MeanVariance {
  double mean = 0.0;
  double variance = 0.0;
};

inline MeanVariance mean_variance(std::span<const double> xs) noexcept {
  MeanVariance out;
  if (xs.empty()) return out;
  // Shifted by the first sample so identical inputs give variance 0 exactly.
  const double shift = xs.front();
  CompensatedSum s;
  for (double x : xs) s += x - shift;
  const double centered_mean = s.value() / static_cast<double>(xs.size());
  out.mean = shift + centered_mean;
  if (xs.size() < 2) return out;
  CompensatedSum ss;
  for (double x : xs) {
    const double dev = (x - shift) - centered_mean;
    ss += dev * dev;
  }
  out.variance = ss.value() / static_cast<double>(xs.size() - 1);
  return out;
}

}  // namespace mllab
