#include "mllab/localtime.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace mllab {

namespace {
constexpr std::int64_t kDirectRadiusLimit = 128;
}

struct WalkOracle::Convolver {
  virtual ~Convolver() = default;
  /// Replaces `row` by one convolution step, adding escaped mass to the
  /// overflow cells.
  virtual void apply(Eigen::VectorXd& row, double& low, double& high) = 0;
};

namespace {

class LazyConvolver final : public WalkOracle::Convolver {
 public:
  void apply(Eigen::VectorXd& row, double& low, double& high) override {
    const Eigen::Index w = row.size();
    Eigen::VectorXd next = 0.5 * row;
    next.tail(w - 1) += 0.25 * row.head(w - 1);
    next.head(w - 1) += 0.25 * row.tail(w - 1);
    low += 0.25 * row(0);
    high += 0.25 * row(w - 1);
    row.swap(next);
  }
};

/// Heavy-tailed kernel truncated to [-2R, 2R]; jumps that leave the window
/// are routed to the overflow cells through the exact upper-tail function.
class HeavyConvolver final : public WalkOracle::Convolver {
 public:
  HeavyConvolver(double d, std::int64_t radius) : radius_(radius) {
    const auto law = HeavyTailLaw::cached(d);
    const std::int64_t kw = 4 * radius + 1;
    kernel_.resize(kw);
    for (std::int64_t j = 0; j < kw; ++j) kernel_(j) = law->pmf(j - 2 * radius);
    tail_.resize(2 * radius + 1);
    for (std::int64_t j = 0; j <= 2 * radius; ++j) tail_(j) = law->upper_tail(j);

    if (radius > kDirectRadiusLimit) {
      // Circular length 4R+1 is enough: aliased terms never land on the
      // kept outputs 2R..4R.
      fft_size_ = 1;
      while (fft_size_ < static_cast<std::size_t>(4 * radius + 1)) fft_size_ <<= 1;
      fft_.SetFlag(Eigen::FFT<double>::HalfSpectrum);
      std::vector<double> padded(fft_size_, 0.0);
      for (std::int64_t j = 0; j < kw; ++j) padded[j] = kernel_(j);
      fft_.fwd(kernel_spectrum_, padded);
    }
  }

  void apply(Eigen::VectorXd& row, double& low, double& high) override {
    const std::int64_t r = radius_;
    const std::int64_t w = 2 * r + 1;
    // Escapes: from y (index i = y + r), P(X > r - y) and P(X < -r - y).
    for (std::int64_t i = 0; i < w; ++i) {
      high += row(i) * tail_(2 * r - i);
      low += row(i) * tail_(i);
    }
    Eigen::VectorXd next(w);
    if (fft_size_ == 0) {
      for (std::int64_t x = 0; x < w; ++x) {
        double s = 0.0;
        for (std::int64_t i = 0; i < w; ++i) s += row(i) * kernel_(x - i + 2 * r);
        next(x) = s;
      }
    } else {
      std::vector<double> padded(fft_size_, 0.0);
      for (std::int64_t i = 0; i < w; ++i) padded[i] = row(i);
      std::vector<std::complex<double>> spectrum;
      fft_.fwd(spectrum, padded);
      for (std::size_t k = 0; k < spectrum.size(); ++k) spectrum[k] *= kernel_spectrum_[k];
      std::vector<double> out;
      fft_.inv(out, spectrum, fft_size_);
      for (std::int64_t x = 0; x < w; ++x) next(x) = out[x + 2 * r];
    }
    row.swap(next);
  }

 private:
  std::int64_t radius_;
  Eigen::VectorXd kernel_;
  Eigen::VectorXd tail_;
  std::size_t fft_size_ = 0;
  Eigen::FFT<double> fft_;
  std::vector<std::complex<double>> kernel_spectrum_;
};

}  // namespace

WalkOracle::WalkOracle(const ProcessSpec& spec, std::size_t horizon, std::int64_t radius)
    : spec_(spec), radius_(radius) {
  if (!spec.is_iid_walk()) {
    throw std::invalid_argument("exact oracle requires an i.i.d. walk (lazy or heavy)");
  }
  spec.validate();
  if (radius < 1) throw std::invalid_argument("oracle radius must be at least 1");
  if (static_cast<double>(horizon) * static_cast<double>(radius) > kMaxCells) {
    throw std::invalid_argument("oracle guard exceeded: n * radius > 1e9 cells");
  }
  row_ = Eigen::VectorXd::Zero(2 * radius + 1);
  row_(radius) = 1.0;
  if (spec.kind == ProcessKind::LazyWalk) {
    convolver_ = std::make_unique<LazyConvolver>();
  } else {
    convolver_ = std::make_unique<HeavyConvolver>(spec.d, radius);
  }
}

WalkOracle::~WalkOracle() = default;
WalkOracle::WalkOracle(WalkOracle&&) noexcept = default;
WalkOracle& WalkOracle::operator=(WalkOracle&&) noexcept = default;

void WalkOracle::step() {
  convolver_->apply(row_, overflow_low_, overflow_high_);
  ++time_;
}

double WalkOracle::prob(std::int64_t x) const {
  if (x < -radius_ || x > radius_) return 0.0;
  return row_(x + radius_);
}

double WalkOracle::total_mass() const {
  return row_.sum() + overflow_low_ + overflow_high_;
}

}  // namespace mllab
