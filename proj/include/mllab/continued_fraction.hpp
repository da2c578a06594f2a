#pragma once

#include "mllab/rng.hpp"

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mllab {

/// Raised when a requested digit cannot be certified at the working
/// precision. Digits are never emitted past that point.
class PrecisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Working precision for an n-digit Gauss-map request. The map loses about
/// 3.42 bits per iterate on average.
constexpr std::size_t gauss_precision_bits(std::size_t n) noexcept { return 4 * n + 128; }

/// First n continued-fraction digits shared by every real in [lo, hi],
/// with 0 < lo <= hi < 1. Both endpoints are expanded in exact rational
/// arithmetic; if they disagree on a digit, or either expansion terminates,
/// before n digits, PrecisionError is thrown.
std::vector<std::int64_t> continued_fraction_digits(const mpq_class& lo,
                                                    const mpq_class& hi, std::size_t n);

/// Exact rational enclosure of a real number.
struct RationalInterval {
  mpq_class lo;
  mpq_class hi;
};

/// Gauss-distributed point x = 2^v - 1 with v a uniform dyadic of
/// `precision_bits` bits; the returned interval encloses x exactly.
RationalInterval draw_gauss_point(RandomStream& rng, std::size_t precision_bits);

/// n exact digits of a Gauss-distributed point.
std::vector<std::int64_t> gauss_digits(RandomStream& rng, std::size_t n);

}  // namespace mllab
