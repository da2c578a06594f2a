#include "mllab/continued_fraction.hpp"

#include <mpfr.h>

#include <string>

namespace mllab {

namespace {

class MpfrValue {
 public:
  explicit MpfrValue(mpfr_prec_t prec) { mpfr_init2(value_, prec); }
  ~MpfrValue() { mpfr_clear(value_); }
  MpfrValue(const MpfrValue&) = delete;
  MpfrValue& operator=(const MpfrValue&) = delete;

  mpfr_ptr get() { return value_; }

 private:
  mpfr_t value_;
};

mpq_class to_rational(mpfr_ptr x) {
  mpz_class mantissa;
  const mpfr_exp_t e = mpfr_get_z_2exp(mantissa.get_mpz_t(), x);
  mpq_class q(mantissa);
  if (e >= 0) {
    mpq_mul_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(e));
  } else {
    mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(-e));
  }
  q.canonicalize();
  return q;
}

}  // namespace

std::vector<std::int64_t> continued_fraction_digits(const mpq_class& lo,
                                                    const mpq_class& hi, std::size_t n) {
  if (!(lo > 0 && lo <= hi && hi < 1)) {
    throw std::invalid_argument("continued_fraction_digits: need 0 < lo <= hi < 1");
  }
  mpz_class num_lo = lo.get_num(), den_lo = lo.get_den();
  mpz_class num_hi = hi.get_num(), den_hi = hi.get_den();
  mpz_class c_lo, c_hi, r;
  std::vector<std::int64_t> digits;
  digits.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (num_lo == 0 || num_hi == 0) {
      throw PrecisionError("continued fraction terminated after " + std::to_string(i) +
                           " digits; more precision required");
    }
    mpz_fdiv_qr(c_lo.get_mpz_t(), r.get_mpz_t(), den_lo.get_mpz_t(), num_lo.get_mpz_t());
    den_lo = num_lo;
    num_lo = r;
    mpz_fdiv_qr(c_hi.get_mpz_t(), r.get_mpz_t(), den_hi.get_mpz_t(), num_hi.get_mpz_t());
    den_hi = num_hi;
    num_hi = r;
    if (c_lo != c_hi) {
      throw PrecisionError("digit " + std::to_string(i + 1) +
                           " is not determined at the working precision");
    }
    if (!c_lo.fits_slong_p()) throw PrecisionError("digit exceeds 64-bit range");
    digits.push_back(static_cast<std::int64_t>(c_lo.get_si()));
  }
  // The enclosure must sit strictly inside the n-th cylinder.
  if (n > 0 && (num_lo == 0 || num_hi == 0)) {
    throw PrecisionError("point lies on a cylinder boundary at digit " + std::to_string(n));
  }
  return digits;
}

RationalInterval draw_gauss_point(RandomStream& rng, std::size_t precision_bits) {
  const std::size_t words = (precision_bits + 63) / 64;
  std::vector<std::uint64_t> raw(words);
  for (auto& w : raw) w = rng.bits();
  mpz_class v;
  mpz_import(v.get_mpz_t(), raw.size(), -1, sizeof(std::uint64_t), 0, 0, raw.data());
  const auto total_bits = static_cast<mp_bitcnt_t>(words * 64);

  const auto prec = static_cast<mpfr_prec_t>(total_bits + 64);
  MpfrValue exponent(prec), lo(prec), hi(prec);
  mpfr_set_z_2exp(exponent.get(), v.get_mpz_t(), -static_cast<mpfr_exp_t>(total_bits),
                  MPFR_RNDN);  // exact
  mpfr_exp2(lo.get(), exponent.get(), MPFR_RNDD);
  mpfr_exp2(hi.get(), exponent.get(), MPFR_RNDU);
  mpfr_sub_ui(lo.get(), lo.get(), 1, MPFR_RNDD);
  mpfr_sub_ui(hi.get(), hi.get(), 1, MPFR_RNDU);
  return {to_rational(lo.get()), to_rational(hi.get())};
}

std::vector<std::int64_t> gauss_digits(RandomStream& rng, std::size_t n) {
  const RationalInterval x = draw_gauss_point(rng, gauss_precision_bits(n));
  return continued_fraction_digits(x.lo, x.hi, n);
}

}  // namespace mllab
