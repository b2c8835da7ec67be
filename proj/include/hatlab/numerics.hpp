#pragma once

// Arbitrary-precision real/complex scalars on top of MPFR, plus the exact
// rational tags that let callers keep points like 1/3 or pi/8 exact.

#include <gmpxx.h>
#include <mpfr.h>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hatlab {

/// Numeric failures that are not caller bugs: cap violations, truncation
/// budgets, near-zero divisors, poles.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PrecisionContext {
 public:
  static constexpr long kMinBits = 16;

  PrecisionContext(long bits, long guard_bits);

  long bits() const { return bits_; }
  long guard_bits() const { return guard_bits_; }
  /// Precision used for every internal computation and summation.
  long working_bits() const { return bits_ + guard_bits_; }

  friend bool operator==(const PrecisionContext&, const PrecisionContext&) = default;

 private:
  long bits_;
  long guard_bits_;
};

PrecisionContext make_context(long bits, long guard_bits);

class BigReal {
 public:
  explicit BigReal(mpfr_prec_t prec = 64);
  BigReal(long value, mpfr_prec_t prec);
  BigReal(const BigReal& other);
  BigReal(BigReal&& other) noexcept;
  BigReal& operator=(const BigReal& other);
  BigReal& operator=(BigReal&& other) noexcept;
  ~BigReal();

  static BigReal from_double(double value, mpfr_prec_t prec);
  static BigReal from_rational(const mpq_class& q, mpfr_prec_t prec);
  static BigReal infinity(mpfr_prec_t prec, int sign = 1);
  static BigReal pi(mpfr_prec_t prec);

  mpfr_prec_t precision() const { return mpfr_get_prec(value_); }
  /// Copy rounded (or zero-extended) to another precision.
  BigReal rounded(mpfr_prec_t prec) const;

  mpfr_srcptr get() const { return value_; }
  mpfr_ptr get() { return value_; }

  bool is_zero() const { return mpfr_zero_p(value_) != 0; }
  bool is_finite() const { return mpfr_number_p(value_) != 0; }
  bool is_inf() const { return mpfr_inf_p(value_) != 0; }
  bool is_nan() const { return mpfr_nan_p(value_) != 0; }
  bool is_integer() const { return mpfr_integer_p(value_) != 0; }
  int sign() const { return mpfr_sgn(value_); }

  double to_double() const { return mpfr_get_d(value_, MPFR_RNDN); }
  /// log2|x| as a double; safe for magnitudes far outside double range.
  double log2_abs() const;
  /// Exact dyadic rational value. Requires a finite value.
  mpq_class to_rational() const;

  BigReal& operator+=(const BigReal& rhs);
  BigReal& operator-=(const BigReal& rhs);
  BigReal& operator*=(const BigReal& rhs);
  BigReal& operator/=(const BigReal& rhs);

 private:
  mpfr_t value_;
};

// Binary results carry the larger operand precision, rounded to nearest.
BigReal operator+(const BigReal& a, const BigReal& b);
BigReal operator-(const BigReal& a, const BigReal& b);
BigReal operator*(const BigReal& a, const BigReal& b);
BigReal operator/(const BigReal& a, const BigReal& b);
BigReal operator-(const BigReal& a);

bool operator==(const BigReal& a, const BigReal& b);
bool operator<(const BigReal& a, const BigReal& b);
bool operator>(const BigReal& a, const BigReal& b);
bool operator<=(const BigReal& a, const BigReal& b);
bool operator>=(const BigReal& a, const BigReal& b);
/// Bit-identical: same precision and same value (NaN never identical).
bool identical(const BigReal& a, const BigReal& b);

BigReal abs(const BigReal& x);
BigReal sqrt(const BigReal& x);
BigReal exp(const BigReal& x);
BigReal log(const BigReal& x);
BigReal sin(const BigReal& x);
BigReal cos(const BigReal& x);
void sin_cos(const BigReal& x, BigReal& s, BigReal& c);
BigReal pow(const BigReal& base, const BigReal& exponent);
BigReal pow_ui(const BigReal& base, unsigned long n);
BigReal exp2(double log2_value, mpfr_prec_t prec);
/// x * 2^e, exact.
BigReal mul_2exp(const BigReal& x, long e);
BigReal floor(const BigReal& x);
BigReal max(const BigReal& a, const BigReal& b);

/// |residual| measured in units of 2^-bits relative to |scale|.
double ulps(const BigReal& residual, const BigReal& scale, long bits);

/// Shortest-safe round-trip decimal: parsing the text at the same precision
/// reproduces the value bit for bit.
std::string format(const BigReal& x);
/// Significant decimal digits emitted by format() at a given precision.
int round_trip_digits(mpfr_prec_t prec);
/// Plain decimal text (no pi/rational forms), rounded to `prec`.
BigReal parse_real(std::string_view text, mpfr_prec_t prec);

class BigComplex {
 public:
  explicit BigComplex(mpfr_prec_t prec = 64) : re(prec), im(prec) {}
  BigComplex(BigReal real, BigReal imag) : re(std::move(real)), im(std::move(imag)) {}
  explicit BigComplex(const BigReal& real) : re(real), im(real.precision()) {}

  mpfr_prec_t precision() const { return re.precision(); }
  bool is_zero() const { return re.is_zero() && im.is_zero(); }
  bool is_real() const { return im.is_zero(); }
  bool is_finite() const { return re.is_finite() && im.is_finite(); }

  BigComplex& operator+=(const BigComplex& rhs);
  BigComplex& operator-=(const BigComplex& rhs);

  BigReal re;
  BigReal im;
};

BigComplex operator+(const BigComplex& a, const BigComplex& b);
BigComplex operator-(const BigComplex& a, const BigComplex& b);
BigComplex operator-(const BigComplex& a);
BigComplex operator*(const BigComplex& a, const BigComplex& b);
BigComplex operator*(const BigReal& a, const BigComplex& b);
BigComplex operator/(const BigComplex& a, const BigComplex& b);
BigComplex operator/(const BigComplex& a, const BigReal& b);
bool identical(const BigComplex& a, const BigComplex& b);

BigReal abs(const BigComplex& z);
BigComplex exp(const BigComplex& z);
BigComplex mul_2exp(const BigComplex& z, long e);
/// Multiply by i^k.
BigComplex rotate_i(const BigComplex& z, long k);

/// Exact value q or q*pi, carried alongside a rounded BigReal.
struct ExactValue {
  mpq_class coefficient;
  bool times_pi = false;

  friend bool operator==(const ExactValue&, const ExactValue&) = default;
};

/// Real scalar with an optional exact tag. Integer-branch and dyadic
/// decisions read the tag, never the rounded value.
class Scalar {
 public:
  Scalar() = default;
  explicit Scalar(BigReal value) : value_(std::move(value)) {}
  Scalar(BigReal value, ExactValue exact)
      : value_(std::move(value)), exact_(std::move(exact)) {}

  static Scalar exact(const ExactValue& e, mpfr_prec_t prec);
  static Scalar rational(const mpq_class& q, mpfr_prec_t prec) {
    return exact(ExactValue{q, false}, prec);
  }

  const BigReal& value() const { return value_; }
  const std::optional<ExactValue>& exact_value() const { return exact_; }
  bool has_exact() const { return exact_.has_value(); }
  /// Value at another precision; recomputed from the tag when one exists.
  BigReal at(mpfr_prec_t prec) const;
  bool is_zero() const;

 private:
  BigReal value_;
  std::optional<ExactValue> exact_;
};

BigReal to_real(const ExactValue& e, mpfr_prec_t prec);
std::string to_string(const ExactValue& e);

/// decimal = [-]digits[.digits][e[-]digits]; rational = [-]digits/digits;
/// either may carry a `*pi` suffix, and `pi`, `-pi`, `pi/q` are accepted.
/// Values round to ctx.bits; every accepted form keeps its exact tag.
Scalar parse_scalar(std::string_view text, const PrecisionContext& ctx);
/// Tagged scalars print their exact form, otherwise the rounded decimal.
std::string format(const Scalar& s);

/// Sum of complex terms at fixed precision that tracks the largest partial
/// magnitude seen, for reporting how many bits alternation consumed.
class TrackedSum {
 public:
  explicit TrackedSum(mpfr_prec_t prec) : sum_(prec), max_partial_(prec) {}

  void add(const BigComplex& term);
  const BigComplex& value() const { return sum_; }
  const BigReal& max_partial() const { return max_partial_; }
  /// log2(max partial / |final|); 0 when the final sum is exactly zero.
  double cancellation_bits() const;

 private:
  BigComplex sum_;
  BigReal max_partial_;
};

}  // namespace hatlab
