#include "hatlab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <regex>
#include <vector>

namespace hatlab {

PrecisionContext::PrecisionContext(long bits, long guard_bits)
    : bits_(bits), guard_bits_(guard_bits) {
  if (bits < kMinBits) {
    throw std::invalid_argument("precision too small: bits must be >= 16, got " +
                                std::to_string(bits));
  }
  if (guard_bits < 0) {
    throw std::invalid_argument("guard_bits must be non-negative");
  }
}

PrecisionContext make_context(long bits, long guard_bits) {
  return PrecisionContext(bits, guard_bits);
}

// ---------------------------------------------------------------- BigReal

BigReal::BigReal(mpfr_prec_t prec) {
  mpfr_init2(value_, prec);
  mpfr_set_zero(value_, 1);
}

BigReal::BigReal(long value, mpfr_prec_t prec) {
  mpfr_init2(value_, prec);
  mpfr_set_si(value_, value, MPFR_RNDN);
}

BigReal::BigReal(const BigReal& other) {
  mpfr_init2(value_, other.precision());
  mpfr_set(value_, other.value_, MPFR_RNDN);
}

BigReal::BigReal(BigReal&& other) noexcept {
  // Steal the limbs and leave `other` as a valid 2-bit zero.
  mpfr_init2(value_, MPFR_PREC_MIN);
  mpfr_swap(value_, other.value_);
}

BigReal& BigReal::operator=(const BigReal& other) {
  if (this != &other) {
    mpfr_set_prec(value_, other.precision());
    mpfr_set(value_, other.value_, MPFR_RNDN);
  }
  return *this;
}

BigReal& BigReal::operator=(BigReal&& other) noexcept {
  if (this != &other) {
    mpfr_swap(value_, other.value_);
  }
  return *this;
}

BigReal::~BigReal() { mpfr_clear(value_); }

BigReal BigReal::from_double(double value, mpfr_prec_t prec) {
  BigReal r(prec);
  mpfr_set_d(r.value_, value, MPFR_RNDN);
  return r;
}

BigReal BigReal::from_rational(const mpq_class& q, mpfr_prec_t prec) {
  BigReal r(prec);
  mpfr_set_q(r.value_, q.get_mpq_t(), MPFR_RNDN);
  return r;
}

BigReal BigReal::infinity(mpfr_prec_t prec, int sign) {
  BigReal r(prec);
  mpfr_set_inf(r.value_, sign);
  return r;
}

BigReal BigReal::pi(mpfr_prec_t prec) {
  BigReal r(prec);
  mpfr_const_pi(r.value_, MPFR_RNDN);
  return r;
}

BigReal BigReal::rounded(mpfr_prec_t prec) const {
  BigReal r(prec);
  mpfr_set(r.value_, value_, MPFR_RNDN);
  return r;
}

double BigReal::log2_abs() const {
  if (is_zero()) return -std::numeric_limits<double>::infinity();
  if (is_inf()) return std::numeric_limits<double>::infinity();
  if (is_nan()) return std::numeric_limits<double>::quiet_NaN();
  long e = 0;
  const double d = mpfr_get_d_2exp(&e, value_, MPFR_RNDN);
  return std::log2(std::fabs(d)) + static_cast<double>(e);
}

mpq_class BigReal::to_rational() const {
  if (!is_finite()) throw std::domain_error("to_rational: non-finite value");
  mpz_class mant;
  const mpfr_exp_t e = mpfr_get_z_2exp(mant.get_mpz_t(), value_);
  mpq_class q(mant);
  if (e >= 0) {
    mpq_mul_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(e));
  } else {
    mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(-e));
  }
  q.canonicalize();
  return q;
}

BigReal& BigReal::operator+=(const BigReal& rhs) {
  if (rhs.precision() > precision()) mpfr_prec_round(value_, rhs.precision(), MPFR_RNDN);
  mpfr_add(value_, value_, rhs.value_, MPFR_RNDN);
  return *this;
}

BigReal& BigReal::operator-=(const BigReal& rhs) {
  if (rhs.precision() > precision()) mpfr_prec_round(value_, rhs.precision(), MPFR_RNDN);
  mpfr_sub(value_, value_, rhs.value_, MPFR_RNDN);
  return *this;
}

BigReal& BigReal::operator*=(const BigReal& rhs) {
  if (rhs.precision() > precision()) mpfr_prec_round(value_, rhs.precision(), MPFR_RNDN);
  mpfr_mul(value_, value_, rhs.value_, MPFR_RNDN);
  return *this;
}

BigReal& BigReal::operator/=(const BigReal& rhs) {
  if (rhs.precision() > precision()) mpfr_prec_round(value_, rhs.precision(), MPFR_RNDN);
  mpfr_div(value_, value_, rhs.value_, MPFR_RNDN);
  return *this;
}

namespace {

mpfr_prec_t wider(const BigReal& a, const BigReal& b) {
  return std::max(a.precision(), b.precision());
}

}  // namespace

BigReal operator+(const BigReal& a, const BigReal& b) {
  BigReal r(wider(a, b));
  mpfr_add(r.get(), a.get(), b.get(), MPFR_RNDN);
  return r;
}

BigReal operator-(const BigReal& a, const BigReal& b) {
  BigReal r(wider(a, b));
  mpfr_sub(r.get(), a.get(), b.get(), MPFR_RNDN);
  return r;
}

BigReal operator*(const BigReal& a, const BigReal& b) {
  BigReal r(wider(a, b));
  mpfr_mul(r.get(), a.get(), b.get(), MPFR_RNDN);
  return r;
}

BigReal operator/(const BigReal& a, const BigReal& b) {
  BigReal r(wider(a, b));
  mpfr_div(r.get(), a.get(), b.get(), MPFR_RNDN);
  return r;
}

BigReal operator-(const BigReal& a) {
  BigReal r(a.precision());
  mpfr_neg(r.get(), a.get(), MPFR_RNDN);
  return r;
}

bool operator==(const BigReal& a, const BigReal& b) { return mpfr_equal_p(a.get(), b.get()) != 0; }
bool operator<(const BigReal& a, const BigReal& b) { return mpfr_less_p(a.get(), b.get()) != 0; }
bool operator>(const BigReal& a, const BigReal& b) { return mpfr_greater_p(a.get(), b.get()) != 0; }
bool operator<=(const BigReal& a, const BigReal& b) { return mpfr_lessequal_p(a.get(), b.get()) != 0; }
bool operator>=(const BigReal& a, const BigReal& b) { return mpfr_greaterequal_p(a.get(), b.get()) != 0; }

bool identical(const BigReal& a, const BigReal& b) {
  if (a.precision() != b.precision()) return false;
  if (a.is_zero() && b.is_zero()) return a.sign() == b.sign() && mpfr_signbit(a.get()) == mpfr_signbit(b.get());
  return mpfr_equal_p(a.get(), b.get()) != 0;
}

BigReal abs(const BigReal& x) {
  BigReal r(x.precision());
  mpfr_abs(r.get(), x.get(), MPFR_RNDN);
  return r;
}

BigReal sqrt(const BigReal& x) {
  BigReal r(x.precision());
  mpfr_sqrt(r.get(), x.get(), MPFR_RNDN);
  return r;
}

BigReal exp(const BigReal& x) {
  BigReal r(x.precision());
  mpfr_exp(r.get(), x.get(), MPFR_RNDN);
  return r;
}

BigReal log(const BigReal& x) {
  BigReal r(x.precision());
  mpfr_log(r.get(), x.get(), MPFR_RNDN);
  return r;
}

BigReal sin(const BigReal& x) {
  BigReal r(x.precision());
  mpfr_sin(r.get(), x.get(), MPFR_RNDN);
  return r;
}

BigReal cos(const BigReal& x) {
  BigReal r(x.precision());
  mpfr_cos(r.get(), x.get(), MPFR_RNDN);
  return r;
}

void sin_cos(const BigReal& x, BigReal& s, BigReal& c) {
  s = BigReal(x.precision());
  c = BigReal(x.precision());
  mpfr_sin_cos(s.get(), c.get(), x.get(), MPFR_RNDN);
}

BigReal pow(const BigReal& base, const BigReal& exponent) {
  BigReal r(wider(base, exponent));
  mpfr_pow(r.get(), base.get(), exponent.get(), MPFR_RNDN);
  return r;
}

BigReal pow_ui(const BigReal& base, unsigned long n) {
  BigReal r(base.precision());
  mpfr_pow_ui(r.get(), base.get(), n, MPFR_RNDN);
  return r;
}

BigReal exp2(double log2_value, mpfr_prec_t prec) {
  BigReal r(prec);
  if (std::isinf(log2_value)) {
    if (log2_value > 0) {
      mpfr_set_inf(r.get(), 1);
    }
    return r;
  }
  // Split off the integer part so huge exponents stay exact.
  const double ip = std::floor(log2_value);
  BigReal frac = BigReal::from_double(log2_value - ip, prec);
  mpfr_exp2(r.get(), frac.get(), MPFR_RNDN);
  mpfr_mul_2si(r.get(), r.get(), static_cast<long>(ip), MPFR_RNDN);
  return r;
}

BigReal mul_2exp(const BigReal& x, long e) {
  BigReal r(x.precision());
  mpfr_mul_2si(r.get(), x.get(), e, MPFR_RNDN);
  return r;
}

BigReal floor(const BigReal& x) {
  BigReal r(x.precision());
  mpfr_floor(r.get(), x.get());
  return r;
}

BigReal max(const BigReal& a, const BigReal& b) { return a < b ? b : a; }

double ulps(const BigReal& residual, const BigReal& scale, long bits) {
  if (residual.is_zero()) return 0.0;
  if (scale.is_zero()) return std::numeric_limits<double>::infinity();
  return std::exp2(residual.log2_abs() - scale.log2_abs() + static_cast<double>(bits));
}

int round_trip_digits(mpfr_prec_t prec) {
  return 1 + static_cast<int>(std::ceil(static_cast<double>(prec) * std::log10(2.0)));
}

std::string format(const BigReal& x) {
  if (x.is_nan()) return "nan";
  if (x.is_inf()) return x.sign() < 0 ? "-inf" : "inf";
  if (x.is_zero()) return mpfr_signbit(x.get()) ? "-0" : "0";
  const int digits = round_trip_digits(x.precision());
  mpfr_exp_t e = 0;
  char* raw = mpfr_get_str(nullptr, &e, 10, static_cast<size_t>(digits), x.get(), MPFR_RNDN);
  std::string mant(raw);
  mpfr_free_str(raw);
  std::string out;
  if (!mant.empty() && mant.front() == '-') {
    out.push_back('-');
    mant.erase(0, 1);
  }
  // mpfr gives 0.ddd * 10^e; normalise to d.ddd e(e-1) and trim zeros.
  while (mant.size() > 1 && mant.back() == '0') mant.pop_back();
  out.push_back(mant.front());
  if (mant.size() > 1) {
    out.push_back('.');
    out.append(mant, 1, std::string::npos);
  }
  const long exponent = static_cast<long>(e) - 1;
  if (exponent != 0) {
    out.push_back('e');
    out += std::to_string(exponent);
  }
  return out;
}

BigReal parse_real(std::string_view text, mpfr_prec_t prec) {
  BigReal r(prec);
  const std::string s(text);
  if (s == "inf" || s == "-inf") {
    mpfr_set_inf(r.get(), s[0] == '-' ? -1 : 1);
    return r;
  }
  if (s == "-0") {
    mpfr_set_zero(r.get(), -1);
    return r;
  }
  if (s.empty()) throw std::invalid_argument("malformed real: empty text");
  char* end = nullptr;
  mpfr_strtofr(r.get(), s.c_str(), &end, 10, MPFR_RNDN);
  if (end != s.c_str() + s.size()) {
    throw std::invalid_argument("malformed real: '" + s + "'");
  }
  return r;
}

// ------------------------------------------------------------- BigComplex

BigComplex& BigComplex::operator+=(const BigComplex& rhs) {
  re += rhs.re;
  im += rhs.im;
  return *this;
}

BigComplex& BigComplex::operator-=(const BigComplex& rhs) {
  re -= rhs.re;
  im -= rhs.im;
  return *this;
}

BigComplex operator+(const BigComplex& a, const BigComplex& b) { return {a.re + b.re, a.im + b.im}; }
BigComplex operator-(const BigComplex& a, const BigComplex& b) { return {a.re - b.re, a.im - b.im}; }
BigComplex operator-(const BigComplex& a) { return {-a.re, -a.im}; }

BigComplex operator*(const BigComplex& a, const BigComplex& b) {
  const mpfr_prec_t prec = std::max(a.precision(), b.precision());
  if (a.is_real() && b.is_real()) {
    return BigComplex(a.re * b.re, BigReal(prec));
  }
  BigComplex r(prec);
  // re = ac - bd, im = ad + bc with one rounding each.
  mpfr_fmms(r.re.get(), a.re.get(), b.re.get(), a.im.get(), b.im.get(), MPFR_RNDN);
  mpfr_fmma(r.im.get(), a.re.get(), b.im.get(), a.im.get(), b.re.get(), MPFR_RNDN);
  return r;
}

BigComplex operator*(const BigReal& a, const BigComplex& b) { return {a * b.re, a * b.im}; }

BigComplex operator/(const BigComplex& a, const BigReal& b) { return {a.re / b, a.im / b}; }

BigComplex operator/(const BigComplex& a, const BigComplex& b) {
  if (b.is_real()) return a / b.re;
  const mpfr_prec_t prec = std::max(a.precision(), b.precision());
  BigReal denom(prec);
  mpfr_fmma(denom.get(), b.re.get(), b.re.get(), b.im.get(), b.im.get(), MPFR_RNDN);
  BigComplex r(prec);
  mpfr_fmma(r.re.get(), a.re.get(), b.re.get(), a.im.get(), b.im.get(), MPFR_RNDN);
  mpfr_fmms(r.im.get(), a.im.get(), b.re.get(), a.re.get(), b.im.get(), MPFR_RNDN);
  r.re /= denom;
  r.im /= denom;
  return r;
}

bool identical(const BigComplex& a, const BigComplex& b) {
  return identical(a.re, b.re) && identical(a.im, b.im);
}

BigReal abs(const BigComplex& z) {
  if (z.is_real()) return abs(z.re);
  BigReal r(z.precision());
  mpfr_hypot(r.get(), z.re.get(), z.im.get(), MPFR_RNDN);
  return r;
}

BigComplex exp(const BigComplex& z) {
  BigReal mag = exp(z.re);
  if (z.is_real()) return BigComplex(mag);
  BigReal s(z.precision()), c(z.precision());
  sin_cos(z.im, s, c);
  return {mag * c, mag * s};
}

BigComplex mul_2exp(const BigComplex& z, long e) { return {mul_2exp(z.re, e), mul_2exp(z.im, e)}; }

BigComplex rotate_i(const BigComplex& z, long k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return z;
    case 1: return {-z.im, z.re};
    case 2: return {-z.re, -z.im};
    default: return {z.im, -z.re};
  }
}

// ----------------------------------------------------------------- Scalar

BigReal to_real(const ExactValue& e, mpfr_prec_t prec) {
  if (!e.times_pi) return BigReal::from_rational(e.coefficient, prec);
  const mpfr_prec_t wide = prec + 32;
  BigReal r = BigReal::from_rational(e.coefficient, wide) * BigReal::pi(wide);
  return r.rounded(prec);
}

std::string to_string(const ExactValue& e) {
  std::string s = e.coefficient.get_str();
  if (e.times_pi) s += "*pi";
  return s;
}

Scalar Scalar::exact(const ExactValue& e, mpfr_prec_t prec) {
  ExactValue canon = e;
  canon.coefficient.canonicalize();
  return Scalar(to_real(canon, prec), canon);
}

BigReal Scalar::at(mpfr_prec_t prec) const {
  if (exact_) return to_real(*exact_, prec);
  return value_.rounded(prec);
}

bool Scalar::is_zero() const {
  if (exact_) return exact_->coefficient == 0;
  return value_.is_zero();
}

namespace {

mpz_class pow10(unsigned long k) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, k);
  return r;
}

constexpr long kMaxDecimalExponent = 100000;

mpq_class exact_decimal(const std::string& int_part, const std::string& frac_part, long exponent) {
  mpz_class digits(int_part + frac_part, 10);
  const long shift = exponent - static_cast<long>(frac_part.size());
  mpq_class q(digits);
  if (shift >= 0) {
    q *= mpq_class(pow10(static_cast<unsigned long>(shift)));
  } else {
    q /= mpq_class(pow10(static_cast<unsigned long>(-shift)));
  }
  q.canonicalize();
  return q;
}

}  // namespace

Scalar parse_scalar(std::string_view text, const PrecisionContext& ctx) {
  static const std::regex grammar(
      R"(^(-?)(?:(pi)(?:/([0-9]+))?|(?:([0-9]+)(?:\.([0-9]+))?(?:[eE]([-+]?[0-9]+))?|([0-9]+)/([0-9]+))(\*pi)?)$)");
  const std::string s(text);
  std::smatch m;
  if (!std::regex_match(s, m, grammar)) {
    throw std::invalid_argument("malformed scalar: '" + s + "'");
  }
  ExactValue e;
  if (m[2].matched) {
    e.times_pi = true;
    e.coefficient = 1;
    if (m[3].matched) {
      mpz_class den(m[3].str(), 10);
      if (den == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
      e.coefficient = mpq_class(mpz_class(1), den);
    }
  } else if (m[4].matched) {
    long exponent = 0;
    if (m[6].matched) {
      const std::string es = m[6].str();
      if (es.size() > 7) throw std::invalid_argument("exponent out of range in '" + s + "'");
      exponent = std::stol(es);
      if (std::labs(exponent) > kMaxDecimalExponent) {
        throw std::invalid_argument("exponent out of range in '" + s + "'");
      }
    }
    e.coefficient = exact_decimal(m[4].str(), m[5].matched ? m[5].str() : std::string(), exponent);
    e.times_pi = m[9].matched;
  } else {
    mpz_class num(m[7].str(), 10);
    mpz_class den(m[8].str(), 10);
    if (den == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
    e.coefficient = mpq_class(num, den);
    e.times_pi = m[9].matched;
  }
  if (m[1].length() > 0) e.coefficient = -e.coefficient;
  e.coefficient.canonicalize();
  return Scalar::exact(e, ctx.bits());
}

std::string format(const Scalar& s) {
  if (s.has_exact()) return to_string(*s.exact_value());
  return format(s.value());
}

// ------------------------------------------------------------- TrackedSum

void TrackedSum::add(const BigComplex& term) {
  sum_ += term;
  BigReal mag = abs(sum_);
  if (mag > max_partial_) max_partial_ = std::move(mag);
}

double TrackedSum::cancellation_bits() const {
  if (sum_.is_zero()) return 0.0;
  return max_partial_.log2_abs() - abs(sum_).log2_abs();
}

}  // namespace hatlab
