#include "oracle/oracle.hpp"

#include <gmpxx.h>

namespace oracle {

using hatlab::mul_2exp;

BigComplex fd_derivative(const ComplexFn& f, const BigReal& t, int n, mpfr_prec_t prec, long h_exp) {
  const BigReal x = t.rounded(prec);
  BigComplex acc(prec);
  mpz_class binom = 1;
  for (int j = 0; j <= n; ++j) {
    // offset (n/2 - j) h, in units of h/2 to stay exact
    const BigReal offset = mul_2exp(BigReal(n - 2 * j, prec), -h_exp - 1);
    BigComplex v = f(x + offset);
    const BigReal w = BigReal::from_rational(mpq_class(binom), prec);
    v = w * v;
    acc = j % 2 == 0 ? acc + v : acc - v;
    binom = binom * (n - j) / (j + 1);
  }
  return hatlab::mul_2exp(acc, h_exp * n);
}

BigComplex exp_fn(const BigReal& x) { return BigComplex(hatlab::exp(x)); }
BigComplex sin_fn(const BigReal& x) { return BigComplex(hatlab::sin(x)); }
BigComplex cos_fn(const BigReal& x) { return BigComplex(hatlab::cos(x)); }

namespace {

BigReal pow_s(const BigReal& x, int s) { return s == 1 ? x : x * x; }

BigReal beta(const BigReal& y, int s) {
  const mpfr_prec_t prec = y.precision();
  if (y.sign() <= 0 || !(y < BigReal(1, prec))) return BigReal(prec);
  const BigReal one(1, prec);
  const BigReal z = one - y;
  return hatlab::exp(-(one / pow_s(y, s)) - one / pow_s(z, s));
}

}  // namespace

BigComplex flat_exp(const BigReal& x, int s) {
  if (x.is_zero()) return BigComplex(x.precision());
  return BigComplex(hatlab::exp(-(BigReal(1, x.precision()) / pow_s(x, s))));
}

BigComplex floor_bump(const BigReal& x, int s, const BigReal& period) {
  const BigReal y = x / period;
  return BigComplex(beta(y - hatlab::floor(y), s));
}

BigComplex sine_bump(const BigReal& x) {
  const BigReal sn = hatlab::sin(x);
  if (sn.is_zero()) return BigComplex(x.precision());
  return BigComplex(hatlab::exp(-(BigReal(1, x.precision()) / (sn * sn))));
}

BigComplex bump_series_invfact(const BigReal& x, int s, const BigReal& period, long terms) {
  const mpfr_prec_t prec = x.precision();
  BigComplex acc(prec);
  BigReal inv_fact(1, prec);
  for (long n = 0; n < terms; ++n) {
    if (n > 0) inv_fact /= BigReal(n, prec);
    acc += inv_fact * floor_bump(mul_2exp(x, n), s, period);
  }
  return acc;
}

BigComplex lacunary_sum(const BigReal& x, bool half, long terms) {
  const mpfr_prec_t prec = x.precision();
  BigComplex acc(prec);
  BigReal inv_fact(1, prec);
  for (long m = 0; m < terms; ++m) {
    if (m > 0) inv_fact /= BigReal(m, prec);
    if (half && m == 0) continue;
    const BigReal phase = mul_2exp(x, half ? -m : m);
    acc += inv_fact * BigComplex(hatlab::cos(phase), hatlab::sin(phase));
  }
  return acc;
}

BigReal factorial(int n, mpfr_prec_t prec) {
  BigReal f(1, prec);
  for (int k = 2; k <= n; ++k) f *= BigReal(k, prec);
  return f;
}

BigReal rational_derivative(const BigReal& t, int n) {
  const mpfr_prec_t prec = t.precision();
  BigReal v = factorial(n, prec) / hatlab::pow_ui(BigReal(1, prec) + t, static_cast<unsigned long>(n) + 1);
  return n % 2 == 0 ? v : -v;
}

BigReal sin_derivative(const BigReal& t, int n) {
  const mpfr_prec_t prec = t.precision();
  return hatlab::sin(t + mul_2exp(BigReal::pi(prec), -1) * BigReal(n, prec));
}

BigReal cos_derivative(const BigReal& t, int n) {
  const mpfr_prec_t prec = t.precision();
  return hatlab::cos(t + mul_2exp(BigReal::pi(prec), -1) * BigReal(n, prec));
}

double rel_error(const BigComplex& a, const BigComplex& b) {
  const BigReal d = hatlab::abs(a - b);
  const BigReal m = hatlab::abs(b);
  return m.is_zero() ? d.to_double() : (d / m).to_double();
}

double rel_error(const BigReal& a, const BigReal& b) { return rel_error(BigComplex(a), BigComplex(b)); }

}  // namespace oracle
