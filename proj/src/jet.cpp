#include "hatlab/jet.hpp"

#include <stdexcept>

namespace hatlab {

namespace {

void require_compatible(const Jet& x, const Jet& y, const char* op) {
  if (x.order() != y.order()) {
    throw std::invalid_argument(std::string(op) + ": jet orders differ (" +
                                std::to_string(x.order()) + " vs " + std::to_string(y.order()) + ")");
  }
  if (!(x.context() == y.context())) {
    throw std::invalid_argument(std::string(op) + ": jets use different precision contexts");
  }
  if (!(x.center() == y.center())) {
    throw std::invalid_argument(std::string(op) + ": jets have different centers");
  }
}

BigComplex complex_zero(mpfr_prec_t prec) { return BigComplex(prec); }

// Series (complex) sin/cos of the constant term.
void complex_sin_cos(const BigComplex& z, BigComplex& s, BigComplex& c) {
  BigReal sr(z.precision()), cr(z.precision());
  sin_cos(z.re, sr, cr);
  if (z.is_real()) {
    s = BigComplex(sr);
    c = BigComplex(cr);
    return;
  }
  // sin(a+ib) = sin a cosh b + i cos a sinh b; cos(a+ib) = cos a cosh b - i sin a sinh b
  BigReal ch(z.precision()), sh(z.precision());
  mpfr_sinh_cosh(sh.get(), ch.get(), z.im.get(), MPFR_RNDN);
  s = BigComplex(sr * ch, cr * sh);
  c = BigComplex(cr * ch, -(sr * sh));
}

}  // namespace

Jet::Jet(BigReal center, std::vector<BigComplex> coeffs, PrecisionContext ctx)
    : center_(std::move(center)), coeffs_(std::move(coeffs)), ctx_(ctx) {
  if (coeffs_.empty()) throw std::invalid_argument("Jet: at least one coefficient required");
  const mpfr_prec_t prec = ctx_.working_bits();
  if (center_.precision() != prec) center_ = center_.rounded(prec);
  for (auto& c : coeffs_) {
    if (c.re.precision() != prec) c.re = c.re.rounded(prec);
    if (c.im.precision() != prec) c.im = c.im.rounded(prec);
  }
}

Jet Jet::identity(const BigReal& center, int order, const PrecisionContext& ctx) {
  if (order < 0) throw std::invalid_argument("jet order must be non-negative");
  const mpfr_prec_t prec = ctx.working_bits();
  std::vector<BigComplex> c(static_cast<size_t>(order) + 1, complex_zero(prec));
  c[0] = BigComplex(center.rounded(prec));
  if (order >= 1) c[1] = BigComplex(BigReal(1, prec));
  return Jet(center, std::move(c), ctx);
}

Jet Jet::constant(const BigReal& center, const BigComplex& value, int order, const PrecisionContext& ctx) {
  if (order < 0) throw std::invalid_argument("jet order must be non-negative");
  const mpfr_prec_t prec = ctx.working_bits();
  std::vector<BigComplex> c(static_cast<size_t>(order) + 1, complex_zero(prec));
  c[0] = value;
  return Jet(center, std::move(c), ctx);
}

Jet Jet::zero(const BigReal& center, int order, const PrecisionContext& ctx) {
  return constant(center, complex_zero(ctx.working_bits()), order, ctx);
}

BigComplex Jet::derivative(int n) const {
  BigReal fact(1, precision());
  mpfr_fac_ui(fact.get(), static_cast<unsigned long>(n), MPFR_RNDN);
  return fact * coeffs_.at(static_cast<size_t>(n));
}

Jet Jet::truncated(int order) const {
  if (order < 0 || order > this->order()) throw std::invalid_argument("truncated: order out of range");
  return Jet(center_, std::vector<BigComplex>(coeffs_.begin(), coeffs_.begin() + order + 1), ctx_);
}

bool Jet::is_zero() const {
  for (const auto& c : coeffs_) {
    if (!c.is_zero()) return false;
  }
  return true;
}

BigReal Jet::max_abs() const {
  BigReal m(precision());
  for (const auto& c : coeffs_) m = max(m, abs(c));
  return m;
}

Jet jet_seed(const BigReal& center, const BigComplex& value, int order, const PrecisionContext& ctx) {
  return Jet::constant(center, value, order, ctx);
}

Jet jet_linear(const BigComplex& a, const Jet& x, const BigComplex& b, const Jet& y) {
  require_compatible(x, y, "jet_linear");
  std::vector<BigComplex> out;
  out.reserve(x.coeffs().size());
  for (int n = 0; n <= x.order(); ++n) {
    out.push_back(a * x[n] + b * y[n]);
  }
  return Jet(x.center(), std::move(out), x.context());
}

Jet jet_scale(const BigComplex& a, const Jet& x) {
  std::vector<BigComplex> out;
  out.reserve(x.coeffs().size());
  for (const auto& c : x.coeffs()) out.push_back(a * c);
  return Jet(x.center(), std::move(out), x.context());
}

Jet jet_mul(const Jet& x, const Jet& y) {
  require_compatible(x, y, "jet_mul");
  const int order = x.order();
  std::vector<BigComplex> out(static_cast<size_t>(order) + 1, complex_zero(x.precision()));
  for (int n = 0; n <= order; ++n) {
    BigComplex acc(x.precision());
    for (int i = 0; i <= n; ++i) {
      if (x[i].is_zero() || y[n - i].is_zero()) continue;
      acc += x[i] * y[n - i];
    }
    out[static_cast<size_t>(n)] = std::move(acc);
  }
  return Jet(x.center(), std::move(out), x.context());
}

Jet jet_div(const Jet& x, const Jet& y) {
  require_compatible(x, y, "jet_div");
  const BigReal y0 = abs(y[0]);
  const BigReal ynorm = y.max_abs();
  const BigReal threshold = mul_2exp(ynorm, -(y.context().bits() - 8));
  if (y0.is_zero() || y0 < threshold) {
    throw NumericError("division by (near-)zero constant term");
  }
  const int order = x.order();
  std::vector<BigComplex> z;
  z.reserve(static_cast<size_t>(order) + 1);
  for (int n = 0; n <= order; ++n) {
    BigComplex acc = x[n];
    for (int k = 0; k < n; ++k) {
      if (z[static_cast<size_t>(k)].is_zero() || y[n - k].is_zero()) continue;
      acc -= z[static_cast<size_t>(k)] * y[n - k];
    }
    z.push_back(acc / y[0]);
  }
  return Jet(x.center(), std::move(z), x.context());
}

Jet jet_exp(const Jet& x) {
  const int order = x.order();
  const mpfr_prec_t prec = x.precision();
  std::vector<BigComplex> z;
  z.reserve(static_cast<size_t>(order) + 1);
  z.push_back(exp(x[0]));
  if (!z[0].is_finite()) throw NumericError("jet_exp: exp of constant term overflows");
  // n z_n = sum_{k=1..n} k x_k z_{n-k}
  for (int n = 1; n <= order; ++n) {
    BigComplex acc(prec);
    for (int k = 1; k <= n; ++k) {
      if (x[k].is_zero() || z[static_cast<size_t>(n - k)].is_zero()) continue;
      acc += BigReal(k, prec) * (x[k] * z[static_cast<size_t>(n - k)]);
    }
    z.push_back(acc / BigReal(n, prec));
  }
  return Jet(x.center(), std::move(z), x.context());
}

std::pair<Jet, Jet> jet_sin_cos(const Jet& x) {
  BigComplex s0(x.precision()), c0(x.precision());
  complex_sin_cos(x[0], s0, c0);
  return jet_sin_cos(x, s0, c0);
}

std::pair<Jet, Jet> jet_sin_cos(const Jet& x, const BigComplex& sin0, const BigComplex& cos0) {
  const int order = x.order();
  const mpfr_prec_t prec = x.precision();
  std::vector<BigComplex> s, c;
  s.reserve(static_cast<size_t>(order) + 1);
  c.reserve(static_cast<size_t>(order) + 1);
  s.push_back(sin0);
  c.push_back(cos0);
  // n s_n = sum k x_k c_{n-k};  n c_n = -sum k x_k s_{n-k}
  for (int n = 1; n <= order; ++n) {
    BigComplex as(prec), ac(prec);
    for (int k = 1; k <= n; ++k) {
      if (x[k].is_zero()) continue;
      const BigComplex kx = BigReal(k, prec) * x[k];
      as += kx * c[static_cast<size_t>(n - k)];
      ac -= kx * s[static_cast<size_t>(n - k)];
    }
    const BigReal nn(n, prec);
    s.push_back(as / nn);
    c.push_back(ac / nn);
  }
  return {Jet(x.center(), std::move(s), x.context()), Jet(x.center(), std::move(c), x.context())};
}

Jet jet_rescale_argument(const Jet& x, const BigReal& a, const BigReal& t) {
  const mpfr_prec_t prec = x.precision();
  std::vector<BigComplex> out;
  out.reserve(x.coeffs().size());
  BigReal power(1, prec);
  const BigReal ar = a.rounded(prec);
  for (int n = 0; n <= x.order(); ++n) {
    out.push_back(power * x[n]);
    power *= ar;
  }
  return Jet(t, std::move(out), x.context());
}

Jet operator+(const Jet& x, const Jet& y) {
  const mpfr_prec_t p = x.precision();
  return jet_linear(BigComplex(BigReal(1, p)), x, BigComplex(BigReal(1, p)), y);
}

Jet operator-(const Jet& x, const Jet& y) {
  const mpfr_prec_t p = x.precision();
  return jet_linear(BigComplex(BigReal(1, p)), x, BigComplex(BigReal(-1, p)), y);
}

Jet operator*(const Jet& x, const Jet& y) { return jet_mul(x, y); }
Jet operator/(const Jet& x, const Jet& y) { return jet_div(x, y); }

}  // namespace hatlab
