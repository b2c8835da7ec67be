#pragma once

// Truncated Taylor expansions ("jets") of a function around a point.
// Coefficient n holds f^(n)(t)/n!, so hat-series terms never need n!.

#include "hatlab/numerics.hpp"

#include <utility>
#include <vector>

namespace hatlab {

class Jet {
 public:
  /// Coefficients are rounded to ctx.working_bits().
  Jet(BigReal center, std::vector<BigComplex> coeffs, PrecisionContext ctx);

  /// Seed for the identity function s -> s: (t, 1, 0, ..., 0).
  static Jet identity(const BigReal& center, int order, const PrecisionContext& ctx);
  /// Seed for a constant: (value, 0, ..., 0).
  static Jet constant(const BigReal& center, const BigComplex& value, int order,
                      const PrecisionContext& ctx);
  static Jet zero(const BigReal& center, int order, const PrecisionContext& ctx);

  const BigReal& center() const { return center_; }
  int order() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<BigComplex>& coeffs() const { return coeffs_; }
  const BigComplex& operator[](int n) const { return coeffs_[static_cast<size_t>(n)]; }
  const PrecisionContext& context() const { return ctx_; }
  mpfr_prec_t precision() const { return ctx_.working_bits(); }

  /// f^(n)(t) = c_n * n!.
  BigComplex derivative(int n) const;
  Jet truncated(int order) const;
  bool is_zero() const;
  /// Largest |c_n|.
  BigReal max_abs() const;

 private:
  BigReal center_;
  std::vector<BigComplex> coeffs_;
  PrecisionContext ctx_;
};

Jet jet_seed(const BigReal& center, const BigComplex& value, int order, const PrecisionContext& ctx);

/// a*x + b*y coefficientwise. Throws std::invalid_argument on mismatched
/// center, order or context.
Jet jet_linear(const BigComplex& a, const Jet& x, const BigComplex& b, const Jet& y);
/// Cauchy product truncated at the shared order.
Jet jet_mul(const Jet& x, const Jet& y);
/// Series quotient x/y. Throws NumericError when |y_0| is below
/// 2^(-bits+8) of max|y_n|.
Jet jet_div(const Jet& x, const Jet& y);
Jet jet_exp(const Jet& x);
/// (sin o x, cos o x).
std::pair<Jet, Jet> jet_sin_cos(const Jet& x);
/// Same recurrences with sin(x_0), cos(x_0) supplied by the caller, for
/// centers whose trig values need more care than the working precision allows.
std::pair<Jet, Jet> jet_sin_cos(const Jet& x, const BigComplex& sin0, const BigComplex& cos0);
/// Given the jet of f at a*t, returns the jet of s -> f(a*s) at s = t.
Jet jet_rescale_argument(const Jet& x, const BigReal& a, const BigReal& t);
Jet jet_scale(const BigComplex& a, const Jet& x);

Jet operator+(const Jet& x, const Jet& y);
Jet operator-(const Jet& x, const Jet& y);
Jet operator*(const Jet& x, const Jet& y);
Jet operator/(const Jet& x, const Jet& y);

}  // namespace hatlab
