#include "hatlab/hatseries.hpp"

#include <stdexcept>

namespace hatlab {

std::vector<BigComplex> hat_terms(const Jet& jet) {
  const mpfr_prec_t prec = jet.precision();
  std::vector<BigComplex> out;
  out.reserve(jet.coeffs().size());
  BigReal power(1, prec);  // t^n
  for (int n = 0; n <= jet.order(); ++n) {
    BigComplex term = power * jet[n];
    out.push_back(n % 2 == 0 ? std::move(term) : -term);
    power *= jet.center();
  }
  return out;
}

std::vector<BigComplex> taylor_terms_at(const Jet& jet, const BigReal& x) {
  const mpfr_prec_t prec = jet.precision();
  const BigReal step = x.rounded(prec) - jet.center();
  std::vector<BigComplex> out;
  out.reserve(jet.coeffs().size());
  BigReal power(1, prec);  // (x - t)^n
  for (int n = 0; n <= jet.order(); ++n) {
    out.push_back(power * jet[n]);
    power *= step;
  }
  return out;
}

HatRun hat_run_from_jet(const Jet& jet, std::string function, const Scalar& t,
                        std::optional<SeriesTruncation> truncation) {
  HatRun run;
  run.function = std::move(function);
  run.t = t;
  run.order = jet.order();
  run.ctx = jet.context();
  run.terms = hat_terms(jet);
  run.partials.reserve(run.terms.size());
  TrackedSum sum(jet.precision());
  for (const auto& term : run.terms) {
    sum.add(term);
    run.partials.push_back(sum.value());
  }
  run.cancellation_bits = sum.cancellation_bits();
  run.precision_warning = run.cancellation_bits > static_cast<double>(run.ctx.bits() - 32);
  run.truncation = std::move(truncation);
  return run;
}

HatRun hat_run(const FunctionSpec& spec, const Scalar& t, int order, const PrecisionContext& ctx,
               const SeriesOptions& options) {
  CatalogJet cj = jet_of(spec, t, order, ctx, options);
  return hat_run_from_jet(cj.jet, to_string(spec), t, std::move(cj.truncation));
}

TailTerm tail_term_from_jet(const Jet& jet, int order) {
  if (jet.order() < order + 1) throw std::invalid_argument("tail_term: jet order must be at least N+1");
  const mpfr_prec_t prec = jet.precision();
  // (-t)^N c_{N+1} (N+1)
  BigReal power = pow_ui(jet.center(), static_cast<unsigned long>(order));
  if (order % 2 == 1) power = -power;
  return {order, BigReal(order + 1, prec) * (power * jet[order + 1])};
}

TailTerm tail_term(const FunctionSpec& spec, const Scalar& t, int order, const PrecisionContext& ctx,
                   const SeriesOptions& options) {
  return tail_term_from_jet(jet_of(spec, t, order + 1, ctx, options).jet, order);
}

FknValue fkn_from_jet(const Jet& jet, int k, int n) {
  if (k < 0 || n < 0 || jet.order() < n + k) throw std::invalid_argument("fkn: jet order must be at least n+k");
  const mpfr_prec_t prec = jet.precision();
  // (-t)^n c_{n+k} (n+k)!/n!
  BigReal falling(1, prec);
  for (int j = n + 1; j <= n + k; ++j) falling *= BigReal(j, prec);
  BigReal power = pow_ui(jet.center(), static_cast<unsigned long>(n));
  if (n % 2 == 1) power = -power;
  return {k, n, (falling * power) * jet[n + k]};
}

Scalar offset(const Scalar& t, const Scalar& h, int sign, mpfr_prec_t prec) {
  if (t.has_exact() && h.has_exact()) {
    const ExactValue& a = *t.exact_value();
    const ExactValue& b = *h.exact_value();
    const mpq_class delta = sign > 0 ? mpq_class(b.coefficient) : mpq_class(-b.coefficient);
    if (a.times_pi == b.times_pi) return Scalar::exact({a.coefficient + delta, a.times_pi}, prec);
    if (a.coefficient == 0) return Scalar::exact({delta, b.times_pi}, prec);
    if (b.coefficient == 0) return t;
  }
  const BigReal hv = h.at(prec);
  return Scalar(sign > 0 ? t.at(prec) + hv : t.at(prec) - hv);
}

namespace {

BigComplex partial_sum(const FunctionSpec& spec, const Scalar& t, int order, const PrecisionContext& ctx,
                       const SeriesOptions& options) {
  return hat_run(spec, t, order, ctx, options).value();
}

}  // namespace

BigReal telescoping_residual(const FunctionSpec& spec, const Scalar& t, int order, const Scalar& h,
                             const PrecisionContext& ctx, const SeriesOptions& options) {
  const mpfr_prec_t prec = ctx.working_bits();
  const BigComplex up = partial_sum(spec, offset(t, h, +1, prec), order, ctx, options);
  const BigComplex down = partial_sum(spec, offset(t, h, -1, prec), order, ctx, options);
  const BigReal two_h = mul_2exp(h.at(prec), 1);
  const BigComplex fd = (up - down) / two_h;
  return abs(fd - tail_term(spec, t, order, ctx, options).value);
}

BigReal fkn_recurrence_check(const FunctionSpec& spec, const Scalar& t, int k, int n, const Scalar& h,
                             const PrecisionContext& ctx, const SeriesOptions& options) {
  if (n < 1 || k < 1) throw std::invalid_argument("fkn_recurrence_check: need k >= 1 and n >= 1");
  if (h.at(ctx.working_bits()).sign() <= 0) throw std::invalid_argument("fkn_recurrence_check: h must be positive");
  const mpfr_prec_t prec = ctx.working_bits();
  const int order = n + k;
  const Jet at_t = jet_of(spec, t, order, ctx, options).jet;
  const Jet up = jet_of(spec, offset(t, h, +1, prec), order, ctx, options).jet;
  const Jet down = jet_of(spec, offset(t, h, -1, prec), order, ctx, options).jet;
  const BigComplex fd = (fkn_from_jet(up, k - 1, n).value - fkn_from_jet(down, k - 1, n).value) /
                        mul_2exp(h.at(prec), 1);
  const BigComplex rhs = fkn_from_jet(at_t, k, n).value - fkn_from_jet(at_t, k, n - 1).value;
  return abs(fd - rhs);
}

// ------------------------------------------------------------ identities

namespace {

void record(ResidualStat& stat, const BigComplex& lhs, const BigComplex& rhs, const BigReal& scale, int n,
            long bits) {
  const BigReal residual = abs(lhs - rhs);
  if (residual > stat.max_residual) stat.max_residual = residual;
  const double u = ulps(residual, scale, bits);
  if (u > stat.max_ulps) {
    stat.max_ulps = u;
    stat.worst_n = n;
  }
}

/// Jet of s -> f(a s) at t, built by composing f with the inner jet a*s.
Jet scaled_argument_jet(const FunctionSpec& f, const Scalar& a, const Scalar& t, int order,
                        const PrecisionContext& ctx, const SeriesOptions& options) {
  const mpfr_prec_t prec = ctx.working_bits();
  const BigReal av = a.at(prec);
  const BigReal tv = t.at(prec);
  if (is_elementary(f)) {
    if (std::holds_alternative<FlatExp>(f) && (a.is_zero() || t.is_zero())) {
      return Jet::zero(tv, order, ctx);
    }
    std::vector<BigComplex> inner(static_cast<size_t>(order) + 1, BigComplex(prec));
    inner[0] = BigComplex(av * tv);
    if (order >= 1) inner[1] = BigComplex(av);
    return apply_elementary(f, Jet(tv, std::move(inner), ctx));
  }
  Scalar at = Scalar(av * tv);
  if (a.has_exact() && t.has_exact() && !(a.exact_value()->times_pi && t.exact_value()->times_pi)) {
    at = Scalar::exact(ExactValue{a.exact_value()->coefficient * t.exact_value()->coefficient,
                                  a.exact_value()->times_pi || t.exact_value()->times_pi},
                       prec);
  }
  return jet_rescale_argument(jet_of(f, at, order, ctx, options).jet, av, tv);
}

}  // namespace

AlgebraReport algebra_checks(const FunctionSpec& f, const FunctionSpec& g, const AlgebraParams& params,
                             const Scalar& t, int order, const PrecisionContext& ctx,
                             const SeriesOptions& options) {
  const mpfr_prec_t prec = ctx.working_bits();
  const long bits = ctx.bits();
  AlgebraReport report{ResidualStat{BigReal(prec)}, ResidualStat{BigReal(prec)}, ResidualStat{BigReal(prec)}};

  const Jet jf = jet_of(f, t, order, ctx, options).jet;
  const Jet jg = jet_of(g, t, order, ctx, options).jet;
  const std::vector<BigComplex> tf = hat_terms(jf);
  const std::vector<BigComplex> tg = hat_terms(jg);

  // linearity
  const BigComplex a(params.lin_a.at(prec));
  const BigComplex b(params.lin_b.at(prec));
  const std::vector<BigComplex> tl = hat_terms(jet_linear(a, jf, b, jg));
  const BigReal abs_a = abs(a), abs_b = abs(b);
  for (int n = 0; n <= order; ++n) {
    const size_t i = static_cast<size_t>(n);
    const BigReal scale = abs_a * abs(tf[i]) + abs_b * abs(tg[i]);
    record(report.linearity, tl[i], a * tf[i] + b * tg[i], scale, n, bits);
  }

  // product: hat terms of fg against the Cauchy convolution of hat terms
  const std::vector<BigComplex> tp = hat_terms(jet_mul(jf, jg));
  for (int n = 0; n <= order; ++n) {
    BigComplex conv(prec);
    BigReal scale(prec);
    for (int i = 0; i <= n; ++i) {
      const auto& x = tf[static_cast<size_t>(i)];
      const auto& y = tg[static_cast<size_t>(n - i)];
      conv += x * y;
      scale += abs(x) * abs(y);
    }
    record(report.product, tp[static_cast<size_t>(n)], conv, scale, n, bits);
  }

  // scale: terms of s -> f(a s) at t against terms of f at a t
  const Jet scaled = scaled_argument_jet(f, params.scale, t, order, ctx, options);
  const BigReal at = params.scale.at(prec) * t.at(prec);
  Scalar at_point(at);
  if (params.scale.has_exact() && t.has_exact() &&
      !(params.scale.exact_value()->times_pi && t.exact_value()->times_pi)) {
    at_point = Scalar::exact(
        ExactValue{params.scale.exact_value()->coefficient * t.exact_value()->coefficient,
                   params.scale.exact_value()->times_pi || t.exact_value()->times_pi},
        prec);
  }
  const std::vector<BigComplex> ts = hat_terms(scaled);
  const std::vector<BigComplex> tfa = hat_terms(jet_of(f, at_point, order, ctx, options).jet);
  for (int n = 0; n <= order; ++n) {
    const size_t i = static_cast<size_t>(n);
    record(report.scale, ts[i], tfa[i], abs(tfa[i]), n, bits);
  }
  return report;
}

HatRun antiderivative_check(const FunctionSpec& f, const Scalar& x, int order, const PrecisionContext& ctx) {
  const auto* a = std::get_if<Analytic>(&f);
  if (!a || a->kind == AnalyticKind::sin) {
    throw std::invalid_argument("unsupported for antiderivative check: " + to_string(f));
  }
  if (order < 1) throw std::invalid_argument("antiderivative_check: order must be at least 1");
  const mpfr_prec_t prec = ctx.working_bits();
  const BigReal xv = x.at(prec);

  BigReal value(prec);  // F(x)
  switch (a->kind) {
    case AnalyticKind::cos: value = sin(xv); break;
    case AnalyticKind::exp: value = exp(xv) - BigReal(1, prec); break;
    case AnalyticKind::poly: {
      BigReal power = xv;
      for (size_t k = 0; k < a->coefficients.size(); ++k) {
        value += to_real(a->coefficients[k], prec) * power / BigReal(static_cast<long>(k) + 1, prec);
        power *= xv;
      }
      break;
    }
    case AnalyticKind::sin: break;
  }

  const Jet small = jet_of(f, x, order - 1, ctx).jet;
  std::vector<BigComplex> coeffs;
  coeffs.reserve(static_cast<size_t>(order) + 1);
  coeffs.push_back(BigComplex(value));
  for (int n = 1; n <= order; ++n) coeffs.push_back(small[n - 1] / BigReal(n, prec));
  return hat_run_from_jet(Jet(xv, std::move(coeffs), ctx), "antiderivative(" + to_string(f) + ")", x);
}

}  // namespace hatlab
