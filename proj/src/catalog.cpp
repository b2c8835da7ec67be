#include "hatlab/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hatlab {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// ------------------------------------------------------------ spec parsing

namespace {

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t pos = text.find(sep, start);
    out.emplace_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::map<std::string, std::string> parse_params(std::string_view body, const std::string& family,
                                                std::initializer_list<const char*> allowed) {
  std::map<std::string, std::string> out;
  if (body.empty()) return out;
  for (const auto& item : split(body, ',')) {
    const size_t eq = item.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(family + ": expected key=value, got '" + item + "'");
    }
    const std::string key = item.substr(0, eq);
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return key == k; });
    if (!known) throw std::invalid_argument(family + ": unknown parameter '" + key + "'");
    if (!out.emplace(key, item.substr(eq + 1)).second) {
      throw std::invalid_argument(family + ": duplicate parameter '" + key + "'");
    }
  }
  return out;
}

int parse_s(const std::string& text, const std::string& family) {
  if (text == "1") return 1;
  if (text == "2") return 2;
  throw std::invalid_argument(family + ": s must be 1 or 2, got '" + text + "'");
}

ExactValue parse_exact(const std::string& text) {
  // Exact tags do not depend on the precision used for the rounded value.
  const Scalar s = parse_scalar(text, PrecisionContext(64, 0));
  return *s.exact_value();
}

void validate(const BumpShape& shape) {
  if (shape.period.coefficient <= 0) throw std::invalid_argument("bumpseries: period l must be positive");
  if (shape.kind == BumpKind::sine && shape.s != 2) {
    // exp(-1/sin x) is unbounded where sin x < 0.
    throw std::invalid_argument("bumpseries: u=sin requires s=2");
  }
}

std::string weights_name(BumpWeights w) {
  return w == BumpWeights::inverse_factorial ? "invfact" : "doubleexp";
}

}  // namespace

FunctionSpec parse_function_spec(std::string_view text) {
  const size_t colon = text.find(':');
  const std::string head(text.substr(0, colon));
  const std::string_view body = colon == std::string_view::npos ? std::string_view() : text.substr(colon + 1);
  const bool has_body = colon != std::string_view::npos;

  if (head == "exp" || head == "sin" || head == "cos" || head == "rational1p") {
    if (has_body) throw std::invalid_argument(head + " takes no parameters");
    if (head == "rational1p") return RationalOnePlus{};
    Analytic a;
    a.kind = head == "exp" ? AnalyticKind::exp : head == "sin" ? AnalyticKind::sin : AnalyticKind::cos;
    return a;
  }
  if (head == "poly") {
    if (body.empty()) throw std::invalid_argument("poly: coefficient list must be non-empty");
    Analytic a;
    a.kind = AnalyticKind::poly;
    for (const auto& c : split(body, ',')) a.coefficients.push_back(parse_exact(c));
    return a;
  }
  if (head == "flatexp") {
    const auto p = parse_params(body, head, {"s"});
    FlatExp f;
    if (auto it = p.find("s"); it != p.end()) f.s = parse_s(it->second, head);
    return f;
  }
  if (head == "bumpseries") {
    const auto p = parse_params(body, head, {"a", "s", "l", "u"});
    BumpSeries b;
    if (auto it = p.find("a"); it != p.end()) {
      if (it->second == "invfact") b.weights = BumpWeights::inverse_factorial;
      else if (it->second == "doubleexp") b.weights = BumpWeights::double_exponential;
      else throw std::invalid_argument("bumpseries: a must be invfact or doubleexp");
    }
    if (auto it = p.find("u"); it != p.end()) {
      if (it->second == "floor") b.shape.kind = BumpKind::floor;
      else if (it->second == "sin") b.shape.kind = BumpKind::sine;
      else throw std::invalid_argument("bumpseries: u must be floor or sin");
    }
    if (b.shape.kind == BumpKind::sine) b.shape.period = ExactValue{2, true};
    if (auto it = p.find("s"); it != p.end()) b.shape.s = parse_s(it->second, head);
    if (auto it = p.find("l"); it != p.end()) b.shape.period = parse_exact(it->second);
    validate(b.shape);
    return b;
  }
  if (head == "lacunary") {
    const auto p = parse_params(body, head, {"base"});
    Lacunary l;
    if (auto it = p.find("base"); it != p.end()) {
      if (it->second == "2") l.base = LacunaryBase::two;
      else if (it->second == "half") l.base = LacunaryBase::half;
      else throw std::invalid_argument("lacunary: base must be 2 or half");
    }
    return l;
  }
  throw std::invalid_argument("unknown function spec '" + std::string(text) + "'");
}

std::string to_string(const FunctionSpec& spec) {
  struct Visitor {
    std::string operator()(const Analytic& a) const {
      switch (a.kind) {
        case AnalyticKind::exp: return "exp";
        case AnalyticKind::sin: return "sin";
        case AnalyticKind::cos: return "cos";
        case AnalyticKind::poly: break;
      }
      std::string s = "poly:";
      for (size_t i = 0; i < a.coefficients.size(); ++i) {
        if (i) s += ',';
        s += to_string(a.coefficients[i]);
      }
      return s;
    }
    std::string operator()(const RationalOnePlus&) const { return "rational1p"; }
    std::string operator()(const FlatExp& f) const { return "flatexp:s=" + std::to_string(f.s); }
    std::string operator()(const BumpSeries& b) const {
      return "bumpseries:a=" + weights_name(b.weights) + ",s=" + std::to_string(b.shape.s) +
             ",l=" + to_string(b.shape.period) + ",u=" + (b.shape.kind == BumpKind::floor ? "floor" : "sin");
    }
    std::string operator()(const Lacunary& l) const {
      return std::string("lacunary:base=") + (l.base == LacunaryBase::two ? "2" : "half");
    }
  };
  return std::visit(Visitor{}, spec);
}

bool is_polynomial(const FunctionSpec& spec) {
  const auto* a = std::get_if<Analytic>(&spec);
  return a && a->kind == AnalyticKind::poly;
}

bool is_real_valued(const FunctionSpec& spec) { return !std::holds_alternative<Lacunary>(spec); }

bool is_elementary(const FunctionSpec& spec) {
  return std::holds_alternative<Analytic>(spec) || std::holds_alternative<RationalOnePlus>(spec) ||
         std::holds_alternative<FlatExp>(spec);
}

BigComplex value_at_zero(const FunctionSpec& spec, const PrecisionContext& ctx) {
  const mpfr_prec_t prec = ctx.working_bits();
  struct Visitor {
    mpfr_prec_t prec;
    BigComplex operator()(const Analytic& a) const {
      switch (a.kind) {
        case AnalyticKind::exp:
        case AnalyticKind::cos: return BigComplex(BigReal(1, prec));
        case AnalyticKind::sin: return BigComplex(prec);
        case AnalyticKind::poly: break;
      }
      return BigComplex(to_real(a.coefficients.front(), prec));
    }
    BigComplex operator()(const RationalOnePlus&) const { return BigComplex(BigReal(1, prec)); }
    BigComplex operator()(const FlatExp&) const { return BigComplex(prec); }
    BigComplex operator()(const BumpSeries&) const { return BigComplex(prec); }
    BigComplex operator()(const Lacunary& l) const {
      // sum_{m>=m0} 1/m!: e for base 2, e - 1 for base 1/2.
      BigReal e = exp(BigReal(1, prec));
      if (l.base == LacunaryBase::half) e -= BigReal(1, prec);
      return BigComplex(e);
    }
  };
  return std::visit(Visitor{prec}, spec);
}

std::vector<CatalogEntry> catalog_entries() {
  return {
      {"exp", "e^t (entire)"},
      {"sin", "sin t (entire)"},
      {"cos", "cos t (entire)"},
      {"poly:c0,c1,...", "polynomial c0 + c1 t + ...; coefficients use the scalar grammar"},
      {"rational1p", "1/(1+t); Taylor radius |1+t|, pole at -1"},
      {"flatexp:s=<1|2>", "e^(-1/t^s), 0 at t=0; all derivatives vanish at 0"},
      {"bumpseries:a=<invfact|doubleexp>,s=<1|2>,l=<rational>,u=<floor|sin>",
       "sum_n a_n u(2^n t); smooth, nowhere analytic; u=floor uses b(frac(x/l)), u=sin uses e^(-csc^2 x)"},
      {"lacunary:base=<2|half>", "sum_m e^(i w_m t)/m!, w_m = 2^m (zero radius everywhere) or 2^-m (entire)"},
  };
}

// ------------------------------------------------------------ elementary

namespace {

Jet constant_like(const Jet& like, const BigReal& value) {
  return Jet::constant(like.center(), BigComplex(value), like.order(), like.context());
}

Jet power_s(const Jet& x, int s) { return s == 1 ? x : jet_mul(x, x); }

/// exp(-1/x^s); the flat branch returns zeros when x_0 == 0.
Jet flat_exp_of(const Jet& x, int s) {
  if (x[0].is_zero()) return Jet::zero(x.center(), x.order(), x.context());
  const Jet w = jet_div(constant_like(x, BigReal(-1, x.precision())), power_s(x, s));
  return jet_exp(w);
}

}  // namespace

Jet apply_elementary(const FunctionSpec& spec, const Jet& inner) {
  const mpfr_prec_t prec = inner.precision();
  if (const auto* a = std::get_if<Analytic>(&spec)) {
    switch (a->kind) {
      case AnalyticKind::exp: return jet_exp(inner);
      case AnalyticKind::sin: return jet_sin_cos(inner).first;
      case AnalyticKind::cos: return jet_sin_cos(inner).second;
      case AnalyticKind::poly: {
        Jet acc = constant_like(inner, to_real(a->coefficients.back(), prec));
        for (size_t i = a->coefficients.size() - 1; i-- > 0;) {
          acc = jet_mul(acc, inner) + constant_like(inner, to_real(a->coefficients[i], prec));
        }
        return acc;
      }
    }
  }
  if (std::holds_alternative<RationalOnePlus>(spec)) {
    const Jet one = constant_like(inner, BigReal(1, prec));
    return jet_div(one, one + inner);
  }
  if (const auto* f = std::get_if<FlatExp>(&spec)) {
    return flat_exp_of(inner, f->s);
  }
  throw std::invalid_argument("composition unsupported for series-defined function " + to_string(spec));
}

// ------------------------------------------------------------------ bump

namespace {

/// b(y) = exp(-1/y^s - 1/(1-y)^s) for 0 < y < 1, as a jet in y.
Jet beta_jet(const BigReal& y, int s, int order, const PrecisionContext& ctx) {
  const mpfr_prec_t prec = ctx.working_bits();
  const Jet id = Jet::identity(y, order, ctx);
  const Jet one = Jet::constant(y, BigComplex(BigReal(1, prec)), order, ctx);
  const Jet minus_one = Jet::constant(y, BigComplex(BigReal(-1, prec)), order, ctx);
  const Jet left = jet_div(minus_one, power_s(id, s));
  const Jet right = jet_div(minus_one, power_s(one - id, s));
  return jet_exp(left + right);
}

/// exp(-1/sin^2) around x, with sin/cos of the center provided.
Jet sine_bump_jet(const BigReal& center, const BigComplex& s0, const BigComplex& c0, int order,
                  const PrecisionContext& ctx) {
  const Jet id = Jet::identity(center, order, ctx);
  const Jet sn = jet_sin_cos(id, s0, c0).first;
  const Jet minus_one = Jet::constant(center, BigComplex(BigReal(-1, ctx.working_bits())), order, ctx);
  return jet_exp(jet_div(minus_one, jet_mul(sn, sn)));
}

bool near_integer(const BigReal& y, const BigReal& frac, mpfr_prec_t prec) {
  if (frac.is_zero()) return true;
  const BigReal one(1, prec);
  const BigReal scale = max(one, abs(y));
  const BigReal threshold = mul_2exp(scale, -(static_cast<long>(prec) - 8));
  return frac < threshold || (one - frac) < threshold;
}

/// Precision needed to hold x = q (or q*pi) with `prec` bits after the point.
mpfr_prec_t extended_precision(const ExactValue& x, mpfr_prec_t prec) {
  const mpz_class num = abs(x.coefficient.get_num());
  const mpz_class den = x.coefficient.get_den();
  const long int_bits = static_cast<long>(mpz_sizeinbase(num.get_mpz_t(), 2)) -
                        static_cast<long>(mpz_sizeinbase(den.get_mpz_t(), 2)) + 2;
  return prec + std::max(0L, int_bits) + 16;
}

}  // namespace

Jet bump_jet(const BumpShape& shape, const Scalar& x, int order, const PrecisionContext& ctx) {
  validate(shape);
  const mpfr_prec_t prec = ctx.working_bits();
  const BigReal center = x.at(prec);

  if (shape.kind == BumpKind::floor) {
    const ExactValue& l = shape.period;
    const BigReal inv_period = BigReal(1, prec) / to_real(l, prec);
    BigReal frac(prec);
    if (x.has_exact() && x.exact_value()->times_pi == l.times_pi) {
      const mpq_class ratio = x.exact_value()->coefficient / l.coefficient;
      mpz_class fl;
      mpz_fdiv_q(fl.get_mpz_t(), ratio.get_num_mpz_t(), ratio.get_den_mpz_t());
      const mpq_class fr = ratio - mpq_class(fl);
      if (fr == 0) return Jet::zero(center, order, ctx);
      frac = BigReal::from_rational(fr, prec);
    } else {
      BigReal y(prec);
      if (x.has_exact()) {
        // Ratio is irrational; evaluate wide enough that frac keeps `prec` bits.
        const mpfr_prec_t wide = extended_precision(*x.exact_value(), prec);
        y = to_real(*x.exact_value(), wide) / to_real(l, wide);
      } else {
        y = center * inv_period;
      }
      frac = (y - floor(y)).rounded(prec);
      if (!x.has_exact() && near_integer(y, frac, prec)) {
        throw NumericError("ambiguous branch near integer at x = " + format(center) +
                           " (supply the point in exact rational form)");
      }
    }
    return jet_rescale_argument(beta_jet(frac, shape.s, order, ctx), inv_period, center);
  }

  // sine kind: u has period pi and vanishes (with all derivatives) on pi*Z.
  if (x.has_exact()) {
    const ExactValue& e = *x.exact_value();
    if (e.coefficient == 0) return Jet::zero(center, order, ctx);
    if (e.times_pi) {
      mpz_class fl;
      mpz_fdiv_q(fl.get_mpz_t(), e.coefficient.get_num_mpz_t(), e.coefficient.get_den_mpz_t());
      const mpq_class fr = e.coefficient - mpq_class(fl);
      if (fr == 0) return Jet::zero(center, order, ctx);
      const BigReal reduced = to_real(ExactValue{fr, true}, prec);
      BigReal s(prec), c(prec);
      sin_cos(reduced, s, c);
      return Jet(center, sine_bump_jet(reduced, BigComplex(s), BigComplex(c), order, ctx).coeffs(), ctx);
    }
    const mpfr_prec_t wide = extended_precision(e, prec);
    BigReal s(wide), c(wide);
    sin_cos(to_real(e, wide), s, c);
    return sine_bump_jet(center, BigComplex(s.rounded(prec)), BigComplex(c.rounded(prec)), order, ctx);
  }
  BigReal s(prec), c(prec);
  sin_cos(center, s, c);
  const BigReal threshold = mul_2exp(max(BigReal(1, prec), abs(center)), -(static_cast<long>(prec) - 8));
  if (abs(s) < threshold) {
    throw NumericError("ambiguous branch near integer at x = " + format(center) +
                       " (sin x vanishes to working precision; supply an exact form)");
  }
  return sine_bump_jet(center, BigComplex(s), BigComplex(c), order, ctx);
}

std::vector<BigReal> bump_coefficient_bounds(const BumpShape& shape, int order, int samples, double safety,
                                             Execution execution) {
  validate(shape);
  if (samples <= 0) throw std::invalid_argument("bump_coefficient_bounds: samples must be positive");
  // A coarse bound: 64 bits are plenty and keep the sweep cheap.
  const PrecisionContext coarse(64, 0);
  const ExactValue period = shape.kind == BumpKind::floor ? shape.period : ExactValue{1, true};
  const size_t width = static_cast<size_t>(order) + 1;

  auto sample_point = [&](int j) {
    ExactValue x{period.coefficient * mpq_class(2 * j + 1, 2 * samples), period.times_pi};
    x.coefficient.canonicalize();
    return Scalar::exact(x, coarse.working_bits());
  };
  auto fold = [&](std::vector<double>& acc, int j) {
    const Jet u = bump_jet(shape, sample_point(j), order, coarse);
    for (size_t k = 0; k < width; ++k) {
      acc[k] = std::max(acc[k], abs(u[static_cast<int>(k)]).log2_abs());
    }
  };

  std::vector<double> log2_max(width, -std::numeric_limits<double>::infinity());
  if (execution == Execution::serial) {
    for (int j = 0; j < samples; ++j) fold(log2_max, j);
  } else {
#pragma omp parallel
    {
      std::vector<double> local(width, -std::numeric_limits<double>::infinity());
#pragma omp for schedule(dynamic, 16) nowait
      for (int j = 0; j < samples; ++j) fold(local, j);
#pragma omp critical(hatlab_bump_bounds)
      for (size_t k = 0; k < width; ++k) log2_max[k] = std::max(log2_max[k], local[k]);
    }
  }

  std::vector<BigReal> out;
  out.reserve(width);
  const double log2_safety = std::log2(safety);
  for (double v : log2_max) out.push_back(exp2(v + log2_safety, coarse.working_bits()));
  return out;
}

// ---------------------------------------------------------- bump series

namespace {

double log2_factorial(long n) { return std::lgamma(static_cast<double>(n) + 1.0) / std::log(2.0); }

/// log2 of the majorant weight a_n 2^(k n).
double log2_weight(BumpWeights w, long n, int k) {
  const double kn = static_cast<double>(k) * static_cast<double>(n);
  if (w == BumpWeights::inverse_factorial) return kn - log2_factorial(n);
  if (n >= 1000) return -std::numeric_limits<double>::infinity();
  return kn - std::exp2(static_cast<double>(n));
}

/// log2 of sum_{n >= m} a_n 2^(k n), or +inf when no geometric bound applies yet.
double log2_weight_tail(BumpWeights w, long m, int k) {
  if (w == BumpWeights::inverse_factorial) {
    // consecutive ratio 2^k/(n+1) <= 2^k/(m+1) for n >= m
    const double ratio = std::exp2(static_cast<double>(k)) / static_cast<double>(m + 1);
    if (ratio >= 1.0) return std::numeric_limits<double>::infinity();
    return log2_weight(w, m, k) - std::log2(1.0 - ratio);
  }
  // ratio 2^(k - 2^n) <= 1/2 once 2^n >= k + 1
  if (m < 63 && std::exp2(static_cast<double>(m)) < static_cast<double>(k) + 1.0) {
    return std::numeric_limits<double>::infinity();
  }
  return log2_weight(w, m, k) + 1.0;
}

BigReal weight(BumpWeights w, long n, mpfr_prec_t prec) {
  BigReal r(1, prec);
  if (w == BumpWeights::inverse_factorial) {
    BigReal f(prec);
    mpfr_fac_ui(f.get(), static_cast<unsigned long>(n), MPFR_RNDN);
    return r / f;
  }
  if (n >= 62) return BigReal(prec);  // 2^(-2^62) is far below any exponent range
  return mul_2exp(r, -(1L << n));
}

/// Period used to reduce orbit points 2^n t without changing u.
ExactValue reduction_period(const BumpShape& shape) {
  return shape.kind == BumpKind::floor ? shape.period : ExactValue{1, true};
}

// Slack added to double-precision log2 estimates of the majorant.
constexpr double kLog2Slack = 1.0;

}  // namespace

std::pair<Jet, SeriesTruncation> series_family_jet(const BumpSeries& spec, const Scalar& t, int order,
                                                   const PrecisionContext& ctx, const SeriesOptions& options) {
  if (order < 0) throw std::invalid_argument("series_family_jet: negative order");
  if (order > options.max_order) {
    throw NumericError("order " + std::to_string(order) + " exceeds series-family cap " +
                       std::to_string(options.max_order));
  }
  const mpfr_prec_t prec = ctx.working_bits();
  const BigReal center = t.at(prec);
  const size_t width = static_cast<size_t>(order) + 1;
  const ExactValue period = reduction_period(spec.shape);

  // Exact orbit tracking: rho_n = frac(2^n t / P) when t/P is rational.
  std::optional<mpq_class> rho;
  if (t.has_exact() && t.exact_value()->times_pi == period.times_pi) {
    mpq_class r = t.exact_value()->coefficient / period.coefficient;
    mpz_class fl;
    mpz_fdiv_q(fl.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
    rho = r - mpq_class(fl);
  }

  std::vector<BigComplex> acc(width, BigComplex(prec));
  std::vector<double> log2_peak(width, -std::numeric_limits<double>::infinity());
  const double target_log2 = -static_cast<double>(prec);

  SeriesTruncation cert;
  cert.target = exp2(target_log2, prec);
  cert.safety_factor = options.bound_safety;

  long n = 0;
  bool exact_tail = false;
  for (;; ++n) {
    if (rho && *rho == 0) {
      exact_tail = true;  // 2^m t / P is an integer for every m >= n
      break;
    }
    if (n >= options.min_outer_terms && n > 0) {
      bool done = true;
      for (size_t k = 0; k < width && done; ++k) {
        const double tail = log2_weight_tail(spec.weights, n, static_cast<int>(k)) + kLog2Slack;
        done = tail - log2_peak[k] < target_log2;
      }
      if (done) break;
    }
    if (n >= options.max_outer_terms) {
      throw NumericError("truncation budget exceeded: " + std::to_string(options.max_outer_terms) +
                         " outer terms do not certify order " + std::to_string(order));
    }

    Scalar x_n;
    if (rho) {
      ExactValue e{*rho * period.coefficient, period.times_pi};
      e.coefficient.canonicalize();
      x_n = Scalar::exact(e, prec);
    } else if (t.has_exact()) {
      ExactValue e = *t.exact_value();
      mpq_mul_2exp(e.coefficient.get_mpq_t(), e.coefficient.get_mpq_t(), static_cast<mp_bitcnt_t>(n));
      x_n = Scalar::exact(e, prec);
    } else {
      x_n = Scalar(mul_2exp(center, n));
    }

    const BigReal a_n = weight(spec.weights, n, prec);
    const Jet u = bump_jet(spec.shape, x_n, order, ctx);
    for (size_t k = 0; k < width; ++k) {
      log2_peak[k] = std::max(log2_peak[k], log2_weight(spec.weights, n, static_cast<int>(k)));
      const BigComplex& c = u[static_cast<int>(k)];
      if (c.is_zero() || a_n.is_zero()) continue;
      acc[k] += a_n * mul_2exp(c, n * static_cast<long>(k));
    }

    if (rho) {
      *rho *= 2;
      if (*rho >= 1) *rho -= 1;
    }
  }

  cert.outer_terms = n;
  cert.exact = exact_tail;
  cert.coefficient_tail.assign(width, BigReal(prec));
  cert.tail_bound = BigReal(prec);
  if (!exact_tail) {
    const std::vector<BigReal> bounds =
        bump_coefficient_bounds(spec.shape, order, options.bound_samples, options.bound_safety, options.execution);
    double worst = -std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < width; ++k) {
      const double tail = log2_weight_tail(spec.weights, n, static_cast<int>(k)) + kLog2Slack;
      worst = std::max(worst, tail - log2_peak[k]);
      cert.coefficient_tail[k] = exp2(tail + bounds[k].log2_abs(), prec);
    }
    cert.tail_bound = exp2(worst, prec);
  }
  return {Jet(center, std::move(acc), ctx), std::move(cert)};
}

Jet series_family_partial_jet(const BumpSeries& spec, const Scalar& t, int order, const PrecisionContext& ctx,
                              long last_index) {
  const mpfr_prec_t prec = ctx.working_bits();
  const BigReal center = t.at(prec);
  std::vector<BigComplex> acc(static_cast<size_t>(order) + 1, BigComplex(prec));
  for (long n = 0; n <= last_index; ++n) {
    Scalar x_n;
    if (t.has_exact()) {
      ExactValue e = *t.exact_value();
      mpq_mul_2exp(e.coefficient.get_mpq_t(), e.coefficient.get_mpq_t(), static_cast<mp_bitcnt_t>(n));
      x_n = Scalar::exact(e, prec);
    } else {
      x_n = Scalar(mul_2exp(center, n));
    }
    // g_n(s) = u(2^n s): rescale the jet of u at 2^n t.
    const Jet g = jet_rescale_argument(bump_jet(spec.shape, x_n, order, ctx), mul_2exp(BigReal(1, prec), n), center);
    const BigReal a_n = weight(spec.weights, n, prec);
    for (int k = 0; k <= order; ++k) {
      if (g[k].is_zero() || a_n.is_zero()) continue;
      acc[static_cast<size_t>(k)] += a_n * g[k];
    }
  }
  return Jet(center, std::move(acc), ctx);
}

// -------------------------------------------------------------- lacunary

std::pair<Jet, SeriesTruncation> lacunary_jet(LacunaryBase base, const Scalar& t, int order,
                                              const PrecisionContext& ctx, const SeriesOptions& options) {
  if (order < 0) throw std::invalid_argument("lacunary_jet: negative order");
  if (base == LacunaryBase::two && order > options.lacunary_max_order) {
    throw NumericError("exponential outer-term cost: order " + std::to_string(order) + " exceeds lacunary cap " +
                       std::to_string(options.lacunary_max_order));
  }
  const mpfr_prec_t prec = ctx.working_bits();
  const BigReal center = t.at(prec);
  const size_t width = static_cast<size_t>(order) + 1;
  const long sign = base == LacunaryBase::two ? 1 : -1;  // w_m = 2^(sign*m)
  const long first = base == LacunaryBase::two ? 0 : 1;
  const double target_log2 = -static_cast<double>(prec);

  std::vector<BigComplex> acc(width, BigComplex(prec));
  std::vector<double> log2_peak(width, -std::numeric_limits<double>::infinity());

  // log2 of w_m^n / m!
  auto log2_term = [&](long m, long n) {
    return static_cast<double>(sign * m) * static_cast<double>(n) - log2_factorial(m);
  };
  // log2 of sum_{j >= m} w_j^n / j!, +inf before the ratio drops below one.
  auto log2_tail = [&](long m, long n) {
    const double ratio = std::exp2(static_cast<double>(sign * n)) / static_cast<double>(m + 1);
    if (ratio >= 1.0) return std::numeric_limits<double>::infinity();
    return log2_term(m, n) - std::log2(1.0 - ratio) + kLog2Slack;
  };

  // Phase e^(i w_m t) per branch: pi-rational, rational, or plain value.
  std::optional<mpq_class> pi_phase;  // (w_m t)/pi reduced mod 2
  if (t.has_exact() && t.exact_value()->times_pi) pi_phase = t.exact_value()->coefficient;
  const bool zero_t = t.is_zero();

  BigReal inv_fact(1, prec);
  long m = first;
  for (long j = 0; j < first; ++j) inv_fact /= BigReal(j + 1, prec);
  for (;; ++m) {
    if (m > first && m - first >= options.min_outer_terms) {
      bool done = true;
      for (size_t n = 0; n < width && done; ++n) {
        done = log2_tail(m, static_cast<long>(n)) - log2_peak[n] < target_log2;
      }
      if (done) break;
    }
    if (m > first) inv_fact /= BigReal(m, prec);

    BigComplex phase(BigReal(1, prec));
    if (!zero_t) {
      BigReal s(prec), c(prec);
      if (pi_phase) {
        mpq_class r = *pi_phase;
        if (sign > 0) {
          mpq_mul_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<mp_bitcnt_t>(m));
        } else {
          mpq_div_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<mp_bitcnt_t>(m));
        }
        mpz_class fl;
        const mpz_class den2 = r.get_den() * 2;
        mpz_fdiv_q(fl.get_mpz_t(), r.get_num_mpz_t(), den2.get_mpz_t());
        r -= mpq_class(fl * 2);
        sin_cos(to_real(ExactValue{r, true}, prec), s, c);
      } else if (t.has_exact() && sign > 0) {
        ExactValue e = *t.exact_value();
        mpq_mul_2exp(e.coefficient.get_mpq_t(), e.coefficient.get_mpq_t(), static_cast<mp_bitcnt_t>(m));
        const mpfr_prec_t wide = extended_precision(e, prec);
        BigReal sw(wide), cw(wide);
        sin_cos(to_real(e, wide), sw, cw);
        s = sw.rounded(prec);
        c = cw.rounded(prec);
      } else {
        sin_cos(mul_2exp(center, sign * m), s, c);
      }
      phase = BigComplex(c, s);
    }
    const BigComplex w = inv_fact * phase;
    for (size_t n = 0; n < width; ++n) {
      const long nn = static_cast<long>(n);
      log2_peak[n] = std::max(log2_peak[n], log2_term(m, nn));
      // (i w_m)^n e^(i w_m t)/m!
      acc[n] += rotate_i(mul_2exp(w, sign * m * nn), nn);
    }
  }

  SeriesTruncation cert;
  cert.outer_terms = m - first;
  cert.target = exp2(target_log2, prec);
  cert.coefficient_tail.reserve(width);
  double worst = -std::numeric_limits<double>::infinity();
  BigReal fact(1, prec);
  std::vector<BigComplex> coeffs;
  coeffs.reserve(width);
  for (size_t n = 0; n < width; ++n) {
    if (n > 0) fact *= BigReal(static_cast<long>(n), prec);
    const double tail = log2_tail(m, static_cast<long>(n));
    worst = std::max(worst, tail - log2_peak[n]);
    cert.coefficient_tail.push_back(exp2(tail, prec) / fact);
    coeffs.push_back(acc[n] / fact);
  }
  cert.tail_bound = exp2(worst, prec);
  return {Jet(center, std::move(coeffs), ctx), std::move(cert)};
}

// ------------------------------------------------------------- dispatch

CatalogJet jet_of(const FunctionSpec& spec, const Scalar& t, int order, const PrecisionContext& ctx,
                  const SeriesOptions& options) {
  if (order < 0) throw std::invalid_argument("jet_of: negative order");
  const mpfr_prec_t prec = ctx.working_bits();
  if (const auto* b = std::get_if<BumpSeries>(&spec)) {
    auto [jet, cert] = series_family_jet(*b, t, order, ctx, options);
    return {std::move(jet), std::move(cert)};
  }
  if (const auto* l = std::get_if<Lacunary>(&spec)) {
    auto [jet, cert] = lacunary_jet(l->base, t, order, ctx, options);
    return {std::move(jet), std::move(cert)};
  }
  if (std::holds_alternative<RationalOnePlus>(spec)) {
    const bool pole = t.has_exact() ? (!t.exact_value()->times_pi && t.exact_value()->coefficient == -1)
                                    : t.value() == BigReal(-1, prec);
    if (pole) throw NumericError("pole: rational1p is undefined at t = -1");
  }
  const BigReal center = t.at(prec);
  if (std::holds_alternative<FlatExp>(spec) && t.is_zero()) {
    return {Jet::zero(center, order, ctx), std::nullopt};
  }
  return {apply_elementary(spec, Jet::identity(center, order, ctx)), std::nullopt};
}

// ---------------------------------------------------------------- dyadic

DyadicVerdict dyadic_check(const Scalar& t, const ExactValue& period) {
  if (!t.has_exact()) throw std::invalid_argument("dyadic_check: exactness required (supply t as p/q)");
  if (period.coefficient <= 0) throw std::invalid_argument("dyadic_check: period must be positive");
  const ExactValue& e = *t.exact_value();
  DyadicVerdict v;
  if (e.coefficient == 0 || e.times_pi != period.times_pi) return v;
  mpq_class r = e.coefficient / period.coefficient;
  r.canonicalize();
  const mpz_class& den = r.get_den();
  if (mpz_popcount(den.get_mpz_t()) != 1) return v;
  const mpz_class& num = r.get_num();
  if (mpz_even_p(num.get_mpz_t())) return v;
  v.dyadic = true;
  v.n = static_cast<long>(mpz_sizeinbase(den.get_mpz_t(), 2)) - 1;
  v.m = (num - 1) / 2;
  return v;
}

}  // namespace hatlab
