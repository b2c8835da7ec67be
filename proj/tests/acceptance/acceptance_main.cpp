// Acceptance gate: one pass/fail line per criterion, nonzero exit if any fails.

#include "hatlab/harness.hpp"
#include "hatlab/sweep.hpp"
#include "oracle/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace hatlab;

namespace {

const PrecisionContext ctx = make_context(256, 32);
constexpr mpfr_prec_t kPrec = 288;

Scalar S(const std::string& text) { return parse_scalar(text, ctx); }
Scalar Q(const mpq_class& q) { return Scalar::rational(q, kPrec); }
FunctionSpec F(const char* text) { return parse_function_spec(text); }
BigReal R(double x) { return BigReal::from_double(x, kPrec); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Every hat run that feeds an acceptance assertion, for the hygiene criterion.
struct RunRecord {
  std::string criterion;
  std::string function;
  std::string t;
  double cancellation_bits;
  bool warning;
};
std::vector<RunRecord> g_runs;

const HatRun& record(const char* criterion, const HatRun& run) {
  g_runs.push_back({criterion, run.function, format(run.t), run.cancellation_bits, run.precision_warning});
  return run;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::string sci(const BigReal& x) {
  char* text = nullptr;
  mpfr_asprintf(&text, "%.3Rg", x.get());
  std::string out(text);
  mpfr_free_str(text);
  return out;
}

// 1 ----------------------------------------------------------------------

Outcome analytic_constancy() {
  const auto start = std::chrono::steady_clock::now();
  std::vector<Scalar> grid;
  for (int k = 0; k < 20; ++k) grid.push_back(Q(mpq_class(-2) + mpq_class(4 * k, 19)));
  double worst = 0.0;
  int failures = 0;
  for (const char* f : {"exp", "sin", "cos", "poly:1,2,3"}) {
    const FunctionSpec spec = F(f);
    const BigComplex f0 = value_at_zero(spec, ctx);
    const auto runs = sweep_hat_runs(spec, grid, 60, ctx, {}, Execution::parallel);
    for (size_t i = 0; i < grid.size(); ++i) {
      if (!runs[i].value) {
        ++failures;
        continue;
      }
      const double err = abs(record("1", *runs[i].value).value() - f0).to_double();
      worst = std::max(worst, err);
      if (!(err <= 1e-30)) ++failures;
    }
  }
  const double elapsed = seconds_since(start);
  return {failures == 0 && elapsed <= 10.0,
          "max |H_60 - f(0)| = " + num(worst) + " over 4 functions x 20 points (tol 1e-30); " + num(elapsed) +
              " s (limit 10 s)"};
}

// 2 ----------------------------------------------------------------------

Outcome rational_family() {
  Outcome out;
  std::ostringstream d;
  const FunctionSpec spec = F("rational1p");

  const HatRun h3 = record("2", hat_run(spec, S("1"), 3, ctx));
  const bool exact = h3.value().re == BigReal::from_rational(mpq_class(15, 16), kPrec) && h3.value().im.is_zero();
  out.pass = out.pass && exact;
  d << "H_3(1) = " << format(h3.value().re) << (exact ? " exact" : " NOT 15/16");

  // 2|t/(1+t)|^200 is 2^-316 at t = 0.5, finer than a 256-bit sum near 1 can
  // resolve, so each point runs with 64 bits to spare below its bound
  std::string used;
  for (const char* t : {"0.5", "1", "2"}) {
    const mpq_class tq = S(t).exact_value()->coefficient;
    const mpq_class ratio = tq / (1 + tq);
    const double log2_bound = 1.0 + 200.0 * std::log2(std::fabs(ratio.get_d()));
    const long bits = std::max(256L, static_cast<long>(std::ceil(-log2_bound)) + 64);
    const PrecisionContext fine = make_context(bits, 32);
    const mpfr_prec_t p = fine.working_bits();
    const HatRun run = record("2", hat_run(spec, parse_scalar(t, fine), 200, fine));
    const BigReal bound = mul_2exp(pow_ui(abs(BigReal::from_rational(ratio, p)), 200), 1);
    const BigReal err = abs(run.value() - BigComplex(BigReal(1, p)));
    const bool ok = err <= bound;
    out.pass = out.pass && ok;
    used += (used.empty() ? "" : ", ") + std::string(t) + "@" + std::to_string(bits) + "b " +
            (ok ? "ok" : "err " + num(err.to_double()) + " > " + num(bound.to_double()));
  }
  d << "; |H_200 - 1| <= 2|t/(1+t)|^200: " << used;

  const HatRun half = record("2", hat_run(spec, S("-1/2"), 200, ctx));
  bool alternates = true;
  for (int n = 0; n <= 200; ++n) {
    alternates = alternates && half.partials[n].re == BigReal(n % 2 == 0 ? 2 : 0, kPrec) && half.partials[n].im.is_zero();
  }
  out.pass = out.pass && alternates;
  d << "; t=-1/2 partials " << (alternates ? "alternate 2,0 exactly" : "DO NOT alternate");

  const HatRun grow = record("2", hat_run(spec, S("-0.6"), 200, ctx));
  const NecessaryConditionResult nc = necessary_condition_test(grow);
  const Classification c = classify_point(spec, S("-0.6"), 200, 0.1, ctx);
  const bool diverges = nc.verdict == TermLimit::fails && c.kind == PointCase::diverges;
  out.pass = out.pass && diverges;
  d << "; t=-0.6 term limit " << to_string(nc.verdict) << ", class " << to_string(c.kind);
  out.detail = d.str();
  return out;
}

// 3 ----------------------------------------------------------------------

Outcome telescoping_law() {
  const FunctionSpec spec = F("exp");
  const Scalar t = S("1/2");
  double worst_spread = 1.0;
  bool pass = true;
  for (int N : {4, 8, 12}) {
    const TailTerm tail = tail_term(spec, t, N, ctx);
    std::vector<double> ratios;
    for (int e : {20, 21, 22}) {
      const Scalar h = Q(mpq_class(1, mpz_class(1) << e));
      const HatRun up = record("3", hat_run(spec, offset(t, h, +1, kPrec), N, ctx));
      const HatRun down = record("3", hat_run(spec, offset(t, h, -1, kPrec), N, ctx));
      const BigComplex fd = (up.value() - down.value()) / mul_2exp(h.at(kPrec), 1);
      const BigReal residual = abs(fd - tail.value);
      // the library route must agree with the one assembled here
      pass = pass && residual == telescoping_residual(spec, t, N, h, ctx);
      ratios.push_back(mul_2exp(residual, 2L * e).to_double());
    }
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    const double spread = *hi / *lo;
    worst_spread = std::max(worst_spread, spread);
    pass = pass && *lo > 0 && spread <= 2.0;
  }
  return {pass, "residual/h^2 spread (max/min) across h = 2^-20..2^-22 is " + num(worst_spread) +
                    " at worst over N in {4,8,12} (limit 2)"};
}

// 4 ----------------------------------------------------------------------

Outcome identity_suite() {
  const AlgebraParams params{S("2"), S("-1/3"), S("3")};
  double lin = 0, prod = 0, scale = 0, anti = 0;
  const std::vector<std::pair<const char*, const char*>> pairs = {
      {"exp", "cos"}, {"exp", "exp"}, {"sin", "rational1p"}, {"poly:1,-2,3", "lacunary:base=half"}};
  for (const auto& [f, g] : pairs) {
    for (const char* t : {"1/2", "1"}) {
      const AlgebraReport r = algebra_checks(F(f), F(g), params, S(t), 40, ctx);
      lin = std::max(lin, r.linearity.max_ulps);
      prod = std::max(prod, r.product.max_ulps);
      scale = std::max(scale, r.scale.max_ulps);
    }
  }
  for (const char* f : {"cos", "exp"}) {
    for (const char* x : {"1/2", "1"}) {
      anti = std::max(anti, abs(record("4", antiderivative_check(F(f), S(x), 40, ctx)).value()).to_double());
    }
  }
  const bool pass = lin <= 8 && scale <= 8 && prod <= 64 && anti <= 1e-30;
  return {pass, "max ulp: linearity " + num(lin) + " (<= 8), scale " + num(scale) + " (<= 8), product " +
                    num(prod) + " (<= 64); antiderivative max |H_40(F)| = " + num(anti) + " (<= 1e-30)"};
}

// 5 ----------------------------------------------------------------------

Outcome radius_estimation() {
  const FunctionSpec spec = F("rational1p");
  std::vector<Scalar> grid;
  for (int i = 0; i < 25; ++i) grid.push_back(Q(mpq_class(-9, 10) + mpq_class(39 * i, 240)));
  const auto radii = sweep_radius(spec, grid, 200, ctx, {}, Execution::parallel);
  const auto classes = sweep_classify(spec, grid, 200, 0.1, ctx, {}, Execution::parallel);
  double worst = 0.0;
  int bad_radius = 0, checked = 0, misclassified = 0;
  for (size_t i = 0; i < grid.size(); ++i) {
    const BigReal tv = grid[i].at(kPrec);
    const BigReal truth = abs(BigReal(1, kPrec) + tv);
    if (!radii[i].value || !classes[i].value) {
      ++bad_radius;
      continue;
    }
    const double rel = std::fabs((radii[i].value->r_hat / truth).to_double() - 1.0);
    worst = std::max(worst, rel);
    if (!(rel <= 0.05)) ++bad_radius;
    if (grid[i].is_zero()) continue;
    const BigReal at = abs(tv);
    if (truth > R(1.1) * at) {
      ++checked;
      if (classes[i].value->kind != PointCase::converges_to_taylor_at_zero) ++misclassified;
    } else if (truth < R(0.9) * at) {
      ++checked;
      if (classes[i].value->kind != PointCase::diverges) ++misclassified;
    }
  }
  return {bad_radius == 0 && misclassified == 0,
          "max |R_hat/|1+t| - 1| = " + num(worst) + " (<= 0.05) over 25 points; " + std::to_string(misclassified) +
              " misclassified of " + std::to_string(checked) + " outside the delta = 0.1 band"};
}

// 6 ----------------------------------------------------------------------

Outcome lacunary() {
  const auto start = std::chrono::steady_clock::now();
  bool pass = true;
  const CatalogJet at0 = jet_of(F("lacunary:base=2"), S("0"), 10, ctx);
  double worst = 0.0;
  for (int n = 0; n <= 10; ++n) {
    const BigComplex closed = rotate_i(BigComplex(exp(BigReal(1L << n, kPrec))), n);
    worst = std::max(worst, oracle::rel_error(at0.jet.derivative(n), closed));
  }
  const bool certified = at0.truncation && at0.truncation->tail_bound <= at0.truncation->target;
  pass = pass && worst <= 1e-10 && certified;
  record("6", hat_run_from_jet(at0.jet, "lacunary:base=2", S("0"), at0.truncation));

  const std::vector<Scalar> grid = {S("pi/8"), S("pi/4")};
  const auto two = sweep_radius(F("lacunary:base=2"), grid, 16, ctx, {}, Execution::parallel);
  const auto half = sweep_radius(F("lacunary:base=half"), grid, 16, ctx, {}, Execution::parallel);
  std::string r2, rh;
  for (size_t i = 0; i < grid.size(); ++i) {
    const bool ok2 = two[i].value && !two[i].value->infinite && two[i].value->r_hat <= R(0.05);
    const bool okh = half[i].value && (half[i].value->infinite || half[i].value->r_hat >= R(1e6));
    pass = pass && ok2 && okh;
    r2 += (r2.empty() ? "" : ", ") + (two[i].value ? sci(two[i].value->r_hat) : two[i].error);
    rh += (rh.empty() ? "" : ", ") + (half[i].value ? sci(half[i].value->r_hat) : half[i].error);
  }
  const double elapsed = seconds_since(start);
  pass = pass && elapsed <= 60.0;
  return {pass, "max rel error of f^(n)(0) vs i^n e^(2^n), n <= 10: " + num(worst) + " (<= 1e-10, tail " +
                    (certified ? "certified" : "NOT certified") + "); base 2 R_hat = " + r2 +
                    " (<= 0.05); base half R_hat = " + rh + " (>= 1e6); " + num(elapsed) + " s (limit 60 s)"};
}

// 7 ----------------------------------------------------------------------

Outcome dyadic_structure() {
  const FunctionSpec spec = F("bumpseries:a=invfact,s=2,l=1,u=floor");
  const BumpSeries& bump = std::get<BumpSeries>(spec);
  bool pass = true;
  int compared = 0;
  for (const char* t : {"1/2", "3/4"}) {
    for (int order : {0, 10, 20, 40}) {
      const CatalogJet cj = jet_of(spec, S(t), order, ctx);
      const Jet finite = series_family_partial_jet(bump, S(t), order, ctx, cj.truncation->outer_terms - 1);
      pass = pass && cj.truncation->exact;
      for (int n = 0; n <= order; ++n) {
        pass = pass && identical(cj.jet[n], finite[n]);
        ++compared;
      }
      if (order == 40) record("7", hat_run_from_jet(cj.jet, to_string(spec), S(t), cj.truncation));
    }
  }
  const CatalogJet a = jet_of(spec, S("1/3"), 6, ctx);
  SeriesOptions doubled;
  doubled.min_outer_terms = 2 * a.truncation->outer_terms;
  const CatalogJet b = jet_of(spec, S("1/3"), 6, ctx, doubled);
  double worst = 0.0;
  bool holds = b.truncation->outer_terms >= 2 * a.truncation->outer_terms;
  const BigReal rounding = mul_2exp(BigReal(1, kPrec), -kPrec + 8);
  for (int k = 0; k <= 6; ++k) {
    const BigReal moved = abs(a.jet[k] - b.jet[k]);
    const BigReal allowed = a.truncation->coefficient_tail[k] + rounding * abs(b.jet[k]);
    holds = holds && moved <= allowed;
    if (!allowed.is_zero()) worst = std::max(worst, (moved / allowed).to_double());
  }
  pass = pass && holds;
  record("7", hat_run_from_jet(a.jet, to_string(spec), S("1/3"), a.truncation));
  return {pass, std::to_string(compared) + " coefficients at t in {1/2, 3/4}, orders <= 40, bit-identical to the finite "
                    "sum; t = 1/3 order 6: " + std::to_string(a.truncation->outer_terms) + " -> " +
                    std::to_string(b.truncation->outer_terms) + " outer terms moved coefficients by at most " +
                    num(worst) + " of the certified tail"};
}

// 8 ----------------------------------------------------------------------

size_t csv_fields(const std::string& line) {
  size_t fields = 1;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') quoted = !quoted;
    else if (c == ',' && !quoted) ++fields;
  }
  return fields;
}

bool well_formed_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  bool saw_label = false;
  size_t columns = 0;
  bool expect_header = false;
  int tables = 0;
  while (std::getline(in, line)) {
    if (line == "# label: exploratory") saw_label = true;
    if (line.rfind("# table:", 0) == 0) {
      expect_header = true;
      ++tables;
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    const size_t n = csv_fields(line);
    if (expect_header) {
      columns = n;
      expect_header = false;
    } else if (n != columns) {
      return false;
    }
  }
  return saw_label && tables > 0;
}

Outcome exploratory_outputs() {
  bool pass = true;
  std::string detail;
  const std::vector<ConfigValues> configs = {
      {{"experiment", "EXP-C"}}, {{"experiment", "EXP-D"}, {"t", "1/3,1/5,0.3"}, {"order", "6"}}, {{"experiment", "EXP-H"}}};
  for (const auto& flags : configs) {
    const ExperimentConfig cfg = resolve_config({}, flags);
    std::string status;
    try {
      const ExperimentResult a = run_experiment(cfg);
      const ExperimentResult b = run_experiment(cfg);
      const bool ok = a.exploratory && a.verdicts.empty() && well_formed_csv(to_csv(a)) && to_csv(a) == to_csv(b) &&
                      to_json(a) == to_json(b);
      status = ok ? "ok" : "BAD";
      pass = pass && ok;
    } catch (const std::exception& e) {
      status = std::string("threw: ") + e.what();
      pass = false;
    }
    detail += (detail.empty() ? "" : ", ") + cfg.experiment + " " + status;
  }
  return {pass, detail + " (exploratory label, no assertion rows, well-formed CSV, byte-identical re-run)"};
}

// 9 ----------------------------------------------------------------------

Outcome numeric_hygiene() {
  const double limit = static_cast<double>(ctx.bits() - 32);
  int over = 0, unflagged = 0;
  double worst = 0.0;
  std::string worst_run, offenders;
  for (const auto& r : g_runs) {
    if (!std::isfinite(r.cancellation_bits)) ++unflagged;
    if (r.cancellation_bits > worst) {
      worst = r.cancellation_bits;
      worst_run = r.function + " at t=" + r.t + " (criterion " + r.criterion + ")";
    }
    if (r.cancellation_bits > limit) {
      ++over;
      if (!r.warning) ++unflagged;
      if (over <= 6) offenders += (offenders.empty() ? "" : "; ") + r.function + " t=" + r.t + ": " + num(r.cancellation_bits);
    }
  }
  std::string detail = std::to_string(g_runs.size()) + " runs reported cancellation_bits; max " + num(worst) + " from " +
                       worst_run + "; limit bits-32 = " + num(limit) + "; " + std::to_string(over) + " over the limit";
  if (over > 0) detail += " [" + offenders + (over > 6 ? "; ..." : "") + "]";
  if (unflagged > 0) detail += "; " + std::to_string(unflagged) + " over-limit runs missing the precision warning";
  return {over == 0 && unflagged == 0, detail};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"analytic constancy", analytic_constancy},   {"rational family", rational_family},
      {"telescoping law", telescoping_law},         {"identity suite", identity_suite},
      {"radius estimation", radius_estimation},     {"lacunary closed form", lacunary},
      {"dyadic structure", dyadic_structure},       {"exploratory outputs", exploratory_outputs},
      {"numeric hygiene", numeric_hygiene},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s  %zu  %-22s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
