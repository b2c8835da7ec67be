#include "hatlab/harness.hpp"

#include "hatlab/sweep.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace hatlab {

// ------------------------------------------------------------------ config

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {"experiment", "f",     "t",      "order", "bits",
                                                "guard",      "delta", "format", "out"};
  return keys;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool known_key(const std::string& key) {
  const auto& keys = config_keys();
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

long parse_long(const std::string& key, const std::string& text) {
  long v = 0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size()) {
    throw UsageError(key + ": expected an integer, got '" + text + "'");
  }
  return v;
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size()) {
    throw UsageError(key + ": expected a number, got '" + text + "'");
  }
  return v;
}

}  // namespace

ConfigValues parse_config_text(std::string_view text) {
  ConfigValues out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (!known_key(key)) throw UsageError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (!out.emplace(key, value).second) {
      throw UsageError("config line " + std::to_string(lineno) + ": repeated key '" + key + "'");
    }
  }
  return out;
}

ConfigValues read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

ExperimentConfig resolve_config(const ConfigValues& file, const ConfigValues& flags) {
  ConfigValues merged = file;
  for (const auto& [k, v] : flags) {
    if (!known_key(k)) throw UsageError("unknown key '" + k + "'");
    merged[k] = v;
  }
  ExperimentConfig cfg;
  for (const auto& [key, value] : merged) {
    if (key == "experiment") cfg.experiment = value;
    else if (key == "f") cfg.function = value;
    else if (key == "t") cfg.t = value;
    else if (key == "order") cfg.order = static_cast<int>(parse_long(key, value));
    else if (key == "bits") cfg.bits = parse_long(key, value);
    else if (key == "guard") cfg.guard_bits = parse_long(key, value);
    else if (key == "delta") cfg.delta = parse_double(key, value);
    else if (key == "format") {
      if (value == "csv") cfg.format = OutputFormat::csv;
      else if (value == "json") cfg.format = OutputFormat::json;
      else throw UsageError("format must be csv or json");
    } else if (key == "out") cfg.out = value;
  }
  if (cfg.bits < PrecisionContext::kMinBits) {
    throw CapError("precision too small: bits must be >= " + std::to_string(PrecisionContext::kMinBits));
  }
  if (cfg.bits > Caps::max_bits) throw CapError("cap exceeded: bits <= " + std::to_string(Caps::max_bits));
  if (cfg.guard_bits < 0 || cfg.guard_bits > Caps::max_guard) {
    throw CapError("cap exceeded: 0 <= guard <= " + std::to_string(Caps::max_guard));
  }
  if (cfg.order < 0 || cfg.order > Caps::max_order) {
    throw CapError("cap exceeded: 0 <= order <= " + std::to_string(Caps::max_order));
  }
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw CapError("cap exceeded: 0 < delta < 1");
  return cfg;
}

std::vector<Scalar> parse_grid(std::string_view text, const PrecisionContext& ctx) {
  const std::string s = trim(text);
  if (s.empty()) throw UsageError("empty t grid");
  const mpfr_prec_t prec = ctx.working_bits();
  std::vector<Scalar> out;
  if (s.find(':') != std::string::npos) {
    const auto c1 = s.find(':');
    const auto c2 = s.find(':', c1 + 1);
    if (c2 == std::string::npos || s.find(':', c2 + 1) != std::string::npos) {
      throw UsageError("grid must be a:b:n");
    }
    const Scalar a = parse_scalar(trim(std::string_view(s).substr(0, c1)), ctx);
    const Scalar b = parse_scalar(trim(std::string_view(s).substr(c1 + 1, c2 - c1 - 1)), ctx);
    const long n = parse_long("grid point count", trim(std::string_view(s).substr(c2 + 1)));
    if (n < 1) throw UsageError("grid point count must be positive");
    if (n > Caps::max_grid_points) {
      throw CapError("cap exceeded: grid points <= " + std::to_string(Caps::max_grid_points));
    }
    const bool exact = a.has_exact() && b.has_exact() &&
                       (a.exact_value()->times_pi == b.exact_value()->times_pi || a.is_zero() || b.is_zero());
    for (long k = 0; k < n; ++k) {
      if (n == 1) {
        out.push_back(a);
        break;
      }
      if (exact) {
        const ExactValue& ea = *a.exact_value();
        const ExactValue& eb = *b.exact_value();
        const bool pi = ea.coefficient == 0 ? eb.times_pi : ea.times_pi;
        mpq_class step = (eb.coefficient - ea.coefficient) / mpq_class(n - 1);
        step.canonicalize();
        mpq_class v = ea.coefficient + step * k;
        v.canonicalize();
        out.push_back(Scalar::exact(ExactValue{v, pi}, prec));
      } else {
        const BigReal av = a.at(prec), bv = b.at(prec);
        out.emplace_back(av + (bv - av) * BigReal(k, prec) / BigReal(n - 1, prec));
      }
    }
    return out;
  }
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) out.push_back(parse_scalar(trim(item), ctx));
  if (static_cast<long>(out.size()) > Caps::max_grid_points) {
    throw CapError("cap exceeded: grid points <= " + std::to_string(Caps::max_grid_points));
  }
  return out;
}

// ------------------------------------------------------------- formatting

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), p);
}

const Table* ExperimentResult::table(std::string_view name) const {
  for (const auto& t : tables) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

namespace {

std::string fmt(const BigReal& x) { return format(x); }
std::string fmt(const Scalar& x) { return format(x); }
std::string fmt(bool b) { return b ? "true" : "false"; }
std::string fmt(double d) { return format_double(d); }
std::string fmt(long v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }

// ------------------------------------------------------------ experiments

struct Setup {
  const ExperimentConfig& cfg;
  PrecisionContext ctx;
  int order;
  ExperimentResult result;

  Setup(const ExperimentConfig& c, int default_order, const ExperimentInfo& info)
      : cfg(c), ctx(make_context(c.bits, c.guard_bits)), order(c.order > 0 ? c.order : default_order) {
    result.id = info.id;
    result.title = info.title;
    result.exploratory = info.exploratory;
  }

  mpfr_prec_t prec() const { return ctx.working_bits(); }

  std::vector<Scalar> grid(const std::string& fallback) const {
    return parse_grid(cfg.t.empty() ? fallback : cfg.t, ctx);
  }

  std::vector<std::string> functions(std::vector<std::string> fallback) const {
    if (cfg.function.empty()) return fallback;
    return {cfg.function};
  }

  void meta(std::string key, std::string value) { result.metadata.emplace_back(std::move(key), std::move(value)); }

  void verdict(std::string name, bool pass, std::string threshold, std::string observed) {
    result.verdicts.push_back({std::move(name), pass, std::move(threshold), std::move(observed)});
  }

  void common_meta(const std::vector<std::string>& fs, const std::vector<Scalar>& grid) {
    std::string f_list, t_list;
    for (const auto& f : fs) f_list += (f_list.empty() ? "" : ";") + f;
    for (const auto& t : grid) t_list += (t_list.empty() ? "" : ";") + format(t);
    meta("functions", f_list);
    meta("grid", t_list);
    meta("order", std::to_string(order));
  }
};

void need_order(int order, int minimum, const std::string& what) {
  if (order < minimum) throw CapError(what + " needs order >= " + std::to_string(minimum));
}

template <class T>
const T& require(const PointOutcome<T>& p, const Scalar& t) {
  if (!p.value) {
    const std::string msg = "at t = " + format(t) + ": " + p.error;
    if (p.numeric_error) throw NumericError(msg);
    throw std::invalid_argument(msg);
  }
  return *p.value;
}

Table hat_run_table(const HatRun& run) {
  Table table{"hat-run f=" + run.function + " t=" + format(run.t),
              {"n", "term_re", "term_im", "partial_re", "partial_im", "abs_term"},
              {}};
  for (size_t n = 0; n < run.terms.size(); ++n) {
    table.rows.push_back({fmt(static_cast<long>(n)), fmt(run.terms[n].re), fmt(run.terms[n].im),
                          fmt(run.partials[n].re), fmt(run.partials[n].im), fmt(abs(run.terms[n]))});
  }
  return table;
}

Table radius_table(std::string name) {
  return Table{std::move(name), {"t", "n_lo", "n_hi", "R_hat", "trend"}, {}};
}

void add_radius_row(Table& table, const Scalar& t, const RadiusEstimate& est) {
  table.rows.push_back({fmt(t), fmt(est.n_lo), fmt(est.n_hi), fmt(est.r_hat), to_string(est.trend)});
}

// Aggregates over the supplied grid only; points whose estimate failed are
// listed rather than folded in.
Table radius_summary_table(const std::string& ftext, const std::vector<Scalar>& grid,
                           const std::vector<PointOutcome<RadiusEstimate>>& radii, mpfr_prec_t prec) {
  std::vector<std::optional<RadiusEstimate>> estimates;
  std::string failed_points;
  for (size_t i = 0; i < radii.size(); ++i) {
    estimates.push_back(radii[i].value);
    if (!radii[i].value) failed_points += (failed_points.empty() ? "" : ";") + fmt(grid[i]);
  }
  const GridRadiusSummary g = grid_radius_summary(estimates, prec);
  Table table{"radius-summary f=" + ftext,
              {"scope", "points", "estimated", "failed", "failed_points", "alpha_hat", "beta_hat", "R", "S"},
              {}};
  table.rows.push_back({"grid-relative", fmt(static_cast<long>(grid.size())), fmt(g.estimated), fmt(g.failed),
                        failed_points, fmt(g.alpha_hat), fmt(g.beta_hat), fmt(g.r_lower), fmt(g.r_upper)});
  return table;
}

Table classification_table() { return Table{"classification", {"t", "R_hat", "abs_t", "delta", "case"}, {}}; }

void add_classification_row(Table& table, const Classification& c) {
  table.rows.push_back({fmt(c.t), fmt(c.r_hat), fmt(c.abs_t), fmt(c.delta), to_string(c.kind)});
}

Table hygiene_table() {
  return Table{"cancellation", {"f", "t", "cancellation_bits", "precision_warning"}, {}};
}

void add_hygiene_row(Table& table, const HatRun& run) {
  table.rows.push_back({run.function, fmt(run.t), fmt(run.cancellation_bits), fmt(run.precision_warning)});
}

// EXP-A ------------------------------------------------------------------

ExperimentResult analytic_constancy(Setup s) {
  const auto fs = s.functions({"exp", "sin", "cos", "poly:1,2,3"});
  const auto grid = s.grid("-2:2:20");
  s.common_meta(fs, grid);
  const double tol = 1e-30;
  Table table{"analytic-constancy",
              {"f", "t", "H_N_re", "H_N_im", "f0_re", "abs_error", "cancellation_bits", "precision_warning"},
              {}};
  double worst = 0.0;
  bool single = grid.size() == 1 && fs.size() == 1;
  for (const auto& ftext : fs) {
    const FunctionSpec spec = parse_function_spec(ftext);
    const BigComplex f0 = value_at_zero(spec, s.ctx);
    const auto runs = sweep_hat_runs(spec, grid, s.order, s.ctx, {}, Execution::parallel);
    for (size_t i = 0; i < grid.size(); ++i) {
      const HatRun& run = require(runs[i], grid[i]);
      const BigReal err = abs(run.value() - f0);
      worst = std::max(worst, err.to_double());
      table.rows.push_back({ftext, fmt(grid[i]), fmt(run.value().re), fmt(run.value().im), fmt(f0.re), fmt(err),
                            fmt(run.cancellation_bits), fmt(run.precision_warning)});
      if (single) s.result.tables.push_back(hat_run_table(run));
    }
  }
  s.result.tables.insert(s.result.tables.begin(), std::move(table));
  s.verdict("max_abs_error", worst <= tol, "abs_error<=1e-30", fmt(worst));
  return std::move(s.result);
}

// EXP-B ------------------------------------------------------------------

ExperimentResult rational_boundary(Setup s) {
  const auto fs = s.functions({"rational1p"});
  const auto grid = s.grid("-0.95:3:80");
  need_order(s.order, 12, "EXP-B");
  s.common_meta(fs, grid);
  s.meta("delta", fmt(s.cfg.delta));
  s.meta("growth_factor", "1e6");
  const FunctionSpec spec = parse_function_spec(fs.front());
  const auto classes = sweep_classify(spec, grid, s.order, s.cfg.delta, s.ctx, {}, Execution::parallel);
  const auto runs = sweep_hat_runs(spec, grid, s.order, s.ctx, {}, Execution::parallel);

  Table cls = classification_table();
  Table sums{"partial-sums", {"t", "H_N_re", "H_N_im", "abs_error", "term_limit", "cancellation_bits"}, {}};
  const BigComplex f0 = value_at_zero(spec, s.ctx);
  const bool rational = std::holds_alternative<RationalOnePlus>(spec);
  int checked = 0, mismatched = 0;
  for (size_t i = 0; i < grid.size(); ++i) {
    const Classification& c = require(classes[i], grid[i]);
    const HatRun& run = require(runs[i], grid[i]);
    add_classification_row(cls, c);
    const NecessaryConditionResult nc = necessary_condition_test(run);
    sums.rows.push_back({fmt(grid[i]), fmt(run.value().re), fmt(run.value().im), fmt(abs(run.value() - f0)),
                         to_string(nc.verdict), fmt(run.cancellation_bits)});
    if (!rational || grid[i].is_zero()) continue;
    // Outside the band the true radius |1+t| decides the split at t = -1/2.
    const BigReal abs_t = c.abs_t;
    const BigReal radius = abs(grid[i].at(s.prec()) + BigReal(1, s.prec()));
    const BigReal lo = BigReal::from_double(1.0 - s.cfg.delta, s.prec()) * abs_t;
    const BigReal hi = BigReal::from_double(1.0 + s.cfg.delta, s.prec()) * abs_t;
    if (radius >= lo && radius <= hi) continue;
    ++checked;
    const PointCase expected = radius > hi ? PointCase::converges_to_taylor_at_zero : PointCase::diverges;
    if (c.kind != expected) ++mismatched;
  }
  s.result.tables.push_back(std::move(cls));
  s.result.tables.push_back(std::move(sums));
  if (rational) {
    s.verdict("classification_split", mismatched == 0, "misclassified<=0;delta=" + fmt(s.cfg.delta),
              std::to_string(mismatched) + " of " + std::to_string(checked));
  }
  return std::move(s.result);
}

// EXP-C ------------------------------------------------------------------

ExperimentResult flat_probe(Setup s) {
  const auto fs = s.functions({"flatexp:s=2"});
  const auto grid = s.grid("1/4,1/2,1,2");
  need_order(s.order, 12, "EXP-C");
  s.common_meta(fs, grid);
  for (const auto& ftext : fs) {
    const FunctionSpec spec = parse_function_spec(ftext);
    const auto runs = sweep_hat_runs(spec, grid, s.order, s.ctx, {}, Execution::parallel);
    const auto radii = sweep_radius(spec, grid, s.order, s.ctx, {}, Execution::parallel);
    Table radius = radius_table("radius-map f=" + ftext);
    Table hygiene = hygiene_table();
    for (size_t i = 0; i < grid.size(); ++i) {
      const HatRun& run = require(runs[i], grid[i]);
      s.result.tables.push_back(hat_run_table(run));
      add_hygiene_row(hygiene, run);
      if (radii[i].value) add_radius_row(radius, grid[i], *radii[i].value);
    }
    s.result.tables.push_back(std::move(radius));
    s.result.tables.push_back(radius_summary_table(ftext, grid, radii, s.prec()));
    s.result.tables.push_back(std::move(hygiene));
    const BoundReport b = bound_report(spec, grid, s.order, s.ctx);
    std::string verdicts;
    for (TermLimit v : b.term_limit) verdicts += (verdicts.empty() ? "" : ";") + to_string(v);
    s.result.tables.push_back(Table{"bound-report f=" + ftext,
                                    {"scope", "log2_C_hat", "log2_M_hat", "C_hat", "M_hat", "ratio_sup",
                                     "ratio_exclusions", "dirichlet_sup", "term_limit"},
                                    {{"grid-relative", fmt(b.log2_c), fmt(b.log2_m), fmt(b.c_hat), fmt(b.m_hat),
                                      fmt(b.ratio_sup), fmt(b.ratio_exclusions), fmt(b.dirichlet_sup), verdicts}}});
  }
  return std::move(s.result);
}

// EXP-D ------------------------------------------------------------------

ExperimentResult dyadic_bump(Setup s) {
  const auto fs = s.functions({"bumpseries:a=invfact,s=2,l=1,u=floor"});
  const auto grid = s.grid("1/2,3/4,1/3,1/5");
  s.common_meta(fs, grid);
  for (const auto& ftext : fs) {
    const FunctionSpec spec = parse_function_spec(ftext);
    const auto* bump = std::get_if<BumpSeries>(&spec);
    if (!bump) throw std::invalid_argument("EXP-D needs a bumpseries spec");
    Table dyadic{"dyadic-structure f=" + ftext,
                 {"t", "dyadic", "m", "n", "outer_terms", "tail_exact", "tail_bound", "matches_finite_sum"},
                 {}};
    Table hygiene = hygiene_table();
    struct Point {
      CatalogJet jet;
      bool identical = false;
    };
    const auto points = sweep<Point>(grid.size(), Execution::parallel, [&](std::size_t i) {
      SeriesOptions inner;
      inner.execution = Execution::serial;
      Point p{jet_of(spec, grid[i], s.order, s.ctx, inner), false};
      const Jet finite =
          series_family_partial_jet(*bump, grid[i], s.order, s.ctx, p.jet.truncation->outer_terms - 1);
      p.identical = true;
      for (int n = 0; n <= s.order; ++n) p.identical = p.identical && identical(p.jet.jet[n], finite[n]);
      return p;
    });
    for (size_t i = 0; i < grid.size(); ++i) {
      const Point& p = require(points[i], grid[i]);
      const DyadicVerdict dv = dyadic_check(grid[i], bump->shape.period);
      const SeriesTruncation& tr = *p.jet.truncation;
      dyadic.rows.push_back({fmt(grid[i]), fmt(dv.dyadic), dv.dyadic ? dv.m.get_str() : "", dv.dyadic ? fmt(dv.n) : "",
                             fmt(tr.outer_terms), fmt(tr.exact), fmt(tr.tail_bound), fmt(p.identical)});
      const HatRun run = hat_run_from_jet(p.jet.jet, ftext, grid[i], tr);
      s.result.tables.push_back(hat_run_table(run));
      add_hygiene_row(hygiene, run);
    }
    s.result.tables.insert(s.result.tables.begin(), std::move(dyadic));
    s.result.tables.push_back(std::move(hygiene));
  }
  return std::move(s.result);
}

// EXP-E ------------------------------------------------------------------

ExperimentResult lacunary(Setup s) {
  const auto fs = s.functions({"lacunary:base=2", "lacunary:base=half"});
  const auto grid = s.grid("pi/8,pi/4");
  need_order(s.order, 12, "EXP-E");
  s.common_meta(fs, grid);
  const double rel_tol = 1e-10;
  for (const auto& ftext : fs) {
    const FunctionSpec spec = parse_function_spec(ftext);
    const auto* lac = std::get_if<Lacunary>(&spec);
    if (!lac) throw std::invalid_argument("EXP-E needs a lacunary spec");
    if (lac->base == LacunaryBase::two) {
      const int top = std::min(s.order, 10);
      const CatalogJet at0 = jet_of(spec, Scalar::rational(0, s.prec()), top, s.ctx);
      Table deriv{"derivatives-at-zero f=" + ftext,
                  {"n", "deriv_re", "deriv_im", "abs_deriv", "closed_form_re", "closed_form_im", "rel_error"},
                  {}};
      double worst = 0.0;
      for (int n = 0; n <= top; ++n) {
        const BigComplex d = at0.jet.derivative(n);
        // i^n e^(2^n)
        const BigComplex closed =
            rotate_i(BigComplex(exp(BigReal(1L << n, s.prec()))), n);
        const double rel = (abs(d - closed) / abs(closed)).to_double();
        worst = std::max(worst, rel);
        deriv.rows.push_back({fmt(n), fmt(d.re), fmt(d.im), fmt(abs(d)), fmt(closed.re), fmt(closed.im), fmt(rel)});
      }
      s.result.tables.push_back(std::move(deriv));
      s.meta("outer_terms_at_zero", fmt(at0.truncation->outer_terms));
      s.meta("tail_bound_at_zero", fmt(at0.truncation->tail_bound));
      s.verdict("closed_form_derivatives", worst <= rel_tol, "rel_error<=1e-10", fmt(worst));
    }
    const auto radii = sweep_radius(spec, grid, s.order, s.ctx, {}, Execution::parallel);
    Table radius = radius_table("radius-map f=" + ftext);
    bool all_ok = true;
    std::string observed;
    for (size_t i = 0; i < grid.size(); ++i) {
      const RadiusEstimate& est = require(radii[i], grid[i]);
      add_radius_row(radius, grid[i], est);
      if (lac->base == LacunaryBase::two) {
        all_ok = all_ok && !est.infinite && est.r_hat <= BigReal::from_double(0.05, s.prec());
      } else {
        all_ok = all_ok && (est.infinite || est.r_hat >= BigReal::from_double(1e6, s.prec()));
      }
      observed += (observed.empty() ? "" : ";") + fmt(est.r_hat);
    }
    s.result.tables.push_back(std::move(radius));
    s.result.tables.push_back(radius_summary_table(ftext, grid, radii, s.prec()));
    if (lac->base == LacunaryBase::two) {
      s.verdict("radius_near_zero", all_ok, "R_hat<=0.05", observed);
    } else {
      s.verdict("radius_effectively_infinite", all_ok, "R_hat>=1e6", observed);
    }
  }
  return std::move(s.result);
}

// EXP-F ------------------------------------------------------------------

ExperimentResult identities(Setup s) {
  const auto fs = s.functions({"exp"});
  const auto grid = s.grid("1/2,1");
  s.common_meta(fs, grid);
  const std::string g_text = "cos";
  s.meta("g", g_text);
  s.meta("linear_coefficients", "a=2;b=-1/3");
  s.meta("scale_factor", "3");
  const FunctionSpec f = parse_function_spec(fs.front());
  const FunctionSpec g = parse_function_spec(g_text);
  const AlgebraParams params{parse_scalar("2", s.ctx), parse_scalar("-1/3", s.ctx), parse_scalar("3", s.ctx)};

  Table table{"identity-residuals", {"check", "t", "max_residual", "ulp_scale"}, {}};
  Table hygiene = hygiene_table();
  double lin = 0, prod = 0, scale = 0, anti = 0;
  for (const auto& t : grid) {
    const AlgebraReport r = algebra_checks(f, g, params, t, s.order, s.ctx);
    table.rows.push_back({"linearity", fmt(t), fmt(r.linearity.max_residual), fmt(r.linearity.max_ulps)});
    table.rows.push_back({"product", fmt(t), fmt(r.product.max_residual), fmt(r.product.max_ulps)});
    table.rows.push_back({"scale", fmt(t), fmt(r.scale.max_residual), fmt(r.scale.max_ulps)});
    lin = std::max(lin, r.linearity.max_ulps);
    prod = std::max(prod, r.product.max_ulps);
    scale = std::max(scale, r.scale.max_ulps);
    for (const char* base : {"cos", "exp"}) {
      const HatRun run = antiderivative_check(parse_function_spec(base), t, s.order, s.ctx);
      const BigReal residual = abs(run.value());
      table.rows.push_back({std::string("antiderivative(") + base + ")", fmt(t), fmt(residual),
                            fmt(ulps(residual, BigReal(1, s.prec()), s.ctx.bits()))});
      anti = std::max(anti, residual.to_double());
      add_hygiene_row(hygiene, run);
    }
  }
  s.result.tables.push_back(std::move(table));
  s.result.tables.push_back(std::move(hygiene));
  s.verdict("linearity", lin <= 8, "ulp_scale<=8", fmt(lin));
  s.verdict("product", prod <= 64, "ulp_scale<=64", fmt(prod));
  s.verdict("scale", scale <= 8, "ulp_scale<=8", fmt(scale));
  s.verdict("antiderivative", anti <= 1e-30, "max_residual<=1e-30", fmt(anti));
  return std::move(s.result);
}

// EXP-G ------------------------------------------------------------------

ExperimentResult telescoping(Setup s) {
  const auto fs = s.functions({"exp"});
  const auto grid = s.grid("1/2");
  s.common_meta(fs, grid);
  const std::vector<int> orders = s.cfg.order > 0 ? std::vector<int>{s.cfg.order} : std::vector<int>{4, 8, 12};
  const std::vector<int> h_exponents = {20, 21, 22};
  s.meta("orders", [&] {
    std::string o;
    for (int n : orders) o += (o.empty() ? "" : ";") + std::to_string(n);
    return o;
  }());
  s.meta("steps", "2^-20;2^-21;2^-22");
  const FunctionSpec spec = parse_function_spec(fs.front());

  Table tele{"telescoping", {"t", "N", "h", "residual", "residual_over_h2"}, {}};
  Table fkn{"fkn-recurrence", {"t", "k", "n", "h", "residual", "residual_over_h2"}, {}};
  bool stable = true;
  double worst_spread = 1.0;
  for (const auto& t : grid) {
    for (int n : orders) {
      std::vector<double> ratios;
      for (int e : h_exponents) {
        const Scalar h = Scalar::rational(mpq_class(1, mpz_class(1) << e), s.prec());
        const BigReal residual = telescoping_residual(spec, t, n, h, s.ctx);
        const BigReal over = mul_2exp(residual, 2L * e);
        ratios.push_back(over.to_double());
        tele.rows.push_back({fmt(t), fmt(n), "2^-" + std::to_string(e), fmt(residual), fmt(over)});
      }
      const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
      const double spread = *lo > 0 ? *hi / *lo : std::numeric_limits<double>::infinity();
      if (*hi == 0.0) continue;  // identically zero residual (polynomial-like)
      worst_spread = std::max(worst_spread, spread);
      stable = stable && spread <= 2.0;
    }
    for (const auto& [k, n] : std::vector<std::pair<int, int>>{{1, 1}, {2, 3}, {3, 5}}) {
      for (int e : h_exponents) {
        const Scalar h = Scalar::rational(mpq_class(1, mpz_class(1) << e), s.prec());
        const BigReal residual = fkn_recurrence_check(spec, t, k, n, h, s.ctx);
        fkn.rows.push_back({fmt(t), fmt(k), fmt(n), "2^-" + std::to_string(e), fmt(residual),
                            fmt(mul_2exp(residual, 2L * e))});
      }
    }
  }
  s.result.tables.push_back(std::move(tele));
  s.result.tables.push_back(std::move(fkn));
  s.verdict("residual_over_h2_stable", stable, "max/min<=2", fmt(worst_spread));
  return std::move(s.result);
}

// EXP-H ------------------------------------------------------------------

ExperimentResult residual_operator(Setup s) {
  const auto fs = s.functions({"exp", "sin", "cos", "rational1p", "flatexp:s=2"});
  const auto grid = s.grid("-2:2:9");
  s.common_meta(fs, grid);
  Table table{"residual-operator",
              {"f", "t", "residual_re", "residual_im", "abs_residual", "cancellation_bits", "precision_warning"},
              {}};
  for (const auto& ftext : fs) {
    const FunctionSpec spec = parse_function_spec(ftext);
    const BigComplex f0 = value_at_zero(spec, s.ctx);
    const auto runs = sweep_hat_runs(spec, grid, s.order, s.ctx, {}, Execution::parallel);
    for (size_t i = 0; i < grid.size(); ++i) {
      if (!runs[i].value) {
        table.rows.push_back({ftext, fmt(grid[i]), "", "", "", "", "error: " + runs[i].error});
        continue;
      }
      const HatRun& run = *runs[i].value;
      const BigComplex r = f0 - run.value();
      table.rows.push_back({ftext, fmt(grid[i]), fmt(r.re), fmt(r.im), fmt(abs(r)), fmt(run.cancellation_bits),
                            fmt(run.precision_warning)});
    }
  }
  s.result.tables.push_back(std::move(table));
  return std::move(s.result);
}

const ExperimentInfo& info_for(const std::string& id) {
  for (const auto& e : experiments()) {
    if (e.id == id) return e;
  }
  throw UsageError("unknown experiment id '" + id + "'");
}

}  // namespace

const std::vector<ExperimentInfo>& experiments() {
  static const std::vector<ExperimentInfo> list = {
      {"EXP-A", "analytic constancy: H_N(t) against f(0) for entire functions", false},
      {"EXP-B", "rational boundary: 1/(1+t) partial sums and classification", false},
      {"EXP-C", "flat probe: exp(-1/t^2) term magnitudes and radius trend", true},
      {"EXP-D", "dyadic bump: bump-series jets at dyadic and non-dyadic points", true},
      {"EXP-E", "lacunary: closed-form derivatives at 0 and radius maps", false},
      {"EXP-F", "identities: linearity, product, scale and antiderivative residuals", false},
      {"EXP-G", "telescoping: derivative of partial sums and f_{k,n} recurrence", false},
      {"EXP-H", "residual operator: f(0) - H_N(t) over grids", true},
  };
  return list;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.experiment.empty()) throw UsageError("no experiment id given");
  const ExperimentInfo& info = info_for(cfg.experiment);
  ExperimentResult result;
  if (info.id == "EXP-A") result = analytic_constancy(Setup(cfg, 60, info));
  else if (info.id == "EXP-B") result = rational_boundary(Setup(cfg, 200, info));
  else if (info.id == "EXP-C") result = flat_probe(Setup(cfg, 60, info));
  else if (info.id == "EXP-D") result = dyadic_bump(Setup(cfg, 12, info));
  else if (info.id == "EXP-E") result = lacunary(Setup(cfg, 16, info));
  else if (info.id == "EXP-F") result = identities(Setup(cfg, 40, info));
  else if (info.id == "EXP-G") result = telescoping(Setup(cfg, 12, info));
  else result = residual_operator(Setup(cfg, 60, info));
  result.metadata.insert(result.metadata.begin(),
                         {{"bits", std::to_string(cfg.bits)},
                          {"guard_bits", std::to_string(cfg.guard_bits)},
                          {"precision", "decimal columns round-trip at " + std::to_string(cfg.bits + cfg.guard_bits) +
                                            " bits; cancellation_bits, ulp_scale, rel_error and "
                                            "residual_over_h2 are binary64"}});
  return result;
}

ExperimentResult classify_command(const ExperimentConfig& cfg) {
  if (cfg.function.empty() || cfg.t.empty()) throw UsageError("classify needs --f and --t");
  ExperimentInfo info{"classify", "single-point classification", false};
  Setup s(cfg, 60, info);
  const FunctionSpec spec = parse_function_spec(cfg.function);
  const auto grid = s.grid("");
  s.common_meta({cfg.function}, grid);
  s.meta("delta", fmt(cfg.delta));
  Table table = classification_table();
  const auto classes = sweep_classify(spec, grid, s.order, cfg.delta, s.ctx, {}, Execution::parallel);
  for (size_t i = 0; i < grid.size(); ++i) add_classification_row(table, require(classes[i], grid[i]));
  s.result.tables.push_back(std::move(table));
  return std::move(s.result);
}

ExperimentResult radius_command(const ExperimentConfig& cfg) {
  if (cfg.function.empty() || cfg.t.empty()) throw UsageError("radius needs --f and --t");
  ExperimentInfo info{"radius", "single-point radius estimate", false};
  Setup s(cfg, 60, info);
  need_order(s.order, 12, "radius");
  const FunctionSpec spec = parse_function_spec(cfg.function);
  const auto grid = s.grid("");
  s.common_meta({cfg.function}, grid);
  Table table = radius_table("radius-map");
  const auto radii = sweep_radius(spec, grid, s.order, s.ctx, {}, Execution::parallel);
  for (size_t i = 0; i < grid.size(); ++i) add_radius_row(table, grid[i], require(radii[i], grid[i]));
  s.result.tables.push_back(std::move(table));
  s.result.tables.push_back(radius_summary_table(cfg.function, grid, radii, s.prec()));
  return std::move(s.result);
}

// -------------------------------------------------------------- emission

namespace {

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string line;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += csv_cell(cells[i]);
  }
  return line + '\n';
}

}  // namespace

std::string to_csv(const ExperimentResult& r) {
  std::string out;
  out += "# experiment: " + r.id + "\n";
  out += "# title: " + r.title + "\n";
  out += std::string("# label: ") + (r.exploratory ? "exploratory" : "reproduction") + "\n";
  for (const auto& [k, v] : r.metadata) out += "# " + k + ": " + v + "\n";
  for (const auto& t : r.tables) {
    out += "\n# table: " + t.name + "\n";
    out += csv_row(t.columns);
    for (const auto& row : t.rows) out += csv_row(row);
  }
  if (!r.verdicts.empty()) {
    out += "\n# table: verdicts\n";
    out += csv_row({"verdict", "pass", "threshold", "observed"});
    for (const auto& v : r.verdicts) out += csv_row({v.name, v.pass ? "true" : "false", v.threshold, v.observed});
  }
  return out;
}

std::string to_json(const ExperimentResult& r) {
  nlohmann::ordered_json j;
  j["experiment"] = r.id;
  j["title"] = r.title;
  j["label"] = r.exploratory ? "exploratory" : "reproduction";
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.metadata) meta[k] = v;
  j["metadata"] = meta;
  j["tables"] = nlohmann::ordered_json::array();
  for (const auto& t : r.tables) {
    j["tables"].push_back({{"name", t.name}, {"columns", t.columns}, {"rows", t.rows}});
  }
  j["verdicts"] = nlohmann::ordered_json::array();
  for (const auto& v : r.verdicts) {
    j["verdicts"].push_back(
        {{"verdict", v.name}, {"pass", v.pass}, {"threshold", v.threshold}, {"observed", v.observed}});
  }
  return j.dump(2) + "\n";
}

ExperimentResult from_json(std::string_view text) {
  const auto j = nlohmann::ordered_json::parse(text);
  ExperimentResult r;
  r.id = j.at("experiment").get<std::string>();
  r.title = j.at("title").get<std::string>();
  r.exploratory = j.at("label").get<std::string>() == "exploratory";
  for (const auto& [k, v] : j.at("metadata").items()) r.metadata.emplace_back(k, v.get<std::string>());
  for (const auto& t : j.at("tables")) {
    r.tables.push_back({t.at("name").get<std::string>(), t.at("columns").get<std::vector<std::string>>(),
                        t.at("rows").get<std::vector<std::vector<std::string>>>()});
  }
  for (const auto& v : j.at("verdicts")) {
    r.verdicts.push_back({v.at("verdict").get<std::string>(), v.at("pass").get<bool>(),
                          v.at("threshold").get<std::string>(), v.at("observed").get<std::string>()});
  }
  return r;
}

void emit(const ExperimentResult& result, OutputFormat format, const std::string& path) {
  const std::string text = format == OutputFormat::csv ? to_csv(result) : to_json(result);
  if (path.empty()) {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw IoError("failed writing to stdout");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open output file " + path);
  out << text;
  out.close();
  if (!out) throw IoError("failed writing output file " + path);
}

}  // namespace hatlab
