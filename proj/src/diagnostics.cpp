#include "hatlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hatlab {

namespace {

constexpr double kTrendThreshold = 0.1;
constexpr double kInfiniteSlope = -0.5;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Fit {
  double slope = 0.0;
  double intercept = 0.0;
  int points = 0;
};

Fit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
  Fit fit;
  fit.points = static_cast<int>(xs.size());
  if (xs.empty()) return fit;
  double mx = 0, my = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(xs.size());
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  fit.slope = sxx > 0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

}  // namespace

std::string to_string(Trend trend) {
  switch (trend) {
    case Trend::increasing: return "increasing";
    case Trend::decreasing: return "decreasing";
    case Trend::stable: return "stable";
  }
  return "stable";
}

std::string to_string(PointCase c) {
  switch (c) {
    case PointCase::diverges: return "diverges";
    case PointCase::converges_to_taylor_at_zero: return "converges_to_taylor_at_zero";
    case PointCase::boundary_indeterminate: return "boundary_indeterminate";
  }
  return "boundary_indeterminate";
}

std::string to_string(TermLimit v) {
  switch (v) {
    case TermLimit::fails: return "fails";
    case TermLimit::passes: return "passes";
    case TermLimit::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

// ---------------------------------------------------------------- radius

RadiusEstimate radius_from_jet(const Jet& jet, bool polynomial) {
  const int order = jet.order();
  if (order < 12) throw std::invalid_argument("radius estimate needs order >= 12");
  const mpfr_prec_t prec = jet.precision();

  RadiusEstimate est;
  est.t = jet.center();
  est.order = order;
  est.n_lo = (2 * order + 2) / 3;
  est.n_hi = order;

  std::vector<double> xs, ys;
  int best = -1;
  double best_log = kNegInf;
  for (int n = est.n_lo; n <= est.n_hi; ++n) {
    const BigReal mag = abs(jet[n]);
    const double l = mag.is_zero() ? kNegInf : mag.log2_abs() / n;
    est.log2_rho.push_back(l);
    if (l == kNegInf) continue;
    xs.push_back(std::log2(static_cast<double>(n)));
    ys.push_back(l);
    if (best < 0 || l > best_log) {
      best = n;
      best_log = l;
    }
  }

  if (best < 0) {
    if (!polynomial) throw NumericError("inconclusive window: every coefficient in the window is zero");
    est.infinite = true;
    est.r_hat = BigReal::infinity(prec);
    est.trend = Trend::decreasing;
    est.slope = kNegInf;
    return est;
  }

  const Fit fit = least_squares(xs, ys);
  est.slope = fit.slope;
  est.trend = fit.slope > kTrendThreshold    ? Trend::increasing
              : fit.slope < -kTrendThreshold ? Trend::decreasing
                                             : Trend::stable;
  est.infinite = fit.points >= 3 && fit.slope <= kInfiniteSlope;
  if (est.infinite) {
    est.r_hat = BigReal::infinity(prec);
  } else {
    // |c_n|^(-1/n) at the window maximum of rho
    const BigReal mag = abs(jet[best]);
    est.r_hat = exp(-(log(mag) / BigReal(best, prec)));
  }
  return est;
}

RadiusEstimate radius_estimate(const FunctionSpec& spec, const Scalar& t, int order,
                               const PrecisionContext& ctx, const SeriesOptions& options) {
  return radius_from_jet(jet_of(spec, t, order, ctx, options).jet, is_polynomial(spec));
}

// -------------------------------------------------------- classification

Classification classify_point(const FunctionSpec& spec, const Scalar& t, int order, double delta,
                              const PrecisionContext& ctx, const SeriesOptions& options) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  const mpfr_prec_t prec = ctx.working_bits();
  Classification out;
  out.t = t;
  out.delta = delta;
  out.abs_t = abs(t.at(prec));
  out.r_hat = BigReal::infinity(prec);

  if (t.is_zero()) {
    out.kind = PointCase::converges_to_taylor_at_zero;
    out.r_infinite = true;
    out.reason = "t = 0: every term after the first vanishes";
    out.value = value_at_zero(spec, ctx);
    return out;
  }

  CatalogJet cj = jet_of(spec, t, order, ctx, options);
  RadiusEstimate est;
  try {
    est = radius_from_jet(cj.jet, is_polynomial(spec));
  } catch (const NumericError& e) {
    out.kind = PointCase::boundary_indeterminate;
    out.reason = e.what();
    return out;
  }
  out.r_hat = est.r_hat;
  out.r_infinite = est.infinite;

  const BigReal lower = BigReal::from_double(1.0 - delta, prec) * out.abs_t;
  const BigReal upper = BigReal::from_double(1.0 + delta, prec) * out.abs_t;
  if (!est.infinite && est.r_hat < lower) {
    out.kind = PointCase::diverges;
    out.reason = "R_hat below (1-delta)|t|";
  } else if (est.infinite || est.r_hat > upper) {
    out.kind = PointCase::converges_to_taylor_at_zero;
    out.reason = est.infinite ? "radius effectively infinite" : "R_hat above (1+delta)|t|";
    out.value = hat_run_from_jet(cj.jet, to_string(spec), t).value();
  } else {
    out.kind = PointCase::boundary_indeterminate;
    out.reason = "R_hat within delta of |t|";
  }
  return out;
}

// -------------------------------------------------------------- term limit

NecessaryConditionResult necessary_condition_test(const HatRun& run) {
  if (run.order < 12) throw std::invalid_argument("term-limit test needs order >= 12");
  NecessaryConditionResult out;
  out.n_lo = (2 * run.order + 2) / 3;
  out.n_hi = run.order;

  std::vector<double> mags;
  for (int n = out.n_lo; n <= out.n_hi; ++n) {
    const BigReal m = abs(run.terms[static_cast<size_t>(n)]);
    mags.push_back(m.is_zero() ? kNegInf : m.log2_abs());
  }
  out.max_log2 = *std::max_element(mags.begin(), mags.end());
  const double pass_threshold = -static_cast<double>(run.ctx.bits()) / 4.0;
  if (out.max_log2 <= pass_threshold) {
    out.verdict = TermLimit::passes;
    out.note = "terms below 2^(-bits/4) across the window";
    return out;
  }

  bool nondecreasing = true;
  for (size_t i = 1; i < mags.size(); ++i) {
    const double slack = 1e-12 * std::max(1.0, std::fabs(mags[i - 1]));
    if (mags[i] == kNegInf || mags[i] < mags[i - 1] - slack) {
      nondecreasing = false;
      break;
    }
  }
  out.growth_log2 = mags.front() == kNegInf ? 0.0 : mags.back() - mags.front();
  const bool grew = out.growth_log2 >= std::log2(1e6);
  const bool started_large = mags.front() > pass_threshold;
  if (nondecreasing && (grew || started_large)) {
    out.verdict = TermLimit::fails;
    out.note = std::fabs(out.growth_log2) < 1e-9 ? "term magnitudes constant; partial sums keep oscillating"
                                                 : "term magnitudes nondecreasing";
  } else {
    out.verdict = TermLimit::inconclusive;
    out.note = "terms neither small nor steadily growing";
  }
  return out;
}

// ------------------------------------------------------------ bound report

BoundReport bound_report(const FunctionSpec& spec, const std::vector<Scalar>& grid, int order,
                         const PrecisionContext& ctx, const SeriesOptions& options) {
  if (grid.empty()) throw std::invalid_argument("bound report needs a non-empty grid");
  if (order < 4) throw std::invalid_argument("bound report needs order >= 4");
  const mpfr_prec_t prec = ctx.working_bits();
  BoundReport report;
  report.grid = grid;
  report.order = order;
  report.ratio_sup = BigReal(prec);
  report.dirichlet_sup = BigReal(prec);

  std::vector<double> xs, ys;
  const BigReal exclusion_scale = exp2(-static_cast<double>(ctx.bits()) / 2.0, prec);
  for (const Scalar& t : grid) {
    const Jet jet = jet_of(spec, t, order, ctx, options).jet;
    std::vector<BigReal> mags;
    BigReal largest(prec);
    BigComplex alternating(prec);
    for (int n = 0; n <= order; ++n) {
      const BigComplex d = jet.derivative(n);
      mags.push_back(abs(d));
      largest = max(largest, mags.back());
      if (!mags.back().is_zero()) {
        xs.push_back(n);
        ys.push_back(mags.back().log2_abs());
      }
      alternating += n % 2 == 0 ? d : -d;
      report.dirichlet_sup = max(report.dirichlet_sup, abs(alternating));
    }
    const BigReal floor_mag = exclusion_scale * largest;
    for (int n = 0; n < order; ++n) {
      const BigReal& m = mags[static_cast<size_t>(n)];
      if (m.is_zero() || m < floor_mag) {
        ++report.ratio_exclusions;
        continue;
      }
      report.ratio_sup = max(report.ratio_sup, mags[static_cast<size_t>(n) + 1] / m);
    }
    report.term_limit.push_back(order >= 12
                                    ? necessary_condition_test(hat_run_from_jet(jet, to_string(spec), t)).verdict
                                    : TermLimit::inconclusive);
  }

  const Fit fit = least_squares(xs, ys);
  report.log2_m = fit.slope;
  report.log2_c = kNegInf;
  for (size_t i = 0; i < xs.size(); ++i) report.log2_c = std::max(report.log2_c, ys[i] - fit.slope * xs[i]);
  report.c_hat = report.log2_c == kNegInf ? BigReal(prec) : exp2(report.log2_c, prec);
  report.m_hat = exp2(report.log2_m, prec);
  return report;
}

GridRadiusSummary grid_radius_summary(const std::vector<std::optional<RadiusEstimate>>& estimates,
                                      mpfr_prec_t prec) {
  GridRadiusSummary out;
  bool first = true;
  for (const auto& est : estimates) {
    if (!est) {
      ++out.failed;
      continue;
    }
    ++out.estimated;
    const BigReal inv = est->infinite ? BigReal(prec) : BigReal(1, prec) / est->r_hat;
    if (first) {
      out.alpha_hat = inv;
      out.beta_hat = inv;
      first = false;
    } else {
      out.alpha_hat = max(out.alpha_hat, inv);
      if (inv < out.beta_hat) out.beta_hat = inv;
    }
  }
  if (first) {
    out.alpha_hat = BigReal(prec);
    out.beta_hat = BigReal(prec);
    mpfr_set_nan(out.alpha_hat.get());
    mpfr_set_nan(out.beta_hat.get());
  }
  const auto invert = [prec](const BigReal& x) {
    if (x.is_nan()) return x;
    return x.is_zero() ? BigReal::infinity(prec) : BigReal(1, prec) / x;
  };
  out.r_lower = invert(out.alpha_hat);
  out.r_upper = invert(out.beta_hat);
  return out;
}

}  // namespace hatlab
