#pragma once

// Convergence diagnostics: root-test radius estimates, pointwise
// classification, the term-limit test and the uniform-bound report.

#include "hatlab/hatseries.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hatlab {

enum class Trend { increasing, decreasing, stable };
std::string to_string(Trend trend);

struct RadiusEstimate {
  BigReal t;
  int order = 0;
  int n_lo = 0;
  int n_hi = 0;
  /// log2 rho_n for n in [n_lo, n_hi]; -inf where c_n = 0.
  std::vector<double> log2_rho;
  /// 1 / max rho over the window, or +inf when the radius looks infinite.
  BigReal r_hat;
  bool infinite = false;
  Trend trend = Trend::stable;
  /// Least-squares slope of log rho_n against log n over the window.
  double slope = 0.0;
};

/// rho_n = |c_n|^(1/n) over n in [ceil(2N/3), N]. The radius is reported as
/// infinite when every window coefficient vanishes for a polynomial, or when
/// rho_n decays at least like n^(-1/2). Throws NumericError ("inconclusive
/// window") when the window is all zero for a non-polynomial.
RadiusEstimate radius_from_jet(const Jet& jet, bool polynomial);
RadiusEstimate radius_estimate(const FunctionSpec& spec, const Scalar& t, int order,
                               const PrecisionContext& ctx, const SeriesOptions& options = {});

enum class PointCase { diverges, converges_to_taylor_at_zero, boundary_indeterminate };
std::string to_string(PointCase c);

struct Classification {
  Scalar t;
  PointCase kind = PointCase::boundary_indeterminate;
  BigReal r_hat;
  bool r_infinite = false;
  BigReal abs_t;
  double delta = 0.1;
  std::string reason;
  /// H_N(t) for convergent points.
  std::optional<BigComplex> value;
};

/// R_hat < (1-delta)|t| diverges, R_hat > (1+delta)|t| converges, anything
/// between is indeterminate. t = 0 always converges to f(0).
Classification classify_point(const FunctionSpec& spec, const Scalar& t, int order, double delta,
                              const PrecisionContext& ctx, const SeriesOptions& options = {});

enum class TermLimit { fails, passes, inconclusive };
std::string to_string(TermLimit v);

struct NecessaryConditionResult {
  TermLimit verdict = TermLimit::inconclusive;
  int n_lo = 0;
  int n_hi = 0;
  /// log2|a_N| - log2|a_{n_lo}|.
  double growth_log2 = 0.0;
  double max_log2 = 0.0;
  std::string note;
};

/// Looks at |a_n| over the last third of the run. Passes when every magnitude
/// is below 2^(-bits/4); fails when the magnitudes never decrease and either
/// grew by 10^6 or started above that threshold. Needs order >= 12.
NecessaryConditionResult necessary_condition_test(const HatRun& run);

struct BoundReport {
  std::vector<Scalar> grid;
  int order = 0;
  /// log2 C_hat, log2 M_hat from the upper-lifted fit of log2|f^(n)| on n.
  double log2_c = 0.0;
  double log2_m = 0.0;
  BigReal c_hat;
  BigReal m_hat;
  BigReal ratio_sup;
  int ratio_exclusions = 0;
  BigReal dirichlet_sup;
  std::vector<TermLimit> term_limit;
};

BoundReport bound_report(const FunctionSpec& spec, const std::vector<Scalar>& grid, int order,
                         const PrecisionContext& ctx, const SeriesOptions& options = {});

struct GridRadiusSummary {
  /// max / min of 1/R_hat over points that produced an estimate.
  BigReal alpha_hat;
  BigReal beta_hat;
  /// 1/alpha_hat and 1/beta_hat (+inf for a zero denominator).
  BigReal r_lower;
  BigReal r_upper;
  int estimated = 0;
  int failed = 0;
};

GridRadiusSummary grid_radius_summary(const std::vector<std::optional<RadiusEstimate>>& estimates,
                                      mpfr_prec_t prec);

}  // namespace hatlab
