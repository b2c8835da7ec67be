#pragma once

// Named test functions and their jet generators, including the smooth
// nowhere-analytic series constructions and the two lacunary series.

#include "hatlab/execution.hpp"
#include "hatlab/jet.hpp"
#include "hatlab/numerics.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace hatlab {

enum class AnalyticKind { exp, sin, cos, poly };

struct Analytic {
  AnalyticKind kind = AnalyticKind::exp;
  std::vector<ExactValue> coefficients;  // poly only, c0 first
};

/// f(t) = 1/(1+t)
struct RationalOnePlus {};

/// f(t) = exp(-1/t^s), f(0) = 0
struct FlatExp {
  int s = 2;
};

enum class BumpWeights { inverse_factorial, double_exponential };
enum class BumpKind { floor, sine };

/// The periodic bump u. floor: u(x) = b(frac(x/l)) with
/// b(y) = exp(-1/y^s) exp(-1/(1-y)^s). sine: u(x) = exp(-1/sin(x)^2), where
/// l only labels the dyadic set.
struct BumpShape {
  BumpKind kind = BumpKind::floor;
  int s = 2;
  ExactValue period{1, false};
};

/// f(x) = sum_n a_n u(2^n x) with a_n = 1/n! or 2^(-2^n).
struct BumpSeries {
  BumpWeights weights = BumpWeights::inverse_factorial;
  BumpShape shape;
};

enum class LacunaryBase { two, half };

/// f(t) = sum_m e^(i w_m t)/m! with w_m = 2^m (m >= 0) or 2^-m (m >= 1).
struct Lacunary {
  LacunaryBase base = LacunaryBase::two;
};

using FunctionSpec = std::variant<Analytic, RationalOnePlus, FlatExp, BumpSeries, Lacunary>;

/// exp | sin | cos | poly:c0,c1,... | rational1p | flatexp:s=<1|2> |
/// bumpseries:a=<invfact|doubleexp>,s=<1|2>,l=<rational>,u=<floor|sin> |
/// lacunary:base=<2|half>
FunctionSpec parse_function_spec(std::string_view text);
std::string to_string(const FunctionSpec& spec);

bool is_polynomial(const FunctionSpec& spec);
bool is_real_valued(const FunctionSpec& spec);
/// True for specs built from elementary recurrences, which can be composed
/// with an arbitrary inner jet.
bool is_elementary(const FunctionSpec& spec);
/// f(0), exactly as the function defines it.
BigComplex value_at_zero(const FunctionSpec& spec, const PrecisionContext& ctx);

struct CatalogEntry {
  std::string grammar;
  std::string description;
};
std::vector<CatalogEntry> catalog_entries();

struct SeriesOptions {
  /// Outer terms allowed before giving up on a certified tail.
  long max_outer_terms = 1L << 16;
  /// Sum at least this many outer terms (used to audit certificates).
  long min_outer_terms = 0;
  int max_order = 128;
  int lacunary_max_order = 24;
  int bound_samples = 4096;
  double bound_safety = 4.0;
  Execution execution = Execution::parallel;
};

/// Certificate for an infinite outer sum cut after `outer_terms` terms.
struct SeriesTruncation {
  long outer_terms = 0;
  /// Largest relative majorant tail over all orders.
  BigReal tail_bound;
  BigReal target;
  /// Absolute bound on what the discarded terms contribute to each c_k.
  std::vector<BigReal> coefficient_tail;
  /// Tail identically zero (every discarded term sits on the integer branch).
  bool exact = false;
  double safety_factor = 1.0;
};

struct CatalogJet {
  Jet jet;
  std::optional<SeriesTruncation> truncation;
};

CatalogJet jet_of(const FunctionSpec& spec, const Scalar& t, int order, const PrecisionContext& ctx,
                  const SeriesOptions& options = {});

/// f o inner, for elementary specs only.
Jet apply_elementary(const FunctionSpec& spec, const Jet& inner);

/// Jet of the periodic bump u at x. Exactly zero on the integer branch;
/// untagged x too close to that branch throws NumericError.
Jet bump_jet(const BumpShape& shape, const Scalar& x, int order, const PrecisionContext& ctx);

/// Coarse bounds on |c_k(u)| for k <= order: dense sampling over one period
/// times a safety factor.
std::vector<BigReal> bump_coefficient_bounds(const BumpShape& shape, int order, int samples = 4096,
                                             double safety = 4.0,
                                             Execution execution = Execution::parallel);

std::pair<Jet, SeriesTruncation> series_family_jet(const BumpSeries& spec, const Scalar& t, int order,
                                                   const PrecisionContext& ctx,
                                                   const SeriesOptions& options = {});

/// Finite sum of terms n <= last_index, evaluated at unreduced points.
Jet series_family_partial_jet(const BumpSeries& spec, const Scalar& t, int order,
                              const PrecisionContext& ctx, long last_index);

std::pair<Jet, SeriesTruncation> lacunary_jet(LacunaryBase base, const Scalar& t, int order,
                                              const PrecisionContext& ctx,
                                              const SeriesOptions& options = {});

struct DyadicVerdict {
  bool dyadic = false;
  mpz_class m;
  long n = 0;
};

/// Is t = (2m+1) l / 2^n for integers m, n >= 0? Needs an exact t.
DyadicVerdict dyadic_check(const Scalar& t, const ExactValue& period);

}  // namespace hatlab
