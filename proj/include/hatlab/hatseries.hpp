#pragma once

// Terms, partial sums and identity checks for the hat transform
//   hf(t) = sum_n (-1)^n t^n f^(n)(t) / n!  =  sum_n (-t)^n c_n.

#include "hatlab/catalog.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hatlab {

struct HatRun {
  std::string function;
  Scalar t;
  int order = 0;
  PrecisionContext ctx{PrecisionContext::kMinBits, 0};
  std::vector<BigComplex> terms;
  std::vector<BigComplex> partials;
  double cancellation_bits = 0.0;
  /// Set when alternation consumed more than bits - 32 bits.
  bool precision_warning = false;
  std::optional<SeriesTruncation> truncation;

  const BigComplex& value() const { return partials.back(); }
};

/// (-1)^n t^n c_n for n <= jet.order(), t = jet center.
std::vector<BigComplex> hat_terms(const Jet& jet);
/// c_n (x - t)^n: the Taylor series of f at t evaluated at x.
std::vector<BigComplex> taylor_terms_at(const Jet& jet, const BigReal& x);

HatRun hat_run_from_jet(const Jet& jet, std::string function, const Scalar& t,
                        std::optional<SeriesTruncation> truncation = std::nullopt);
HatRun hat_run(const FunctionSpec& spec, const Scalar& t, int order, const PrecisionContext& ctx,
               const SeriesOptions& options = {});

/// S_N = (-1)^N t^N f^(N+1)(t) / N!, the derivative of the N-th partial sum.
struct TailTerm {
  int order = 0;
  BigComplex value;
};

TailTerm tail_term_from_jet(const Jet& jet, int order);
TailTerm tail_term(const FunctionSpec& spec, const Scalar& t, int order, const PrecisionContext& ctx,
                   const SeriesOptions& options = {});

/// f_{k,n}(t) = (-1)^n t^n f^(n+k)(t) / n!
struct FknValue {
  int k = 0;
  int n = 0;
  BigComplex value;
};

FknValue fkn_from_jet(const Jet& jet, int k, int n);

/// t + sign*h, exact when both carry compatible tags.
Scalar offset(const Scalar& t, const Scalar& h, int sign, mpfr_prec_t prec);

/// |central difference of H_N at t with step h - S_N(t)|.
BigReal telescoping_residual(const FunctionSpec& spec, const Scalar& t, int order, const Scalar& h,
                             const PrecisionContext& ctx, const SeriesOptions& options = {});

/// |central difference of f_{k-1,n} at t - (f_{k,n}(t) - f_{k,n-1}(t))|.
BigReal fkn_recurrence_check(const FunctionSpec& spec, const Scalar& t, int k, int n, const Scalar& h,
                             const PrecisionContext& ctx, const SeriesOptions& options = {});

struct ResidualStat {
  BigReal max_residual;
  /// Largest per-term residual in units of 2^-bits of that term's scale.
  double max_ulps = 0.0;
  int worst_n = 0;
};

struct AlgebraParams {
  Scalar lin_a;
  Scalar lin_b;
  Scalar scale;
};

struct AlgebraReport {
  ResidualStat linearity;
  ResidualStat product;
  ResidualStat scale;
};

/// Per-term residuals of the linearity, Cauchy-product and argument-scaling
/// identities at order N.
AlgebraReport algebra_checks(const FunctionSpec& f, const FunctionSpec& g, const AlgebraParams& params,
                             const Scalar& t, int order, const PrecisionContext& ctx,
                             const SeriesOptions& options = {});

/// Hat run of F(x) = int_0^x f for f in {cos, exp, poly}.
HatRun antiderivative_check(const FunctionSpec& f, const Scalar& x, int order, const PrecisionContext& ctx);

}  // namespace hatlab
