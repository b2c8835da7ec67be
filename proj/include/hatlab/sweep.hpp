#pragma once

// Grid sweeps: the same per-point computation run over many t, either in
// order on one thread or spread across OpenMP threads. Results land in
// per-point slots, so both paths give identical, ordered output.

#include "hatlab/diagnostics.hpp"
#include "hatlab/execution.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hatlab {

template <class T>
struct PointOutcome {
  std::optional<T> value;
  /// what() of the exception thrown at this point, empty on success.
  std::string error;
  bool numeric_error = false;
};

/// Calls body(i) for i in [0, count). Exceptions must not escape body.
void for_each_point(std::size_t count, Execution execution, const std::function<void(std::size_t)>& body);

template <class T, class F>
std::vector<PointOutcome<T>> sweep(std::size_t count, Execution execution, F&& compute) {
  std::vector<PointOutcome<T>> out(count);
  for_each_point(count, execution, [&](std::size_t i) {
    try {
      out[i].value.emplace(compute(i));
    } catch (const NumericError& e) {
      out[i].error = e.what();
      out[i].numeric_error = true;
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  });
  return out;
}

std::vector<PointOutcome<HatRun>> sweep_hat_runs(const FunctionSpec& spec, const std::vector<Scalar>& grid,
                                                 int order, const PrecisionContext& ctx,
                                                 const SeriesOptions& options, Execution execution);

std::vector<PointOutcome<RadiusEstimate>> sweep_radius(const FunctionSpec& spec, const std::vector<Scalar>& grid,
                                                       int order, const PrecisionContext& ctx,
                                                       const SeriesOptions& options, Execution execution);

std::vector<PointOutcome<Classification>> sweep_classify(const FunctionSpec& spec,
                                                         const std::vector<Scalar>& grid, int order,
                                                         double delta, const PrecisionContext& ctx,
                                                         const SeriesOptions& options, Execution execution);

/// Per-point radius estimates plus the grid aggregates; failed points are
/// excluded and keep their error text.
struct GridRadiusReport {
  std::vector<PointOutcome<RadiusEstimate>> points;
  GridRadiusSummary summary;
};

GridRadiusReport grid_radius_summary(const FunctionSpec& spec, const std::vector<Scalar>& grid, int order,
                                     const PrecisionContext& ctx, const SeriesOptions& options = {},
                                     Execution execution = Execution::parallel);

}  // namespace hatlab
