#include "hatlab/sweep.hpp"

#include <stdexcept>

namespace hatlab {

void for_each_point(std::size_t count, Execution execution, const std::function<void(std::size_t)>& body) {
  if (execution == Execution::serial) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  const long n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) body(static_cast<std::size_t>(i));
}

namespace {

SeriesOptions inner_options(SeriesOptions options, Execution execution) {
  // Inner kernels stay serial while the sweep itself is parallel.
  if (execution == Execution::parallel) options.execution = Execution::serial;
  return options;
}

}  // namespace

std::vector<PointOutcome<HatRun>> sweep_hat_runs(const FunctionSpec& spec, const std::vector<Scalar>& grid,
                                                 int order, const PrecisionContext& ctx,
                                                 const SeriesOptions& options, Execution execution) {
  const SeriesOptions inner = inner_options(options, execution);
  return sweep<HatRun>(grid.size(), execution,
                       [&](std::size_t i) { return hat_run(spec, grid[i], order, ctx, inner); });
}

std::vector<PointOutcome<RadiusEstimate>> sweep_radius(const FunctionSpec& spec, const std::vector<Scalar>& grid,
                                                       int order, const PrecisionContext& ctx,
                                                       const SeriesOptions& options, Execution execution) {
  const SeriesOptions inner = inner_options(options, execution);
  return sweep<RadiusEstimate>(grid.size(), execution,
                               [&](std::size_t i) { return radius_estimate(spec, grid[i], order, ctx, inner); });
}

std::vector<PointOutcome<Classification>> sweep_classify(const FunctionSpec& spec,
                                                         const std::vector<Scalar>& grid, int order,
                                                         double delta, const PrecisionContext& ctx,
                                                         const SeriesOptions& options, Execution execution) {
  const SeriesOptions inner = inner_options(options, execution);
  return sweep<Classification>(grid.size(), execution, [&](std::size_t i) {
    return classify_point(spec, grid[i], order, delta, ctx, inner);
  });
}

GridRadiusReport grid_radius_summary(const FunctionSpec& spec, const std::vector<Scalar>& grid, int order,
                                     const PrecisionContext& ctx, const SeriesOptions& options,
                                     Execution execution) {
  if (grid.empty()) throw std::invalid_argument("grid radius summary needs a non-empty grid");
  GridRadiusReport report;
  report.points = sweep_radius(spec, grid, order, ctx, options, execution);
  std::vector<std::optional<RadiusEstimate>> estimates;
  estimates.reserve(report.points.size());
  for (const auto& p : report.points) estimates.push_back(p.value);
  report.summary = grid_radius_summary(estimates, ctx.working_bits());
  return report;
}

}  // namespace hatlab
