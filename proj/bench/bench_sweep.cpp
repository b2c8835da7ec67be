// Serial reference against the OpenMP sweep on the same grid. Both paths are
// checked for bit-identical output before timings are printed.

#include "hatlab/sweep.hpp"

#include <chrono>
#include <cstdio>
#include <string>

using namespace hatlab;

namespace {

template <class F>
double seconds(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool same(const std::vector<PointOutcome<RadiusEstimate>>& a, const std::vector<PointOutcome<RadiusEstimate>>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].value.has_value() != b[i].value.has_value() || a[i].error != b[i].error) return false;
    if (a[i].value && !identical(a[i].value->r_hat, b[i].value->r_hat)) return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  const int points = argc > 1 ? std::stoi(argv[1]) : 64;
  const int order = argc > 2 ? std::stoi(argv[2]) : 120;
  const PrecisionContext ctx = make_context(256, 32);
  const FunctionSpec spec = parse_function_spec("rational1p");
  std::vector<Scalar> grid;
  for (int i = 0; i < points; ++i) grid.push_back(Scalar::rational(mpq_class(i + 1, points) * 3 - mpq_class(9, 10), 288));

  std::vector<PointOutcome<RadiusEstimate>> serial, parallel;
  const double ts = seconds([&] { serial = sweep_radius(spec, grid, order, ctx, {}, Execution::serial); });
  const double tp = seconds([&] { parallel = sweep_radius(spec, grid, order, ctx, {}, Execution::parallel); });
  std::printf("radius sweep: %d points, order %d, %d threads\n", points, order, max_threads());
  std::printf("  serial   %.3f s\n  parallel %.3f s  (speedup %.2fx)\n", ts, tp, ts / tp);
  std::printf("  outputs identical: %s\n", same(serial, parallel) ? "yes" : "NO");

  const BumpShape shape;
  std::vector<BigReal> bs, bp;
  const double bts = seconds([&] { bs = bump_coefficient_bounds(shape, 12, 4096, 4.0, Execution::serial); });
  const double btp = seconds([&] { bp = bump_coefficient_bounds(shape, 12, 4096, 4.0, Execution::parallel); });
  bool bump_same = bs.size() == bp.size();
  for (size_t i = 0; bump_same && i < bs.size(); ++i) bump_same = identical(bs[i], bp[i]);
  std::printf("bump bound sampling: 4096 samples, order 12\n");
  std::printf("  serial   %.3f s\n  parallel %.3f s  (speedup %.2fx)\n", bts, btp, bts / btp);
  std::printf("  outputs identical: %s\n", bump_same ? "yes" : "NO");
  return same(serial, parallel) && bump_same ? 0 : 1;
}
