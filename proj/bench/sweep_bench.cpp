#include <cmath>
#include <numbers>

#include <benchmark/benchmark.h>

#include "sellab/bifurcation.hpp"
#include "sellab/radial.hpp"

using namespace sellab;

namespace {

// args: jobs (1 = serial reference), grid size
void BM_Sweep(benchmark::State& state) {
  const LEFProblem p = make_lef(LefMode::Linear, "t", "t^(-1/2)", 1);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  std::vector<double> grid;
  for (int i = 1; i <= state.range(1); ++i) grid.push_back(1.1 * pi2 * i / state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(sweep(p, grid, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_Sweep)->ArgsProduct({{1, 0}, {8, 32}})->Unit(benchmark::kMillisecond);

// args: jobs, number of n-levels
void BM_BoundaryBlowup(benchmark::State& state) {
  LogisticProblem p;
  p.b = expr::ScalarFn::parse("t^2", 0.0);
  p.f = analyze_nonlinearity("t^3");
  p.domain = DomainKind::Exterior;
  p.R0 = 0.0;
  p.R = 1.0;
  p.outer_value = std::sqrt(6.0);
  p.N = 1;
  BlowupOptions o;
  o.jobs = static_cast<int>(state.range(0));
  for (int j = 0; j < state.range(1); ++j) o.n_levels.push_back(10.0 * std::pow(4.0, j));
  for (auto _ : state) benchmark::DoNotOptimize(boundary_blowup(p, 1e-10, o));
}
BENCHMARK(BM_BoundaryBlowup)->ArgsProduct({{1, 0}, {6, 11}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
