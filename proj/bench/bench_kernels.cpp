#include <benchmark/benchmark.h>

#include "monolab/cones.hpp"
#include "monolab/heat.hpp"
#include "monolab/monotone.hpp"

using namespace monolab;

namespace {

Exec policy(const benchmark::State& s) { return s.range(0) ? Exec::parallel : Exec::serial; }

const ManifoldModel& model() {
  static const ManifoldModel m = make_model(Profile::exp_cone(0.5), 4);
  return m;
}

const GreenData& green() {
  static const GreenData g = solve_green(model());
  return g;
}

void BM_solve_green(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(solve_green(model(), GreenOptions{}, policy(s)));
}

void BM_theorem_residuals(benchmark::State& s) {
  const auto grid = log_grid(0.1, 100.0, 100);
  for (auto _ : s) benchmark::DoNotOptimize(theorem_residuals(green(), grid, policy(s)));
}

void BM_theta_series(benchmark::State& s) {
  const auto grid = log_grid(1e-3, 1e5, 161);
  for (auto _ : s) benchmark::DoNotOptimize(theta_series(model(), grid, policy(s)));
}

void BM_entropy_series(benchmark::State& s) {
  HeatOptions o;
  o.t1 = 10.0;
  o.steps = 1000;
  static const HeatData h = solve_heat_kernel(make_model(Profile::exp_cone(0.5), 3), o);
  for (auto _ : s) benchmark::DoNotOptimize(entropy_series(h, policy(s)));
}

void BM_fund_ratios(benchmark::State& s) {
  const auto grid = log_grid(10.0, 1000.0, 41);
  for (auto _ : s) benchmark::DoNotOptimize(fund_ratio_report(green(), grid, 0.1, 2.0, 100.0, 1000.0, policy(s)));
}

}  // namespace

// Argument 0 is the serial reference, 1 the OpenMP path.
BENCHMARK(BM_solve_green)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_theorem_residuals)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_theta_series)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_entropy_series)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_fund_ratios)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
