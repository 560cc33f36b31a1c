#include <benchmark/benchmark.h>

#include <cmath>

#include "fairaudit/stats.hpp"

using namespace fairaudit;

static void UnadjustedPipeline(benchmark::State& state) {
  const ProportionSummary g0{"g0", 160, 2544};
  const ProportionSummary g1{"g1", 230, 3961};
  const ToleranceBand band;
  for (auto _ : state) {
    const ZTest t = two_prop_z(g0, g1);
    const Interval ci = wald_ci_diff(g0, g1, band.alpha);
    const IntervalVerdict v = band_verdict(ci, band);
    const double power = power_two_prop(g0.n, g1.n, 0.06, band);
    benchmark::DoNotOptimize(t);
    benchmark::DoNotOptimize(v);
    benchmark::DoNotOptimize(power);
  }
}
BENCHMARK(UnadjustedPipeline);

static void NormalQuantile(benchmark::State& state) {
  double p = 0.5;
  for (auto _ : state) {
    p = 0.5 + 0.49 * std::sin(p);
    benchmark::DoNotOptimize(normal_quantile(0.5 + p / 4.0));
  }
}
BENCHMARK(NormalQuantile);
