#include <benchmark/benchmark.h>

#include "fairaudit/glm.hpp"
#include "fairaudit/inference.hpp"
#include "fairaudit/synth.hpp"

using namespace fairaudit;

namespace {

const AttributeMapping& mapping() {
  static const AttributeMapping m = AttributeMapping::defaults();
  return m;
}

SynthSpec bench_spec(size_t n, int protocols) {
  SynthSpec s;
  s.n_cases = n;
  s.seed = 1234;
  for (int i = 0; i < protocols; ++i) {
    s.protocols.push_back({"P" + std::to_string(i), 1.0 / protocols, 0.04 + 0.002 * i});
  }
  s.attributes[0].probs = {0.5, 0.5, 0.0, 0.0};
  s.attributes[1].probs = {0.45, 0.45, 0.03, 0.07};
  s.attributes[2].probs = {0.3, 0.2, 0.0, 0.5};
  s.attributes[3].probs = {0, 0, 0, 1};
  return s;
}

}  // namespace

static void IrlsFit(benchmark::State& state) {
  const auto n = static_cast<size_t>(state.range(0));
  const Cohort c =
      attribute_subcohort(generate_cohort(bench_spec(n, 27), mapping()).cohort, Attr::Sex);
  ModelSpec spec;
  spec.attribute = Attr::Sex;
  spec.covariates = {Attr::Age};
  const DesignMatrix d = build_design(c, spec, mapping());
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_logistic_irls(d));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(IrlsFit)->RangeMultiplier(2)->Range(1000, 8000)->Complexity();

static void MarginalStandardization(benchmark::State& state) {
  const Cohort c =
      attribute_subcohort(generate_cohort(bench_spec(4000, 27), mapping()).cohort, Attr::Sex);
  ModelSpec spec;
  spec.attribute = Attr::Sex;
  const DesignMatrix d = build_design(c, spec, mapping());
  const FitResult fit = fit_logistic_irls(d);
  for (auto _ : state) {
    benchmark::DoNotOptimize(marginal_standardization(fit, d));
  }
}
BENCHMARK(MarginalStandardization);

static void BootstrapAdjusted(benchmark::State& state) {
  const Cohort c = generate_cohort(bench_spec(2000, 2), mapping()).cohort;
  ModelSpec spec;
  spec.attribute = Attr::Sex;
  const BootstrapConfig cfg{100, 7, 0.05};
  for (auto _ : state) {
    benchmark::DoNotOptimize(bootstrap_adjusted_delta(c, spec, cfg, {}, mapping(), 1));
  }
}
BENCHMARK(BootstrapAdjusted);
