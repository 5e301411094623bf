#include <benchmark/benchmark.h>

#include "odin/distributions.hpp"
#include "odin/ensemble.hpp"
#include "odin/estimators.hpp"
#include "odin/functionals.hpp"
#include "odin/kernel.hpp"

namespace {

odin::SampleSet draw(int d, std::size_t n, double mu, std::uint64_t seed)
{
  return odin::tg_sample(odin::TruncatedGaussianSpec::uniform(static_cast<std::size_t>(d), mu, 0.1),
                         n, seed);
}

void BM_DistanceCache(benchmark::State& state)
{
  const int d = 4;
  const auto n = static_cast<std::size_t>(state.range(0));
  const odin::SampleSet s1 = draw(d, n, 0.7, 11);
  const odin::SampleSet s2 = draw(d, n, 0.3, 12);
  for (auto _ : state) {
    odin::DistanceCache cache = odin::pairwise_chebyshev(s2, s1);
    benchmark::DoNotOptimize(cache.max_row_min());
  }
}
BENCHMARK(BM_DistanceCache)->Arg(100)->Arg(560)->Arg(1330);

void BM_KdeEval(benchmark::State& state)
{
  const int d = 4;
  const auto n = static_cast<std::size_t>(state.range(0));
  const odin::SampleSet s1 = draw(d, n, 0.7, 11);
  const odin::SampleSet s2 = draw(d, n, 0.3, 12);
  const odin::DistanceCache cache = odin::pairwise_chebyshev(s2, s1);
  const odin::KernelSpec kernel;
  for (auto _ : state) {
    std::vector<double> values = odin::kde_eval(cache, 0.25, kernel, n);
    benchmark::DoNotOptimize(values.data());
  }
}
BENCHMARK(BM_KdeEval)->Arg(100)->Arg(560)->Arg(1330);

void BM_RelaxedWeights(benchmark::State& state)
{
  const int d = static_cast<int>(state.range(0));
  const odin::EnsembleConfig cfg{odin::EstimatorKind::odin1,
                                 odin::EnsembleConfig::default_l_values(odin::EstimatorKind::odin1),
                                 odin::EtaPolicy::automatic()};
  for (auto _ : state) {
    odin::WeightSolution w = odin::solve_config_weights(cfg, d, 1000);
    benchmark::DoNotOptimize(w.epsilon);
  }
}
BENCHMARK(BM_RelaxedWeights)->Arg(4)->Arg(7)->Arg(10);

void BM_EnsembleEstimate(benchmark::State& state)
{
  const int d = 4;
  const auto n = static_cast<std::size_t>(state.range(0));
  const odin::SampleSet s1 = draw(d, n, 0.7, 11);
  const odin::SampleSet s2 = draw(d, n, 0.3, 12);
  odin::EnsembleConfig cfg;
  cfg.kind = odin::EstimatorKind::odin1;
  cfg.l_values = odin::EnsembleConfig::default_l_values(cfg.kind);
  const odin::WeightSolution w = odin::solve_config_weights(cfg, d, n);
  const odin::DistanceCache cross = odin::pairwise_chebyshev(s2, s1);
  const odin::DistanceCache self = odin::pairwise_chebyshev(s2, s2, true);
  for (auto _ : state) {
    odin::EstimateResult r = odin::ensemble_estimate_cached(cross, self, cfg, w);
    benchmark::DoNotOptimize(r.value);
  }
}
BENCHMARK(BM_EnsembleEstimate)->Arg(100)->Arg(560)->Arg(1330);

}  // namespace

BENCHMARK_MAIN();
