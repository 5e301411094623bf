#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "odin/distributions.hpp"
#include "odin/estimators.hpp"
#include "odin/rng.hpp"

using namespace odin;

namespace {

SampleSet draw(std::size_t n, std::size_t d, double mu, std::uint64_t seed)
{
  return tg_sample(TruncatedGaussianSpec::uniform(d, mu, 0.1), n, seed);
}

WeightSolution one_hot(std::size_t size, std::size_t k)
{
  WeightSolution w;
  w.weights.assign(size, 0.0);
  w.weights[k] = 1.0;
  w.norm_sq = 1.0;
  return w;
}

EnsembleConfig small_config(EstimatorKind kind)
{
  EnsembleConfig cfg;
  cfg.kind = kind;
  cfg.l_values = {1.6, 2.0, 2.4, 2.8, 3.2};
  cfg.functional = make_renyi(0.5);
  return cfg;
}

}  // namespace

TEST_CASE("default bandwidth grids span the published ranges")
{
  const std::vector<double> g1 = EnsembleConfig::default_l_values(EstimatorKind::odin1);
  REQUIRE(g1.size() == 50);
  CHECK(g1.front() == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(g1.back() == doctest::Approx(3.0).epsilon(1e-15));

  const std::vector<double> g2 = EnsembleConfig::default_l_values(EstimatorKind::odin2, 10);
  REQUIRE(g2.size() == 10);
  CHECK(g2.front() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(g2.back() == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("one-hot weights reduce the ensemble to the plug-in estimator")
{
  const SampleSet s1 = draw(40, 2, 0.7, 11);
  const SampleSet s2 = draw(40, 2, 0.3, 12);
  EnsembleConfig cfg = small_config(EstimatorKind::odin1);
  const BasisSet basis = odin1_basis(2);

  for (std::size_t k = 0; k < cfg.l_values.size(); ++k) {
    const EstimateResult ens = ensemble_estimate(s1, s2, cfg, one_hot(cfg.l_values.size(), k));
    const double h = basis.bandwidth(cfg.l_values[k], s2.n());
    const EstimateResult plain = plugin_estimate(s1, s2, h, h, cfg.functional);
    CHECK(ens.value == plain.value);
    CHECK(ens.per_l_values[k] == plain.value);
    CHECK(ens.clipped_count == plain.clipped_count);
  }
}

TEST_CASE("ensemble estimates are linear in the weight vector")
{
  const SampleSet s1 = draw(35, 2, 0.7, 21);
  const SampleSet s2 = draw(35, 2, 0.3, 22);
  const EnsembleConfig cfg = small_config(EstimatorKind::odin1);
  const std::size_t L = cfg.l_values.size();

  WeightSolution wa, wb;
  Rng rng(5);
  wa.weights.resize(L);
  wb.weights.resize(L);
  for (std::size_t j = 0; j < L; ++j) {
    wa.weights[j] = rng.next_double() - 0.2;
    wb.weights[j] = rng.next_double() - 0.2;
  }

  const EstimateResult ra = ensemble_estimate(s1, s2, cfg, wa);
  const EstimateResult rb = ensemble_estimate(s1, s2, cfg, wb);
  WeightSolution mid;
  mid.weights.resize(L);
  for (std::size_t j = 0; j < L; ++j) mid.weights[j] = 0.5 * (wa.weights[j] + wb.weights[j]);
  const EstimateResult rm = ensemble_estimate(s1, s2, cfg, mid);
  CHECK(rm.value == doctest::Approx(0.5 * (ra.value + rb.value)).epsilon(1e-13));

  // One-hot decomposition: the weighted sum of per-l values reproduces the
  // ensemble value.
  double recomposed = 0.0;
  for (std::size_t j = 0; j < L; ++j) recomposed += wa.weights[j] * ra.per_l_values[j];
  CHECK(recomposed == doctest::Approx(ra.value).epsilon(1e-12));
}

TEST_CASE("cached and direct ensemble paths agree bit for bit")
{
  const SampleSet s1 = draw(30, 2, 0.7, 31);
  const SampleSet s2 = draw(30, 2, 0.3, 32);
  EnsembleConfig cfg = small_config(EstimatorKind::odin2);
  const WeightSolution w = solve_config_weights(cfg, 2, s2.n());

  const EstimateResult direct = ensemble_estimate(s1, s2, cfg, w);
  const DistanceCache cross = pairwise_chebyshev(s2, s1, false);
  const DistanceCache self = pairwise_chebyshev(s2, s2, true);
  const EstimateResult cached = ensemble_estimate_cached(cross, self, cfg, w);
  CHECK(direct.value == cached.value);
  CHECK(direct.clipped_count == cached.clipped_count);
  REQUIRE(direct.per_l_values.size() == cached.per_l_values.size());
  for (std::size_t j = 0; j < direct.per_l_values.size(); ++j)
    CHECK(direct.per_l_values[j] == cached.per_l_values[j]);
}

TEST_CASE("full estimator wrappers run end to end deterministically")
{
  const SampleSet s1 = draw(60, 3, 0.7, 41);
  const SampleSet s2 = draw(60, 3, 0.3, 42);
  EnsembleConfig cfg;
  cfg.l_values = EnsembleConfig::default_l_values(EstimatorKind::odin1, 20);
  cfg.functional = make_renyi(0.5);

  const EnsembleOutcome a = odin1_estimate(s1, s2, cfg);
  const EnsembleOutcome b = odin1_estimate(s1, s2, cfg);
  CHECK(a.estimate.value == b.estimate.value);
  CHECK(std::isfinite(a.estimate.value));
  CHECK(a.weights.norm_sq <= a.weights.eta + 1e-8);
  double sum = 0.0;
  for (double wi : a.weights.weights) sum += wi;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));

  EnsembleConfig cfg2 = cfg;
  cfg2.kind = EstimatorKind::odin2;
  cfg2.l_values = EnsembleConfig::default_l_values(EstimatorKind::odin2, 20);
  const EnsembleOutcome c = odin2_estimate(s1, s2, cfg2);
  CHECK(std::isfinite(c.estimate.value));
}

TEST_CASE("d=1 second-family ensembles fall back to uniform weights")
{
  const SampleSet s1 = draw(25, 1, 0.7, 51);
  const SampleSet s2 = draw(25, 1, 0.3, 52);
  EnsembleConfig cfg;
  cfg.kind = EstimatorKind::odin2;
  cfg.l_values = {2.0, 2.5, 3.0};
  cfg.functional = make_renyi(0.5);
  const EnsembleOutcome out = odin2_estimate(s1, s2, cfg);
  REQUIRE(out.weights.weights.size() == 3);
  for (double wi : out.weights.weights)
    CHECK(wi == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(out.weights.epsilon <= 1e-9);
}

TEST_CASE("combined estimator endpoints and midpoint")
{
  const SampleSet s1 = draw(40, 2, 0.7, 61);
  const SampleSet s2 = draw(40, 2, 0.3, 62);
  EnsembleConfig cfg1 = small_config(EstimatorKind::odin1);
  EnsembleConfig cfg2 = small_config(EstimatorKind::odin2);
  cfg2.kind = EstimatorKind::odin2;
  cfg2.l_values = {2.0, 2.4, 2.8, 3.2};

  const EnsembleOutcome o1 = odin1_estimate(s1, s2, cfg1);
  const EnsembleOutcome o2 = odin2_estimate(s1, s2, cfg2);

  CHECK(combined_estimate(s1, s2, cfg1, cfg2, 0.0).value == o1.estimate.value);
  CHECK(combined_estimate(s1, s2, cfg1, cfg2, 1.0).value == o2.estimate.value);
  CHECK(combined_estimate(s1, s2, cfg1, cfg2, 0.5).value ==
        doctest::Approx(0.5 * (o1.estimate.value + o2.estimate.value)).epsilon(1e-14));
  CHECK_THROWS_AS(combined_estimate(s1, s2, cfg1, cfg2, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(combined_estimate(s1, s2, cfg1, cfg2, 1.1), std::invalid_argument);
}

TEST_CASE("ensemble estimators reject unequal sample sizes")
{
  const SampleSet s1 = draw(30, 2, 0.7, 71);
  const SampleSet s2 = draw(25, 2, 0.3, 72);
  EnsembleConfig cfg = small_config(EstimatorKind::odin1);
  const WeightSolution w = one_hot(cfg.l_values.size(), 0);
  CHECK_THROWS_AS(ensemble_estimate(s1, s2, cfg, w), std::invalid_argument);

  // The raw plug-in path accepts the same pair.
  CHECK_NOTHROW(plugin_estimate(s1, s2, 0.5, 0.5, cfg.functional));
}

TEST_CASE("ensemble estimate validates weight alignment")
{
  const SampleSet s1 = draw(20, 2, 0.7, 81);
  const SampleSet s2 = draw(20, 2, 0.3, 82);
  const EnsembleConfig cfg = small_config(EstimatorKind::odin1);
  CHECK_THROWS_AS(ensemble_estimate(s1, s2, cfg, one_hot(cfg.l_values.size() + 1, 0)),
                  std::invalid_argument);
}

TEST_CASE("per-l clip diagnostics split by argument side")
{
  const SampleSet s1 = draw(30, 4, 0.9, 91);
  const SampleSet s2 = draw(30, 4, 0.1, 92);
  EnsembleConfig cfg;
  cfg.kind = EstimatorKind::odin1;
  cfg.l_values = {0.4, 0.8, 1.5, 3.0};
  cfg.functional = make_renyi(0.5);
  const WeightSolution w = one_hot(4, 0);
  const EstimateResult r = ensemble_estimate(s1, s2, cfg, w);
  REQUIRE(r.per_l_clipped_num.size() == 4);
  REQUIRE(r.per_l_clipped_den.size() == 4);
  std::int64_t num = 0, den = 0;
  for (std::size_t j = 0; j < 4; ++j) {
    num += r.per_l_clipped_num[j];
    den += r.per_l_clipped_den[j];
    if (j > 0) {
      CHECK(r.per_l_clipped_num[j] <= r.per_l_clipped_num[j - 1]);
      CHECK(r.per_l_clipped_den[j] <= r.per_l_clipped_den[j - 1]);
    }
  }
  CHECK(num == r.clipped_num_count);
  CHECK(den == r.clipped_den_count);
}
