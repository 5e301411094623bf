#include "odin/estimators.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace odin {

std::vector<double> EnsembleConfig::default_l_values(EstimatorKind kind, std::size_t L)
{
  if (L < 1) throw std::invalid_argument("default_l_values: L must be >= 1");
  const double lo = kind == EstimatorKind::odin1 ? 1.5 : 2.0;
  const double hi = 3.0;
  std::vector<double> ls(L);
  if (L == 1) {
    ls[0] = lo;
    return ls;
  }
  for (std::size_t k = 0; k < L; ++k)
    ls[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(L - 1);
  return ls;
}

namespace {

void check_config(const EnsembleConfig& config)
{
  if (config.l_values.empty()) throw std::invalid_argument("ensemble_estimate: empty l grid");
  for (std::size_t k = 0; k + 1 < config.l_values.size(); ++k)
    if (!(config.l_values[k] < config.l_values[k + 1]))
      throw std::invalid_argument("ensemble_estimate: l values must be strictly increasing");
  if (!(config.l_values.front() > 0.0))
    throw std::invalid_argument("ensemble_estimate: l values must be positive");
}

BasisSet config_basis(const EnsembleConfig& config, int d)
{
  switch (config.kind) {
    case EstimatorKind::odin1: return odin1_basis(d);
    case EstimatorKind::odin2: return odin2_basis(d, config.lambda, config.s_cap);
    case EstimatorKind::plugin_baseline: break;
  }
  throw std::invalid_argument("ensemble weights: the plug-in baseline has no basis to solve");
}

// The baseline sweeps the second estimator's bandwidth grid, so it shares
// that rule's exponent.
double bandwidth_exponent_for(const EnsembleConfig& config, int d)
{
  return config.kind == EstimatorKind::odin1 ? 1.0 / (2.0 * d) : 1.0 / (d + 1.0);
}

}  // namespace

WeightSolution solve_config_weights(const EnsembleConfig& config, int d, std::size_t n)
{
  check_config(config);
  const BasisSet basis = config_basis(config, d);
  if (config.eta.auto_mode) return solve_weights_auto_eta(config.l_values, basis, n);
  return solve_weights_relaxed(config.l_values, basis, n, config.eta.fixed_value);
}

EstimateResult ensemble_estimate_cached(const DistanceCache& cross,
                                        const DistanceCache& self,
                                        const EnsembleConfig& config,
                                        const WeightSolution& weights)
{
  check_config(config);
  if (weights.weights.size() != config.l_values.size())
    throw std::invalid_argument("ensemble_estimate: weights (" + std::to_string(weights.weights.size()) +
                                ") not aligned with l grid (" + std::to_string(config.l_values.size()) + ")");
  if (cross.evals() != cross.samples() || self.samples() != cross.samples())
    throw std::invalid_argument("ensemble_estimate: equal sample sizes required (N1 == N2)");

  const double bw_exponent = bandwidth_exponent_for(config, static_cast<int>(cross.dim()));
  const std::size_t n = cross.samples();
  const double n_factor = std::pow(static_cast<double>(n), -bw_exponent);

  EstimateResult out;
  out.n1 = n;
  out.n2 = n;
  out.per_l_values.reserve(config.l_values.size());
  out.per_l_clipped_num.reserve(config.l_values.size());
  out.per_l_clipped_den.reserve(config.l_values.size());

  double value = 0.0;
  for (std::size_t k = 0; k < config.l_values.size(); ++k) {
    const double h = config.l_values[k] * n_factor;
    const EstimateResult per_l = plugin_estimate_cached(cross, self, h, h, config.functional);
    if (!std::isfinite(per_l.value))
      throw std::runtime_error("ensemble_estimate: non-finite per-l estimate at l = " +
                               std::to_string(config.l_values[k]));
    out.per_l_values.push_back(per_l.value);
    out.per_l_clipped_num.push_back(per_l.clipped_num_count);
    out.per_l_clipped_den.push_back(per_l.clipped_den_count);
    out.clipped_num_count += per_l.clipped_num_count;
    out.clipped_den_count += per_l.clipped_den_count;
    value += weights.weights[k] * per_l.value;
    if (k == 0) {
      out.h1 = h;
      out.h2 = h;
    }
  }
  out.clipped_count = out.clipped_num_count + out.clipped_den_count;
  out.value = value;
  return out;
}

EstimateResult ensemble_estimate(const SampleSet& s1,
                                 const SampleSet& s2,
                                 const EnsembleConfig& config,
                                 const WeightSolution& weights)
{
  if (s1.dim() != s2.dim()) throw std::invalid_argument("ensemble_estimate: dimension mismatch");
  if (s1.n() != s2.n())
    throw std::invalid_argument("ensemble_estimate: equal sample sizes required, got N1 = " +
                                std::to_string(s1.n()) + ", N2 = " + std::to_string(s2.n()));
  const DistanceCache cross = pairwise_chebyshev(s2, s1, false);
  const DistanceCache self = pairwise_chebyshev(s2, s2, true);
  return ensemble_estimate_cached(cross, self, config, weights);
}

namespace {

EnsembleOutcome run_kind(const SampleSet& s1,
                         const SampleSet& s2,
                         EnsembleConfig config,
                         EstimatorKind kind)
{
  config.kind = kind;
  if (config.l_values.empty()) config.l_values = EnsembleConfig::default_l_values(kind);
  if (s1.dim() != s2.dim()) throw std::invalid_argument("ensemble estimator: dimension mismatch");
  EnsembleOutcome outcome;
  outcome.weights = solve_config_weights(config, static_cast<int>(s1.dim()), s2.n());
  outcome.estimate = ensemble_estimate(s1, s2, config, outcome.weights);
  return outcome;
}

}  // namespace

EnsembleOutcome odin1_estimate(const SampleSet& s1, const SampleSet& s2, EnsembleConfig config)
{
  return run_kind(s1, s2, std::move(config), EstimatorKind::odin1);
}

EnsembleOutcome odin2_estimate(const SampleSet& s1, const SampleSet& s2, EnsembleConfig config)
{
  return run_kind(s1, s2, std::move(config), EstimatorKind::odin2);
}

EstimateResult combined_estimate(const SampleSet& s1,
                                 const SampleSet& s2,
                                 const EnsembleConfig& cfg1,
                                 const EnsembleConfig& cfg2,
                                 double rho)
{
  if (!(rho >= 0.0 && rho <= 1.0))
    throw std::invalid_argument("combined_estimate: rho must lie in [0, 1], got " + std::to_string(rho));
  const EnsembleOutcome one = odin1_estimate(s1, s2, cfg1);
  const EnsembleOutcome two = odin2_estimate(s1, s2, cfg2);

  EstimateResult out;
  out.value = (1.0 - rho) * one.estimate.value + rho * two.estimate.value;
  out.h1 = one.estimate.h1;
  out.h2 = two.estimate.h2;
  out.n1 = one.estimate.n1;
  out.n2 = one.estimate.n2;
  out.clipped_num_count = one.estimate.clipped_num_count + two.estimate.clipped_num_count;
  out.clipped_den_count = one.estimate.clipped_den_count + two.estimate.clipped_den_count;
  out.clipped_count = out.clipped_num_count + out.clipped_den_count;
  return out;
}

}  // namespace odin
