#pragma once

#include <cstddef>
#include <vector>

#include "ensemble.hpp"
#include "functionals.hpp"
#include "kernel.hpp"
#include "sample_set.hpp"

namespace odin {

//! Eta policy for the relaxed weight solve: self-consistent eta = epsilon
//! ("auto") or a fixed value.
struct EtaPolicy
{
  bool auto_mode = true;
  double fixed_value = 0.0;

  static EtaPolicy automatic() { return EtaPolicy{true, 0.0}; }
  static EtaPolicy fixed(double v) { return EtaPolicy{false, v}; }
};

//! Configuration of one ensemble estimator: which basis/bandwidth rule,
//! the bandwidth-parameter grid, the eta policy, and the functional.
struct EnsembleConfig
{
  EstimatorKind kind = EstimatorKind::odin1;
  std::vector<double> l_values;
  EtaPolicy eta = EtaPolicy::automatic();
  FunctionalSpec functional = make_renyi(0.5);
  int lambda = 0;   // 0 = default (d+1 rounded up to even); odin2 only
  int s_cap = -1;   // < 0 = unbounded smoothness; odin2 only

  //! Default grids: 50 uniformly spaced values, 1.5..3 for the first
  //! estimator and 2..3 for the second.
  static std::vector<double> default_l_values(EstimatorKind kind, std::size_t L = 50);
};

//! Result of an ensemble estimate together with the weights it used.
struct EnsembleOutcome
{
  EstimateResult estimate;
  WeightSolution weights;
};

//! Weighted sum over the l grid of plug-in estimates at h(l):
//!   value = sum_l w(l) * plugin(s1, s2, h(l), h(l), g).
//! Requires s1.n == s2.n (the ensemble theory's equal-sample regime) and
//! weights aligned with config.l_values. The sum runs in fixed l order so
//! results are bit-identical regardless of caller threading. Per-l values
//! and clip diagnostics are reported in the result. Throws
//! std::invalid_argument on size mismatches, std::runtime_error naming l if
//! any per-l estimate is non-finite.
EstimateResult ensemble_estimate(const SampleSet& s1,
                                 const SampleSet& s2,
                                 const EnsembleConfig& config,
                                 const WeightSolution& weights);

//! Same against precomputed caches (cross: s2 vs s1; self: s2 vs s2,
//! diagonal excluded); d and n are taken from the caches.
EstimateResult ensemble_estimate_cached(const DistanceCache& cross,
                                        const DistanceCache& self,
                                        const EnsembleConfig& config,
                                        const WeightSolution& weights);

//! Solves the relaxed weights for this data size and basis per the config's
//! eta policy. Exposed separately so experiment cells can solve once and
//! reuse across trials.
WeightSolution solve_config_weights(const EnsembleConfig& config,
                                    int d,
                                    std::size_t n);

//! Convenience wrappers: build the matching basis for the sample dimension,
//! solve the relaxed weights, and delegate to ensemble_estimate.
EnsembleOutcome odin1_estimate(const SampleSet& s1,
                               const SampleSet& s2,
                               EnsembleConfig config);
EnsembleOutcome odin2_estimate(const SampleSet& s1,
                               const SampleSet& s2,
                               EnsembleConfig config);

//! Convex combination (1-rho) * first-estimator + rho * second-estimator
//! computed on the same sample pair. rho must lie in [0, 1].
EstimateResult combined_estimate(const SampleSet& s1,
                                 const SampleSet& s2,
                                 const EnsembleConfig& cfg1,
                                 const EnsembleConfig& cfg2,
                                 double rho);

}  // namespace odin
