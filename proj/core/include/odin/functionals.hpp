#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "kernel.hpp"
#include "sample_set.hpp"

namespace odin {

//! The scalar function g(x, y) applied to a pair of density values inside
//! the divergence integral  G(f1, f2) = E_{f2}[ g(f1(X), f2(X)) ].
//! Density arguments below clip_floor are raised to it before evaluating g;
//! callers receive the number of raised arguments as diagnostics.
struct FunctionalSpec
{
  enum class Kind { kl, renyi, constant_one };

  Kind kind = Kind::kl;
  std::string name = "kl";
  double alpha = 0.0;       // only meaningful for renyi
  bool lipschitz = true;    // on arguments bounded away from 0; required for CLT use
  double clip_floor = 1e-12;

  double evaluate(double x, double y) const;

  //! True when a clipped argument on this side can move g arbitrarily far
  //! (e.g. a clipped denominator of the ratio makes (x/y)^alpha explode).
  //! Drives the experiment runner's flagged-trial policy.
  bool clip_destroys_numerator() const { return kind == Kind::kl; }
  bool clip_destroys_denominator() const { return kind != Kind::constant_one; }
};

FunctionalSpec make_kl();
//! alpha outside (0,1) is admitted but untested territory; (0,1) is enforced
//! by g_renyi's precondition checks.
FunctionalSpec make_renyi(double alpha);
//! g == 1 regardless of arguments; useful to isolate the averaging step.
FunctionalSpec make_constant_one();

//! Parses the CLI/config spelling of a functional: "kl", "one", or
//! "renyi:alpha=<A>". Throws std::invalid_argument on anything else.
FunctionalSpec parse_functional(const std::string& text);

//! (x/y)^alpha for x, y > 0 and alpha in (0, 1).
//! Throws std::invalid_argument on nonpositive input or alpha outside (0,1).
double g_renyi(double x, double y, double alpha);

//! -ln(x/y) for x, y > 0, so that E_{f2}[g] = integral of f2*ln(f2/f1).
//! Throws std::invalid_argument on nonpositive input.
double g_kl(double x, double y);

//! Result of one plug-in evaluation (or of a weighted ensemble of them).
//! clipped_count = clipped_num_count + clipped_den_count splits by which
//! argument of g was raised to the floor: the numerator estimate (from s1)
//! or the denominator/leave-one-out estimate (from s2).
struct EstimateResult
{
  double value = 0.0;
  double h1 = 0.0;
  double h2 = 0.0;
  std::int64_t clipped_count = 0;
  std::int64_t clipped_num_count = 0;
  std::int64_t clipped_den_count = 0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;

  // Per-bandwidth diagnostics, populated by ensemble estimators only.
  std::vector<double> per_l_values;
  std::vector<std::int64_t> per_l_clipped_num;
  std::vector<std::int64_t> per_l_clipped_den;
};

//! The plug-in estimator: average over the points X_i of s2 of
//! g(f1_hat(X_i), f2_hat(X_i)), where f1_hat uses all of s1 at bandwidth h1
//! and f2_hat is the leave-one-out estimate from s2 at bandwidth h2 with
//! divisor N2-1. Requires N2 >= 2 and matching dimensions.
EstimateResult plugin_estimate(const SampleSet& s1,
                               const SampleSet& s2,
                               double h1,
                               double h2,
                               const FunctionalSpec& g);

//! Same computation against precomputed distance caches (cross: s2 evals vs
//! s1 samples; self: s2 vs s2 with the diagonal excluded), shared across
//! many bandwidths. Results are bit-identical to plugin_estimate.
EstimateResult plugin_estimate_cached(const DistanceCache& cross,
                                      const DistanceCache& self,
                                      double h1,
                                      double h2,
                                      const FunctionalSpec& g);

}  // namespace odin
