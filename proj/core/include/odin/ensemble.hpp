#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace odin {

enum class EstimatorKind { odin1, odin2, plugin_baseline };

std::string to_string(EstimatorKind kind);

//! One bias term's dependence on the bandwidth parameter and the sample
//! size: psi(l) = l^psi_exponent and phi(N) = N^(-rate_exponent).
struct BasisEntry
{
  std::string label;
  double psi_exponent = 0.0;
  double rate_exponent = 0.0;
};

//! The family of bias basis functions an ensemble's weights must cancel,
//! together with the estimator's bandwidth rule h(l) = l * N^(-bandwidth_exponent).
struct BasisSet
{
  EstimatorKind kind = EstimatorKind::odin1;
  int d = 1;
  std::vector<BasisEntry> entries;
  double bandwidth_exponent = 0.0;

  std::size_t size() const { return entries.size(); }
  double psi(std::size_t i, double l) const;
  //! The constraint scale sqrt(N) * phi_i(N) multiplying |gamma_w(i)|.
  double scale(std::size_t i, std::size_t n) const;
  double bandwidth(double l, std::size_t n) const;
};

//! Basis for the first ensemble estimator (bandwidth rule l * N^(-1/(2d))):
//! psi_i(l) = l^i with phi_i(N) = N^(-i/(2d)) for i = 1..d, plus the
//! variance-control entry psi(l) = l^(-d) with phi(N) = N^(-1/2).
BasisSet odin1_basis(int d);

//! Basis for the second ensemble estimator (bandwidth rule l * N^(-1/(d+1))):
//! entries enumerate the pairs (j, q) with 0 < j+q < (d+1)/2, q in
//! {0..lambda/2}, j in {0..s_cap}, giving psi(l) = l^(j-dq) and
//! phi(N) = N^(-(j+q)/(d+1)). lambda must be an even integer >= d+1; pass
//! lambda = 0 for the default (d+1 rounded up to even). s_cap < 0 means
//! unbounded smoothness. d = 1 yields an empty basis (no such pairs exist).
//! Throws std::invalid_argument when lambda < d+1 or lambda is odd.
BasisSet odin2_basis(int d, int lambda = 0, int s_cap = -1);

//! Output of either weight solver. weights aligns with the l grid it was
//! solved against. residuals are the raw |gamma_w(i)| = |sum_l w(l) psi_i(l)|;
//! scaled_residuals multiply in sqrt(N) * phi_i(N) (relaxed solver only;
//! equal to residuals for the exact solver, whose epsilon is 0).
struct WeightSolution
{
  std::vector<double> weights;
  double epsilon = 0.0;
  double norm_sq = 0.0;
  double eta = 0.0;
  std::int64_t iterations = 0;
  std::vector<double> residuals;
  std::vector<double> scaled_residuals;
};

//! Minimum-l2-norm weights satisfying sum(w) = 1 and gamma_w(i) = 0 for
//! every basis entry, via the KKT normal equations w = A^T (A A^T)^{-1} b.
//! Requires |l_values| > |basis| and distinct l values. Throws
//! std::invalid_argument on size violations and std::runtime_error naming
//! the first dependent constraint row when A A^T is numerically singular.
WeightSolution solve_weights_exact(const std::vector<double>& l_values,
                                   const BasisSet& basis);

//! Relaxed weights: minimize epsilon subject to sum(w) = 1,
//! |gamma_w(i)| * sqrt(N) * phi_i(N) <= epsilon for every entry, and
//! ||w||^2 <= eta. Solved by bisection on epsilon with feasibility decided
//! by Dykstra's alternating projections (hyperplane, per-constraint slabs,
//! l2 ball), each projection closed-form. Deterministic and single-threaded.
//! Throws std::invalid_argument when eta < 1/L (infeasible with sum(w) = 1
//! by Cauchy-Schwarz) and std::runtime_error on nonconvergence.
WeightSolution solve_weights_relaxed(const std::vector<double>& l_values,
                                     const BasisSet& basis,
                                     std::size_t n,
                                     double eta);

//! The eta = epsilon policy: solve once with a loose eta = 10 to learn the
//! achievable epsilon, then re-solve with eta set to it (clamped up to the
//! 1/L feasibility floor). Returns the second solution.
WeightSolution solve_weights_auto_eta(const std::vector<double>& l_values,
                                      const BasisSet& basis,
                                      std::size_t n);

//! Total number of relaxed/exact solves performed by this process; lets
//! tests assert that experiment cells reuse one solution across trials.
std::int64_t solver_invocations();

}  // namespace odin
