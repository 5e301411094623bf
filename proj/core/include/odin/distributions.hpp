#pragma once

#include <cstdint>
#include <vector>

#include "functionals.hpp"
#include "sample_set.hpp"

namespace odin {

//! Multivariate Gaussian with diagonal covariance variance * I, truncated
//! and renormalized to the unit cube [0,1]^d. The density factorizes into
//! per-coordinate 1-D truncated normals.
struct TruncatedGaussianSpec
{
  std::vector<double> mean;  // d entries, each in [0, 1] for the cube setup
  double variance = 1.0;

  std::size_t dim() const { return mean.size(); }

  //! Spec with every coordinate mean equal to mu.
  static TruncatedGaussianSpec uniform(std::size_t d, double mu, double variance);
};

//! 1-D truncated-normal density on [0,1]: phi((x-mu)/sigma) / (sigma * Z)
//! with Z = Phi((1-mu)/sigma) - Phi((0-mu)/sigma); 0 outside [0,1].
double tg_pdf_1d(double mu, double sigma, double x);

//! Product density of the d per-coordinate truncated normals; 0 outside the
//! unit cube.
double tg_pdf(const TruncatedGaussianSpec& spec, const double* x);
double tg_pdf(const TruncatedGaussianSpec& spec, const std::vector<double>& x);

//! n i.i.d. draws via per-coordinate inverse-CDF on the seeded stream:
//! x = mu + sigma * Phi^{-1}(Phi(a) + u * (Phi(b) - Phi(a))). Deterministic
//! in the seed, constant cost per draw, every coordinate strictly inside
//! (0, 1).
SampleSet tg_sample(const TruncatedGaussianSpec& spec, std::size_t n, std::uint64_t seed);

//! Ground-truth divergence value with quadrature diagnostics.
struct OracleValue
{
  double value = 0.0;
  double achieved_tol = 0.0;
  std::vector<double> factors;  // per-dimension 1-D integral values
};

//! Exact divergence E_{f2}[g(f1, f2)] for two product truncated Gaussians
//! on the same cube, exploiting the factorization over coordinates:
//! the Renyi integrand is the product of per-dimension integrals of
//! f1^alpha f2^(1-alpha), and KL is the sum of per-dimension
//! integral of f2 ln(f2/f1). 1-D integrals use adaptive Simpson at tol.
//! Throws std::invalid_argument for mismatched dimensions or unsupported
//! functionals.
OracleValue true_divergence(const FunctionalSpec& g,
                            const TruncatedGaussianSpec& p,
                            const TruncatedGaussianSpec& q,
                            double tol = 1e-10);

}  // namespace odin
