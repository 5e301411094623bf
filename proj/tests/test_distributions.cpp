#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "odin/distributions.hpp"
#include "odin/normal.hpp"
#include "odin/quadrature.hpp"

using namespace odin;

namespace {

double tg_cdf_1d(double mu, double sigma, double x)
{
  const double lo = normal_cdf((0.0 - mu) / sigma);
  const double hi = normal_cdf((1.0 - mu) / sigma);
  return (normal_cdf((x - mu) / sigma) - lo) / (hi - lo);
}

}  // namespace

TEST_CASE("1-d truncated normal density reference values")
{
  const double sigma = std::sqrt(0.1);
  CHECK(tg_pdf_1d(0.3, sigma, 0.5) == doctest::Approx(1.2670601407086322).epsilon(1e-14));
  CHECK(tg_pdf_1d(0.3, sigma, -0.01) == 0.0);
  CHECK(tg_pdf_1d(0.3, sigma, 1.01) == 0.0);

  // Direct error-function evaluation of the same quantity.
  const double z = normal_cdf((1.0 - 0.3) / sigma) - normal_cdf((0.0 - 0.3) / sigma);
  CHECK(tg_pdf_1d(0.3, sigma, 0.5) ==
        doctest::Approx(normal_pdf(0.2 / sigma) / (sigma * z)).epsilon(1e-14));
}

TEST_CASE("symmetric spec is mirror-symmetric about one half")
{
  const double sigma = 0.4;
  for (double t : {0.05, 0.17, 0.33, 0.49})
    CHECK(tg_pdf_1d(0.5, sigma, 0.5 - t) == tg_pdf_1d(0.5, sigma, 0.5 + t));
}

TEST_CASE("density normalizes to one and factorizes over coordinates")
{
  const double sigma = std::sqrt(0.1);
  const auto mass = adaptive_simpson([sigma](double x) { return tg_pdf_1d(0.3, sigma, x); }, 0.0,
                                     1.0, 1e-11);
  CHECK(mass.value == doctest::Approx(1.0).epsilon(1e-9));

  const TruncatedGaussianSpec spec = TruncatedGaussianSpec::uniform(3, 0.3, 0.1);
  const std::vector<double> x = {0.25, 0.5, 0.75};
  double product = 1.0;
  for (double xi : x) product *= tg_pdf_1d(0.3, sigma, xi);
  CHECK(tg_pdf(spec, x) == doctest::Approx(product).epsilon(1e-14));

  const std::vector<double> outside = {0.25, 1.5, 0.75};
  CHECK(tg_pdf(spec, outside) == 0.0);
}

TEST_CASE("spec validation rejects degenerate parameters")
{
  TruncatedGaussianSpec bad;
  bad.mean = {};
  bad.variance = 0.1;
  CHECK_THROWS_AS(tg_sample(bad, 5, 1), std::invalid_argument);

  CHECK_THROWS_AS(TruncatedGaussianSpec::uniform(2, 0.5, -1.0), std::invalid_argument);

  TruncatedGaussianSpec neg;
  neg.mean = {0.5, 0.5};
  neg.variance = -1.0;
  CHECK_THROWS_AS(tg_sample(neg, 5, 1), std::invalid_argument);
}

TEST_CASE("sampler is deterministic in the seed and stays inside the open cube")
{
  const TruncatedGaussianSpec spec = TruncatedGaussianSpec::uniform(3, 0.3, 0.1);
  const SampleSet a = tg_sample(spec, 200, 7);
  const SampleSet b = tg_sample(spec, 200, 7);
  const SampleSet c = tg_sample(spec, 200, 8);
  REQUIRE(a.n() == 200);
  REQUIRE(a.dim() == 3);
  bool all_equal = true;
  bool any_differ_from_c = false;
  for (std::size_t i = 0; i < a.n(); ++i)
    for (std::size_t k = 0; k < a.dim(); ++k) {
      if (a.at(i, k) != b.at(i, k)) all_equal = false;
      if (a.at(i, k) != c.at(i, k)) any_differ_from_c = true;
      CHECK(a.at(i, k) > 0.0);
      CHECK(a.at(i, k) < 1.0);
    }
  CHECK(all_equal);
  CHECK(any_differ_from_c);
}

TEST_CASE("sample mean matches the quadrature mean")
{
  const double mu = 0.3;
  const double sigma = std::sqrt(0.1);
  const auto mean_integral =
      adaptive_simpson([=](double x) { return x * tg_pdf_1d(mu, sigma, x); }, 0.0, 1.0, 1e-11);
  const auto second_moment =
      adaptive_simpson([=](double x) { return x * x * tg_pdf_1d(mu, sigma, x); }, 0.0, 1.0, 1e-11);
  const double true_sd = std::sqrt(second_moment.value - mean_integral.value * mean_integral.value);

  // Frozen reference: the quadrature mean of this spec.
  CHECK(mean_integral.value == doctest::Approx(0.3853240273478511).epsilon(1e-12));

  const std::size_t n = 100000;
  const SampleSet s = tg_sample(TruncatedGaussianSpec::uniform(1, mu, 0.1), n, 12345);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += s.at(i, 0);
  const double sample_mean = sum / static_cast<double>(n);
  const double se = true_sd / std::sqrt(static_cast<double>(n));
  CHECK(std::fabs(sample_mean - mean_integral.value) <= 4.0 * se);
}

TEST_CASE("per-coordinate empirical CDF passes a Kolmogorov-Smirnov check")
{
  const std::size_t n = 10000;
  const double mu = 0.3;
  const double sigma = std::sqrt(0.1);
  const TruncatedGaussianSpec spec = TruncatedGaussianSpec::uniform(2, mu, 0.1);
  const SampleSet s = tg_sample(spec, n, 424242);

  // 1% critical value for the one-sample KS statistic.
  const double critical = 1.6276 / std::sqrt(static_cast<double>(n));
  for (std::size_t k = 0; k < s.dim(); ++k) {
    std::vector<double> coord(n);
    for (std::size_t i = 0; i < n; ++i) coord[i] = s.at(i, k);
    std::sort(coord.begin(), coord.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = tg_cdf_1d(mu, sigma, coord[i]);
      const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
      const double lo = static_cast<double>(i) / static_cast<double>(n);
      ks = std::max(ks, std::max(std::fabs(hi - f), std::fabs(f - lo)));
    }
    CHECK(ks < critical);
  }
}

TEST_CASE("identical densities give the identity divergence values")
{
  const TruncatedGaussianSpec p = TruncatedGaussianSpec::uniform(4, 0.4, 0.2);
  const OracleValue kl = true_divergence(make_kl(), p, p);
  CHECK(std::fabs(kl.value) <= 1e-9);
  const OracleValue renyi = true_divergence(make_renyi(0.5), p, p);
  CHECK(std::fabs(renyi.value - 1.0) <= 1e-9);
}

TEST_CASE("frozen ground-truth divergence constants")
{
  const TruncatedGaussianSpec p4 = TruncatedGaussianSpec::uniform(4, 0.7, 0.1);
  const TruncatedGaussianSpec q4 = TruncatedGaussianSpec::uniform(4, 0.3, 0.1);
  const OracleValue renyi = true_divergence(make_renyi(0.5), p4, q4);
  CHECK(renyi.value == doctest::Approx(0.6274583129321792).epsilon(1e-9));
  CHECK(renyi.achieved_tol <= 1e-10);
  REQUIRE(renyi.factors.size() == 4);
  for (double f : renyi.factors)
    CHECK(f == doctest::Approx(0.8900127318228811).epsilon(1e-10));

  TruncatedGaussianSpec p6 = TruncatedGaussianSpec::uniform(6, 0.7, 0.1);
  TruncatedGaussianSpec q6 = TruncatedGaussianSpec::uniform(6, 0.3, 0.3);
  const OracleValue kl = true_divergence(make_kl(), p6, q6);
  CHECK(kl.value == doctest::Approx(1.5702413886476343).epsilon(1e-9));
}

TEST_CASE("divergence factorizes over dimensions")
{
  const FunctionalSpec renyi = make_renyi(0.5);
  const OracleValue one_dim = true_divergence(renyi,
                                              TruncatedGaussianSpec::uniform(1, 0.7, 0.1),
                                              TruncatedGaussianSpec::uniform(1, 0.3, 0.1));
  for (int d : {2, 3, 5}) {
    const OracleValue nd = true_divergence(renyi,
                                           TruncatedGaussianSpec::uniform(d, 0.7, 0.1),
                                           TruncatedGaussianSpec::uniform(d, 0.3, 0.1));
    CHECK(nd.value == doctest::Approx(std::pow(one_dim.value, d)).epsilon(1e-9));
  }

  const FunctionalSpec kl = make_kl();
  const OracleValue kl1 = true_divergence(kl,
                                          TruncatedGaussianSpec::uniform(1, 0.7, 0.1),
                                          TruncatedGaussianSpec::uniform(1, 0.3, 0.3));
  const OracleValue kl5 = true_divergence(kl,
                                          TruncatedGaussianSpec::uniform(5, 0.7, 0.1),
                                          TruncatedGaussianSpec::uniform(5, 0.3, 0.3));
  CHECK(kl5.value == doctest::Approx(5.0 * kl1.value).epsilon(1e-9));
}

TEST_CASE("oracle rejects mismatched dimensions and handles the constant functional")
{
  const TruncatedGaussianSpec p = TruncatedGaussianSpec::uniform(2, 0.7, 0.1);
  const TruncatedGaussianSpec q = TruncatedGaussianSpec::uniform(3, 0.3, 0.1);
  CHECK_THROWS_AS(true_divergence(make_kl(), p, q), std::invalid_argument);
  // The constant functional integrates f2 itself, so its truth is 1.
  const TruncatedGaussianSpec q2 = TruncatedGaussianSpec::uniform(2, 0.3, 0.1);
  CHECK(true_divergence(make_constant_one(), p, q2).value == doctest::Approx(1.0).epsilon(1e-9));
}
