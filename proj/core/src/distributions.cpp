#include "odin/distributions.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "odin/normal.hpp"
#include "odin/quadrature.hpp"
#include "odin/rng.hpp"

namespace odin {

namespace {

void check_spec(const TruncatedGaussianSpec& spec)
{
  if (spec.mean.empty())
    throw std::invalid_argument("TruncatedGaussianSpec: mean vector is empty");
  if (!(spec.variance > 0.0) || !std::isfinite(spec.variance))
    throw std::invalid_argument("TruncatedGaussianSpec: variance must be positive and finite");
  for (double m : spec.mean)
    if (!std::isfinite(m))
      throw std::invalid_argument("TruncatedGaussianSpec: mean entries must be finite");
}

double truncation_mass(double mu, double sigma)
{
  const double z = normal_cdf((1.0 - mu) / sigma) - normal_cdf((0.0 - mu) / sigma);
  if (!(z > 0.0))
    throw std::invalid_argument("truncated normal: zero mass on [0,1] for mu=" +
                                std::to_string(mu) + " sigma=" + std::to_string(sigma));
  return z;
}

}  // namespace

TruncatedGaussianSpec TruncatedGaussianSpec::uniform(std::size_t d, double mu, double variance)
{
  TruncatedGaussianSpec spec;
  spec.mean.assign(d, mu);
  spec.variance = variance;
  check_spec(spec);
  return spec;
}

double tg_pdf_1d(double mu, double sigma, double x)
{
  if (x < 0.0 || x > 1.0) return 0.0;
  const double z = truncation_mass(mu, sigma);
  return normal_pdf((x - mu) / sigma) / (sigma * z);
}

double tg_pdf(const TruncatedGaussianSpec& spec, const double* x)
{
  check_spec(spec);
  const double sigma = std::sqrt(spec.variance);
  double density = 1.0;
  for (std::size_t k = 0; k < spec.mean.size(); ++k)
    density *= tg_pdf_1d(spec.mean[k], sigma, x[k]);
  return density;
}

double tg_pdf(const TruncatedGaussianSpec& spec, const std::vector<double>& x)
{
  if (x.size() != spec.dim())
    throw std::invalid_argument("tg_pdf: point has dimension " + std::to_string(x.size()) +
                                ", spec has " + std::to_string(spec.dim()));
  return tg_pdf(spec, x.data());
}

SampleSet tg_sample(const TruncatedGaussianSpec& spec, std::size_t n, std::uint64_t seed)
{
  check_spec(spec);
  if (n == 0) throw std::invalid_argument("tg_sample: n must be positive");
  const std::size_t d = spec.dim();
  const double sigma = std::sqrt(spec.variance);

  // Per-coordinate CDF bounds of the untruncated normal at the cube walls.
  std::vector<double> lo(d), span(d);
  for (std::size_t k = 0; k < d; ++k) {
    const double fa = normal_cdf((0.0 - spec.mean[k]) / sigma);
    const double fb = normal_cdf((1.0 - spec.mean[k]) / sigma);
    if (!(fb > fa))
      throw std::invalid_argument("tg_sample: zero mass on [0,1] in coordinate " +
                                  std::to_string(k));
    lo[k] = fa;
    span[k] = fb - fa;
  }

  const double inside_lo = std::nextafter(0.0, 1.0);
  const double inside_hi = std::nextafter(1.0, 0.0);
  Rng rng(seed);
  std::vector<double> data(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      const double u = rng.next_open01();
      double x = spec.mean[k] + sigma * normal_quantile(lo[k] + u * span[k]);
      if (x < inside_lo) x = inside_lo;
      if (x > inside_hi) x = inside_hi;
      data[i * d + k] = x;
    }
  }
  return SampleSet(std::move(data), n, d);
}

OracleValue true_divergence(const FunctionalSpec& g, const TruncatedGaussianSpec& p,
                            const TruncatedGaussianSpec& q, double tol)
{
  check_spec(p);
  check_spec(q);
  if (p.dim() != q.dim())
    throw std::invalid_argument("true_divergence: dimension mismatch, " + std::to_string(p.dim()) +
                                " vs " + std::to_string(q.dim()));
  if (!(tol > 0.0)) throw std::invalid_argument("true_divergence: tol must be positive");

  const std::size_t d = p.dim();
  const double sigma1 = std::sqrt(p.variance);
  const double sigma2 = std::sqrt(q.variance);
  // The per-dimension budget keeps the combined error within tol: errors add
  // for the KL sum, and relative errors add for the Renyi product whose
  // factors stay O(1) on the unit cube.
  const double tol_1d = tol / (3.0 * static_cast<double>(d));

  OracleValue out;
  out.factors.reserve(d);
  double achieved = 0.0;

  for (std::size_t k = 0; k < d; ++k) {
    const double mu1 = p.mean[k];
    const double mu2 = q.mean[k];
    std::function<double(double)> integrand;
    switch (g.kind) {
      case FunctionalSpec::Kind::renyi: {
        const double alpha = g.alpha;
        integrand = [=](double x) {
          const double f1 = tg_pdf_1d(mu1, sigma1, x);
          const double f2 = tg_pdf_1d(mu2, sigma2, x);
          return std::pow(f1, alpha) * std::pow(f2, 1.0 - alpha);
        };
        break;
      }
      case FunctionalSpec::Kind::kl: {
        integrand = [=](double x) {
          const double f1 = tg_pdf_1d(mu1, sigma1, x);
          const double f2 = tg_pdf_1d(mu2, sigma2, x);
          return f2 * std::log(f2 / f1);
        };
        break;
      }
      case FunctionalSpec::Kind::constant_one: {
        integrand = [=](double x) { return tg_pdf_1d(mu2, sigma2, x); };
        break;
      }
      default:
        throw std::invalid_argument("true_divergence: unsupported functional " + g.name);
    }
    const QuadratureResult r = adaptive_simpson(integrand, 0.0, 1.0, tol_1d);
    out.factors.push_back(r.value);
    achieved += r.achieved_tol;
  }

  switch (g.kind) {
    case FunctionalSpec::Kind::kl: {
      double sum = 0.0;
      for (double f : out.factors) sum += f;
      out.value = sum;
      out.achieved_tol = achieved;
      break;
    }
    default: {
      double product = 1.0;
      for (double f : out.factors) product *= f;
      out.value = product;
      // Relative 1-D errors accumulate onto the product.
      double rel = 0.0;
      for (std::size_t k = 0; k < d; ++k)
        rel += out.factors[k] != 0.0 ? achieved / static_cast<double>(d) / std::fabs(out.factors[k])
                                     : 0.0;
      out.achieved_tol = std::fabs(out.value) * rel;
      break;
    }
  }
  return out;
}

}  // namespace odin
