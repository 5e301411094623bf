#include "odin/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "odin/normal.hpp"

namespace odin {

namespace {

double mean_of(const std::vector<double>& v)
{
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v, double mean)
{
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

// Regularized incomplete beta I_x(a, b) by the standard continued fraction
// (modified Lentz), converging fast when x < (a+1)/(a+b+2); the complement
// identity covers the other half of the domain.
double beta_cf(double a, double b, double x)
{
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-15;
  constexpr int max_iter = 500;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) return h;
  }
  throw std::runtime_error("incomplete beta: continued fraction did not converge");
}

double incomplete_beta(double a, double b, double x)
{
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

}  // namespace

MseSummary mse_and_se(const std::vector<double>& estimates, double truth)
{
  if (estimates.size() < 2)
    throw std::invalid_argument("mse_and_se: need at least 2 estimates, got " +
                                std::to_string(estimates.size()));
  const double t = static_cast<double>(estimates.size());
  const double mean = mean_of(estimates);

  MseSummary out;
  out.bias = mean - truth;
  out.variance = sample_variance(estimates, mean);
  double sq = 0.0;
  for (double e : estimates) sq += (e - truth) * (e - truth);
  out.mse = sq / t;
  out.se = std::sqrt(out.variance / t);
  return out;
}

double loglog_slope(const std::vector<double>& ns, const std::vector<double>& mses)
{
  if (ns.size() != mses.size())
    throw std::invalid_argument("loglog_slope: size mismatch, " + std::to_string(ns.size()) +
                                " vs " + std::to_string(mses.size()));
  if (ns.size() < 2) throw std::invalid_argument("loglog_slope: need at least 2 points");

  std::vector<double> xs(ns.size()), ys(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (!(ns[i] > 0.0)) throw std::invalid_argument("loglog_slope: sample sizes must be positive");
    if (!(mses[i] > 0.0)) throw std::invalid_argument("loglog_slope: mse values must be positive");
    xs[i] = std::log(ns[i]);
    ys[i] = std::log(mses[i]);
  }
  const double xbar = mean_of(xs);
  const double ybar = mean_of(ys);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("loglog_slope: sample sizes must not all coincide");
  return -sxy / sxx;
}

QqData qq_points(const std::vector<double>& values)
{
  if (values.size() < 10)
    throw std::invalid_argument("qq_points: need at least 10 values, got " +
                                std::to_string(values.size()));
  const double t = static_cast<double>(values.size());
  const double mean = mean_of(values);
  const double sd = std::sqrt(sample_variance(values, mean));
  if (!(sd > 0.0)) throw std::invalid_argument("qq_points: sample sd is zero");

  QqData out;
  out.empirical.resize(values.size());
  out.theoretical.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out.empirical[i] = (values[i] - mean) / sd;
  std::sort(out.empirical.begin(), out.empirical.end());
  for (std::size_t k = 0; k < values.size(); ++k)
    out.theoretical[k] = normal_quantile((static_cast<double>(k) + 0.5) / t);

  const double tbar = mean_of(out.theoretical);
  const double ebar = mean_of(out.empirical);
  double stt = 0.0;
  double see = 0.0;
  double ste = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double dt = out.theoretical[k] - tbar;
    const double de = out.empirical[k] - ebar;
    stt += dt * dt;
    see += de * de;
    ste += dt * de;
  }
  out.correlation = ste / std::sqrt(stt * see);
  return out;
}

TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b,
                         Alternative alternative)
{
  if (a.size() != b.size())
    throw std::invalid_argument("paired_ttest: size mismatch, " + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()));
  if (a.size() < 2) throw std::invalid_argument("paired_ttest: need at least 2 pairs");

  std::vector<double> diffs(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diffs[i] = a[i] - b[i];
  const double t_count = static_cast<double>(diffs.size());
  const double mean = mean_of(diffs);
  const double sd = std::sqrt(sample_variance(diffs, mean));

  TTestResult out;
  if (sd == 0.0) {
    if (mean == 0.0) return {0.0, 1.0};
    out.t = std::copysign(std::numeric_limits<double>::infinity(), mean);
    switch (alternative) {
      case Alternative::two_sided: out.p = 0.0; break;
      case Alternative::greater: out.p = mean > 0.0 ? 0.0 : 1.0; break;
      case Alternative::less: out.p = mean < 0.0 ? 0.0 : 1.0; break;
    }
    return out;
  }

  out.t = mean / (sd / std::sqrt(t_count));
  const double nu = t_count - 1.0;
  switch (alternative) {
    case Alternative::two_sided: out.p = 2.0 * (1.0 - student_t_cdf(std::fabs(out.t), nu)); break;
    case Alternative::greater: out.p = 1.0 - student_t_cdf(out.t, nu); break;
    case Alternative::less: out.p = student_t_cdf(out.t, nu); break;
  }
  return out;
}

double student_t_cdf(double t, double nu)
{
  if (!(nu > 0.0)) throw std::invalid_argument("student_t_cdf: nu must be positive");
  if (std::isinf(t)) return t > 0.0 ? 1.0 : 0.0;
  if (t == 0.0) return 0.5;
  const double x = nu / (nu + t * t);
  const double tail = 0.5 * incomplete_beta(0.5 * nu, 0.5, x);
  return t > 0.0 ? 1.0 - tail : tail;
}

}  // namespace odin
