#pragma once

#include <cstddef>
#include <vector>

namespace odin {

//! Per-cell Monte Carlo summary. The decomposition
//! mse = bias^2 + variance * (T-1)/T holds to rounding (variance is the
//! unbiased sample variance, mse the biased mean of squared errors).
struct MseSummary
{
  double mse = 0.0;
  double se = 0.0;  // standard error of the estimate mean: sd / sqrt(T)
  double bias = 0.0;
  double variance = 0.0;
};

//! Summary over T >= 2 trial estimates against a known truth.
//! Throws std::invalid_argument for T < 2.
MseSummary mse_and_se(const std::vector<double>& estimates, double truth);

//! Negated least-squares slope of log(mse) against log(N). Requires at
//! least two distinct positive sample sizes and positive mse values.
double loglog_slope(const std::vector<double>& ns, const std::vector<double>& mses);

//! Q-Q data for a normality check: values studentized by their own sample
//! mean and sd, sorted, paired with standard-normal quantiles at plotting
//! positions (k - 0.5) / T, plus the Pearson correlation of the pairs.
struct QqData
{
  std::vector<double> theoretical;
  std::vector<double> empirical;
  double correlation = 0.0;
};

//! Requires T >= 10 and nonzero sample sd (throws std::invalid_argument
//! otherwise). Invariant under affine transforms of the input.
QqData qq_points(const std::vector<double>& values);

enum class Alternative { two_sided, greater, less };

struct TTestResult
{
  double t = 0.0;
  double p = 1.0;
};

//! Paired t-test on aligned trials: t = mean(a-b) / (sd(a-b)/sqrt(T)),
//! p from the t distribution with T-1 degrees of freedom. Degenerate cases:
//! all differences zero -> t = 0, p = 1; zero variance with nonzero mean ->
//! t = +/-inf limit, p -> 0 (one-sided p on the favored side).
TTestResult paired_ttest(const std::vector<double>& a,
                         const std::vector<double>& b,
                         Alternative alternative);

//! CDF of Student's t distribution with nu > 0 degrees of freedom, via the
//! regularized incomplete beta function (continued fraction, absolute error
//! <= 1e-10).
double student_t_cdf(double t, double nu);

}  // namespace odin
