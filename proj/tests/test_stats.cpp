#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "odin/normal.hpp"
#include "odin/rng.hpp"
#include "odin/stats.hpp"

using namespace odin;

TEST_CASE("mse summary hand cases")
{
  CHECK(mse_and_se({2.0, 2.0, 2.0}, 2.0).mse == 0.0);

  const MseSummary offset = mse_and_se({2.5, 2.5, 2.5, 2.5}, 2.0);
  CHECK(offset.mse == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(offset.bias == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(offset.variance == 0.0);
  CHECK(offset.se == 0.0);

  CHECK_THROWS_AS(mse_and_se({1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("mse summary matches a two-pass reference and its decomposition identity")
{
  Rng rng(31);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t t = 20 + rng.next_u64() % 100;
    std::vector<double> est(t);
    for (double& e : est) e = 0.4 + 2.0 * rng.next_double();
    const double truth = 1.1;
    const MseSummary s = mse_and_se(est, truth);

    double mean = 0.0;
    for (double e : est) mean += e;
    mean /= static_cast<double>(t);
    double mse = 0.0, var = 0.0;
    for (double e : est) {
      mse += (e - truth) * (e - truth);
      var += (e - mean) * (e - mean);
    }
    mse /= static_cast<double>(t);
    var /= static_cast<double>(t - 1);

    CHECK(s.mse == doctest::Approx(mse).epsilon(1e-12));
    CHECK(s.bias == doctest::Approx(mean - truth).epsilon(1e-12));
    CHECK(s.variance == doctest::Approx(var).epsilon(1e-12));
    CHECK(s.se == doctest::Approx(std::sqrt(var / static_cast<double>(t))).epsilon(1e-12));

    const double tt = static_cast<double>(t);
    CHECK(s.mse ==
          doctest::Approx(s.bias * s.bias + s.variance * (tt - 1.0) / tt).epsilon(1e-12));
  }
}

TEST_CASE("log-log slope hand cases and scale invariance")
{
  const std::vector<double> ns = {100.0, 240.0, 560.0, 1330.0};
  std::vector<double> inv_n(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) inv_n[i] = 3.7 / ns[i];
  CHECK(loglog_slope(ns, inv_n) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(loglog_slope(ns, {0.5, 0.5, 0.5, 0.5}) == doctest::Approx(0.0).epsilon(1e-12));

  Rng rng(9);
  std::vector<double> synthetic(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i)
    synthetic[i] = 2.0 * std::pow(ns[i], -0.83) * (1.0 + 0.01 * (rng.next_double() - 0.5));
  const double slope = loglog_slope(ns, synthetic);
  CHECK(std::fabs(slope - 0.83) <= 0.02);

  std::vector<double> scaled = synthetic;
  for (double& m : scaled) m *= 7.25;
  CHECK(loglog_slope(ns, scaled) == doctest::Approx(slope).epsilon(1e-12));

  CHECK_THROWS_AS(loglog_slope({100.0}, {0.5}), std::invalid_argument);
  CHECK_THROWS_AS(loglog_slope(ns, {0.5, -0.1, 0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(loglog_slope({100.0, 100.0}, {0.5, 0.4}), std::invalid_argument);
}

TEST_CASE("q-q points nail exact normal input and reject two-point samples")
{
  const std::size_t t = 64;
  std::vector<double> exact(t);
  for (std::size_t k = 0; k < t; ++k)
    exact[k] = normal_quantile((static_cast<double>(k) + 0.5) / static_cast<double>(t));
  const QqData good = qq_points(exact);
  CHECK(good.correlation >= 0.999);
  REQUIRE(good.theoretical.size() == t);
  REQUIRE(good.empirical.size() == t);

  std::vector<double> lump(t);
  for (std::size_t k = 0; k < t; ++k) lump[k] = k < t / 2 ? -1.0 : 1.0;
  CHECK(qq_points(lump).correlation < 0.95);

  CHECK_THROWS_AS(qq_points(std::vector<double>(5, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(qq_points(std::vector<double>(20, 3.0)), std::invalid_argument);
}

TEST_CASE("q-q points are invariant under affine input transforms")
{
  Rng rng(17);
  std::vector<double> values(80);
  for (double& v : values) v = rng.next_double() + 0.3 * rng.next_double();
  const QqData base = qq_points(values);

  std::vector<double> shifted(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) shifted[i] = 4.0 * values[i] - 2.5;
  const QqData moved = qq_points(shifted);

  CHECK(moved.correlation == doctest::Approx(base.correlation).epsilon(1e-12));
  for (std::size_t i = 0; i < base.empirical.size(); ++i) {
    CHECK(moved.empirical[i] == doctest::Approx(base.empirical[i]).epsilon(1e-11));
    CHECK(moved.theoretical[i] == base.theoretical[i]);
  }
}

TEST_CASE("paired t-test hand cases")
{
  const std::vector<double> zero = {3.0, 4.0, 5.0};
  const TTestResult same = paired_ttest(zero, zero, Alternative::two_sided);
  CHECK(same.t == 0.0);
  CHECK(same.p == 1.0);

  // diffs {1,2,3,4,5}: mean 3, sd sqrt(2.5), t = 3 / (sqrt(2.5)/sqrt(5)).
  const std::vector<double> a = {2.0, 4.0, 6.0, 8.0, 10.0};
  const std::vector<double> b = {1.0, 2.0, 3.0, 4.0, 5.0};
  const TTestResult r = paired_ttest(a, b, Alternative::two_sided);
  CHECK(r.t == doctest::Approx(4.2426406871192851).epsilon(1e-12));
  CHECK(r.p == doctest::Approx(0.0132355995636827).epsilon(1e-9));

  const TTestResult greater = paired_ttest(a, b, Alternative::greater);
  const TTestResult less = paired_ttest(a, b, Alternative::less);
  CHECK(greater.p == doctest::Approx(r.p / 2.0).epsilon(1e-9));
  CHECK(greater.p + less.p == doctest::Approx(1.0).epsilon(1e-12));

  // Swapping the inputs flips the statistic and swaps the one-sided p-values.
  const TTestResult swapped = paired_ttest(b, a, Alternative::two_sided);
  CHECK(swapped.t == doctest::Approx(-r.t).epsilon(1e-12));
  CHECK(paired_ttest(b, a, Alternative::greater).p == doctest::Approx(less.p).epsilon(1e-12));
  CHECK(paired_ttest(b, a, Alternative::less).p == doctest::Approx(greater.p).epsilon(1e-12));
}

TEST_CASE("paired t-test degenerate variance cases")
{
  const std::vector<double> a = {2.0, 3.0, 4.0};
  std::vector<double> b = a;
  for (double& x : b) x -= 0.5;
  const TTestResult r = paired_ttest(a, b, Alternative::greater);
  CHECK(r.p <= 1e-12);
  const TTestResult opposite = paired_ttest(b, a, Alternative::greater);
  CHECK(opposite.p >= 1.0 - 1e-12);
  CHECK_THROWS_AS(paired_ttest({1.0}, {2.0}, Alternative::two_sided), std::invalid_argument);
  CHECK_THROWS_AS(paired_ttest({1.0, 2.0}, {1.0, 2.0, 3.0}, Alternative::two_sided),
                  std::invalid_argument);
}

TEST_CASE("student t CDF symmetry and references")
{
  CHECK(student_t_cdf(0.0, 7.0) == doctest::Approx(0.5).epsilon(1e-12));
  for (double t : {0.5, 1.3, 2.7}) {
    CHECK(student_t_cdf(-t, 5.0) == doctest::Approx(1.0 - student_t_cdf(t, 5.0)).epsilon(1e-11));
  }
  double prev = 0.0;
  for (double t = -6.0; t <= 6.0; t += 0.25) {
    const double f = student_t_cdf(t, 9.0);
    CHECK(f >= prev);
    prev = f;
  }
  // Two-sided p of the hand t-test instance, via the same CDF path.
  CHECK(2.0 * (1.0 - student_t_cdf(4.2426406871192851, 4.0)) ==
        doctest::Approx(0.0132355995636827).epsilon(1e-9));
}
