#include "odin/quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace odin {

namespace {

double simpson(double fa, double fm, double fb, double width)
{
  return width / 6.0 * (fa + 4.0 * fm + fb);
}

struct Worker {
  const std::function<double(double)>& f;
  double error_sum = 0.0;

  double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol,
                 int depth)
  {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(fa, flm, fm, m - a);
    const double right = simpson(fm, frm, fb, b - m);
    const double delta = left + right - whole;
    if (std::fabs(delta) <= 15.0 * tol) {
      error_sum += std::fabs(delta) / 15.0;
      return left + right + delta / 15.0;
    }
    if (depth <= 0)
      throw std::runtime_error("adaptive_simpson: max recursion depth reached on [" +
                               std::to_string(a) + ", " + std::to_string(b) + "]");
    return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
  }
};

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  double tol, int max_depth)
{
  if (!(std::isfinite(a) && std::isfinite(b) && a < b))
    throw std::invalid_argument("adaptive_simpson: need finite a < b");
  if (!(tol > 0.0)) throw std::invalid_argument("adaptive_simpson: tol must be positive");
  if (max_depth < 1) throw std::invalid_argument("adaptive_simpson: max_depth must be >= 1");

  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  if (!(std::isfinite(fa) && std::isfinite(fm) && std::isfinite(fb)))
    throw std::runtime_error("adaptive_simpson: integrand is not finite on [" + std::to_string(a) +
                             ", " + std::to_string(b) + "]");

  Worker worker{f};
  const double whole = simpson(fa, fm, fb, b - a);
  const double value = worker.recurse(a, b, fa, fm, fb, whole, tol, max_depth);
  return {value, worker.error_sum};
}

}  // namespace odin
