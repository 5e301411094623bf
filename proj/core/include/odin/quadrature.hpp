#pragma once

#include <functional>

namespace odin {

//! Result of one adaptive integration: the value and the error bound the
//! refinement actually achieved (sum of accepted per-interval bounds).
struct QuadratureResult
{
  double value = 0.0;
  double achieved_tol = 0.0;
};

//! Adaptive composite Simpson integration of f over [a, b] with interval
//! bisection until the standard |S(a,b) - S(a,m) - S(m,b)| / 15 bound meets
//! the locally apportioned tolerance. Throws std::runtime_error carrying the
//! achieved tolerance if the depth cap is hit before tol is met.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f,
                                  double a,
                                  double b,
                                  double tol = 1e-10,
                                  int max_depth = 60);

}  // namespace odin
