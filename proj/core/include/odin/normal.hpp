#pragma once

namespace odin {

//! Standard normal density.
double normal_pdf(double x);

//! Standard normal CDF via erfc; accurate in both tails.
double normal_cdf(double x);

//! Inverse standard normal CDF: rational initial guess refined by one
//! Halley step against the erfc-based CDF. Relative error below 1e-12 on
//! p in (1e-15, 1 - 1e-15). Throws std::invalid_argument for p outside (0, 1).
double normal_quantile(double p);

}  // namespace odin
