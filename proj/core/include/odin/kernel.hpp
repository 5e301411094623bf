#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "sample_set.hpp"

namespace odin {

//! Product-form kernel description. The only supported kind is the uniform
//! product (rectangular) kernel: K(u) = 1 iff max_i |u_i| <= half_width,
//! else 0. With half_width = 1/2 it integrates to 1 over its support and is
//! symmetric in every coordinate.
struct KernelSpec
{
  enum class Kind { uniform_product };

  Kind kind = Kind::uniform_product;
  double half_width = 0.5;
};

//! Pairwise Chebyshev (max-coordinate) distances between M eval points and
//! N sample points, computed once and thresholded per bandwidth. Each row
//! additionally keeps a sorted copy (excluded self-pairs dropped) so that
//! in-box counts per bandwidth reduce to one binary search per eval point.
class DistanceCache
{
public:
  DistanceCache() = default;

  std::size_t evals() const { return m_; }
  std::size_t samples() const { return n_; }
  std::size_t dim() const { return dim_; }
  bool diagonal_excluded() const { return exclude_diagonal_; }

  //! Exact max-coordinate distance between eval i and sample j.
  double entry(std::size_t i, std::size_t j) const { return dist_[i * n_ + j]; }

  //! Number of non-excluded samples j with entry(i, j) <= radius.
  std::size_t count_within(std::size_t i, double radius) const;

  //! Smallest non-excluded distance in row i.
  double row_min(std::size_t i) const { return sorted_[i].empty() ? 0.0 : sorted_[i].front(); }

  //! Largest row_min over all eval points: the radius every eval point needs
  //! to see at least one sample.
  double max_row_min() const;

  friend DistanceCache pairwise_chebyshev(const SampleSet&, const SampleSet&, bool);

private:
  std::vector<double> dist_;                 // row-major M x N
  std::vector<std::vector<double>> sorted_;  // per row, excluded pairs dropped
  std::size_t m_ = 0;
  std::size_t n_ = 0;
  std::size_t dim_ = 0;
  bool exclude_diagonal_ = false;
};

//! Computes all eval-to-sample Chebyshev distances. With exclude_diagonal,
//! pairs with equal index are flagged excluded (for leave-one-out use where
//! evals and samples alias the same set; requires equal sizes).
//! Throws std::invalid_argument on dimension mismatch.
DistanceCache pairwise_chebyshev(const SampleSet& evals,
                                 const SampleSet& samples,
                                 bool exclude_diagonal = false);

//! Kernel density estimate at every eval point:
//!   (1 / (n_effective * h^d)) * #{non-excluded j : entry(i,j) <= h * half_width}.
//! Counts are exact integers divided once, so results are independent of
//! evaluation order. n_effective is N1 for a cross estimate and N2-1 for the
//! leave-one-out estimate. Throws std::invalid_argument when h <= 0,
//! n_effective == 0, or h^d underflows to zero.
std::vector<double> kde_eval(const DistanceCache& cache,
                             double h,
                             const KernelSpec& kernel,
                             std::size_t n_effective);

//! Smallest grid element l such that, at bandwidth h(l), the cross estimate
//! from s1 and the leave-one-out estimate from s2 are strictly positive at
//! every point of s2. Positivity is monotone in h for the uniform kernel, so
//! every larger grid element also satisfies it. Throws std::runtime_error
//! naming the failing eval index when the grid is exhausted;
//! std::invalid_argument for empty grids or a non-increasing bandwidth rule.
double min_positive_bandwidth(const SampleSet& s1,
                              const SampleSet& s2,
                              const std::vector<double>& l_grid,
                              const std::function<double(double)>& bandwidth_rule);

}  // namespace odin
