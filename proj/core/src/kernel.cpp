#include "odin/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace odin {

std::size_t DistanceCache::count_within(std::size_t i, double radius) const
{
  const std::vector<double>& row = sorted_[i];
  return static_cast<std::size_t>(std::upper_bound(row.begin(), row.end(), radius) - row.begin());
}

double DistanceCache::max_row_min() const
{
  double worst = 0.0;
  for (std::size_t i = 0; i < m_; ++i) worst = std::max(worst, row_min(i));
  return worst;
}

DistanceCache pairwise_chebyshev(const SampleSet& evals, const SampleSet& samples, bool exclude_diagonal)
{
  if (evals.dim() != samples.dim())
    throw std::invalid_argument("pairwise_chebyshev: dimension mismatch (" +
                                std::to_string(evals.dim()) + " vs " + std::to_string(samples.dim()) + ")");
  if (exclude_diagonal && evals.n() != samples.n())
    throw std::invalid_argument("pairwise_chebyshev: diagonal exclusion requires equal sizes");

  const std::size_t m = evals.n(), n = samples.n(), d = evals.dim();
  DistanceCache cache;
  cache.m_ = m;
  cache.n_ = n;
  cache.dim_ = d;
  cache.exclude_diagonal_ = exclude_diagonal;
  cache.dist_.resize(m * n);
  cache.sorted_.resize(m);

  for (std::size_t i = 0; i < m; ++i) {
    const double* e = evals.row(i);
    double* out = cache.dist_.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* s = samples.row(j);
      double dist = 0.0;
      for (std::size_t k = 0; k < d; ++k) dist = std::max(dist, std::fabs(e[k] - s[k]));
      out[j] = dist;
    }
    std::vector<double>& row = cache.sorted_[i];
    row.reserve(exclude_diagonal ? n - 1 : n);
    for (std::size_t j = 0; j < n; ++j)
      if (!exclude_diagonal || j != i) row.push_back(out[j]);
    std::sort(row.begin(), row.end());
  }
  return cache;
}

std::vector<double> kde_eval(const DistanceCache& cache,
                             double h,
                             const KernelSpec& kernel,
                             std::size_t n_effective)
{
  if (h <= 0.0) throw std::invalid_argument("kde_eval: bandwidth must be positive");
  if (n_effective == 0)
    throw std::invalid_argument("kde_eval: n_effective is zero (leave-one-out needs at least two samples)");
  const double hd = std::pow(h, static_cast<double>(cache.dim()));
  if (hd == 0.0)
    throw std::invalid_argument("kde_eval: h^d underflows to zero at h = " + std::to_string(h));

  const double radius = h * kernel.half_width;
  const double scale = 1.0 / (static_cast<double>(n_effective) * hd);
  std::vector<double> out(cache.evals());
  for (std::size_t i = 0; i < cache.evals(); ++i)
    out[i] = static_cast<double>(cache.count_within(i, radius)) * scale;
  return out;
}

double min_positive_bandwidth(const SampleSet& s1,
                              const SampleSet& s2,
                              const std::vector<double>& l_grid,
                              const std::function<double(double)>& bandwidth_rule)
{
  if (l_grid.empty()) throw std::invalid_argument("min_positive_bandwidth: empty l grid");
  for (std::size_t k = 0; k + 1 < l_grid.size(); ++k)
    if (!(bandwidth_rule(l_grid[k]) < bandwidth_rule(l_grid[k + 1])))
      throw std::invalid_argument("min_positive_bandwidth: bandwidth rule must be strictly increasing in l");
  if (s2.n() < 2)
    throw std::invalid_argument("min_positive_bandwidth: leave-one-out needs at least two points in s2");

  const KernelSpec kernel;
  const DistanceCache cross = pairwise_chebyshev(s2, s1, false);
  const DistanceCache self = pairwise_chebyshev(s2, s2, true);

  // Positivity at h means every eval point sees >= 1 sample within h/2 in
  // both caches, i.e. h/2 must reach the worst nearest-neighbor distance.
  for (double l : l_grid) {
    const double radius = bandwidth_rule(l) * kernel.half_width;
    if (cross.max_row_min() <= radius && self.max_row_min() <= radius) return l;
  }

  std::size_t worst = 0;
  double worst_dist = 0.0;
  for (std::size_t i = 0; i < s2.n(); ++i) {
    const double need = std::max(cross.row_min(i), self.row_min(i));
    if (need > worst_dist) {
      worst_dist = need;
      worst = i;
    }
  }
  throw std::runtime_error("min_positive_bandwidth: grid exhausted; eval index " + std::to_string(worst) +
                           " needs radius " + std::to_string(worst_dist) + " but the largest grid radius is " +
                           std::to_string(bandwidth_rule(l_grid.back()) * kernel.half_width));
}

}  // namespace odin
