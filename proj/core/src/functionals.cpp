#include "odin/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace odin {

double FunctionalSpec::evaluate(double x, double y) const
{
  switch (kind) {
    case Kind::kl: return g_kl(x, y);
    case Kind::renyi: return g_renyi(x, y, alpha);
    case Kind::constant_one: return 1.0;
  }
  throw std::logic_error("FunctionalSpec: unknown kind");
}

FunctionalSpec make_kl()
{
  FunctionalSpec g;
  g.kind = FunctionalSpec::Kind::kl;
  g.name = "kl";
  g.lipschitz = true;
  return g;
}

FunctionalSpec make_renyi(double alpha)
{
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("make_renyi: alpha must lie in (0,1), got " + std::to_string(alpha));
  FunctionalSpec g;
  g.kind = FunctionalSpec::Kind::renyi;
  g.name = "renyi";
  g.alpha = alpha;
  g.lipschitz = true;
  return g;
}

FunctionalSpec make_constant_one()
{
  FunctionalSpec g;
  g.kind = FunctionalSpec::Kind::constant_one;
  g.name = "constant_one";
  g.lipschitz = true;
  return g;
}

FunctionalSpec parse_functional(const std::string& text)
{
  if (text == "kl") return make_kl();
  if (text == "one") return make_constant_one();
  const std::string prefix = "renyi:alpha=";
  if (text.rfind(prefix, 0) == 0) {
    const std::string tail = text.substr(prefix.size());
    std::size_t used = 0;
    double alpha = 0.0;
    try {
      alpha = std::stod(tail, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("parse_functional: bad alpha in \"" + text + "\"");
    }
    if (used != tail.size())
      throw std::invalid_argument("parse_functional: trailing junk in \"" + text + "\"");
    return make_renyi(alpha);
  }
  throw std::invalid_argument("parse_functional: expected kl, one, or renyi:alpha=<A>, got \"" +
                              text + "\"");
}

double g_renyi(double x, double y, double alpha)
{
  if (!(x > 0.0) || !(y > 0.0))
    throw std::invalid_argument("g_renyi: arguments must be positive after clipping");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("g_renyi: alpha must lie in (0,1)");
  return std::pow(x / y, alpha);
}

double g_kl(double x, double y)
{
  if (!(x > 0.0) || !(y > 0.0))
    throw std::invalid_argument("g_kl: arguments must be positive after clipping");
  return -std::log(x / y);
}

namespace {

EstimateResult evaluate_mean(const std::vector<double>& f1_vals,
                             const std::vector<double>& f2_vals,
                             double h1,
                             double h2,
                             const FunctionalSpec& g,
                             std::size_t n1,
                             std::size_t n2)
{
  EstimateResult r;
  r.h1 = h1;
  r.h2 = h2;
  r.n1 = n1;
  r.n2 = n2;
  std::vector<double> terms(f2_vals.size());
  for (std::size_t i = 0; i < f2_vals.size(); ++i) {
    double x = f1_vals[i];
    double y = f2_vals[i];
    if (x < g.clip_floor) {
      x = g.clip_floor;
      ++r.clipped_num_count;
    }
    if (y < g.clip_floor) {
      y = g.clip_floor;
      ++r.clipped_den_count;
    }
    terms[i] = g.evaluate(x, y);
  }
  r.clipped_count = r.clipped_num_count + r.clipped_den_count;
  // Summing in sorted order makes the mean a function of the multiset of
  // per-point terms, so reordering the rows of either sample set cannot
  // perturb the estimate at the last bit.
  std::sort(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += t;
  r.value = sum / static_cast<double>(f2_vals.size());
  return r;
}

}  // namespace

EstimateResult plugin_estimate_cached(const DistanceCache& cross,
                                      const DistanceCache& self,
                                      double h1,
                                      double h2,
                                      const FunctionalSpec& g)
{
  if (cross.evals() != self.evals())
    throw std::invalid_argument("plugin_estimate: caches disagree on eval count");
  if (!self.diagonal_excluded())
    throw std::invalid_argument("plugin_estimate: self cache must exclude the diagonal");
  if (self.samples() < 2)
    throw std::invalid_argument("plugin_estimate: need N2 >= 2 for the leave-one-out estimate");

  const KernelSpec kernel;
  const std::vector<double> f1_vals = kde_eval(cross, h1, kernel, cross.samples());
  const std::vector<double> f2_vals = kde_eval(self, h2, kernel, self.samples() - 1);
  return evaluate_mean(f1_vals, f2_vals, h1, h2, g, cross.samples(), self.samples());
}

EstimateResult plugin_estimate(const SampleSet& s1,
                               const SampleSet& s2,
                               double h1,
                               double h2,
                               const FunctionalSpec& g)
{
  if (s1.dim() != s2.dim())
    throw std::invalid_argument("plugin_estimate: dimension mismatch (" + std::to_string(s1.dim()) +
                                " vs " + std::to_string(s2.dim()) + ")");
  if (s2.n() < 2)
    throw std::invalid_argument("plugin_estimate: need N2 >= 2 for the leave-one-out estimate");
  const DistanceCache cross = pairwise_chebyshev(s2, s1, false);
  const DistanceCache self = pairwise_chebyshev(s2, s2, true);
  return plugin_estimate_cached(cross, self, h1, h2, g);
}

}  // namespace odin
