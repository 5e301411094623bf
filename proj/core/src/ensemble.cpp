#include "odin/ensemble.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace odin {

namespace {

std::atomic<std::int64_t> g_solver_invocations{0};

constexpr double kTolConstraint = 1e-8;
constexpr double kTolEpsilon = 1e-6;
constexpr double kFeasibleResidual = 1e-9;
constexpr std::int64_t kMaxDykstraIters = 100000;

}  // namespace

std::int64_t solver_invocations() { return g_solver_invocations.load(); }

std::string to_string(EstimatorKind kind)
{
  switch (kind) {
    case EstimatorKind::odin1: return "odin1";
    case EstimatorKind::odin2: return "odin2";
    case EstimatorKind::plugin_baseline: return "plugin";
  }
  return "unknown";
}

double BasisSet::psi(std::size_t i, double l) const
{
  return std::pow(l, entries[i].psi_exponent);
}

double BasisSet::scale(std::size_t i, std::size_t n) const
{
  const double nd = static_cast<double>(n);
  return std::sqrt(nd) * std::pow(nd, -entries[i].rate_exponent);
}

double BasisSet::bandwidth(double l, std::size_t n) const
{
  return l * std::pow(static_cast<double>(n), -bandwidth_exponent);
}

BasisSet odin1_basis(int d)
{
  if (d < 1) throw std::invalid_argument("odin1_basis: d must be >= 1");
  BasisSet basis;
  basis.kind = EstimatorKind::odin1;
  basis.d = d;
  basis.bandwidth_exponent = 1.0 / (2.0 * d);
  for (int i = 1; i <= d; ++i)
    basis.entries.push_back({"l^" + std::to_string(i), static_cast<double>(i), i / (2.0 * d)});
  // Controls the variance-order term that decays at the parametric rate.
  basis.entries.push_back({"l^-" + std::to_string(d), static_cast<double>(-d), 0.5});
  return basis;
}

BasisSet odin2_basis(int d, int lambda, int s_cap)
{
  if (d < 1) throw std::invalid_argument("odin2_basis: d must be >= 1");
  if (lambda == 0) lambda = (d + 1) % 2 == 0 ? d + 1 : d + 2;
  if (lambda < d + 1)
    throw std::invalid_argument("odin2_basis: lambda = " + std::to_string(lambda) +
                                " violates the parametric-rate requirement lambda >= d+1 = " +
                                std::to_string(d + 1));
  if (lambda % 2 != 0)
    throw std::invalid_argument("odin2_basis: lambda must be even, got " + std::to_string(lambda));

  BasisSet basis;
  basis.kind = EstimatorKind::odin2;
  basis.d = d;
  basis.bandwidth_exponent = 1.0 / (d + 1.0);
  const double bound = (d + 1.0) / 2.0;
  for (int q = 0; q <= lambda / 2; ++q) {
    for (int j = (q == 0 ? 1 : 0); j + q < bound; ++j) {
      if (s_cap >= 0 && j > s_cap) break;
      basis.entries.push_back({"j=" + std::to_string(j) + ",q=" + std::to_string(q),
                               static_cast<double>(j) - static_cast<double>(d) * q,
                               (j + q) / (d + 1.0)});
    }
  }
  return basis;
}

namespace {

void check_l_values(const std::vector<double>& l_values)
{
  if (l_values.empty()) throw std::invalid_argument("weight solver: empty l grid");
  for (double l : l_values)
    if (!(l > 0.0) || !std::isfinite(l))
      throw std::invalid_argument("weight solver: l values must be positive and finite");
  std::vector<double> sorted = l_values;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("weight solver: duplicate l values");
}

std::vector<double> raw_residuals(const std::vector<double>& w,
                                  const std::vector<double>& l_values,
                                  const BasisSet& basis)
{
  std::vector<double> res(basis.size(), 0.0);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    double gamma = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) gamma += w[j] * basis.psi(i, l_values[j]);
    res[i] = std::fabs(gamma);
  }
  return res;
}

}  // namespace

WeightSolution solve_weights_exact(const std::vector<double>& l_values, const BasisSet& basis)
{
  g_solver_invocations.fetch_add(1);
  check_l_values(l_values);
  const std::size_t L = l_values.size();
  const std::size_t I = basis.size();
  if (L <= I)
    throw std::invalid_argument("solve_weights_exact: infeasible, need L > I but L = " + std::to_string(L) +
                                " and I = " + std::to_string(I));

  Eigen::MatrixXd A(I + 1, L);
  for (std::size_t j = 0; j < L; ++j) A(0, j) = 1.0;
  for (std::size_t i = 0; i < I; ++i)
    for (std::size_t j = 0; j < L; ++j) A(i + 1, j) = basis.psi(i, l_values[j]);

  const Eigen::MatrixXd M = A * A.transpose();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double cond_floor = svd.singularValues()(0) * 1e-12;
  if (svd.singularValues().minCoeff() <= cond_floor) {
    // Walk the rows to name the first one dependent on its predecessors.
    for (std::size_t k = 2; k <= I + 1; ++k) {
      const Eigen::MatrixXd head = A.topRows(k);
      const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(head);
      if (static_cast<std::size_t>(qr.rank()) < k) {
        const std::string name = k - 2 < I ? basis.entries[k - 2].label : "sum-to-one";
        throw std::runtime_error("solve_weights_exact: constraint rows are rank-deficient; row '" + name +
                                 "' is dependent on earlier rows (duplicate l values or dependent basis)");
      }
    }
    throw std::runtime_error("solve_weights_exact: normal equations numerically singular");
  }

  Eigen::VectorXd b = Eigen::VectorXd::Zero(I + 1);
  b(0) = 1.0;
  const Eigen::VectorXd w = A.transpose() * svd.solve(b);

  WeightSolution sol;
  sol.weights.assign(w.data(), w.data() + L);
  sol.epsilon = 0.0;
  sol.eta = 0.0;
  sol.norm_sq = w.squaredNorm();
  sol.iterations = 0;
  sol.residuals = raw_residuals(sol.weights, l_values, basis);
  sol.scaled_residuals = sol.residuals;
  for (double r : sol.residuals)
    if (r > kTolConstraint)
      throw std::runtime_error("solve_weights_exact: residual " + std::to_string(r) +
                               " exceeds tolerance; constraints too ill-conditioned");
  return sol;
}

namespace {

//! Feasibility state for the bisection probes, in reduced coordinates.
//! Any candidate can be written w = w0 + V t with w0 the uniform weights
//! and V an orthonormal basis of span{scaled constraint rows} with the
//! all-ones direction projected out: the sum constraint then holds
//! identically, the norm splits as ||w||^2 = 1/L + ||t||^2, and dropping
//! the component of w orthogonal to that span changes no constraint value
//! while only shrinking the norm. Dykstra's projections therefore cycle
//! over the slabs and a centered ball in R^m with m <= |basis|, instead of
//! R^L; the geometry (and hence the iteration path's convergence) is the
//! same, the iterations are just cheaper and the hyperplane is exact.
struct DykstraWorkspace
{
  std::size_t m = 0;
  std::vector<std::vector<double>> rows;  // a_i = V^T c_i
  std::vector<double> offsets;            // b_i = c_i . w0
  std::vector<double> row_norm_sq;
  double ball_radius_sq = 0.0;            // eta - 1/L

  std::vector<double> t;                  // current iterate
  std::vector<std::vector<double>> corr;  // Dykstra correction per set

  //! Max slab residual of the iterate's ball-clamped copy: scaling t by
  //! gamma = min(1, R/||t||) lands exactly inside the ball and moves every
  //! slab value to b_i + gamma * (dot_i - b_i), so one pass over the rows
  //! yields the epsilon this clamped point genuinely achieves.
  double clamped_residual() const
  {
    double nsq = 0.0;
    for (double ti : t) nsq += ti * ti;
    const double gamma = nsq > ball_radius_sq
                             ? (ball_radius_sq > 0.0 ? std::sqrt(ball_radius_sq / nsq) : 0.0)
                             : 1.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      double dot = offsets[i];
      for (std::size_t j = 0; j < m; ++j) dot += rows[i][j] * t[j];
      worst = std::max(worst, std::fabs(offsets[i] + gamma * (dot - offsets[i])));
    }
    return worst;
  }

  void clamp_into_ball()
  {
    double nsq = 0.0;
    for (double ti : t) nsq += ti * ti;
    if (nsq <= ball_radius_sq) return;
    const double gamma = ball_radius_sq > 0.0 ? std::sqrt(ball_radius_sq / nsq) : 0.0;
    for (double& ti : t) ti *= gamma;
  }
};

void project_hyperplane(std::vector<double>& x)
{
  double sum = std::accumulate(x.begin(), x.end(), 0.0);
  const double shift = (1.0 - sum) / static_cast<double>(x.size());
  for (double& xi : x) xi += shift;
}

void project_slab(std::vector<double>& t, const std::vector<double>& a, double offset,
                  double norm_sq, double eps)
{
  if (norm_sq < 1e-300) return;  // constant constraint; no direction to move
  double dot = offset;
  for (std::size_t j = 0; j < t.size(); ++j) dot += a[j] * t[j];
  if (std::fabs(dot) <= eps) return;
  const double target = dot > 0.0 ? eps : -eps;
  const double step = (dot - target) / norm_sq;
  for (std::size_t j = 0; j < t.size(); ++j) t[j] -= step * a[j];
}

void project_ball(std::vector<double>& t, double radius_sq)
{
  double nsq = 0.0;
  for (double ti : t) nsq += ti * ti;
  if (nsq <= radius_sq) return;
  const double f = radius_sq > 0.0 ? std::sqrt(radius_sq / nsq) : 0.0;
  for (double& ti : t) ti *= f;
}

//! Runs Dykstra's alternating projections for the candidate epsilon.
//! The probe succeeds as soon as the iterate's ball-clamped copy achieves
//! a slab residual within kFeasibleResidual of the candidate. Either way
//! it reports the best residual any clamped iterate achieved and leaves
//! that best point in ws.t, so even a failed probe can tighten the
//! caller's upper bound (the clamped point is genuinely feasible at its
//! own residual level).
bool dykstra_probe(DykstraWorkspace& ws, double eps, std::int64_t& iterations_used,
                   double& best_residual)
{
  best_residual = ws.clamped_residual();
  if (best_residual <= eps + kFeasibleResidual) {
    ws.clamp_into_ball();
    return true;
  }
  const std::size_t n_sets = ws.rows.size() + 1;
  ws.corr.assign(n_sets, std::vector<double>(ws.m, 0.0));
  std::vector<double> y(ws.m);
  std::vector<double> before(ws.m);
  std::vector<double> best_t = ws.t;

  for (std::int64_t it = 0; it < kMaxDykstraIters; ++it) {
    for (std::size_t set = 0; set < n_sets; ++set) {
      std::vector<double>& p = ws.corr[set];
      for (std::size_t j = 0; j < ws.m; ++j) y[j] = ws.t[j] + p[j];
      before = y;
      if (set < ws.rows.size())
        project_slab(y, ws.rows[set], ws.offsets[set], ws.row_norm_sq[set], eps);
      else
        project_ball(y, ws.ball_radius_sq);
      for (std::size_t j = 0; j < ws.m; ++j) p[j] = before[j] - y[j];
      ws.t.swap(y);
    }
    ++iterations_used;
    const double residual = ws.clamped_residual();
    if (residual < best_residual) {
      best_residual = residual;
      best_t = ws.t;
    }
    if (residual <= eps + kFeasibleResidual) {
      ws.clamp_into_ball();
      return true;
    }
  }
  ws.t = std::move(best_t);
  ws.clamp_into_ball();
  return false;
}

}  // namespace

WeightSolution solve_weights_relaxed(const std::vector<double>& l_values,
                                     const BasisSet& basis,
                                     std::size_t n,
                                     double eta)
{
  g_solver_invocations.fetch_add(1);
  check_l_values(l_values);
  if (n < 1) throw std::invalid_argument("solve_weights_relaxed: need n >= 1");
  const std::size_t L = l_values.size();
  const std::size_t I = basis.size();
  const double eta_floor = 1.0 / static_cast<double>(L);
  if (eta < eta_floor - 1e-12)
    throw std::invalid_argument("solve_weights_relaxed: eta = " + std::to_string(eta) +
                                " is infeasible; sum(w) = 1 forces ||w||^2 >= 1/L = " +
                                std::to_string(eta_floor) + " by Cauchy-Schwarz");

  // Scaled constraint rows c_i over the full grid, and their means (the
  // uniform point's signed residuals).
  std::vector<std::vector<double>> c(I, std::vector<double>(L));
  std::vector<double> row_mean(I, 0.0);
  for (std::size_t i = 0; i < I; ++i) {
    const double s = basis.scale(i, n);
    for (std::size_t j = 0; j < L; ++j) {
      c[i][j] = s * basis.psi(i, l_values[j]);
      row_mean[i] += c[i][j];
    }
    row_mean[i] /= static_cast<double>(L);
  }

  // Orthonormal reduced basis V of span{c_i - mean_i} (the rows with the
  // all-ones direction removed). Eigen's default rank threshold sits at
  // machine epsilon and can promote pure rounding noise to a basis column
  // when the centered rows are dependent (I >= L most visibly); the noise
  // column then points along the all-ones direction and lets iterates leave
  // the sum-to-one hyperplane. A firm threshold plus explicit deflation of
  // the ones direction keeps the reduction's invariants honest: directions
  // discarded here move every constraint by O(1e-9) per unit step, far
  // below the solver's epsilon resolution.
  Eigen::MatrixXd V;
  std::size_t m = 0;
  if (I > 0) {
    Eigen::MatrixXd P(L, I);
    for (std::size_t i = 0; i < I; ++i)
      for (std::size_t j = 0; j < L; ++j)
        P(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = c[i][j] - row_mean[i];
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(P);
    qr.setThreshold(1e-9);
    const std::size_t rank = static_cast<std::size_t>(qr.rank());
    if (rank > 0) {
      Eigen::MatrixXd Q =
          qr.householderQ() *
          Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(rank));
      V.resize(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(rank));
      for (Eigen::Index k = 0; k < Q.cols(); ++k) {
        Eigen::VectorXd col = Q.col(k);
        col.array() -= col.mean();
        for (Eigen::Index kept = 0; kept < static_cast<Eigen::Index>(m); ++kept)
          col -= V.col(kept).dot(col) * V.col(kept);
        const double norm = col.norm();
        if (norm <= 1e-8) continue;
        V.col(static_cast<Eigen::Index>(m)) = col / norm;
        ++m;
      }
      V.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(m));
    }
  }

  DykstraWorkspace ws;
  ws.m = m;
  ws.ball_radius_sq = std::max(0.0, eta - eta_floor);
  ws.rows.assign(I, std::vector<double>(m, 0.0));
  ws.offsets = row_mean;
  ws.row_norm_sq.assign(I, 0.0);
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      double dot = 0.0;
      for (std::size_t j = 0; j < L; ++j)
        dot += V(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) * c[i][j];
      ws.rows[i][k] = dot;
      ws.row_norm_sq[i] += dot * dot;
    }
  }

  WeightSolution sol;
  sol.eta = eta;

  // The uniform point (t = 0) is always feasible at its own residual level,
  // which brackets the optimum from above.
  double hi = 0.0;
  for (std::size_t i = 0; i < I; ++i) hi = std::max(hi, std::fabs(row_mean[i]));

  std::vector<double> feasible_t(m, 0.0);
  std::int64_t iterations = 0;

  if (hi > kTolEpsilon) {
    double lo = 0.0;
    while (hi - lo > kTolEpsilon) {
      const double mid = 0.5 * (lo + hi);
      ws.t = feasible_t;  // warm start from the best certified point
      double probe_best = 0.0;
      const bool ok = dykstra_probe(ws, mid, iterations, probe_best);
      if (probe_best < hi) {
        // Certified: ws.t sits in the ball and achieves probe_best, so the
        // upper bracket tightens even when the probe missed its target.
        hi = probe_best;
        feasible_t = ws.t;
      }
      if (!ok) lo = mid;
    }
  }

  // Clamp exactly into the ball, reconstruct w = w0 + V t, and shift out
  // the rounding drift in the sum so the certificates hold with margin.
  project_ball(feasible_t, ws.ball_radius_sq);
  std::vector<double> w(L, 1.0 / static_cast<double>(L));
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t j = 0; j < L; ++j)
      w[j] += V(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) * feasible_t[k];
  project_hyperplane(w);

  sol.weights = w;
  sol.norm_sq = 0.0;
  for (double wi : w) sol.norm_sq += wi * wi;
  sol.iterations = iterations;
  sol.residuals = raw_residuals(w, l_values, basis);
  sol.scaled_residuals.resize(I);
  double observed = 0.0;
  for (std::size_t i = 0; i < I; ++i) {
    sol.scaled_residuals[i] = sol.residuals[i] * basis.scale(i, n);
    observed = std::max(observed, std::fabs(sol.scaled_residuals[i]));
  }
  sol.epsilon = std::max(hi, observed);
  if (sol.norm_sq > eta + kTolConstraint)
    throw std::runtime_error("solve_weights_relaxed: converged point violates the norm bound");
  return sol;
}

WeightSolution solve_weights_auto_eta(const std::vector<double>& l_values,
                                      const BasisSet& basis,
                                      std::size_t n)
{
  const WeightSolution loose = solve_weights_relaxed(l_values, basis, n, 10.0);
  const double eta_floor = 1.0 / static_cast<double>(l_values.size()) + 1e-9;
  return solve_weights_relaxed(l_values, basis, n, std::max(loose.epsilon, eta_floor));
}

}  // namespace odin
