#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "distributions.hpp"
#include "estimators.hpp"
#include "functionals.hpp"
#include "stats.hpp"

namespace odin {

enum class ExperimentKind { mse_sweep, clt, tuning_sweep, rho_sweep };

std::string to_string(ExperimentKind kind);

//! Two product truncated Gaussians sharing one scalar mean per density,
//! broadcast over the experiment dimension.
struct DensityPairSpec
{
  double mu1 = 0.7;
  double var1 = 0.1;
  double mu2 = 0.3;
  double var2 = 0.1;
};

//! One estimator entry of an experiment. l_min == l_max == 0 selects the
//! estimator-kind default grid.
struct EstimatorSetup
{
  EstimatorKind kind = EstimatorKind::odin1;
  std::size_t L = 50;
  double l_min = 0.0;
  double l_max = 0.0;
  EtaPolicy eta = EtaPolicy::automatic();
  int lambda = 0;
  int s_cap = -1;

  std::vector<double> l_values() const;
};

//! One row of the bandwidth-range robustness table: the (min, max) of the
//! l grid per estimator family.
struct LSet
{
  std::string name;
  double l1_min = 0.0, l1_max = 0.0;
  double l2_min = 0.0, l2_max = 0.0;
};

//! Full description of one experiment run. JSON documents mirror this
//! struct field-for-field; CLI flags override individual fields.
struct ExperimentConfig
{
  ExperimentKind kind = ExperimentKind::mse_sweep;
  std::vector<int> dims = {4};
  std::vector<std::size_t> sample_sizes = {100, 240, 560, 1330, 3200};
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  FunctionalSpec functional = make_renyi(0.5);
  DensityPairSpec densities;
  std::vector<EstimatorSetup> estimators;  // empty = default odin1 + odin2
  bool include_plugin_baseline = true;
  std::vector<LSet> l_sets;                // tuning sweep; empty = built-in table
  std::vector<double> eta_grid;            // tuning sweep; empty fails validation,
                                           // the JSON parser defaults an absent key
                                           // to {0.5,1,2,3.16,5,10}
  std::vector<double> rho_grid;            // rho sweep; empty = 0..1 step 0.05
  int threads = 1;
  std::string out_dir = ".";

  //! The five published (min, max) bandwidth-range pairs used by the
  //! robustness experiments.
  static std::vector<LSet> default_l_sets();

  //! Throws std::invalid_argument describing the first violated field
  //! (trials < 1, unsorted sample sizes, empty dims, CLT with trials < 50...).
  void validate() const;
};

//! Parses a JSON document mirroring ExperimentConfig. Unknown keys are
//! rejected so config typos fail loudly.
ExperimentConfig parse_experiment_config(const std::string& json_text);

//! One per-(d, N, estimator) cell of an MSE experiment. Aggregates cover
//! the trials_used trials that survived the flagged-trial policy: a trial is
//! flagged when any constituent density evaluation was clipped on a side
//! where the functional's value can be destroyed by the floor (denominator
//! for the Renyi ratio; either side for KL). Flagged trials stay in the
//! per-trial CSV, marked, but are excluded from mse/se/bias/variance.
struct MseCell
{
  int d = 0;
  std::size_t n = 0;
  std::string estimator;
  MseSummary stats;
  std::size_t trials_used = 0;
  std::size_t trials_flagged = 0;
  double truth = 0.0;
  double chosen_l = 0.0;  // plugin baseline only: the min-MSE grid member
};

struct SlopeRow
{
  int d = 0;
  std::string estimator;
  double slope = 0.0;
};

struct MseSweepReport
{
  std::vector<MseCell> cells;
  std::vector<SlopeRow> slopes;
};

//! Per-estimator Q-Q data of a CLT experiment.
struct CltRow
{
  std::string estimator;
  std::size_t trials_used = 0;
  std::size_t trials_flagged = 0;
  double mean = 0.0;
  double sd = 0.0;
  QqData qq;
};

struct CltReport
{
  std::vector<CltRow> rows;
};

//! One grid point of a tuning sweep: axis is "set" or "eta".
struct TuningCell
{
  std::string axis;
  std::string axis_value;
  int d = 0;
  std::size_t n = 0;
  std::string estimator;
  MseSummary stats;
  std::size_t trials_used = 0;
  std::size_t trials_flagged = 0;
};

struct TuningReport
{
  std::vector<TuningCell> cells;
};

//! Rho-sweep output: MSE per (d, N, rho) plus the per-cell argmin.
struct RhoCell
{
  int d = 0;
  std::size_t n = 0;
  double rho = 0.0;
  MseSummary stats;
  std::size_t trials_used = 0;
  std::size_t trials_flagged = 0;
};

struct RhoReport
{
  std::vector<RhoCell> cells;
  struct Best
  {
    int d = 0;
    std::size_t n = 0;
    double rho = 0.0;
    double mse = 0.0;
  };
  std::vector<Best> best;
};

//! Monte Carlo MSE sweep over (d, N) cells for the configured estimators
//! plus the plug-in baseline swept over the second estimator's l grid (its
//! min-MSE member is reported as the baseline). Weights are solved once per
//! cell and shared across trials; trial k of a cell depends only on
//! (seed, d, N, k), so re-running any single trial reproduces it bit-exactly
//! under any thread count. Writes trials.csv, cells.csv, summary.json into
//! config.out_dir.
MseSweepReport run_mse_sweep(const ExperimentConfig& config);

//! T estimates per estimator on one (d, N) cell, studentized into Q-Q data.
//! Requires trials >= 50. Writes estimates.csv, qq.csv, summary.json.
CltReport run_clt_experiment(const ExperimentConfig& config);

//! MSE grids over the bandwidth-range sets and over the eta grid. Writes
//! grid.csv, summary.json.
TuningReport run_tuning_sweep(const ExperimentConfig& config);

//! MSE of the convex combination (1-rho)*first + rho*second over the rho
//! grid, with per-(d, N) argmin. Writes rho.csv, summary.json.
RhoReport run_rho_sweep(const ExperimentConfig& config);

}  // namespace odin
