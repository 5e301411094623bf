#include "odin/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <utility>

#include <json.hpp>

#include "odin/kernel.hpp"
#include "odin/rng.hpp"

namespace odin {

namespace {

using njson = nlohmann::ordered_json;

std::string fmt17(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::vector<double> linspace(double lo, double hi, std::size_t count)
{
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < count; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return out;
}

std::ofstream open_out(const std::filesystem::path& path)
{
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("harness: cannot open " + path.string() + " for writing");
  return f;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body)
{
  const std::size_t workers =
      std::min<std::size_t>(count, threads < 1 ? 1 : static_cast<std::size_t>(threads));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

//! Estimation work shared by every estimator over the same l grid and
//! bandwidth rule: the per-l plug-in values depend on the grid, not on the
//! weights, so each trial evaluates each distinct grid once.
struct GridGroup
{
  int rule_class = 0;  // 0 = first-family bandwidth exponent, 1 = second
  EnsembleConfig config;
  WeightSolution uniform;
};

struct Instance
{
  std::string axis;        // tuning sweeps: "set" or "eta"
  std::string axis_value;
  std::string label;
  EnsembleConfig config;
  WeightSolution weights;
  std::size_t group = 0;
};

//! Per-trial raw results: one entry per grid group.
struct TrialData
{
  std::vector<std::vector<double>> values;
  std::vector<std::int64_t> num_clips;
  std::vector<std::int64_t> den_clips;
  std::vector<std::vector<std::int64_t>> per_l_num;
  std::vector<std::vector<std::int64_t>> per_l_den;
  std::vector<char> flagged;
};

std::size_t group_for(std::vector<GridGroup>& groups, EstimatorKind kind,
                      const std::vector<double>& ls, const FunctionalSpec& functional)
{
  const int rule_class = kind == EstimatorKind::odin1 ? 0 : 1;
  for (std::size_t i = 0; i < groups.size(); ++i)
    if (groups[i].rule_class == rule_class && groups[i].config.l_values == ls) return i;
  GridGroup group;
  group.rule_class = rule_class;
  group.config.kind = rule_class == 0 ? EstimatorKind::odin1 : EstimatorKind::odin2;
  group.config.l_values = ls;
  group.config.functional = functional;
  group.uniform.weights.assign(ls.size(), 1.0 / static_cast<double>(ls.size()));
  groups.push_back(std::move(group));
  return groups.size() - 1;
}

bool trial_destroyed(const FunctionalSpec& g, std::int64_t num_clips, std::int64_t den_clips)
{
  return (g.clip_destroys_numerator() && num_clips > 0) ||
         (g.clip_destroys_denominator() && den_clips > 0);
}

std::vector<TrialData> run_cell_trials(const ExperimentConfig& cfg, int d, std::size_t n,
                                       const std::vector<GridGroup>& groups)
{
  const TruncatedGaussianSpec f1 =
      TruncatedGaussianSpec::uniform(static_cast<std::size_t>(d), cfg.densities.mu1, cfg.densities.var1);
  const TruncatedGaussianSpec f2 =
      TruncatedGaussianSpec::uniform(static_cast<std::size_t>(d), cfg.densities.mu2, cfg.densities.var2);

  std::vector<TrialData> records(cfg.trials);
  auto body = [&](std::size_t t) {
    const SampleSet s1 = tg_sample(
        f1, n, derive_seed(cfg.seed, {static_cast<std::uint64_t>(d), n, t, 0}));
    const SampleSet s2 = tg_sample(
        f2, n, derive_seed(cfg.seed, {static_cast<std::uint64_t>(d), n, t, 1}));
    const DistanceCache cross = pairwise_chebyshev(s2, s1);
    const DistanceCache self = pairwise_chebyshev(s2, s2, true);

    TrialData& rec = records[t];
    rec.values.resize(groups.size());
    rec.num_clips.resize(groups.size());
    rec.den_clips.resize(groups.size());
    rec.per_l_num.resize(groups.size());
    rec.per_l_den.resize(groups.size());
    rec.flagged.resize(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
      EstimateResult r =
          ensemble_estimate_cached(cross, self, groups[g].config, groups[g].uniform);
      rec.values[g] = std::move(r.per_l_values);
      rec.num_clips[g] = r.clipped_num_count;
      rec.den_clips[g] = r.clipped_den_count;
      rec.per_l_num[g] = std::move(r.per_l_clipped_num);
      rec.per_l_den[g] = std::move(r.per_l_clipped_den);
      rec.flagged[g] =
          trial_destroyed(cfg.functional, rec.num_clips[g], rec.den_clips[g]) ? 1 : 0;
    }
  };
  parallel_for(cfg.trials, cfg.threads, body);
  return records;
}

double dot_value(const std::vector<double>& weights, const std::vector<double>& values)
{
  double sum = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) sum += weights[k] * values[k];
  return sum;
}

struct InstanceSeries
{
  std::vector<double> all;    // one value per trial
  std::vector<char> flagged;  // aligned with all
  std::vector<double> used;   // unflagged subset, trial order
};

InstanceSeries collect_instance(const std::vector<TrialData>& records, const Instance& inst)
{
  InstanceSeries out;
  out.all.reserve(records.size());
  out.flagged.reserve(records.size());
  for (const TrialData& rec : records) {
    out.all.push_back(dot_value(inst.weights.weights, rec.values[inst.group]));
    out.flagged.push_back(rec.flagged[inst.group]);
  }
  for (std::size_t t = 0; t < out.all.size(); ++t)
    if (!out.flagged[t]) out.used.push_back(out.all[t]);
  return out;
}

std::string cell_tag(int d, std::size_t n, const std::string& estimator)
{
  return "d=" + std::to_string(d) + " N=" + std::to_string(n) + " estimator=" + estimator;
}

MseSummary summarize_used(const InstanceSeries& series, double truth, int d, std::size_t n,
                          const std::string& label)
{
  if (series.used.size() < 2)
    throw std::runtime_error("harness: cell " + cell_tag(d, n, label) + ": only " +
                             std::to_string(series.used.size()) + " of " +
                             std::to_string(series.all.size()) +
                             " trials usable after the clipping policy");
  return mse_and_se(series.used, truth);
}

std::vector<EstimatorSetup> effective_setups(const ExperimentConfig& cfg)
{
  if (!cfg.estimators.empty()) return cfg.estimators;
  EstimatorSetup one;
  one.kind = EstimatorKind::odin1;
  EstimatorSetup two;
  two.kind = EstimatorKind::odin2;
  return {one, two};
}

const EstimatorSetup* find_setup(const std::vector<EstimatorSetup>& setups, EstimatorKind kind)
{
  for (const EstimatorSetup& s : setups)
    if (s.kind == kind) return &s;
  return nullptr;
}

EstimatorSetup setup_or_default(const std::vector<EstimatorSetup>& setups, EstimatorKind kind)
{
  if (const EstimatorSetup* s = find_setup(setups, kind)) return *s;
  EstimatorSetup fallback;
  fallback.kind = kind;
  return fallback;
}

EnsembleConfig config_from_setup(const EstimatorSetup& setup, const FunctionalSpec& functional)
{
  EnsembleConfig cfg;
  cfg.kind = setup.kind;
  cfg.l_values = setup.l_values();
  cfg.eta = setup.eta;
  cfg.functional = functional;
  cfg.lambda = setup.lambda;
  cfg.s_cap = setup.s_cap;
  return cfg;
}

std::vector<Instance> label_setups(const ExperimentConfig& cfg,
                                   const std::vector<EstimatorSetup>& setups)
{
  std::vector<Instance> out;
  out.reserve(setups.size());
  std::vector<std::size_t> kind_total(3, 0);
  std::vector<std::size_t> kind_seen(3, 0);
  for (const EstimatorSetup& s : setups) ++kind_total[static_cast<std::size_t>(s.kind)];
  for (const EstimatorSetup& s : setups) {
    const std::size_t ordinal = ++kind_seen[static_cast<std::size_t>(s.kind)];
    Instance inst;
    inst.label = to_string(s.kind);
    if (kind_total[static_cast<std::size_t>(s.kind)] > 1)
      inst.label += "#" + std::to_string(ordinal);
    inst.config = config_from_setup(s, cfg.functional);
    out.push_back(std::move(inst));
  }
  return out;
}

void solve_instances(std::vector<Instance>& instances, std::vector<GridGroup>& groups,
                     const ExperimentConfig& cfg, int d, std::size_t n)
{
  for (Instance& inst : instances) {
    inst.group = group_for(groups, inst.config.kind, inst.config.l_values, cfg.functional);
    inst.weights = solve_config_weights(inst.config, d, n);
  }
}

std::vector<std::pair<int, OracleValue>> truths_by_dim(const ExperimentConfig& cfg)
{
  std::vector<std::pair<int, OracleValue>> out;
  for (int d : cfg.dims) {
    bool seen = false;
    for (const auto& entry : out) seen = seen || entry.first == d;
    if (seen) continue;
    const auto du = static_cast<std::size_t>(d);
    const TruncatedGaussianSpec f1 =
        TruncatedGaussianSpec::uniform(du, cfg.densities.mu1, cfg.densities.var1);
    const TruncatedGaussianSpec f2 =
        TruncatedGaussianSpec::uniform(du, cfg.densities.mu2, cfg.densities.var2);
    out.emplace_back(d, true_divergence(cfg.functional, f1, f2));
  }
  return out;
}

double truth_for(const std::vector<std::pair<int, OracleValue>>& truths, int d)
{
  for (const auto& entry : truths)
    if (entry.first == d) return entry.second.value;
  throw std::logic_error("harness: no truth computed for d=" + std::to_string(d));
}

njson functional_json(const FunctionalSpec& g)
{
  njson j;
  j["name"] = g.name;
  if (g.kind == FunctionalSpec::Kind::renyi) j["alpha"] = g.alpha;
  return j;
}

njson densities_json(const DensityPairSpec& dp)
{
  return njson{{"mu1", dp.mu1}, {"var1", dp.var1}, {"mu2", dp.mu2}, {"var2", dp.var2}};
}

njson summary_json(const MseSummary& s)
{
  return njson{{"mse", s.mse}, {"se", s.se}, {"bias", s.bias}, {"variance", s.variance}};
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
  std::ofstream f = open_out(path);
  f << text;
  if (!f) throw std::runtime_error("harness: failed writing " + path.string());
}

void write_json(const std::filesystem::path& path, const njson& j)
{
  write_text(path, j.dump(2) + "\n");
}

void ensure_out_dir(const ExperimentConfig& cfg)
{
  std::filesystem::create_directories(cfg.out_dir);
}

}  // namespace

std::string to_string(ExperimentKind kind)
{
  switch (kind) {
    case ExperimentKind::mse_sweep: return "mse-sweep";
    case ExperimentKind::clt: return "clt";
    case ExperimentKind::tuning_sweep: return "tuning-sweep";
    case ExperimentKind::rho_sweep: return "rho-sweep";
  }
  throw std::logic_error("to_string: unknown experiment kind");
}

std::vector<double> EstimatorSetup::l_values() const
{
  if (L < 1) throw std::invalid_argument("EstimatorSetup: L must be >= 1");
  if (l_min == 0.0 && l_max == 0.0) return EnsembleConfig::default_l_values(kind, L);
  if (!(l_min > 0.0) || !std::isfinite(l_min) || !std::isfinite(l_max))
    throw std::invalid_argument("EstimatorSetup: l range must be positive and finite");
  if (L > 1 && !(l_max > l_min))
    throw std::invalid_argument("EstimatorSetup: need l_max > l_min for L > 1");
  return linspace(l_min, l_max, L);
}

std::vector<LSet> ExperimentConfig::default_l_sets()
{
  return {
      {"set1", 1.50, 3.00, 2.00, 3.00},
      {"set2", 1.75, 3.00, 2.25, 3.00},
      {"set3", 2.00, 3.00, 2.50, 3.00},
      {"set4", 2.25, 3.00, 2.75, 3.00},
      {"set5", 2.50, 3.00, 2.75, 3.25},
  };
}

void ExperimentConfig::validate() const
{
  if (dims.empty()) throw std::invalid_argument("config: dims must not be empty");
  for (int d : dims)
    if (d < 1) throw std::invalid_argument("config: dims entries must be >= 1");
  if (sample_sizes.empty()) throw std::invalid_argument("config: sample_sizes must not be empty");
  for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
    if (sample_sizes[i] < 2)
      throw std::invalid_argument("config: sample sizes must be >= 2");
    if (i > 0 && sample_sizes[i] <= sample_sizes[i - 1])
      throw std::invalid_argument("config: sample_sizes must be strictly increasing");
  }
  if (trials < 2) throw std::invalid_argument("config: trials must be >= 2");
  if (functional.name.empty()) throw std::invalid_argument("config: functional name is empty");
  if (functional.kind == FunctionalSpec::Kind::renyi &&
      !(functional.alpha > 0.0 && functional.alpha < 1.0))
    throw std::invalid_argument("config: renyi alpha must lie in (0,1)");
  if (!(functional.clip_floor > 0.0))
    throw std::invalid_argument("config: clip_floor must be positive");
  if (!(densities.var1 > 0.0) || !(densities.var2 > 0.0) || !std::isfinite(densities.mu1) ||
      !std::isfinite(densities.mu2))
    throw std::invalid_argument("config: densities need finite means and positive variances");
  for (const EstimatorSetup& s : estimators) {
    if (s.kind == EstimatorKind::plugin_baseline)
      throw std::invalid_argument(
          "config: the plug-in baseline is controlled by include_plugin_baseline, not the "
          "estimator list");
    s.l_values();  // validates the range
    if (!s.eta.auto_mode && !(s.eta.fixed_value > 0.0))
      throw std::invalid_argument("config: fixed eta must be positive");
    if (s.lambda < 0) throw std::invalid_argument("config: lambda must be >= 0");
  }
  for (const LSet& set : l_sets) {
    if (set.name.empty()) throw std::invalid_argument("config: l_sets entries need a name");
    if (!(set.l1_min > 0.0 && set.l1_max > set.l1_min))
      throw std::invalid_argument("config: l_sets entry " + set.name + " has a bad first range");
    if (!(set.l2_min > 0.0 && set.l2_max > set.l2_min))
      throw std::invalid_argument("config: l_sets entry " + set.name + " has a bad second range");
  }
  for (double eta : eta_grid)
    if (!(eta > 0.0) || !std::isfinite(eta))
      throw std::invalid_argument("config: eta_grid entries must be positive and finite");
  for (double rho : rho_grid)
    if (!(rho >= 0.0 && rho <= 1.0))
      throw std::invalid_argument("config: rho_grid entries must lie in [0,1]");
  if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
  if (out_dir.empty()) throw std::invalid_argument("config: out_dir must not be empty");

  switch (kind) {
    case ExperimentKind::clt:
      if (trials < 50)
        throw std::invalid_argument("config: clt experiments need trials >= 50, got " +
                                    std::to_string(trials));
      if (dims.size() != 1 || sample_sizes.size() != 1)
        throw std::invalid_argument("config: clt experiments run one (d, N) cell");
      break;
    case ExperimentKind::tuning_sweep:
      if (eta_grid.empty())
        throw std::invalid_argument("config: tuning sweeps need a nonempty eta_grid");
      break;
    default: break;
  }
}

namespace {

ExperimentKind parse_kind(const std::string& text)
{
  if (text == "mse-sweep") return ExperimentKind::mse_sweep;
  if (text == "clt") return ExperimentKind::clt;
  if (text == "tuning-sweep" || text == "tuning") return ExperimentKind::tuning_sweep;
  if (text == "rho-sweep" || text == "rho") return ExperimentKind::rho_sweep;
  throw std::invalid_argument("config: unknown experiment kind \"" + text + "\"");
}

void require_keys(const njson& j, std::initializer_list<const char*> allowed, const char* where)
{
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) known = known || it.key() == key;
    if (!known)
      throw std::invalid_argument(std::string("config: unknown key \"") + it.key() + "\" in " +
                                  where);
  }
}

FunctionalSpec functional_from_json(const njson& j)
{
  if (j.is_string()) return parse_functional(j.get<std::string>());
  if (!j.is_object())
    throw std::invalid_argument("config: functional must be a string or an object");
  require_keys(j, {"name", "alpha"}, "functional");
  const std::string name = j.at("name").get<std::string>();
  if (name == "kl") return make_kl();
  if (name == "one" || name == "constant_one") return make_constant_one();
  if (name == "renyi") {
    if (!j.contains("alpha"))
      throw std::invalid_argument("config: renyi functional needs alpha");
    return make_renyi(j.at("alpha").get<double>());
  }
  throw std::invalid_argument("config: unknown functional name \"" + name + "\"");
}

EstimatorKind estimator_kind_from(const std::string& text)
{
  if (text == "odin1") return EstimatorKind::odin1;
  if (text == "odin2") return EstimatorKind::odin2;
  throw std::invalid_argument("config: estimator kind must be odin1 or odin2, got \"" + text +
                              "\"");
}

EstimatorSetup setup_from_json(const njson& j)
{
  if (!j.is_object()) throw std::invalid_argument("config: estimators entries must be objects");
  require_keys(j, {"kind", "L", "l_min", "l_max", "eta", "lambda", "s_cap"}, "estimators entry");
  EstimatorSetup s;
  s.kind = estimator_kind_from(j.at("kind").get<std::string>());
  if (j.contains("L")) s.L = j.at("L").get<std::size_t>();
  if (j.contains("l_min")) s.l_min = j.at("l_min").get<double>();
  if (j.contains("l_max")) s.l_max = j.at("l_max").get<double>();
  if (j.contains("eta")) {
    const njson& eta = j.at("eta");
    if (eta.is_string()) {
      if (eta.get<std::string>() != "auto")
        throw std::invalid_argument("config: eta must be \"auto\" or a number");
      s.eta = EtaPolicy::automatic();
    } else {
      s.eta = EtaPolicy::fixed(eta.get<double>());
    }
  }
  if (j.contains("lambda")) s.lambda = j.at("lambda").get<int>();
  if (j.contains("s_cap")) s.s_cap = j.at("s_cap").get<int>();
  return s;
}

LSet l_set_from_json(const njson& j)
{
  if (!j.is_object()) throw std::invalid_argument("config: l_sets entries must be objects");
  require_keys(j, {"name", "l1_min", "l1_max", "l2_min", "l2_max"}, "l_sets entry");
  LSet set;
  set.name = j.at("name").get<std::string>();
  set.l1_min = j.at("l1_min").get<double>();
  set.l1_max = j.at("l1_max").get<double>();
  set.l2_min = j.at("l2_min").get<double>();
  set.l2_max = j.at("l2_max").get<double>();
  return set;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text)
{
  njson j;
  try {
    j = njson::parse(json_text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("config: JSON parse failure: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  require_keys(j,
               {"kind", "dims", "sample_sizes", "trials", "seed", "functional", "densities",
                "estimators", "include_plugin_baseline", "l_sets", "eta_grid", "rho_grid",
                "threads", "out_dir"},
               "top level");

  ExperimentConfig cfg;
  try {
    if (j.contains("kind")) cfg.kind = parse_kind(j.at("kind").get<std::string>());
    if (j.contains("dims")) cfg.dims = j.at("dims").get<std::vector<int>>();
    if (j.contains("sample_sizes"))
      cfg.sample_sizes = j.at("sample_sizes").get<std::vector<std::size_t>>();
    if (j.contains("trials")) cfg.trials = j.at("trials").get<std::size_t>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("functional")) cfg.functional = functional_from_json(j.at("functional"));
    if (j.contains("densities")) {
      const njson& dj = j.at("densities");
      if (!dj.is_object()) throw std::invalid_argument("config: densities must be an object");
      require_keys(dj, {"mu1", "var1", "mu2", "var2"}, "densities");
      if (dj.contains("mu1")) cfg.densities.mu1 = dj.at("mu1").get<double>();
      if (dj.contains("var1")) cfg.densities.var1 = dj.at("var1").get<double>();
      if (dj.contains("mu2")) cfg.densities.mu2 = dj.at("mu2").get<double>();
      if (dj.contains("var2")) cfg.densities.var2 = dj.at("var2").get<double>();
    }
    if (j.contains("estimators")) {
      if (!j.at("estimators").is_array())
        throw std::invalid_argument("config: estimators must be an array");
      cfg.estimators.clear();
      for (const njson& entry : j.at("estimators")) cfg.estimators.push_back(setup_from_json(entry));
    }
    if (j.contains("include_plugin_baseline"))
      cfg.include_plugin_baseline = j.at("include_plugin_baseline").get<bool>();
    if (j.contains("l_sets")) {
      if (!j.at("l_sets").is_array()) throw std::invalid_argument("config: l_sets must be an array");
      cfg.l_sets.clear();
      for (const njson& entry : j.at("l_sets")) cfg.l_sets.push_back(l_set_from_json(entry));
    }
    if (j.contains("eta_grid")) cfg.eta_grid = j.at("eta_grid").get<std::vector<double>>();
    else cfg.eta_grid = {0.5, 1.0, 2.0, 3.16, 5.0, 10.0};
    if (j.contains("rho_grid")) cfg.rho_grid = j.at("rho_grid").get<std::vector<double>>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
  } catch (const njson::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return cfg;
}

MseSweepReport run_mse_sweep(const ExperimentConfig& config)
{
  config.validate();
  ensure_out_dir(config);

  const std::vector<EstimatorSetup> setups = effective_setups(config);
  const EstimatorSetup baseline_setup = setup_or_default(setups, EstimatorKind::odin2);
  const std::vector<double> baseline_grid = baseline_setup.l_values();
  const auto truths = truths_by_dim(config);

  MseSweepReport report;
  std::string trials_csv = "d,N,estimator,trial,estimate,clipped_num,clipped_den,flagged\n";
  std::string cells_csv =
      "d,N,estimator,mse,se,bias,variance,trials_used,trials_flagged,truth,chosen_l\n";

  for (int d : config.dims) {
    const double truth = truth_for(truths, d);
    for (std::size_t n : config.sample_sizes) {
      std::vector<GridGroup> groups;
      std::vector<Instance> instances = label_setups(config, setups);
      solve_instances(instances, groups, config, d, n);
      std::size_t baseline_group = 0;
      if (config.include_plugin_baseline)
        baseline_group =
            group_for(groups, EstimatorKind::plugin_baseline, baseline_grid, config.functional);

      const std::vector<TrialData> records = run_cell_trials(config, d, n, groups);

      for (const Instance& inst : instances) {
        const InstanceSeries series = collect_instance(records, inst);
        MseCell cell;
        cell.d = d;
        cell.n = n;
        cell.estimator = inst.label;
        cell.truth = truth;
        cell.trials_used = series.used.size();
        cell.trials_flagged = series.all.size() - series.used.size();
        cell.stats = summarize_used(series, truth, d, n, inst.label);
        report.cells.push_back(cell);

        for (std::size_t t = 0; t < records.size(); ++t) {
          trials_csv += std::to_string(d) + "," + std::to_string(n) + "," + inst.label + "," +
                        std::to_string(t) + "," + fmt17(series.all[t]) + "," +
                        std::to_string(records[t].num_clips[inst.group]) + "," +
                        std::to_string(records[t].den_clips[inst.group]) + "," +
                        (series.flagged[t] ? "1" : "0") + "\n";
        }
      }

      if (config.include_plugin_baseline) {
        // Sweep the grid: the baseline reports its best fixed bandwidth.
        const std::size_t L = baseline_grid.size();
        std::size_t best_l = L;
        MseSummary best_stats;
        std::size_t best_used = 0;
        for (std::size_t k = 0; k < L; ++k) {
          std::vector<double> used;
          for (const TrialData& rec : records) {
            const bool bad =
                (config.functional.clip_destroys_numerator() && rec.per_l_num[baseline_group][k] > 0) ||
                (config.functional.clip_destroys_denominator() && rec.per_l_den[baseline_group][k] > 0);
            if (!bad) used.push_back(rec.values[baseline_group][k]);
          }
          if (used.size() < 2) continue;
          const MseSummary stats = mse_and_se(used, truth);
          if (best_l == L || stats.mse < best_stats.mse) {
            best_l = k;
            best_stats = stats;
            best_used = used.size();
          }
        }
        if (best_l == L)
          throw std::runtime_error("harness: cell " + cell_tag(d, n, "plugin") +
                                   ": every grid bandwidth left fewer than 2 usable trials");

        MseCell cell;
        cell.d = d;
        cell.n = n;
        cell.estimator = "plugin";
        cell.truth = truth;
        cell.stats = best_stats;
        cell.trials_used = best_used;
        cell.trials_flagged = records.size() - best_used;
        cell.chosen_l = baseline_grid[best_l];
        report.cells.push_back(cell);

        for (std::size_t t = 0; t < records.size(); ++t) {
          const TrialData& rec = records[t];
          const bool bad =
              (config.functional.clip_destroys_numerator() && rec.per_l_num[baseline_group][best_l] > 0) ||
              (config.functional.clip_destroys_denominator() && rec.per_l_den[baseline_group][best_l] > 0);
          trials_csv += std::to_string(d) + "," + std::to_string(n) + ",plugin," +
                        std::to_string(t) + "," + fmt17(rec.values[baseline_group][best_l]) + "," +
                        std::to_string(rec.per_l_num[baseline_group][best_l]) + "," +
                        std::to_string(rec.per_l_den[baseline_group][best_l]) + "," +
                        (bad ? "1" : "0") + "\n";
        }
      }
    }
  }

  // One slope per (d, estimator) with at least two sample sizes.
  if (config.sample_sizes.size() >= 2) {
    for (int d : config.dims) {
      std::vector<std::string> labels;
      for (const MseCell& cell : report.cells)
        if (cell.d == d) {
          bool seen = false;
          for (const std::string& l : labels) seen = seen || l == cell.estimator;
          if (!seen) labels.push_back(cell.estimator);
        }
      for (const std::string& label : labels) {
        std::vector<double> ns;
        std::vector<double> mses;
        for (const MseCell& cell : report.cells)
          if (cell.d == d && cell.estimator == label) {
            ns.push_back(static_cast<double>(cell.n));
            mses.push_back(cell.stats.mse);
          }
        SlopeRow row;
        row.d = d;
        row.estimator = label;
        row.slope = loglog_slope(ns, mses);
        report.slopes.push_back(row);
      }
    }
  }

  for (const MseCell& cell : report.cells) {
    cells_csv += std::to_string(cell.d) + "," + std::to_string(cell.n) + "," + cell.estimator +
                 "," + fmt17(cell.stats.mse) + "," + fmt17(cell.stats.se) + "," +
                 fmt17(cell.stats.bias) + "," + fmt17(cell.stats.variance) + "," +
                 std::to_string(cell.trials_used) + "," + std::to_string(cell.trials_flagged) +
                 "," + fmt17(cell.truth) + "," + fmt17(cell.chosen_l) + "\n";
  }

  const std::filesystem::path out(config.out_dir);
  write_text(out / "trials.csv", trials_csv);
  write_text(out / "cells.csv", cells_csv);

  njson summary;
  summary["kind"] = to_string(config.kind);
  summary["seed"] = config.seed;
  summary["trials"] = config.trials;
  summary["functional"] = functional_json(config.functional);
  summary["densities"] = densities_json(config.densities);
  njson truth_obj = njson::object();
  for (const auto& entry : truths) truth_obj[std::to_string(entry.first)] = entry.second.value;
  summary["truth"] = truth_obj;
  summary["cells"] = njson::array();
  for (const MseCell& cell : report.cells) {
    njson c;
    c["d"] = cell.d;
    c["N"] = cell.n;
    c["estimator"] = cell.estimator;
    c["stats"] = summary_json(cell.stats);
    c["trials_used"] = cell.trials_used;
    c["trials_flagged"] = cell.trials_flagged;
    if (cell.estimator == "plugin") c["chosen_l"] = cell.chosen_l;
    summary["cells"].push_back(c);
  }
  summary["slopes"] = njson::array();
  for (const SlopeRow& row : report.slopes)
    summary["slopes"].push_back(njson{{"d", row.d}, {"estimator", row.estimator}, {"slope", row.slope}});
  write_json(out / "summary.json", summary);

  return report;
}

CltReport run_clt_experiment(const ExperimentConfig& config)
{
  config.validate();
  ensure_out_dir(config);

  const int d = config.dims.front();
  const std::size_t n = config.sample_sizes.front();
  const std::vector<EstimatorSetup> setups = effective_setups(config);
  const auto truths = truths_by_dim(config);
  const double truth = truth_for(truths, d);

  std::vector<GridGroup> groups;
  std::vector<Instance> instances = label_setups(config, setups);
  solve_instances(instances, groups, config, d, n);
  const std::vector<TrialData> records = run_cell_trials(config, d, n, groups);

  CltReport report;
  std::string estimates_csv = "estimator,trial,estimate,flagged\n";
  std::string qq_csv = "estimator,k,theoretical,empirical\n";

  for (const Instance& inst : instances) {
    const InstanceSeries series = collect_instance(records, inst);
    if (series.used.size() < 10)
      throw std::runtime_error("harness: cell " + cell_tag(d, n, inst.label) + ": only " +
                               std::to_string(series.used.size()) +
                               " usable trials, need >= 10 for a Q-Q check");
    CltRow row;
    row.estimator = inst.label;
    row.trials_used = series.used.size();
    row.trials_flagged = series.all.size() - series.used.size();
    double mean = 0.0;
    for (double v : series.used) mean += v;
    mean /= static_cast<double>(series.used.size());
    double var = 0.0;
    for (double v : series.used) var += (v - mean) * (v - mean);
    var /= static_cast<double>(series.used.size() - 1);
    row.mean = mean;
    row.sd = std::sqrt(var);
    row.qq = qq_points(series.used);
    report.rows.push_back(row);

    for (std::size_t t = 0; t < records.size(); ++t)
      estimates_csv += inst.label + "," + std::to_string(t) + "," + fmt17(series.all[t]) + "," +
                       (series.flagged[t] ? "1" : "0") + "\n";
    const CltRow& stored = report.rows.back();
    for (std::size_t k = 0; k < stored.qq.theoretical.size(); ++k)
      qq_csv += inst.label + "," + std::to_string(k) + "," + fmt17(stored.qq.theoretical[k]) +
                "," + fmt17(stored.qq.empirical[k]) + "\n";
  }

  const std::filesystem::path out(config.out_dir);
  write_text(out / "estimates.csv", estimates_csv);
  write_text(out / "qq.csv", qq_csv);

  njson summary;
  summary["kind"] = to_string(config.kind);
  summary["seed"] = config.seed;
  summary["d"] = d;
  summary["N"] = n;
  summary["trials"] = config.trials;
  summary["functional"] = functional_json(config.functional);
  summary["densities"] = densities_json(config.densities);
  summary["truth"] = truth;
  summary["rows"] = njson::array();
  for (const CltRow& row : report.rows) {
    njson r;
    r["estimator"] = row.estimator;
    r["trials_used"] = row.trials_used;
    r["trials_flagged"] = row.trials_flagged;
    r["mean"] = row.mean;
    r["sd"] = row.sd;
    r["qq_correlation"] = row.qq.correlation;
    summary["rows"].push_back(r);
  }
  write_json(out / "summary.json", summary);

  return report;
}

TuningReport run_tuning_sweep(const ExperimentConfig& config)
{
  config.validate();
  ensure_out_dir(config);

  const std::vector<EstimatorSetup> setups = effective_setups(config);
  const EstimatorSetup base1 = setup_or_default(setups, EstimatorKind::odin1);
  const EstimatorSetup base2 = setup_or_default(setups, EstimatorKind::odin2);
  const std::vector<LSet> sets =
      config.l_sets.empty() ? ExperimentConfig::default_l_sets() : config.l_sets;
  const auto truths = truths_by_dim(config);

  TuningReport report;
  std::string grid_csv = "axis,value,d,N,estimator,mse,se,bias,variance,trials_used,trials_flagged\n";

  for (int d : config.dims) {
    const double truth = truth_for(truths, d);
    for (std::size_t n : config.sample_sizes) {
      std::vector<Instance> instances;
      for (const LSet& set : sets) {
        for (int which = 0; which < 2; ++which) {
          EstimatorSetup s = which == 0 ? base1 : base2;
          s.l_min = which == 0 ? set.l1_min : set.l2_min;
          s.l_max = which == 0 ? set.l1_max : set.l2_max;
          Instance inst;
          inst.axis = "set";
          inst.axis_value = set.name;
          inst.label = to_string(s.kind);
          inst.config = config_from_setup(s, config.functional);
          instances.push_back(std::move(inst));
        }
      }
      for (double eta : config.eta_grid) {
        for (int which = 0; which < 2; ++which) {
          EstimatorSetup s = which == 0 ? base1 : base2;
          s.eta = EtaPolicy::fixed(eta);
          Instance inst;
          inst.axis = "eta";
          inst.axis_value = fmt_short(eta);
          inst.label = to_string(s.kind);
          inst.config = config_from_setup(s, config.functional);
          instances.push_back(std::move(inst));
        }
      }

      std::vector<GridGroup> groups;
      solve_instances(instances, groups, config, d, n);
      const std::vector<TrialData> records = run_cell_trials(config, d, n, groups);

      for (const Instance& inst : instances) {
        const InstanceSeries series = collect_instance(records, inst);
        TuningCell cell;
        cell.axis = inst.axis;
        cell.axis_value = inst.axis_value;
        cell.d = d;
        cell.n = n;
        cell.estimator = inst.label;
        cell.trials_used = series.used.size();
        cell.trials_flagged = series.all.size() - series.used.size();
        cell.stats = summarize_used(series, truth, d, n,
                                    inst.label + "@" + inst.axis + "=" + inst.axis_value);
        report.cells.push_back(cell);
        grid_csv += inst.axis + "," + inst.axis_value + "," + std::to_string(d) + "," +
                    std::to_string(n) + "," + inst.label + "," + fmt17(cell.stats.mse) + "," +
                    fmt17(cell.stats.se) + "," + fmt17(cell.stats.bias) + "," +
                    fmt17(cell.stats.variance) + "," + std::to_string(cell.trials_used) + "," +
                    std::to_string(cell.trials_flagged) + "\n";
      }
    }
  }

  const std::filesystem::path out(config.out_dir);
  write_text(out / "grid.csv", grid_csv);

  njson summary;
  summary["kind"] = to_string(config.kind);
  summary["seed"] = config.seed;
  summary["trials"] = config.trials;
  summary["functional"] = functional_json(config.functional);
  summary["densities"] = densities_json(config.densities);
  summary["cells"] = njson::array();
  for (const TuningCell& cell : report.cells) {
    njson c;
    c["axis"] = cell.axis;
    c["value"] = cell.axis_value;
    c["d"] = cell.d;
    c["N"] = cell.n;
    c["estimator"] = cell.estimator;
    c["stats"] = summary_json(cell.stats);
    c["trials_used"] = cell.trials_used;
    c["trials_flagged"] = cell.trials_flagged;
    summary["cells"].push_back(c);
  }
  write_json(out / "summary.json", summary);

  return report;
}

RhoReport run_rho_sweep(const ExperimentConfig& config)
{
  config.validate();
  ensure_out_dir(config);

  const std::vector<EstimatorSetup> setups = effective_setups(config);
  const EstimatorSetup setup1 = setup_or_default(setups, EstimatorKind::odin1);
  const EstimatorSetup setup2 = setup_or_default(setups, EstimatorKind::odin2);
  std::vector<double> rho_grid = config.rho_grid;
  if (rho_grid.empty())
    for (int k = 0; k <= 20; ++k) rho_grid.push_back(static_cast<double>(k) / 20.0);
  const auto truths = truths_by_dim(config);

  RhoReport report;
  std::string rho_csv = "d,N,rho,mse,se,bias,variance,trials_used,trials_flagged\n";

  for (int d : config.dims) {
    const double truth = truth_for(truths, d);
    for (std::size_t n : config.sample_sizes) {
      std::vector<Instance> instances;
      for (int which = 0; which < 2; ++which) {
        Instance inst;
        inst.label = to_string(which == 0 ? EstimatorKind::odin1 : EstimatorKind::odin2);
        inst.config = config_from_setup(which == 0 ? setup1 : setup2, config.functional);
        instances.push_back(std::move(inst));
      }
      std::vector<GridGroup> groups;
      solve_instances(instances, groups, config, d, n);
      const std::vector<TrialData> records = run_cell_trials(config, d, n, groups);

      const InstanceSeries series1 = collect_instance(records, instances[0]);
      const InstanceSeries series2 = collect_instance(records, instances[1]);

      RhoReport::Best best;
      best.d = d;
      best.n = n;
      bool have_best = false;
      for (double rho : rho_grid) {
        std::vector<double> used;
        std::size_t flagged = 0;
        for (std::size_t t = 0; t < records.size(); ++t) {
          if (series1.flagged[t] || series2.flagged[t]) {
            ++flagged;
            continue;
          }
          used.push_back((1.0 - rho) * series1.all[t] + rho * series2.all[t]);
        }
        RhoCell cell;
        cell.d = d;
        cell.n = n;
        cell.rho = rho;
        cell.trials_used = used.size();
        cell.trials_flagged = flagged;
        if (used.size() < 2)
          throw std::runtime_error("harness: cell " + cell_tag(d, n, "combined") + ": only " +
                                   std::to_string(used.size()) +
                                   " trials usable after the clipping policy");
        cell.stats = mse_and_se(used, truth);
        report.cells.push_back(cell);
        rho_csv += std::to_string(d) + "," + std::to_string(n) + "," + fmt17(rho) + "," +
                   fmt17(cell.stats.mse) + "," + fmt17(cell.stats.se) + "," +
                   fmt17(cell.stats.bias) + "," + fmt17(cell.stats.variance) + "," +
                   std::to_string(cell.trials_used) + "," + std::to_string(cell.trials_flagged) +
                   "\n";
        if (!have_best || cell.stats.mse < best.mse) {
          have_best = true;
          best.rho = rho;
          best.mse = cell.stats.mse;
        }
      }
      report.best.push_back(best);
    }
  }

  const std::filesystem::path out(config.out_dir);
  write_text(out / "rho.csv", rho_csv);

  njson summary;
  summary["kind"] = to_string(config.kind);
  summary["seed"] = config.seed;
  summary["trials"] = config.trials;
  summary["functional"] = functional_json(config.functional);
  summary["densities"] = densities_json(config.densities);
  summary["cells"] = njson::array();
  for (const RhoCell& cell : report.cells) {
    njson c;
    c["d"] = cell.d;
    c["N"] = cell.n;
    c["rho"] = cell.rho;
    c["stats"] = summary_json(cell.stats);
    c["trials_used"] = cell.trials_used;
    c["trials_flagged"] = cell.trials_flagged;
    summary["cells"].push_back(c);
  }
  summary["best"] = njson::array();
  for (const RhoReport::Best& b : report.best)
    summary["best"].push_back(njson{{"d", b.d}, {"N", b.n}, {"rho", b.rho}, {"mse", b.mse}});
  write_json(out / "summary.json", summary);

  return report;
}

}  // namespace odin
