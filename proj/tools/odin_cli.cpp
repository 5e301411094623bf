#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "odin/distributions.hpp"
#include "odin/ensemble.hpp"
#include "odin/estimators.hpp"
#include "odin/functionals.hpp"
#include "odin/harness.hpp"
#include "odin/sample_set.hpp"

namespace {

using njson = nlohmann::ordered_json;

odin::EtaPolicy parse_eta(const std::string& text)
{
  if (text == "auto") return odin::EtaPolicy::automatic();
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw CLI::ValidationError("--eta", "expected \"auto\" or a number, got \"" + text + "\"");
  }
  if (used != text.size())
    throw CLI::ValidationError("--eta", "expected \"auto\" or a number, got \"" + text + "\"");
  return odin::EtaPolicy::fixed(value);
}

njson estimate_json(const odin::EstimateResult& r)
{
  njson j;
  j["value"] = r.value;
  j["h1"] = r.h1;
  j["h2"] = r.h2;
  j["clipped_count"] = r.clipped_count;
  j["clipped_num_count"] = r.clipped_num_count;
  j["clipped_den_count"] = r.clipped_den_count;
  j["n1"] = r.n1;
  j["n2"] = r.n2;
  if (!r.per_l_values.empty()) j["per_l_values"] = r.per_l_values;
  return j;
}

njson weights_json(const odin::WeightSolution& w)
{
  njson j;
  j["weights"] = w.weights;
  j["epsilon"] = w.epsilon;
  j["norm_sq"] = w.norm_sq;
  j["eta"] = w.eta;
  j["iterations"] = w.iterations;
  j["residuals"] = w.residuals;
  j["scaled_residuals"] = w.scaled_residuals;
  return j;
}

struct EstimateArgs {
  std::string estimator = "odin1";
  std::string functional = "renyi:alpha=0.5";
  std::string f1_path;
  std::string f2_path;
  std::size_t L = 50;
  double l_min = 0.0;
  double l_max = 0.0;
  std::string eta = "auto";
  int lambda = 0;
  int s_cap = -1;
};

int run_estimate(const EstimateArgs& args)
{
  const odin::FunctionalSpec g = odin::parse_functional(args.functional);
  const odin::SampleSet s1 = odin::read_sample_csv(args.f1_path);
  const odin::SampleSet s2 = odin::read_sample_csv(args.f2_path);

  auto setup_config = [&](odin::EstimatorKind kind) {
    odin::EstimatorSetup setup;
    setup.kind = kind;
    setup.L = args.L;
    setup.l_min = args.l_min;
    setup.l_max = args.l_max;
    setup.eta = parse_eta(args.eta);
    setup.lambda = args.lambda;
    setup.s_cap = args.s_cap;
    odin::EnsembleConfig cfg;
    cfg.kind = setup.kind;
    cfg.l_values = setup.l_values();
    cfg.eta = setup.eta;
    cfg.functional = g;
    cfg.lambda = setup.lambda;
    cfg.s_cap = setup.s_cap;
    return cfg;
  };

  njson out;
  out["estimator"] = args.estimator;
  out["functional"] = args.functional;

  const std::string combined_prefix = "combined:rho=";
  if (args.estimator == "odin1" || args.estimator == "odin2") {
    const odin::EstimatorKind kind = args.estimator == "odin1" ? odin::EstimatorKind::odin1
                                                               : odin::EstimatorKind::odin2;
    const odin::EnsembleConfig cfg = setup_config(kind);
    const odin::WeightSolution w = odin::solve_config_weights(cfg, static_cast<int>(s1.dim()),
                                                              s2.n());
    out["estimate"] = estimate_json(odin::ensemble_estimate(s1, s2, cfg, w));
    out["weights"] = weights_json(w);
  } else if (args.estimator == "plugin") {
    // A single fixed bandwidth: h = l * N^(-1/(d+1)) at one grid point l.
    double l = 2.5;
    if (args.l_min != 0.0 || args.l_max != 0.0) {
      if (args.l_max != 0.0 && args.l_max != args.l_min)
        throw CLI::ValidationError("--lmax", "the plug-in estimator takes a single l; "
                                             "pass --lmin alone or --lmin == --lmax");
      l = args.l_min;
    }
    const double d = static_cast<double>(s1.dim());
    const double h = l * std::pow(static_cast<double>(s2.n()), -1.0 / (d + 1.0));
    out["estimate"] = estimate_json(odin::plugin_estimate(s1, s2, h, h, g));
    out["l"] = l;
  } else if (args.estimator.rfind(combined_prefix, 0) == 0) {
    const std::string tail = args.estimator.substr(combined_prefix.size());
    std::size_t used = 0;
    double rho = 0.0;
    try {
      rho = std::stod(tail, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tail.size() || !(rho >= 0.0 && rho <= 1.0))
      throw CLI::ValidationError("--estimator", "combined needs rho in [0,1], got \"" + tail + "\"");
    if (args.l_min != 0.0 || args.l_max != 0.0)
      throw CLI::ValidationError("--lmin", "combined uses each estimator's default grid; "
                                           "--lmin/--lmax are not supported with it");
    const odin::EnsembleConfig cfg1 = setup_config(odin::EstimatorKind::odin1);
    const odin::EnsembleConfig cfg2 = setup_config(odin::EstimatorKind::odin2);
    out["estimate"] = estimate_json(odin::combined_estimate(s1, s2, cfg1, cfg2, rho));
    out["rho"] = rho;
  } else {
    throw CLI::ValidationError("--estimator",
                               "expected odin1, odin2, plugin, or combined:rho=R, got \"" +
                                   args.estimator + "\"");
  }

  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Ensemble divergence estimation: weighted kernel plug-in estimators,\n"
               "exact divergence oracles for truncated Gaussians, and the Monte Carlo\n"
               "experiment runner."};
  app.require_subcommand(1);

  // ---- estimate ----
  EstimateArgs est;
  CLI::App* estimate = app.add_subcommand("estimate", "Estimate a divergence from two sample CSVs");
  estimate->add_option("--estimator", est.estimator,
                       "odin1 | odin2 | plugin | combined:rho=R")->capture_default_str();
  estimate->add_option("--functional", est.functional, "kl | renyi:alpha=A")->capture_default_str();
  estimate->add_option("--f1", est.f1_path, "CSV of samples from the first density")->required();
  estimate->add_option("--f2", est.f2_path, "CSV of samples from the second density")->required();
  estimate->add_option("--L", est.L, "grid size")->capture_default_str();
  estimate->add_option("--lmin", est.l_min, "grid lower end (0 = estimator default)");
  estimate->add_option("--lmax", est.l_max, "grid upper end (0 = estimator default)");
  estimate->add_option("--eta", est.eta, "\"auto\" or a positive norm bound")->capture_default_str();
  estimate->add_option("--lambda", est.lambda, "density smoothness (even, >= d+1; 0 = default)");
  estimate->add_option("--s-cap", est.s_cap, "functional smoothness cap (< 0 = unbounded)");

  // ---- weights ----
  struct {
    std::string estimator = "odin1";
    int d = 1;
    std::size_t n = 100;
    std::size_t L = 50;
    double l_min = 0.0;
    double l_max = 0.0;
    std::string eta = "auto";
    int lambda = 0;
    int s_cap = -1;
  } wargs;
  CLI::App* weights = app.add_subcommand("weights", "Solve and print ensemble weights as JSON");
  weights->add_option("--estimator", wargs.estimator, "odin1 | odin2")->capture_default_str();
  weights->add_option("--d", wargs.d, "sample dimension")->required();
  weights->add_option("--N", wargs.n, "sample size")->required();
  weights->add_option("--L", wargs.L, "grid size")->capture_default_str();
  weights->add_option("--lmin", wargs.l_min, "grid lower end (0 = estimator default)");
  weights->add_option("--lmax", wargs.l_max, "grid upper end (0 = estimator default)");
  weights->add_option("--eta", wargs.eta, "\"auto\" or a positive norm bound")->capture_default_str();
  weights->add_option("--lambda", wargs.lambda, "density smoothness (even, >= d+1; 0 = default)");
  weights->add_option("--s-cap", wargs.s_cap, "functional smoothness cap (< 0 = unbounded)");

  // ---- oracle ----
  struct {
    std::string functional = "renyi:alpha=0.5";
    int d = 1;
    double mu1 = 0.7;
    double mu2 = 0.3;
    double var = 0.1;
    double var1 = 0.0;
    double var2 = 0.0;
    double tol = 1e-10;
  } oargs;
  CLI::App* oracle = app.add_subcommand("oracle", "Exact divergence between truncated Gaussians");
  oracle->add_option("--functional", oargs.functional, "kl | renyi:alpha=A")->capture_default_str();
  oracle->add_option("--d", oargs.d, "dimension")->required();
  oracle->add_option("--mu1", oargs.mu1, "per-coordinate mean of f1")->capture_default_str();
  oracle->add_option("--mu2", oargs.mu2, "per-coordinate mean of f2")->capture_default_str();
  oracle->add_option("--var", oargs.var, "shared per-coordinate variance")->capture_default_str();
  oracle->add_option("--var1", oargs.var1, "f1 variance override (0 = use --var)");
  oracle->add_option("--var2", oargs.var2, "f2 variance override (0 = use --var)");
  oracle->add_option("--tol", oargs.tol, "quadrature tolerance")->capture_default_str();

  // ---- sample ----
  struct {
    int d = 1;
    std::size_t n = 100;
    double mu = 0.5;
    double var = 0.1;
    std::uint64_t seed = 1;
    std::string out_path;
  } sargs;
  CLI::App* sample = app.add_subcommand("sample", "Draw truncated-Gaussian samples to CSV");
  sample->add_option("--d", sargs.d, "dimension")->required();
  sample->add_option("--n", sargs.n, "number of draws")->required();
  sample->add_option("--mu", sargs.mu, "per-coordinate mean")->capture_default_str();
  sample->add_option("--var", sargs.var, "per-coordinate variance")->capture_default_str();
  sample->add_option("--seed", sargs.seed, "stream seed")->capture_default_str();
  sample->add_option("--out", sargs.out_path, "output CSV path")->required();

  // ---- experiment ----
  struct {
    std::string config_path;
    std::string out_dir;
    int threads = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
  } xargs;
  CLI::App* experiment = app.add_subcommand("experiment", "Run a Monte Carlo experiment");
  experiment->require_subcommand(1);
  std::vector<std::pair<std::string, odin::ExperimentKind>> experiment_kinds = {
      {"mse-sweep", odin::ExperimentKind::mse_sweep},
      {"clt", odin::ExperimentKind::clt},
      {"tuning", odin::ExperimentKind::tuning_sweep},
      {"rho", odin::ExperimentKind::rho_sweep},
  };
  std::vector<CLI::App*> experiment_subs;
  for (const auto& [name, kind] : experiment_kinds) {
    CLI::App* sub = experiment->add_subcommand(name, "Run the " + name + " experiment");
    sub->add_option("--config", xargs.config_path, "JSON experiment config")->required();
    sub->add_option("--out", xargs.out_dir, "output directory (overrides config)");
    sub->add_option("--threads", xargs.threads, "worker threads (overrides config)");
    sub->add_option("--seed", xargs.seed, "base seed (overrides config)")
        ->each([&xargs](const std::string&) { xargs.seed_set = true; });
    experiment_subs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (*estimate) return run_estimate(est);

    if (*weights) {
      odin::EstimatorSetup setup;
      if (wargs.estimator == "odin1") setup.kind = odin::EstimatorKind::odin1;
      else if (wargs.estimator == "odin2") setup.kind = odin::EstimatorKind::odin2;
      else throw CLI::ValidationError("--estimator", "expected odin1 or odin2");
      setup.L = wargs.L;
      setup.l_min = wargs.l_min;
      setup.l_max = wargs.l_max;
      setup.eta = parse_eta(wargs.eta);
      setup.lambda = wargs.lambda;
      setup.s_cap = wargs.s_cap;

      odin::EnsembleConfig cfg;
      cfg.kind = setup.kind;
      cfg.l_values = setup.l_values();
      cfg.eta = setup.eta;
      cfg.lambda = setup.lambda;
      cfg.s_cap = setup.s_cap;
      const odin::WeightSolution w = odin::solve_config_weights(cfg, wargs.d, wargs.n);
      njson out = weights_json(w);
      out["estimator"] = wargs.estimator;
      out["d"] = wargs.d;
      out["N"] = wargs.n;
      out["l_values"] = cfg.l_values;
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (*oracle) {
      const odin::FunctionalSpec g = odin::parse_functional(oargs.functional);
      const double var1 = oargs.var1 > 0.0 ? oargs.var1 : oargs.var;
      const double var2 = oargs.var2 > 0.0 ? oargs.var2 : oargs.var;
      const auto d = static_cast<std::size_t>(oargs.d);
      const odin::OracleValue v = odin::true_divergence(
          g, odin::TruncatedGaussianSpec::uniform(d, oargs.mu1, var1),
          odin::TruncatedGaussianSpec::uniform(d, oargs.mu2, var2), oargs.tol);
      njson out;
      out["functional"] = oargs.functional;
      out["d"] = oargs.d;
      out["value"] = v.value;
      out["achieved_tol"] = v.achieved_tol;
      out["factors"] = v.factors;
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (*sample) {
      const odin::SampleSet s = odin::tg_sample(
          odin::TruncatedGaussianSpec::uniform(static_cast<std::size_t>(sargs.d), sargs.mu,
                                               sargs.var),
          sargs.n, sargs.seed);
      odin::write_sample_csv(s, sargs.out_path);
      std::cout << "wrote " << s.n() << " x " << s.dim() << " samples to " << sargs.out_path
                << "\n";
      return 0;
    }

    if (*experiment) {
      std::ifstream in(xargs.config_path);
      if (!in) throw std::runtime_error("cannot open config " + xargs.config_path);
      std::ostringstream buffer;
      buffer << in.rdbuf();
      odin::ExperimentConfig cfg = odin::parse_experiment_config(buffer.str());
      for (std::size_t i = 0; i < experiment_subs.size(); ++i)
        if (*experiment_subs[i]) cfg.kind = experiment_kinds[i].second;
      if (!xargs.out_dir.empty()) cfg.out_dir = xargs.out_dir;
      if (xargs.threads > 0) cfg.threads = xargs.threads;
      if (xargs.seed_set) cfg.seed = xargs.seed;

      switch (cfg.kind) {
        case odin::ExperimentKind::mse_sweep: odin::run_mse_sweep(cfg); break;
        case odin::ExperimentKind::clt: odin::run_clt_experiment(cfg); break;
        case odin::ExperimentKind::tuning_sweep: odin::run_tuning_sweep(cfg); break;
        case odin::ExperimentKind::rho_sweep: odin::run_rho_sweep(cfg); break;
      }
      std::cout << "experiment " << odin::to_string(cfg.kind) << " complete; outputs in "
                << cfg.out_dir << "\n";
      return 0;
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
