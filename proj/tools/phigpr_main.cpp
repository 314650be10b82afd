#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "phigpr/ensemble_io.hpp"
#include "phigpr/errors.hpp"
#include "phigpr/harness.hpp"
#include "phigpr/prior_stats.hpp"

namespace fs = std::filesystem;
using namespace phigpr;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
};

ExperimentConfig load_config(const std::string& path, const Overrides& ov) {
  ExperimentConfig cfg = ExperimentConfig::load(path);
  if (ov.seed) cfg.master_seed = *ov.seed;
  if (ov.threads) cfg.n_threads = *ov.threads;
  if (ov.out) cfg.out_dir = *ov.out;
  cfg.validate();
  return cfg;
}

int resolved_threads(const ExperimentConfig& cfg) {
  if (cfg.n_threads > 0) return cfg.n_threads;
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

SimConfig sim_of(const ExperimentConfig& cfg) {
  SimConfig sim;
  sim.step = cfg.step;
  sim.t_end = cfg.t_end;
  sim.seed = cfg.master_seed;
  sim.init_theta = cfg.init_theta;
  sim.init_omega = cfg.init_omega;
  if (cfg.init_wind.size() > 0) sim.init_wind = cfg.init_wind;
  sim.record_stride = static_cast<int>(std::llround(cfg.record_interval / cfg.step));
  return sim;
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void print_metrics(const std::string& method, const std::vector<MetricsRow>& rows) {
  std::printf("%-8s %-18s %-10s %12s %10s %12s\n", "method", "quantity", "window", "lpp",
              "coverage", "rmse");
  for (const MetricsRow& r : rows)
    std::printf("%-8s %-18s %-10s %12.4f %10.3f %12.5g\n", method.c_str(), r.quantity.c_str(),
                r.window.c_str(), r.lpp, r.coverage, r.rmse);
}

int run_simulate(const ExperimentConfig& cfg) {
  Ensemble ens = generate_ensemble(sim_of(cfg), cfg.grid, cfg.n_members, resolved_threads(cfg));
  fs::create_directories(cfg.out_dir);
  std::string path = join(cfg.out_dir, "ensemble.bin");
  write_ensemble(path, ens);
  cfg.snapshot().write_file(join(cfg.out_dir, "run.cfg"));
  std::printf("%zu members, %lld recorded steps -> %s\n", ens.members.size(),
              static_cast<long long>(ens.members.front().times.size()), path.c_str());
  return 0;
}

int run_moments(const ExperimentConfig& cfg) {
  Ensemble ens = generate_ensemble(sim_of(cfg), cfg.grid, cfg.n_members, resolved_threads(cfg));
  const Eigen::VectorXd& grid = ens.members.front().times;
  std::vector<StateChannel> channels = moment_channels(cfg.grid);
  for (const StateChannel& q : reported_quantities(cfg.grid)) {
    bool seen = false;
    for (const StateChannel& ch : channels) if (ch == q) seen = true;
    if (!seen) channels.push_back(q);
  }
  const double n = static_cast<double>(ens.members.size());
  std::vector<Eigen::VectorXd> means, stds;
  for (const StateChannel& ch : channels) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(grid.size());
    for (const Trajectory& m : ens.members) mean += channel_values(m, ch);
    mean /= n;
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(grid.size());
    for (const Trajectory& m : ens.members) sq += (channel_values(m, ch) - mean).cwiseAbs2();
    means.push_back(std::move(mean));
    stds.push_back((sq / (n - 1.0)).cwiseSqrt());
  }
  fs::create_directories(cfg.out_dir);
  std::string path = join(cfg.out_dir, "moment_curves.csv");
  write_moment_curves_csv(path, grid, channels, means, stds);
  cfg.snapshot().write_file(join(cfg.out_dir, "run.cfg"));
  std::printf("%zu channels over %lld times -> %s\n", channels.size(),
              static_cast<long long>(grid.size()), path.c_str());
  return 0;
}

int run_methods(ExperimentConfig cfg, const std::vector<std::string>& methods) {
  cfg.methods = methods;
  RunRecord rec = run_experiment(cfg);
  std::printf("truth member %lld, %zu files under %s\n", static_cast<long long>(rec.truth_member),
              rec.files.size(), cfg.out_dir.c_str());
  for (const MethodResult& m : rec.methods) print_metrics(m.method, m.metrics);
  return 0;
}

// Keeps only the requested subset of the configured method list, in the
// config's order, falling back to the full subset when none is configured.
std::vector<std::string> method_subset(const ExperimentConfig& cfg,
                                       const std::vector<std::string>& wanted) {
  std::vector<std::string> out;
  for (const std::string& m : cfg.methods)
    for (const std::string& w : wanted)
      if (m == w) out.push_back(m);
  return out.empty() ? wanted : out;
}

int run_metrics(const ExperimentConfig& cfg) {
  bool any = false;
  for (const std::string& method : cfg.methods) {
    std::vector<MetricsRow> rows;
    std::string est = join(cfg.out_dir, "posterior_" + method + "_estimation.csv");
    if (fs::exists(est))
      for (const PosteriorSeries& s : read_posterior_csv(est))
        for (const MetricsRow& r : series_metrics(s, "estimation", 0.0, cfg.observe.t_obs_end))
          rows.push_back(r);
    std::string fc = join(cfg.out_dir, "posterior_" + method + "_forecast.csv");
    if (fs::exists(fc))
      for (const PosteriorSeries& s : read_posterior_csv(fc))
        for (const MetricsRow& r : series_metrics(s, "forecast", cfg.observe.t_obs_end,
                                                  cfg.target.t_forecast_end))
          rows.push_back(r);
    if (rows.empty()) continue;
    any = true;
    write_metrics_csv(join(cfg.out_dir, "metrics_" + method + ".csv"), rows);
    print_metrics(method, rows);
  }
  if (!any)
    throw ConfigError("no posterior files for the configured methods under '" + cfg.out_dir + "'");
  return 0;
}

int run_named_recipe(const ExperimentConfig& cfg, const std::string& name) {
  const std::vector<std::string> known = recipe_names();
  if (std::find(known.begin(), known.end(), name) == known.end()) {
    std::string list;
    for (const std::string& k : known) list += (list.empty() ? "" : ", ") + k;
    throw ConfigError("unknown recipe '" + name + "' (one of: " + list + ")");
  }
  run_recipe(name, cfg);
  std::printf("recipe %s -> %s\n", name.c_str(), join(cfg.out_dir, name).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic power-grid forecasting: ensembles, moment curves, conditioned "
               "forecasts, data-driven baselines"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides ov;
  app.add_option("--seed", ov.seed, "Override the master seed");
  app.add_option("--threads", ov.threads, "Worker threads (0 = hardware concurrency)");
  app.add_option("--out", ov.out, "Override the output directory");

  std::string config_path, recipe_name;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "Experiment configuration file")
        ->required()
        ->check(CLI::ExistingFile);
  };

  CLI::App* simulate = app.add_subcommand("simulate", "Generate an ensemble into ensemble.bin");
  add_config(simulate);
  CLI::App* moments = app.add_subcommand("moments", "Ensemble mean/std curves per channel");
  add_config(moments);
  CLI::App* forecast =
      app.add_subcommand("forecast", "Physics-informed estimation and forecast run");
  add_config(forecast);
  CLI::App* baseline =
      app.add_subcommand("baseline", "Data-driven GP and order-model baselines");
  add_config(baseline);
  CLI::App* metrics =
      app.add_subcommand("metrics", "Recompute metric tables from stored posterior files");
  add_config(metrics);
  CLI::App* recipe = app.add_subcommand("recipe", "Run a named experiment preset");
  recipe->add_option("name", recipe_name, "Preset name")->required();
  add_config(recipe);

  try {
    app.parse(argc, argv);
    if (simulate->parsed()) return run_simulate(load_config(config_path, ov));
    if (moments->parsed()) return run_moments(load_config(config_path, ov));
    if (forecast->parsed())
      return run_methods(load_config(config_path, ov), {"phi-gpr"});
    if (baseline->parsed()) {
      ExperimentConfig cfg = load_config(config_path, ov);
      return run_methods(cfg, method_subset(cfg, {"dd-gpr", "arima"}));
    }
    if (metrics->parsed()) return run_metrics(load_config(config_path, ov));
    if (recipe->parsed()) return run_named_recipe(load_config(config_path, ov), recipe_name);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const ContractError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  }
  return 0;
}
