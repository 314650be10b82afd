#include "phigpr/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>

#include "phigpr/ensemble_io.hpp"
#include "phigpr/errors.hpp"
#include "phigpr/metrics.hpp"
#include "phigpr/parallel.hpp"
#include "phigpr/rng.hpp"

namespace fs = std::filesystem;

namespace phigpr {
namespace {

constexpr double kTimeTol = 1e-9;

double rel_tol(double t) { return kTimeTol * std::max(1.0, std::abs(t)); }

bool is_multiple(double value, double unit) {
  double ratio = value / unit;
  return std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, std::abs(ratio));
}

std::string kind_word(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::Theta: return "theta";
    case ChannelKind::Omega: return "omega";
    default: throw ContractError("observation kinds are limited to theta and omega");
  }
}

ChannelKind kind_from_word(const std::string& word) {
  if (word == "theta") return ChannelKind::Theta;
  if (word == "omega") return ChannelKind::Omega;
  throw ConfigError("unknown observed kind '" + word + "' (theta or omega)");
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

Eigen::VectorXd truth_at(const Trajectory& truth, const StateChannel& ch,
                         const Eigen::VectorXd& times) {
  Eigen::VectorXd values = channel_values(truth, ch);
  Eigen::VectorXd out(times.size());
  for (Eigen::Index i = 0; i < times.size(); ++i)
    out[i] = values[grid_index_of(truth.times, times[i])];
  return out;
}

bool quantity_derivable(const ObservationPlan& plan, const StateChannel& q) {
  auto has = [&](ChannelKind k) {
    return std::find(plan.kinds.begin(), plan.kinds.end(), k) != plan.kinds.end();
  };
  switch (q.kind) {
    case ChannelKind::Theta:
    case ChannelKind::ThetaRel: return has(ChannelKind::Theta);
    case ChannelKind::Omega:
    case ChannelKind::OmegaRel: return has(ChannelKind::Omega);
    case ChannelKind::WindFluct: return false;
  }
  return false;
}

}  // namespace

void ExperimentConfig::validate() const {
  grid.validate();
  if (!(step > 0.0)) throw ConfigError("sim step must be positive");
  if (!(t_end > 0.0)) throw ConfigError("sim t_end must be positive");
  if (!(record_interval > 0.0) || !is_multiple(record_interval, step))
    throw ConfigError("record_interval must be a positive multiple of step");
  if (n_members < 3) throw ConfigError("n_members must be at least 3");
  const int ng = grid.n_gen;
  if (init_theta.size() != ng || init_omega.size() != ng)
    throw ConfigError("initial state size does not match the machine count");
  if (init_wind.size() != 0 && init_wind.size() != ng)
    throw ConfigError("init_wind must be empty or one value per machine");

  if (observe.kinds.empty()) throw ConfigError("no observed kinds");
  for (ChannelKind k : observe.kinds)
    if (k != ChannelKind::Theta && k != ChannelKind::Omega)
      throw ConfigError("observed kinds are limited to theta and omega");
  for (std::size_t a = 0; a < observe.kinds.size(); ++a)
    for (std::size_t b = a + 1; b < observe.kinds.size(); ++b)
      if (observe.kinds[a] == observe.kinds[b]) throw ConfigError("duplicate observed kind");
  if (!(observe.interval > 0.0) || !is_multiple(observe.interval, step))
    throw ConfigError("observation interval must be a positive multiple of step");
  if (!is_multiple(observe.interval, record_interval))
    throw ConfigError("observation interval must lie on the recording grid");
  if (observe.noise_percent < 0.0) throw ConfigError("noise percentage must be nonnegative");

  if (!(observe.t_obs_end < target.t_forecast_end))
    throw ConfigError("observation window must end before the forecast horizon");
  if (target.t_forecast_end > t_end * (1.0 + kTimeTol))
    throw ConfigError("forecast horizon exceeds the simulated span");
  if (!(target.estimation_interval > 0.0) ||
      !is_multiple(target.estimation_interval, record_interval))
    throw ConfigError("estimation interval must be a positive multiple of record_interval");
  if (!(target.forecast_interval > 0.0) ||
      !is_multiple(target.forecast_interval, record_interval))
    throw ConfigError("forecast interval must be a positive multiple of record_interval");

  for (const std::string& m : methods)
    if (m != "phi-gpr" && m != "dd-gpr" && m != "arima")
      throw ConfigError("unknown method '" + m + "'");
  if (arima_p_max < 0 || arima_q_max < 0) throw ConfigError("negative arima grid bound");
  if (n_threads < 0) throw ConfigError("negative thread count");
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  ConfigFile cfg = ConfigFile::parse_file(path);
  ExperimentConfig out;
  if (cfg.has("grid", "config")) {
    fs::path grid_path = fs::path(path).parent_path() / cfg.get_string("grid", "config");
    out.grid = GridParameters::load(grid_path.string());
  } else {
    out.grid = GridParameters::from_config(cfg);
  }
  out.step = cfg.get_double("sim", "step");
  out.t_end = cfg.get_double("sim", "t_end");
  out.record_interval = cfg.get_double("sim", "record_interval", out.step);
  out.n_members = static_cast<int>(cfg.get_int("sim", "n_members"));
  out.master_seed = cfg.get_uint("sim", "master_seed");
  out.init_theta = cfg.get_vector("sim", "init_theta");
  out.init_omega = cfg.get_vector("sim", "init_omega");
  std::string wind = cfg.get_string("sim", "init_wind", "stationary");
  if (wind != "stationary") out.init_wind = cfg.get_vector("sim", "init_wind");

  out.observe.kinds.clear();
  for (const std::string& w : cfg.get_words("observe", "kinds"))
    out.observe.kinds.push_back(kind_from_word(w));
  out.observe.interval = cfg.get_double("observe", "interval");
  out.observe.t_obs_end = cfg.get_double("observe", "t_obs");
  out.observe.noise_percent = cfg.get_double("observe", "noise_percent", 0.0);
  out.observe.noise_seed = cfg.get_uint("observe", "noise_seed", 0);
  out.observe.pooled_noise = cfg.get_bool("observe", "pooled_noise", false);

  out.target.t_forecast_end = cfg.get_double("target", "t_forecast");
  out.target.estimation_interval = cfg.get_double("target", "estimation_interval");
  out.target.forecast_interval = cfg.get_double("target", "forecast_interval");
  out.selector_seed = cfg.get_uint("selection", "selector_seed");
  out.methods = cfg.get_words("methods", "list");

  out.dd_fit.n_starts = static_cast<int>(cfg.get_int("dd-gpr", "starts", 8));
  out.dd_fit.max_iter = static_cast<int>(cfg.get_int("dd-gpr", "max_iter", 500));
  out.dd_fit.seed = cfg.get_uint("dd-gpr", "fit_seed", 99);
  out.arima_p_max = static_cast<int>(cfg.get_int("arima", "p_max", 20));
  out.arima_q_max = static_cast<int>(cfg.get_int("arima", "q_max", 3));
  out.out_dir = cfg.get_string("output", "dir", "out");
  out.n_threads = static_cast<int>(cfg.get_int("output", "threads", 0));
  out.validate();
  return out;
}

ConfigFile ExperimentConfig::snapshot() const {
  ConfigFile cfg;
  cfg.set_int("grid", "n_gen", grid.n_gen);
  cfg.set_vector("grid", "inertia", grid.inertia);
  cfg.set_vector("grid", "damping", grid.damping);
  cfg.set_vector("grid", "emf", grid.emf);
  cfg.set_matrix("grid", "conductance", grid.conductance);
  cfg.set_matrix("grid", "susceptance", grid.susceptance);
  cfg.set_double("grid", "base_speed", grid.base_speed);
  cfg.set_double("grid", "sync_speed", grid.sync_speed);
  cfg.set_vector("grid", "wind_mean", grid.wind_mean);
  cfg.set_vector("grid", "wind_sigma", grid.wind_sigma);
  cfg.set_vector("grid", "wind_lambda", grid.wind_lambda);

  cfg.set_double("sim", "step", step);
  cfg.set_double("sim", "t_end", t_end);
  cfg.set_double("sim", "record_interval", record_interval);
  cfg.set_int("sim", "n_members", n_members);
  cfg.set_uint("sim", "master_seed", master_seed);
  cfg.set_vector("sim", "init_theta", init_theta);
  cfg.set_vector("sim", "init_omega", init_omega);
  if (init_wind.size() == 0)
    cfg.set_raw("sim", "init_wind", "stationary");
  else
    cfg.set_vector("sim", "init_wind", init_wind);

  std::vector<std::string> kind_words;
  for (ChannelKind k : observe.kinds) kind_words.push_back(kind_word(k));
  cfg.set_words("observe", "kinds", kind_words);
  cfg.set_double("observe", "interval", observe.interval);
  cfg.set_double("observe", "t_obs", observe.t_obs_end);
  cfg.set_double("observe", "noise_percent", observe.noise_percent);
  cfg.set_uint("observe", "noise_seed", observe.noise_seed);
  cfg.set_bool("observe", "pooled_noise", observe.pooled_noise);

  cfg.set_double("target", "t_forecast", target.t_forecast_end);
  cfg.set_double("target", "estimation_interval", target.estimation_interval);
  cfg.set_double("target", "forecast_interval", target.forecast_interval);
  cfg.set_uint("selection", "selector_seed", selector_seed);
  cfg.set_words("methods", "list", methods);
  cfg.set_int("dd-gpr", "starts", dd_fit.n_starts);
  cfg.set_int("dd-gpr", "max_iter", dd_fit.max_iter);
  cfg.set_uint("dd-gpr", "fit_seed", dd_fit.seed);
  cfg.set_int("arima", "p_max", arima_p_max);
  cfg.set_int("arima", "q_max", arima_q_max);
  cfg.set_raw("output", "dir", out_dir);
  cfg.set_int("output", "threads", n_threads);
  return cfg;
}

std::vector<StateChannel> reported_quantities(const GridParameters& grid) {
  std::vector<StateChannel> out;
  for (int k = 2; k <= grid.n_gen; ++k) out.push_back(theta_rel_channel(k, 1));
  for (int k = 2; k <= grid.n_gen; ++k) out.push_back(omega_rel_channel(k, 1));
  for (int k = 1; k <= grid.n_gen; ++k)
    if (grid.wind_driven(k - 1)) out.push_back(wind_channel(k));
  return out;
}

std::vector<StateChannel> moment_channels(const GridParameters& grid) {
  std::vector<StateChannel> out;
  for (int k = 1; k <= grid.n_gen; ++k) out.push_back(theta_channel(k));
  for (int k = 1; k <= grid.n_gen; ++k) out.push_back(omega_channel(k));
  for (int k = 1; k <= grid.n_gen; ++k)
    if (grid.wind_driven(k - 1)) out.push_back(wind_channel(k));
  return out;
}

Eigen::VectorXd observation_times(const ObservationPlan& plan) {
  std::vector<double> out;
  for (Eigen::Index j = 0;; ++j) {
    double t = static_cast<double>(j) * plan.interval;
    if (t >= plan.t_obs_end - rel_tol(plan.t_obs_end)) break;
    out.push_back(t);
  }
  if (out.size() < 2) throw ContractError("observation plan yields fewer than two times");
  return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

Eigen::VectorXd estimation_times(const TargetPlan& plan, double t_obs_end) {
  std::vector<double> out;
  for (Eigen::Index j = 0;; ++j) {
    double t = static_cast<double>(j) * plan.estimation_interval;
    if (t > t_obs_end + rel_tol(t_obs_end)) break;
    out.push_back(t);
  }
  return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

Eigen::VectorXd forecast_times(const TargetPlan& plan, double t_obs_end) {
  std::vector<double> out;
  Eigen::Index j0 = static_cast<Eigen::Index>(
      std::floor(t_obs_end / plan.forecast_interval + kTimeTol));
  for (Eigen::Index j = j0;; ++j) {
    double t = static_cast<double>(j) * plan.forecast_interval;
    if (t <= t_obs_end + rel_tol(t_obs_end)) continue;
    if (t > plan.t_forecast_end + rel_tol(plan.t_forecast_end)) break;
    out.push_back(t);
  }
  if (out.empty()) throw ContractError("forecast window contains no grid times");
  return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

GroundTruth make_ground_truth(const Ensemble& ens, std::uint64_t selector_seed) {
  const std::size_t n = ens.members.size();
  if (n < 3) throw ContractError("make_ground_truth: need at least three members");
  std::mt19937_64 engine = make_engine(derive_seed(selector_seed, 0x7472757468ULL));
  // portable uniform draw: high 64 bits of draw * n
  std::size_t pick = static_cast<std::size_t>(
      (static_cast<unsigned __int128>(engine()) * n) >> 64);
  GroundTruth out;
  out.member_index = static_cast<std::int64_t>(pick);
  out.truth = ens.members[pick];
  out.reduced.members.reserve(n - 1);
  out.reduced.seeds.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == pick) continue;
    out.reduced.members.push_back(ens.members[i]);
    if (i < ens.seeds.size()) out.reduced.seeds.push_back(ens.seeds[i]);
  }
  return out;
}

Observations make_observations(const Trajectory& truth, const ObservationPlan& plan) {
  Eigen::VectorXd times = observation_times(plan);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(times.size()));
  for (Eigen::Index i = 0; i < times.size(); ++i)
    idx[static_cast<std::size_t>(i)] = grid_index_of(truth.times, times[i]);

  Observations out;
  out.spec.block.times = times;
  for (ChannelKind kind : plan.kinds)
    for (int k = 1; k <= truth.n_gen(); ++k)
      out.spec.block.channels.push_back(kind == ChannelKind::Theta ? theta_channel(k)
                                                                   : omega_channel(k));
  const Eigen::Index nc = static_cast<Eigen::Index>(out.spec.block.channels.size());
  const Eigen::Index nt = times.size();
  out.data.values.resize(nc * nt);
  out.injected_std.resize(nc);
  for (Eigen::Index c = 0; c < nc; ++c) {
    Eigen::VectorXd full = channel_values(truth, out.spec.block.channels[static_cast<std::size_t>(c)]);
    Eigen::VectorXd clean(nt);
    for (Eigen::Index i = 0; i < nt; ++i) clean[i] = full[idx[static_cast<std::size_t>(i)]];
    double sd = std::sqrt((clean.array() - clean.mean()).square().sum() /
                          static_cast<double>(nt - 1));
    out.injected_std[c] = plan.noise_percent / 100.0 * sd;
    if (out.injected_std[c] > 0.0) {
      std::mt19937_64 rng =
          make_engine(derive_seed(plan.noise_seed, static_cast<std::uint64_t>(c)));
      std::normal_distribution<double> normal(0.0, out.injected_std[c]);
      for (Eigen::Index i = 0; i < nt; ++i) clean[i] += normal(rng);
    }
    out.data.values.segment(c * nt, nt) = clean;
  }
  if (plan.pooled_noise) {
    double pooled = std::sqrt(out.injected_std.array().square().mean());
    out.spec.noise_std = Eigen::VectorXd::Constant(nc, pooled);
  } else {
    out.spec.noise_std = out.injected_std;
  }
  out.data.noise_std = out.spec.noise_std;
  out.data.noise_seed = plan.noise_seed;
  return out;
}

Eigen::VectorXd derived_observation_series(const Observations& obs, const StateChannel& quantity) {
  const Eigen::Index nt = obs.spec.block.times.size();
  auto segment_of = [&](const StateChannel& raw) -> Eigen::VectorXd {
    const auto& channels = obs.spec.block.channels;
    for (std::size_t c = 0; c < channels.size(); ++c)
      if (channels[c] == raw)
        return obs.data.values.segment(static_cast<Eigen::Index>(c) * nt, nt);
    throw ContractError("quantity " + channel_label(quantity) +
                        " is not derivable from the observed channels");
  };
  switch (quantity.kind) {
    case ChannelKind::Theta:
    case ChannelKind::Omega: return segment_of(quantity);
    case ChannelKind::ThetaRel:
      return segment_of(theta_channel(quantity.index)) - segment_of(theta_channel(quantity.reference));
    case ChannelKind::OmegaRel:
      return segment_of(omega_channel(quantity.index)) - segment_of(omega_channel(quantity.reference));
    case ChannelKind::WindFluct:
      throw ContractError("wind power fluctuations are never observed and cannot be "
                          "predicted from data alone");
  }
  throw ContractError("unhandled channel kind");
}

std::vector<PosteriorSeries> phi_gpr_series(const MomentTable& moments,
                                            const Observations& obs,
                                            const std::vector<StateChannel>& quantities,
                                            const Eigen::VectorXd& times,
                                            const Trajectory& truth) {
  BlockSpec target;
  target.channels = quantities;
  target.times = times;
  JointGp joint = assemble_joint(moments, obs.spec, target);
  GpPosterior post = condition(joint, obs.data);
  std::vector<PosteriorSeries> out;
  for (std::size_t c = 0; c < quantities.size(); ++c) {
    PosteriorSeries s;
    s.channel = channel_label(quantities[c]);
    s.times = times;
    s.mean = post.channel_mean(c);
    s.stddev = post.channel_stddev(c);
    s.truth = truth_at(truth, quantities[c], times);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<PosteriorSeries> dd_gpr_series(const Observations& obs,
                                           const std::vector<StateChannel>& quantities,
                                           const Eigen::VectorXd& times,
                                           const Trajectory& truth, const DdFitConfig& fit,
                                           std::vector<KernelSpec>* fitted) {
  std::vector<PosteriorSeries> out;
  if (fitted) fitted->clear();
  for (const StateChannel& q : quantities) {
    ChannelObservations co;
    co.times = obs.spec.block.times;
    co.values = derived_observation_series(obs, q);
    KernelSpec spec = fit_kernel(co, fit);
    GpPosterior post = kernel_forecast(spec, co, times);
    PosteriorSeries s;
    s.channel = channel_label(q);
    s.times = times;
    s.mean = post.mean;
    s.stddev = post.stddev();
    s.truth = truth_at(truth, q, times);
    out.push_back(std::move(s));
    if (fitted) fitted->push_back(spec);
  }
  return out;
}

std::vector<PosteriorSeries> arima_series(const Observations& obs,
                                          const std::vector<StateChannel>& quantities,
                                          double t_forecast_end, const Trajectory& truth,
                                          int p_max, int q_max, int n_threads,
                                          std::vector<ArimaModel>* fitted) {
  const Eigen::VectorXd& obs_times = obs.spec.block.times;
  const double delta = obs_times[1] - obs_times[0];
  const double t_last = obs_times[obs_times.size() - 1];
  const int horizon =
      static_cast<int>(std::floor((t_forecast_end - t_last) / delta + kTimeTol));
  if (horizon < 1) throw ContractError("forecast horizon shorter than one observation step");
  std::vector<PosteriorSeries> out;
  if (fitted) fitted->clear();
  for (const StateChannel& q : quantities) {
    Eigen::VectorXd series = derived_observation_series(obs, q);
    ArimaModel model = select_order(series, p_max, q_max, n_threads);
    ArimaForecast fc = arima_forecast(model, series, horizon);
    PosteriorSeries s;
    s.channel = channel_label(q);
    s.times.resize(horizon);
    for (int h = 1; h <= horizon; ++h)
      s.times[h - 1] = t_last + static_cast<double>(h) * delta;
    s.mean = fc.mean;
    s.stddev = fc.variance.array().sqrt();
    s.truth = truth_at(truth, q, s.times);
    out.push_back(std::move(s));
    if (fitted) fitted->push_back(model);
  }
  return out;
}

std::vector<MetricsRow> series_metrics(const PosteriorSeries& series, const std::string& window,
                                       double t_min, double t_max) {
  EvalSeries eval{series.times, series.mean, series.stddev, series.truth};
  EvalSeries cut = eval.window(t_min, t_max);
  if (cut.times.size() == 0) return {};
  MetricsRow row;
  row.generator = parse_channel_label(series.channel).index;
  row.quantity = series.channel;
  row.window = window;
  row.lpp = log_predictive_probability(cut);
  row.coverage = coverage(cut, 2.0);
  row.rmse = rmse(cut);
  return {row};
}

std::vector<std::string> emit_plotdata(const RunRecord& record, const ExperimentConfig& config,
                                       const Trajectory& truth, const Observations& obs,
                                       const std::string& dir) {
  fs::create_directories(dir);
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::vector<std::string>& header,
                  const std::vector<Eigen::VectorXd>& cols) {
    write_columns_csv(join(dir, name), header, cols);
    written.push_back(name);
  };
  for (const StateChannel& q : reported_quantities(config.grid)) {
    std::string label = channel_label(q);
    emit(label + "_truth.csv", {"t", "value"}, {truth.times, channel_values(truth, q)});
    if (quantity_derivable(config.observe, q))
      emit(label + "_observations.csv", {"t", "value"},
           {obs.spec.block.times, derived_observation_series(obs, q)});
  }
  for (const MethodResult& m : record.methods) {
    std::vector<PosteriorSeries> merged;
    for (const PosteriorSeries& s : m.estimation) merged.push_back(s);
    for (const PosteriorSeries& s : m.forecast) {
      auto it = std::find_if(merged.begin(), merged.end(),
                             [&](const PosteriorSeries& e) { return e.channel == s.channel; });
      if (it == merged.end()) {
        merged.push_back(s);
        continue;
      }
      PosteriorSeries& e = *it;
      auto cat = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        Eigen::VectorXd c(a.size() + b.size());
        c << a, b;
        return c;
      };
      e.times = cat(e.times, s.times);
      e.mean = cat(e.mean, s.mean);
      e.stddev = cat(e.stddev, s.stddev);
      e.truth = cat(e.truth, s.truth);
    }
    for (const PosteriorSeries& s : merged) {
      std::string name = s.channel + "_posterior_" + m.method + ".csv";
      write_posterior_csv(join(dir, name), {s});
      written.push_back(name);
    }
  }
  return written;
}

RunRecord run_experiment(const ExperimentConfig& config) {
  config.validate();
  const int threads = resolve_threads(config.n_threads);
  fs::create_directories(config.out_dir);

  RunRecord rec;
  rec.config_snapshot = config.snapshot();
  std::string stage = "setup";
  auto record_path = join(config.out_dir, "record.cfg");

  try {
    stage = "ensemble";
    SimConfig sim;
    sim.step = config.step;
    sim.t_end = config.t_end;
    sim.seed = config.master_seed;
    sim.init_theta = config.init_theta;
    sim.init_omega = config.init_omega;
    if (config.init_wind.size() > 0) sim.init_wind = config.init_wind;
    sim.record_stride = static_cast<int>(std::llround(config.record_interval / config.step));
    Ensemble ens = generate_ensemble(sim, config.grid, config.n_members, threads);

    stage = "ground-truth";
    GroundTruth gt = make_ground_truth(ens, config.selector_seed);
    Observations obs = make_observations(gt.truth, config.observe);
    obs.data.truth_member = gt.member_index;
    rec.truth_member = gt.member_index;
    rec.injected_noise_std = obs.injected_std;

    stage = "moments";
    Eigen::VectorXd est_times = estimation_times(config.target, config.observe.t_obs_end);
    Eigen::VectorXd fc_times = forecast_times(config.target, config.observe.t_obs_end);
    std::vector<double> grid_union;
    for (Eigen::Index i = 0; i < est_times.size(); ++i) grid_union.push_back(est_times[i]);
    for (Eigen::Index i = 0; i < fc_times.size(); ++i) grid_union.push_back(fc_times[i]);
    for (Eigen::Index i = 0; i < obs.spec.block.times.size(); ++i)
      grid_union.push_back(obs.spec.block.times[i]);
    std::sort(grid_union.begin(), grid_union.end());
    grid_union.erase(std::unique(grid_union.begin(), grid_union.end(),
                                 [](double a, double b) { return b - a <= rel_tol(a); }),
                     grid_union.end());
    Eigen::VectorXd moment_grid = Eigen::Map<Eigen::VectorXd>(
        grid_union.data(), static_cast<Eigen::Index>(grid_union.size()));
    MomentTable moments =
        ensemble_moments(gt.reduced, moment_channels(config.grid), moment_grid, threads);

    std::vector<StateChannel> quantities = reported_quantities(config.grid);
    std::vector<StateChannel> derivable;
    for (const StateChannel& q : quantities)
      if (quantity_derivable(config.observe, q)) derivable.push_back(q);

    for (const std::string& method : config.methods) {
      stage = method;
      MethodResult res;
      res.method = method;
      if (method == "phi-gpr") {
        res.estimation = phi_gpr_series(moments, obs, quantities, est_times, gt.truth);
        res.forecast = phi_gpr_series(moments, obs, quantities, fc_times, gt.truth);
      } else if (method == "dd-gpr") {
        if (derivable.empty())
          throw ContractError("dd-gpr: no reported quantity is derivable from the "
                              "observed channels");
        DdFitConfig fit = config.dd_fit;
        fit.n_threads = threads;
        std::vector<KernelSpec> kernels;
        res.estimation = dd_gpr_series(obs, derivable, est_times, gt.truth, fit, &kernels);
        res.forecast = dd_gpr_series(obs, derivable, fc_times, gt.truth, fit, nullptr);
        fs::create_directories(join(config.out_dir, "models"));
        for (std::size_t i = 0; i < kernels.size(); ++i) {
          ConfigFile model_cfg;
          kernel_spec_to_config(kernels[i], channel_label(derivable[i]), model_cfg);
          std::string name = join("models", "ddgpr_" + channel_label(derivable[i]) + ".cfg");
          model_cfg.write_file(join(config.out_dir, name));
          rec.files.push_back(name);
        }
      } else {
        if (derivable.empty())
          throw ContractError("arima: no reported quantity is derivable from the "
                              "observed channels");
        std::vector<ArimaModel> models;
        res.forecast = arima_series(obs, derivable, config.target.t_forecast_end, gt.truth,
                                    config.arima_p_max, config.arima_q_max, threads, &models);
        fs::create_directories(join(config.out_dir, "models"));
        for (std::size_t i = 0; i < models.size(); ++i) {
          ConfigFile model_cfg;
          arima_to_config(models[i], channel_label(derivable[i]), model_cfg);
          std::string name = join("models", "arima_" + channel_label(derivable[i]) + ".cfg");
          model_cfg.write_file(join(config.out_dir, name));
          rec.files.push_back(name);
        }
      }
      for (const PosteriorSeries& s : res.estimation)
        for (const MetricsRow& row :
             series_metrics(s, "estimation", 0.0, config.observe.t_obs_end))
          res.metrics.push_back(row);
      for (const PosteriorSeries& s : res.forecast)
        for (const MetricsRow& row : series_metrics(s, "forecast", config.observe.t_obs_end,
                                                    config.target.t_forecast_end))
          res.metrics.push_back(row);

      if (!res.estimation.empty()) {
        std::string name = "posterior_" + method + "_estimation.csv";
        write_posterior_csv(join(config.out_dir, name), res.estimation);
        rec.files.push_back(name);
      }
      std::string fc_name = "posterior_" + method + "_forecast.csv";
      write_posterior_csv(join(config.out_dir, fc_name), res.forecast);
      rec.files.push_back(fc_name);
      std::string metrics_name = "metrics_" + method + ".csv";
      write_metrics_csv(join(config.out_dir, metrics_name), res.metrics);
      rec.files.push_back(metrics_name);
      rec.methods.push_back(std::move(res));
    }

    stage = "plotdata";
    write_moment_curves_csv(join(config.out_dir, "moment_curves.csv"), moments);
    rec.files.push_back("moment_curves.csv");
    write_trajectory_csv(join(config.out_dir, "truth.csv"), gt.truth);
    rec.files.push_back("truth.csv");
    for (const std::string& name :
         emit_plotdata(rec, config, gt.truth, obs, join(config.out_dir, "plotdata")))
      rec.files.push_back(join("plotdata", name));

    stage = "record";
    rec.config_snapshot.write_file(join(config.out_dir, "run.cfg"));
    rec.files.push_back("run.cfg");
    ConfigFile manifest;
    manifest.set_raw("run", "status", "ok");
    manifest.set_uint("seeds", "master", config.master_seed);
    manifest.set_uint("seeds", "selector", config.selector_seed);
    manifest.set_uint("seeds", "noise", config.observe.noise_seed);
    manifest.set_int("truth", "member_index", rec.truth_member);
    manifest.set_vector("noise", "injected_std", rec.injected_noise_std);
    manifest.set_words("files", "list", rec.files);
    manifest.write_file(record_path);
  } catch (const std::exception& e) {
    ConfigFile manifest;
    manifest.set_raw("run", "status", "failed");
    manifest.set_raw("run", "stage", stage);
    manifest.set_raw("run", "error", e.what());
    manifest.write_file(record_path);
    if (dynamic_cast<const ContractError*>(&e))
      throw ContractError(stage + " stage: " + e.what());
    if (dynamic_cast<const NumericalError*>(&e))
      throw NumericalError(stage + " stage: " + e.what());
    throw;
  }
  return rec;
}

std::vector<std::string> recipe_names() {
  return {"theta-obs", "omega-obs", "both-obs", "cadence-sweep", "noise-sweep", "steady-state"};
}

namespace {

// The 25 s run behind the stationarity check: ensemble and moment curves
// only, no conditioning.
void run_steady_state(const ExperimentConfig& base) {
  ExperimentConfig cfg = base;
  cfg.t_end = 25.0;
  cfg.out_dir = join(base.out_dir, "steady-state");
  cfg.methods.clear();
  cfg.validate();
  const int threads = resolve_threads(cfg.n_threads);
  fs::create_directories(cfg.out_dir);
  SimConfig sim;
  sim.step = cfg.step;
  sim.t_end = cfg.t_end;
  sim.seed = cfg.master_seed;
  sim.init_theta = cfg.init_theta;
  sim.init_omega = cfg.init_omega;
  if (cfg.init_wind.size() > 0) sim.init_wind = cfg.init_wind;
  sim.record_stride = static_cast<int>(std::llround(cfg.record_interval / cfg.step));
  Ensemble ens = generate_ensemble(sim, cfg.grid, cfg.n_members, threads);
  const Eigen::VectorXd& grid = ens.members.front().times;
  // Only the variance curves matter here, and the settling behaviour is read
  // off the reported differences, so skip the two-time tables and add the
  // relative channels alongside the raw ones.
  std::vector<StateChannel> channels = moment_channels(cfg.grid);
  for (const StateChannel& q : reported_quantities(cfg.grid)) {
    bool seen = false;
    for (const StateChannel& ch : channels)
      if (ch == q) seen = true;
    if (!seen) channels.push_back(q);
  }
  const double n = static_cast<double>(ens.members.size());
  std::vector<Eigen::VectorXd> means, stds;
  for (const StateChannel& ch : channels) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(grid.size());
    for (const Trajectory& m : ens.members) mean += channel_values(m, ch);
    mean /= n;
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(grid.size());
    for (const Trajectory& m : ens.members)
      sq += (channel_values(m, ch) - mean).cwiseAbs2();
    means.push_back(std::move(mean));
    stds.push_back((sq / (n - 1.0)).cwiseSqrt());
  }
  write_moment_curves_csv(join(cfg.out_dir, "moment_curves.csv"), grid, channels, means, stds);
  cfg.snapshot().write_file(join(cfg.out_dir, "run.cfg"));
}

}  // namespace

void run_recipe(const std::string& name, const ExperimentConfig& base) {
  ExperimentConfig cfg = base;
  if (name == "theta-obs") {
    cfg.observe.kinds = {ChannelKind::Theta};
    cfg.methods = {"phi-gpr"};
    cfg.out_dir = join(base.out_dir, name);
    run_experiment(cfg);
  } else if (name == "omega-obs") {
    cfg.observe.kinds = {ChannelKind::Omega};
    cfg.methods = {"phi-gpr"};
    cfg.out_dir = join(base.out_dir, name);
    run_experiment(cfg);
  } else if (name == "both-obs") {
    cfg.observe.kinds = {ChannelKind::Theta, ChannelKind::Omega};
    cfg.methods = {"phi-gpr", "dd-gpr"};
    cfg.out_dir = join(base.out_dir, name);
    run_experiment(cfg);
  } else if (name == "cadence-sweep") {
    cfg.observe.kinds = {ChannelKind::Theta, ChannelKind::Omega};
    cfg.methods = {"phi-gpr", "arima"};
    for (double delta : {0.05, 0.125, 0.25}) {
      ExperimentConfig sub = cfg;
      sub.observe.interval = delta;
      sub.out_dir = join(join(base.out_dir, name),
                         "delta_" + ConfigFile::format_double(delta));
      run_experiment(sub);
    }
  } else if (name == "noise-sweep") {
    cfg.observe.kinds = {ChannelKind::Theta, ChannelKind::Omega};
    cfg.methods = {"phi-gpr", "arima"};
    cfg.observe.interval = 0.25;
    for (double pct : {0.0, 1.0, 5.0}) {
      ExperimentConfig sub = cfg;
      sub.observe.noise_percent = pct;
      sub.out_dir = join(join(base.out_dir, name),
                         "noise_" + ConfigFile::format_double(pct));
      run_experiment(sub);
    }
  } else if (name == "steady-state") {
    run_steady_state(base);
  } else {
    throw ConfigError("unknown recipe '" + name + "'");
  }
}

}  // namespace phigpr
