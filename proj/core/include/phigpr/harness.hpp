#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "phigpr/arima.hpp"
#include "phigpr/config_file.hpp"
#include "phigpr/csv_io.hpp"
#include "phigpr/dd_gpr.hpp"
#include "phigpr/gpr.hpp"
#include "phigpr/grid_model.hpp"
#include "phigpr/prior_stats.hpp"
#include "phigpr/sde_sim.hpp"

namespace phigpr {

/// What is measured: raw channel kinds (Theta and/or Omega), at cadence
/// `interval` over [0, t_obs_end), noise as a percentage of each observed
/// channel's sample std over the observation times.
struct ObservationPlan {
  std::vector<ChannelKind> kinds{ChannelKind::Theta};
  double interval = 0.05;
  double t_obs_end = 8.3375;
  double noise_percent = 0.0;
  std::uint64_t noise_seed = 0;
  // when set, GP assembly uses one pooled sigma_n (rms of the per-channel
  // stds) instead of per-channel values; injection stays per-channel
  bool pooled_noise = false;
};

struct TargetPlan {
  double estimation_interval = 0.025;  // grid on [0, t_obs_end]
  double forecast_interval = 0.025;    // grid on (t_obs_end, t_forecast_end]
  double t_forecast_end = 12.5;
};

struct ExperimentConfig {
  GridParameters grid;
  double step = 0.0025;
  double t_end = 12.5;
  double record_interval = 0.025;
  int n_members = 2000;
  std::uint64_t master_seed = 1;
  Eigen::VectorXd init_theta;
  Eigen::VectorXd init_omega;
  Eigen::VectorXd init_wind;  // empty = stationary draw
  ObservationPlan observe;
  TargetPlan target;
  std::uint64_t selector_seed = 0;
  std::vector<std::string> methods{"phi-gpr"};  // subset of phi-gpr, dd-gpr, arima
  DdFitConfig dd_fit;
  int arima_p_max = 20;
  int arima_q_max = 3;
  std::string out_dir = "out";
  int n_threads = 0;  // 0 = hardware concurrency

  void validate() const;
  /// Reads an experiment file; a [grid] `config` key is resolved relative to
  /// the experiment file's directory.
  static ExperimentConfig load(const std::string& path);
  ConfigFile snapshot() const;  // fully resolved, reloadable
};

/// The quantities the experiment reports: angle and speed differences
/// against machine 1, and the mechanical power fluctuation of every
/// wind-driven machine.
std::vector<StateChannel> reported_quantities(const GridParameters& grid);

/// Raw channels the moment tables need to serve those quantities.
std::vector<StateChannel> moment_channels(const GridParameters& grid);

/// Lattice builders (1e-9 relative tolerance at the endpoints).
Eigen::VectorXd observation_times(const ObservationPlan& plan);   // j d in [0, T0)
Eigen::VectorXd estimation_times(const TargetPlan& plan, double t_obs_end);  // [0, T0]
Eigen::VectorXd forecast_times(const TargetPlan& plan, double t_obs_end);    // (T0, Tf]

struct GroundTruth {
  Trajectory truth;
  Ensemble reduced;
  std::int64_t member_index = -1;
};

/// Uniformly selects one member as ground truth (portable multiply-shift
/// draw from a seeded engine) and returns the rest for moment estimation.
GroundTruth make_ground_truth(const Ensemble& ens, std::uint64_t selector_seed);

struct Observations {
  ObsSpec spec;          // layout + per-channel sigma_n for assembly
  ObservationSet data;   // values with injected noise
  Eigen::VectorXd injected_std;  // per observed channel
};

Observations make_observations(const Trajectory& truth, const ObservationPlan& plan);

struct MethodResult {
  std::string method;
  std::vector<PosteriorSeries> estimation;  // empty for arima
  std::vector<PosteriorSeries> forecast;
  std::vector<MetricsRow> metrics;
};

struct RunRecord {
  ConfigFile config_snapshot;
  std::int64_t truth_member = -1;
  Eigen::VectorXd injected_noise_std;
  std::vector<MethodResult> methods;
  std::vector<std::string> files;  // everything written under out_dir
};

/// Ensemble generation, moment tables, ground truth and observations, every
/// requested method, metrics, persistence into config.out_dir. Stage
/// failures are rethrown with a stage tag after a failure marker record is
/// flushed.
RunRecord run_experiment(const ExperimentConfig& config);

/// Forecast/estimation series of one method as posterior series over the
/// requested windows. Exposed for tests and the CLI's method subcommands.
std::vector<PosteriorSeries> phi_gpr_series(const MomentTable& moments,
                                            const Observations& obs,
                                            const std::vector<StateChannel>& quantities,
                                            const Eigen::VectorXd& times,
                                            const Trajectory& truth);
std::vector<PosteriorSeries> dd_gpr_series(const Observations& obs,
                                           const std::vector<StateChannel>& quantities,
                                           const Eigen::VectorXd& times,
                                           const Trajectory& truth, const DdFitConfig& fit,
                                           std::vector<KernelSpec>* fitted = nullptr);
std::vector<PosteriorSeries> arima_series(const Observations& obs,
                                          const std::vector<StateChannel>& quantities,
                                          double t_forecast_end, const Trajectory& truth,
                                          int p_max, int q_max, int n_threads,
                                          std::vector<ArimaModel>* fitted = nullptr);

/// Observed values of a derived quantity assembled from the raw observation
/// block (relative channels by subtraction). ContractError when the quantity
/// is not derivable from the observed kinds; wind channels never are.
Eigen::VectorXd derived_observation_series(const Observations& obs, const StateChannel& quantity);

/// Metric rows of one posterior series over (t_min, t_max].
std::vector<MetricsRow> series_metrics(const PosteriorSeries& series, const std::string& window,
                                       double t_min, double t_max);

/// Per-figure files: <label>_truth.csv, <label>_posterior_<method>.csv,
/// <label>_observations.csv under dir. Returns paths written.
std::vector<std::string> emit_plotdata(const RunRecord& record, const ExperimentConfig& config,
                                       const Trajectory& truth, const Observations& obs,
                                       const std::string& dir);

/// Named experiment presets over a base config:
///   theta-obs, omega-obs, both-obs, cadence-sweep, noise-sweep, steady-state.
/// Sweeps run one sub-experiment per setting in a subdirectory of out_dir;
/// steady-state integrates to 25 s and emits moment curves only.
std::vector<std::string> recipe_names();
void run_recipe(const std::string& name, const ExperimentConfig& base);

}  // namespace phigpr
