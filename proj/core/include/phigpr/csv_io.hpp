#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "phigpr/prior_stats.hpp"
#include "phigpr/sde_sim.hpp"

namespace phigpr {

/// Trajectory table, one row per recorded time:
///   t, theta_1..N, omega_1..N, pwind_1..N
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::string& path);

/// One predicted channel with its uncertainty band. `truth` may be empty.
struct PosteriorSeries {
  std::string channel;
  Eigen::VectorXd times;
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
  Eigen::VectorXd truth;
};

/// Posterior table: channel, t, mean, std, lower2, upper2[, truth].
/// lower2/upper2 are mean -+ 2 std. The truth column is written only when
/// every series carries truth values.
void write_posterior_csv(const std::string& path, const std::vector<PosteriorSeries>& series);
std::vector<PosteriorSeries> read_posterior_csv(const std::string& path);

struct MetricsRow {
  int generator = 0;          // 0 for quantities not tied to one machine
  std::string quantity;       // channel label
  std::string window;         // "estimation" or "forecast"
  double lpp = 0.0;
  double coverage = 0.0;
  double rmse = 0.0;
};

/// Metrics table: generator, quantity, window, lpp, coverage, rmse.
void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics_csv(const std::string& path);

/// Mean/std curves of a moment table for plotting:
///   t, mean_<label>..., std_<label>...
void write_moment_curves_csv(const std::string& path, const MomentTable& table);
void write_moment_curves_csv(const std::string& path, const Eigen::VectorXd& grid,
                             const std::vector<StateChannel>& channels,
                             const std::vector<Eigen::VectorXd>& means,
                             const std::vector<Eigen::VectorXd>& stds);

/// Generic aligned-column table: `columns[i]` under `header[i]`.
void write_columns_csv(const std::string& path, const std::vector<std::string>& header,
                       const std::vector<Eigen::VectorXd>& columns);

}  // namespace phigpr
