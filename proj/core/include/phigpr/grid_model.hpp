#pragma once

#include <Eigen/Core>
#include <string>

namespace phigpr {

class ConfigFile;

/// Constants of a reduced network of synchronous machines, wind-driven or not.
///
/// Angles are radians, speeds are per unit deviations from synchronous, time
/// is seconds. A generator k is wind driven iff wind_sigma[k] > 0; its
/// mechanical power is wind_mean[k] plus an exponentially correlated
/// fluctuation with stationary std wind_sigma[k] and correlation time
/// wind_lambda[k].
struct GridParameters {
  int n_gen = 0;
  Eigen::VectorXd inertia;       // H_k, seconds
  Eigen::VectorXd damping;       // D_k, p.u.
  Eigen::VectorXd emf;           // E_k, internal voltage magnitude
  Eigen::MatrixXd conductance;   // G, reduced network
  Eigen::MatrixXd susceptance;   // B, reduced network
  double base_speed = 0.0;       // omega_B, rad/s
  double sync_speed = 0.0;       // omega_s, p.u. deviation reference
  Eigen::VectorXd wind_mean;     // mean mechanical power
  Eigen::VectorXd wind_sigma;    // stationary fluctuation std, 0 = not wind driven
  Eigen::VectorXd wind_lambda;   // correlation time, used only where sigma > 0

  bool wind_driven(int k) const { return wind_sigma[k] > 0.0; }

  /// Throws ContractError on dimension mismatches, nonpositive inertia,
  /// negative damping/sigma, or nonpositive lambda on wind-driven rows.
  void validate() const;

  static GridParameters from_config(const ConfigFile& cfg);
  static GridParameters load(const std::string& path);
};

/// Instantaneous state: theta (rad), omega (p.u. deviation), wind fluctuation.
struct GridState {
  Eigen::VectorXd theta;
  Eigen::VectorXd omega;
  Eigen::VectorXd wind_fluct;
};

/// Active electrical power injected by each machine,
///   P_k = sum_i E_k E_i (G_ki cos(theta_k - theta_i) + B_ki sin(theta_k - theta_i)).
/// Depends on angles only through pairwise differences.
Eigen::VectorXd electrical_power(const Eigen::VectorXd& theta, const GridParameters& p);

struct SwingDrift {
  Eigen::VectorXd dtheta;
  Eigen::VectorXd domega;
};

/// Deterministic part of the swing dynamics at mechanical power
/// wind_mean + state.wind_fluct:
///   dtheta_k = omega_B (omega_k - omega_s)
///   domega_k = (Pm_k - Pe_k - D_k (omega_k - omega_s)) / (2 H_k)
SwingDrift swing_drift(const GridState& state, const GridParameters& p);

}  // namespace phigpr
