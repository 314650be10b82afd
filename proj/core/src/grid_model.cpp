#include "phigpr/grid_model.hpp"

#include <cmath>

#include "phigpr/config_file.hpp"
#include "phigpr/errors.hpp"

namespace phigpr {

void GridParameters::validate() const {
  if (n_gen < 1) throw ContractError("grid: n_gen must be >= 1");
  auto check_vec = [&](const Eigen::VectorXd& v, const char* name) {
    if (v.size() != n_gen) throw ContractError(std::string("grid: ") + name + " has wrong length");
  };
  check_vec(inertia, "inertia");
  check_vec(damping, "damping");
  check_vec(emf, "emf");
  check_vec(wind_mean, "wind_mean");
  check_vec(wind_sigma, "wind_sigma");
  check_vec(wind_lambda, "wind_lambda");
  if (conductance.rows() != n_gen || conductance.cols() != n_gen)
    throw ContractError("grid: conductance must be n_gen x n_gen");
  if (susceptance.rows() != n_gen || susceptance.cols() != n_gen)
    throw ContractError("grid: susceptance must be n_gen x n_gen");
  for (int k = 0; k < n_gen; ++k) {
    if (!(inertia[k] > 0.0)) throw ContractError("grid: inertia must be positive");
    if (damping[k] < 0.0) throw ContractError("grid: damping must be nonnegative");
    if (wind_sigma[k] < 0.0) throw ContractError("grid: wind_sigma must be nonnegative");
    if (wind_sigma[k] > 0.0 && !(wind_lambda[k] > 0.0))
      throw ContractError("grid: wind_lambda must be positive where wind_sigma > 0");
  }
  if (!(base_speed > 0.0)) throw ContractError("grid: base_speed must be positive");
}

GridParameters GridParameters::from_config(const ConfigFile& cfg) {
  GridParameters p;
  p.n_gen = static_cast<int>(cfg.get_int("grid", "n_gen"));
  p.inertia = cfg.get_vector("grid", "inertia");
  p.damping = cfg.get_vector("grid", "damping");
  p.emf = cfg.get_vector("grid", "emf");
  p.conductance = cfg.get_matrix("grid", "conductance");
  p.susceptance = cfg.get_matrix("grid", "susceptance");
  p.base_speed = cfg.get_double("grid", "base_speed");
  p.sync_speed = cfg.get_double("grid", "sync_speed");
  p.wind_mean = cfg.get_vector("grid", "wind_mean");
  p.wind_sigma = cfg.get_vector("grid", "wind_sigma");
  p.wind_lambda = cfg.get_vector("grid", "wind_lambda");
  p.validate();
  return p;
}

GridParameters GridParameters::load(const std::string& path) {
  return from_config(ConfigFile::parse_file(path));
}

Eigen::VectorXd electrical_power(const Eigen::VectorXd& theta, const GridParameters& p) {
  const int n = p.n_gen;
  if (theta.size() != n) throw ContractError("electrical_power: theta has wrong length");
  // cos/sin of differences via the addition identities, 2n transcendentals
  // instead of n^2.
  Eigen::ArrayXd c = theta.array().cos();
  Eigen::ArrayXd s = theta.array().sin();
  Eigen::VectorXd out(n);
  for (int k = 0; k < n; ++k) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      double cos_d = c[k] * c[i] + s[k] * s[i];
      double sin_d = s[k] * c[i] - c[k] * s[i];
      acc += p.emf[i] * (p.conductance(k, i) * cos_d + p.susceptance(k, i) * sin_d);
    }
    out[k] = p.emf[k] * acc;
  }
  return out;
}

SwingDrift swing_drift(const GridState& state, const GridParameters& p) {
  const int n = p.n_gen;
  if (state.theta.size() != n || state.omega.size() != n || state.wind_fluct.size() != n)
    throw ContractError("swing_drift: state has wrong dimensions");
  if (!state.theta.allFinite() || !state.omega.allFinite() || !state.wind_fluct.allFinite())
    throw ContractError("swing_drift: non-finite state");
  SwingDrift d;
  d.dtheta = p.base_speed * (state.omega.array() - p.sync_speed).matrix();
  Eigen::VectorXd pe = electrical_power(state.theta, p);
  d.domega.resize(n);
  for (int k = 0; k < n; ++k) {
    double pm = p.wind_mean[k] + state.wind_fluct[k];
    d.domega[k] =
        (pm - pe[k] - p.damping[k] * (state.omega[k] - p.sync_speed)) / (2.0 * p.inertia[k]);
  }
  return d;
}

}  // namespace phigpr
