#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "phigpr/grid_model.hpp"

namespace phigpr {

/// Integration settings. The integrator always steps at `step`; states are
/// recorded every `record_stride` steps (the first and last step included),
/// so the stored grid spacing is record_stride * step.
struct SimConfig {
  double step = 0.0;
  double t_end = 0.0;
  std::uint64_t seed = 0;
  Eigen::VectorXd init_theta;
  Eigen::VectorXd init_omega;
  /// Explicit initial wind fluctuation, or empty to draw each wind-driven
  /// generator from its stationary law N(0, sigma_k^2).
  std::optional<Eigen::VectorXd> init_wind;
  int record_stride = 1;
};

/// Recorded path on a uniform time grid. Matrices are (n_times x n_gen).
struct Trajectory {
  Eigen::VectorXd times;
  Eigen::MatrixXd theta;
  Eigen::MatrixXd omega;
  Eigen::MatrixXd wind;

  Eigen::Index n_times() const { return times.size(); }
  int n_gen() const { return static_cast<int>(theta.cols()); }
};

struct Ensemble {
  std::vector<Trajectory> members;
  std::vector<std::uint64_t> seeds;  // per-member seeds derived from the master seed
};

/// One stationary draw per generator, sigma_k = 0 generators yield 0 and
/// consume nothing from the stream.
Eigen::VectorXd sample_stationary_wind(const GridParameters& p, std::mt19937_64& rng);

/// One step of the weak second order two-stage scheme. The wind fluctuation
/// of generator k advances with drift -P'/lambda_k and diffusion
/// sigma_k sqrt(2/lambda_k); the swing states take an Euler predictor and a
/// trapezoidal corrector plus the h^{3/2} cross term. Each wind-driven
/// generator consumes exactly two N(0,1) draws (xi, eta) from its own stream;
/// sigma_k = 0 generators consume nothing and their fluctuation stays zero.
GridState scheme_step(const GridState& state, const GridParameters& p, double h,
                      std::vector<std::mt19937_64>& gen_streams);

/// Integrates one path. Requires h <= min(lambda_k)/10 over wind-driven
/// generators; throws IntegrationBlowup if any state goes non-finite.
Trajectory simulate(const SimConfig& cfg, const GridParameters& p);

/// n_members independent paths; member i runs with seed derive_seed(master, i)
/// and is bit-identical for any thread count.
Ensemble generate_ensemble(const SimConfig& cfg, const GridParameters& p, int n_members,
                           int n_threads = 1);

/// Keeps every time that lies on the coarser cadence. `interval` must be an
/// integer multiple of the recorded spacing within 1e-9 relative.
Trajectory subsample(const Trajectory& traj, double interval);

}  // namespace phigpr
