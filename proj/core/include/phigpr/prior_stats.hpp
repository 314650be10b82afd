#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "phigpr/sde_sim.hpp"

namespace phigpr {

/// A scalar observable of the grid state. Generator indices are 1-based as in
/// the usual machine numbering; relative kinds are value(index) - value(reference).
enum class ChannelKind { Theta, Omega, WindFluct, ThetaRel, OmegaRel };

struct StateChannel {
  ChannelKind kind = ChannelKind::Theta;
  int index = 1;
  int reference = 0;  // used by the relative kinds only

  bool is_relative() const { return kind == ChannelKind::ThetaRel || kind == ChannelKind::OmegaRel; }
  bool operator==(const StateChannel& o) const {
    return kind == o.kind && index == o.index && (is_relative() ? reference == o.reference : true);
  }
};

StateChannel theta_channel(int k);
StateChannel omega_channel(int k);
StateChannel wind_channel(int k);
StateChannel theta_rel_channel(int k, int ref);
StateChannel omega_rel_channel(int k, int ref);

/// "theta_2", "pwind_1", "theta_2-theta_1", ...
std::string channel_label(const StateChannel& ch);
StateChannel parse_channel_label(const std::string& label);

/// Values of a channel along one recorded trajectory.
Eigen::VectorXd channel_values(const Trajectory& traj, const StateChannel& ch);

/// Ensemble mean and two-time covariance of a set of channels over a common
/// time grid. Means use 1/N, covariances 1/(N-1) around the ensemble mean.
/// The covariance of channels (i, j), i <= j in declaration order, is stored
/// once as the matrix K_ij with K_ij(a, b) = cov(ch_i(t_a), ch_j(t_b)); the
/// swapped orientation is its transpose.
struct MomentTable {
  Eigen::VectorXd grid;
  std::vector<StateChannel> channels;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> pair_cov;  // packed upper-triangle pair order
  int n_members = 0;

  Eigen::Index n_channels() const { return static_cast<Eigen::Index>(channels.size()); }
  int channel_position(const StateChannel& ch) const;  // -1 if absent
  const Eigen::MatrixXd& pair(int i, int j) const;     // requires i <= j
  double cov_entry(int i, int j, Eigen::Index a, Eigen::Index b) const;
};

MomentTable ensemble_moments(const Ensemble& ens, const std::vector<StateChannel>& channels,
                             const Eigen::VectorXd& grid, int n_threads = 1);

/// Mean and two-time covariance of value(k) - value(ref) derived from a table
/// of raw channels by linearity. `rel_kind` must be one of the relative kinds.
struct RelativeStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};
RelativeStats relative_channel_stats(const MomentTable& table, ChannelKind rel_kind, int k, int ref);

/// A set of channels sharing one time vector; entries are laid out as all
/// times of the first channel, then all times of the second, and so on.
struct BlockSpec {
  std::vector<StateChannel> channels;
  Eigen::VectorXd times;

  Eigen::Index total_size() const {
    return static_cast<Eigen::Index>(channels.size()) * times.size();
  }
};

struct ObsSpec {
  BlockSpec block;
  /// Per-channel observation noise std added to the matching diagonal block
  /// of k_oo. Scalar convenience: a size-1 vector broadcasts to all channels.
  Eigen::VectorXd noise_std;
};

/// Joint prior over observed and target blocks. k_oo already includes the
/// noise diagonal (and, when any channel is noiseless, a relative jitter of
/// 1e-10 times the largest diagonal entry).
struct JointGp {
  Eigen::VectorXd mean_obs;
  Eigen::VectorXd mean_target;
  Eigen::MatrixXd k_oo;  // obs x obs
  Eigen::MatrixXd k_ot;  // obs x target
  Eigen::MatrixXd k_tt;  // target x target
  BlockSpec obs;
  BlockSpec target;
  Eigen::VectorXd obs_noise_std;
};

/// Slices the moment table into the joint blocks. Channels may be raw table
/// entries or relative kinds expanded by linearity over raw entries; every
/// requested time must lie on the table grid (1e-9 relative tolerance).
JointGp assemble_joint(const MomentTable& table, const ObsSpec& obs, const BlockSpec& target);

/// Index of `t` on `grid` within 1e-9 relative tolerance; ContractError if absent.
Eigen::Index grid_index_of(const Eigen::VectorXd& grid, double t);

}  // namespace phigpr
