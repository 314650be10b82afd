#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "phigpr/prior_stats.hpp"

namespace phigpr {

/// Observed values laid out to match a JointGp's observation block.
/// noise_std records what was injected; the noise variance itself already
/// sits on the joint's k_oo diagonal.
struct ObservationSet {
  Eigen::VectorXd values;
  Eigen::VectorXd noise_std;
  std::int64_t truth_member = -1;  // provenance, -1 when synthetic
  std::uint64_t noise_seed = 0;
};

struct GpPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  BlockSpec layout;

  Eigen::VectorXd stddev() const;
  Eigen::VectorXd channel_mean(std::size_t channel) const;
  Eigen::VectorXd channel_stddev(std::size_t channel) const;
};

/// Gaussian conditioning of the target block on the observed block:
///   mean = m_t + K_ot' K_oo^{-1} (x - m_o)
///   cov  = K_tt - K_ot' K_oo^{-1} K_ot
/// solved through a Cholesky factorization of k_oo (never an explicit
/// inverse), with one retry after adding 1e-8 * max-diagonal jitter. Negative
/// posterior diagonal entries above -1e-8 are clamped to zero; anything more
/// negative raises NumericalError.
GpPosterior condition(const JointGp& joint, const ObservationSet& obs);

struct Band {
  Eigen::VectorXd mean;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// Symmetric band mean +- multiplier * std from the posterior diagonal.
Band credible_band(const GpPosterior& posterior, double multiplier);

}  // namespace phigpr
