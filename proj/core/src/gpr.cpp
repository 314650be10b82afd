#include "phigpr/gpr.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "phigpr/errors.hpp"

namespace phigpr {

Eigen::VectorXd GpPosterior::stddev() const {
  return cov.diagonal().array().max(0.0).sqrt().matrix();
}

Eigen::VectorXd GpPosterior::channel_mean(std::size_t channel) const {
  const Eigen::Index nt = layout.times.size();
  return mean.segment(static_cast<Eigen::Index>(channel) * nt, nt);
}

Eigen::VectorXd GpPosterior::channel_stddev(std::size_t channel) const {
  const Eigen::Index nt = layout.times.size();
  return stddev().segment(static_cast<Eigen::Index>(channel) * nt, nt);
}

GpPosterior condition(const JointGp& joint, const ObservationSet& obs) {
  const Eigen::Index n_o = joint.k_oo.rows();
  const Eigen::Index n_t = joint.k_tt.rows();
  if (obs.values.size() != n_o)
    throw ContractError("condition: observation vector does not match the observed block");
  if (joint.k_ot.rows() != n_o || joint.k_ot.cols() != n_t)
    throw ContractError("condition: inconsistent joint block shapes");
  if (!obs.values.allFinite()) throw ContractError("condition: non-finite observation values");

  Eigen::LLT<Eigen::MatrixXd> llt(joint.k_oo);
  if (llt.info() != Eigen::Success) {
    Eigen::MatrixXd retry = joint.k_oo;
    double jitter = 1e-8 * retry.diagonal().maxCoeff();
    retry.diagonal().array() += jitter;
    llt.compute(retry);
    if (llt.info() != Eigen::Success) {
      // report the failing pivot of the plain factorization for diagnosis
      Eigen::MatrixXd a = joint.k_oo;
      double pivot = 0.0;
      Eigen::Index at = -1;
      for (Eigen::Index k = 0; k < n_o; ++k) {
        double d = a(k, k);
        if (d <= 0.0) {
          pivot = d;
          at = k;
          break;
        }
        double root = std::sqrt(d);
        a.col(k).tail(n_o - k - 1) /= root;
        for (Eigen::Index j = k + 1; j < n_o; ++j)
          a.col(j).tail(n_o - j).noalias() -= a(j, k) * a.col(k).tail(n_o - j);
      }
      throw IllConditionedError("condition: observation covariance is not positive definite (pivot " +
                                std::to_string(pivot) + " at index " + std::to_string(at) + ")");
    }
  }

  GpPosterior post;
  post.layout = joint.target;
  Eigen::VectorXd innovation = obs.values - joint.mean_obs;
  post.mean = joint.mean_target + joint.k_ot.transpose() * llt.solve(innovation);

  // cov = k_tt - C' C with C = L^{-1} k_ot, accumulated as a symmetric update
  Eigen::MatrixXd c = joint.k_ot;
  llt.matrixL().solveInPlace(c);
  post.cov = joint.k_tt;
  post.cov.selfadjointView<Eigen::Lower>().rankUpdate(c.transpose(), -1.0);
  post.cov.triangularView<Eigen::StrictlyUpper>() =
      post.cov.transpose().triangularView<Eigen::StrictlyUpper>();

  for (Eigen::Index i = 0; i < n_t; ++i) {
    double d = post.cov(i, i);
    if (d < -1e-8)
      throw NumericalError("condition: posterior variance " + std::to_string(d) +
                           " below the clamp tolerance at index " + std::to_string(i));
    if (d < 0.0) post.cov(i, i) = 0.0;
  }
  return post;
}

Band credible_band(const GpPosterior& posterior, double multiplier) {
  if (!(multiplier >= 0.0)) throw ContractError("credible_band: multiplier must be nonnegative");
  Band band;
  band.mean = posterior.mean;
  Eigen::VectorXd half = multiplier * posterior.stddev();
  band.lower = posterior.mean - half;
  band.upper = posterior.mean + half;
  return band;
}

}  // namespace phigpr
