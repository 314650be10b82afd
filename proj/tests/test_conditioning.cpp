#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/LU>
#include <cmath>
#include <random>

#include "phigpr/errors.hpp"
#include "phigpr/gpr.hpp"
#include "phigpr/rng.hpp"

using namespace phigpr;

namespace {

// Hand-assembled joint prior over n_obs + n_target points of a single channel.
JointGp make_joint(const Eigen::VectorXd& mean_obs, const Eigen::VectorXd& mean_target,
                   const Eigen::MatrixXd& k_oo, const Eigen::MatrixXd& k_ot,
                   const Eigen::MatrixXd& k_tt) {
  JointGp j;
  j.mean_obs = mean_obs;
  j.mean_target = mean_target;
  j.k_oo = k_oo;
  j.k_ot = k_ot;
  j.k_tt = k_tt;
  j.obs.channels = {theta_channel(1)};
  j.obs.times = Eigen::VectorXd::LinSpaced(mean_obs.size(), 0.0, 1.0);
  j.obs_noise_std = Eigen::VectorXd::Zero(1);
  j.target.channels = {theta_channel(1)};
  j.target.times = Eigen::VectorXd::LinSpaced(mean_target.size(), 2.0, 3.0);
  return j;
}

ObservationSet obs_values(const Eigen::VectorXd& v) {
  ObservationSet o;
  o.values = v;
  o.noise_std = Eigen::VectorXd::Zero(1);
  return o;
}

double se_kernel(double a, double b) { return std::exp(-0.5 * (a - b) * (a - b)); }

}  // namespace

TEST_CASE("single observation, single target, by hand") {
  Eigen::MatrixXd one = Eigen::MatrixXd::Constant(1, 1, 1.0);
  Eigen::MatrixXd half = Eigen::MatrixXd::Constant(1, 1, 0.5);
  JointGp j = make_joint(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), one, half, one);
  GpPosterior post = condition(j, obs_values(Eigen::VectorXd::Constant(1, 2.0)));
  CHECK(post.mean[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(post.cov(0, 0) == doctest::Approx(0.75).epsilon(1e-12));

  Band band = credible_band(post, 2.0);
  CHECK(band.lower[0] == doctest::Approx(1.0 - 2.0 * std::sqrt(0.75)).epsilon(1e-12));
  CHECK(band.upper[0] == doctest::Approx(1.0 + 2.0 * std::sqrt(0.75)).epsilon(1e-12));
  Band center = credible_band(post, 0.0);
  CHECK(center.lower[0] == post.mean[0]);
  CHECK(center.upper[0] == post.mean[0]);
}

TEST_CASE("observing the prior mean leaves the prediction at the prior mean") {
  std::mt19937_64 rng = make_engine(17);
  std::normal_distribution<double> nd;
  int n = 6, m = 4;
  Eigen::MatrixXd a(n + m, n + m);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index k = 0; k < a.cols(); ++k) a(i, k) = nd(rng);
  Eigen::MatrixXd k = a * a.transpose() + (n + m) * Eigen::MatrixXd::Identity(n + m, n + m);

  Eigen::VectorXd mo(n), mt(m);
  for (int i = 0; i < n; ++i) mo[i] = nd(rng);
  for (int i = 0; i < m; ++i) mt[i] = nd(rng);
  JointGp j = make_joint(mo, mt, k.topLeftCorner(n, n), k.topRightCorner(n, m),
                         k.bottomRightCorner(m, m));
  GpPosterior post = condition(j, obs_values(mo));
  CHECK((post.mean - mt).cwiseAbs().maxCoeff() < 1e-14);
  // and the covariance shrinks relative to the prior
  for (int i = 0; i < m; ++i) CHECK(post.cov(i, i) <= k.bottomRightCorner(m, m)(i, i) + 1e-8);
}

TEST_CASE("noiseless conditioning interpolates the data") {
  const int n = 10;
  Eigen::VectorXd t_obs = Eigen::VectorXd::LinSpaced(n, 0.0, 9.0);
  Eigen::VectorXd t_target = Eigen::VectorXd::LinSpaced(19, 0.0, 9.0);
  Eigen::VectorXd values(n);
  for (int i = 0; i < n; ++i) values[i] = std::sin(0.7 * t_obs[i]);

  Eigen::MatrixXd k_oo(n, n), k_ot(n, 19), k_tt(19, 19);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) k_oo(i, k) = se_kernel(t_obs[i], t_obs[k]);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 19; ++k) k_ot(i, k) = se_kernel(t_obs[i], t_target[k]);
  for (int i = 0; i < 19; ++i)
    for (int k = 0; k < 19; ++k) k_tt(i, k) = se_kernel(t_target[i], t_target[k]);
  k_oo.diagonal().array() += 1e-10;  // assembly-style jitter

  JointGp j = make_joint(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(19), k_oo, k_ot, k_tt);
  GpPosterior post = condition(j, obs_values(values));

  for (int i = 0; i < n; ++i) {
    int at = 2 * i;  // target grid is twice as fine
    CHECK(std::abs(post.mean[at] - values[i]) < 1e-6);
    CHECK(post.cov(at, at) <= 1e-8);
  }
  for (int i = 0; i < 19; ++i) CHECK(post.cov(i, i) <= k_tt(i, i) + 1e-8);
  Eigen::VectorXd sd = post.stddev();
  for (int i = 0; i < 19; ++i) CHECK(sd[i] >= 0.0);
}

TEST_CASE("observation order does not change the posterior") {
  std::mt19937_64 rng = make_engine(29);
  std::normal_distribution<double> nd;
  const int n = 5, m = 3;
  Eigen::MatrixXd a(n + m, n + m);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index k = 0; k < a.cols(); ++k) a(i, k) = nd(rng);
  Eigen::MatrixXd kk = a * a.transpose() + 2.0 * Eigen::MatrixXd::Identity(n + m, n + m);
  Eigen::VectorXd vals(n);
  for (int i = 0; i < n; ++i) vals[i] = nd(rng);

  JointGp j = make_joint(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(m),
                         kk.topLeftCorner(n, n), kk.topRightCorner(n, m),
                         kk.bottomRightCorner(m, m));
  GpPosterior base = condition(j, obs_values(vals));

  std::vector<int> perm = {3, 0, 4, 1, 2};
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) p(i, perm[i]) = 1.0;
  JointGp jp = j;
  jp.k_oo = p * j.k_oo * p.transpose();
  jp.k_ot = p * j.k_ot;
  Eigen::VectorXd vp = p * vals;
  GpPosterior shuffled = condition(jp, obs_values(vp));

  CHECK((base.mean - shuffled.mean).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((base.cov - shuffled.cov).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("posterior matches a direct inverse and tightens with more data") {
  std::mt19937_64 rng = make_engine(41);
  std::normal_distribution<double> nd;
  const int total = 9, tgt = 4;
  Eigen::MatrixXd a(total, total);
  for (Eigen::Index i = 0; i < total; ++i)
    for (Eigen::Index k = 0; k < total; ++k) a(i, k) = nd(rng);
  Eigen::MatrixXd kk = a * a.transpose() + total * Eigen::MatrixXd::Identity(total, total);
  Eigen::VectorXd vals(total - tgt);
  for (Eigen::Index i = 0; i < vals.size(); ++i) vals[i] = nd(rng);

  auto conditioned = [&](int n_obs) {
    Eigen::MatrixXd k_oo = kk.topLeftCorner(n_obs, n_obs);
    Eigen::MatrixXd k_ot = kk.block(0, total - tgt, n_obs, tgt);
    Eigen::MatrixXd k_tt = kk.bottomRightCorner(tgt, tgt);
    JointGp j = make_joint(Eigen::VectorXd::Zero(n_obs), Eigen::VectorXd::Zero(tgt), k_oo, k_ot,
                           k_tt);
    return condition(j, obs_values(vals.head(n_obs)));
  };

  GpPosterior with3 = conditioned(3);
  // oracle through an explicit inverse
  Eigen::MatrixXd k_oo = kk.topLeftCorner(3, 3);
  Eigen::MatrixXd k_ot = kk.block(0, total - tgt, 3, tgt);
  Eigen::MatrixXd k_tt = kk.bottomRightCorner(tgt, tgt);
  Eigen::MatrixXd inv = k_oo.inverse();
  Eigen::VectorXd mean_ref = k_ot.transpose() * inv * vals.head(3);
  Eigen::MatrixXd cov_ref = k_tt - k_ot.transpose() * inv * k_ot;
  CHECK((with3.mean - mean_ref).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((with3.cov - cov_ref).cwiseAbs().maxCoeff() < 1e-9);

  GpPosterior with5 = conditioned(5);
  for (int i = 0; i < tgt; ++i) CHECK(with5.cov(i, i) <= with3.cov(i, i) + 1e-10);
}

TEST_CASE("a joint solve agrees with one target at a time") {
  std::mt19937_64 rng = make_engine(53);
  std::normal_distribution<double> nd;
  const int n = 6, m = 5;
  Eigen::MatrixXd a(n + m, n + m);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index k = 0; k < a.cols(); ++k) a(i, k) = nd(rng);
  Eigen::MatrixXd kk = a * a.transpose() + 3.0 * Eigen::MatrixXd::Identity(n + m, n + m);
  Eigen::VectorXd vals(n);
  for (int i = 0; i < n; ++i) vals[i] = nd(rng);

  JointGp all = make_joint(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(m),
                           kk.topLeftCorner(n, n), kk.topRightCorner(n, m),
                           kk.bottomRightCorner(m, m));
  GpPosterior joint_post = condition(all, obs_values(vals));

  for (int i = 0; i < m; ++i) {
    JointGp one = make_joint(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(1),
                             kk.topLeftCorner(n, n), kk.block(0, n + i, n, 1),
                             kk.block(n + i, n + i, 1, 1));
    GpPosterior single = condition(one, obs_values(vals));
    CHECK(std::abs(single.mean[0] - joint_post.mean[i]) < 1e-10);
    CHECK(std::abs(single.cov(0, 0) - joint_post.cov(i, i)) < 1e-10);
  }
}

TEST_CASE("a singular but consistent system succeeds through the jitter retry") {
  Eigen::MatrixXd k_oo(2, 2);
  k_oo << 1.0, 1.0, 1.0, 1.0;  // rank one: the same point observed twice
  Eigen::MatrixXd k_ot(2, 1);
  k_ot << 0.8, 0.8;
  Eigen::MatrixXd k_tt = Eigen::MatrixXd::Constant(1, 1, 1.0);
  JointGp j = make_joint(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(1), k_oo, k_ot, k_tt);
  GpPosterior post = condition(j, obs_values(Eigen::VectorXd::Constant(2, 0.6)));
  CHECK(post.mean[0] == doctest::Approx(0.8 * 0.6).epsilon(1e-3));
  CHECK(post.cov(0, 0) >= 0.0);
  CHECK(post.cov(0, 0) < 1.0);
}

TEST_CASE("an indefinite observation matrix is rejected") {
  Eigen::MatrixXd k_oo(2, 2);
  k_oo << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3 and -1
  Eigen::MatrixXd k_ot = Eigen::MatrixXd::Constant(2, 1, 0.1);
  Eigen::MatrixXd k_tt = Eigen::MatrixXd::Constant(1, 1, 1.0);
  JointGp j = make_joint(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(1), k_oo, k_ot, k_tt);
  CHECK_THROWS_AS(condition(j, obs_values(Eigen::VectorXd::Zero(2))),
                  IllConditionedError);
}

TEST_CASE("tiny negative predicted variances clamp to zero, large ones abort") {
  auto degenerate = [](double defect) {
    Eigen::MatrixXd one = Eigen::MatrixXd::Constant(1, 1, 1.0);
    Eigen::MatrixXd k_tt = Eigen::MatrixXd::Constant(1, 1, 1.0 - defect);
    JointGp j = make_joint(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), one, one, k_tt);
    return condition(j, obs_values(Eigen::VectorXd::Constant(1, 0.5)));
  };
  GpPosterior post = degenerate(1e-9);
  CHECK(post.stddev()[0] == 0.0);
  CHECK_THROWS_AS(degenerate(1e-5), NumericalError);
}
