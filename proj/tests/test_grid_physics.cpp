#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "phigpr/config_file.hpp"
#include "phigpr/errors.hpp"
#include "phigpr/grid_model.hpp"

using namespace phigpr;

namespace {

GridParameters three_machine() {
  return GridParameters::load(std::string(PHIGPR_CONFIG_DIR) + "/three_gen.cfg");
}

GridParameters single_machine(double g, double b) {
  GridParameters p;
  p.n_gen = 1;
  p.inertia = Eigen::VectorXd::Constant(1, 5.0);
  p.damping = Eigen::VectorXd::Constant(1, 1.0);
  p.emf = Eigen::VectorXd::Constant(1, 1.1);
  p.conductance = Eigen::MatrixXd::Constant(1, 1, g);
  p.susceptance = Eigen::MatrixXd::Constant(1, 1, b);
  p.base_speed = 120.0;
  p.sync_speed = 0.0;
  p.wind_mean = Eigen::VectorXd::Zero(1);
  p.wind_sigma = Eigen::VectorXd::Zero(1);
  p.wind_lambda = Eigen::VectorXd::Constant(1, 1.0);
  return p;
}

}  // namespace

TEST_CASE("shipped three-machine constants load bit-exactly") {
  GridParameters p = three_machine();
  REQUIRE(p.n_gen == 3);
  CHECK(p.inertia[0] == 13.64);
  CHECK(p.inertia[1] == 6.4);
  CHECK(p.inertia[2] == 3.01);
  CHECK(p.damping[0] == 9.6);
  CHECK(p.damping[1] == 2.5);
  CHECK(p.damping[2] == 1.0);
  CHECK(p.emf[0] == 1.0156);
  CHECK(p.emf[1] == 1.0359);
  CHECK(p.emf[2] == 1.0053);
  CHECK(p.base_speed == 120.0);
  CHECK(p.sync_speed == 0.0);
  CHECK(p.wind_mean[0] == 0.7195);
  CHECK(p.wind_mean[1] == 1.63);
  CHECK(p.wind_mean[2] == 0.85);
  CHECK(p.wind_sigma[0] == 0.05);
  CHECK(p.wind_sigma[1] == 0.05);
  CHECK(p.wind_sigma[2] == 0.0);
  CHECK(p.wind_lambda[0] == 1.8);
  CHECK(p.wind_lambda[1] == 1.8);

  const double g_expect[3][3] = {{0.8815, 0.3083, 0.2258},
                                 {0.3083, 0.4357, 0.2247},
                                 {0.2258, 0.2247, 0.2860}};
  const double b_expect[3][3] = {{-3.0273, 1.4904, 1.2088},
                                 {1.4904, -2.7397, 1.0764},
                                 {1.2088, 1.0764, -2.3770}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      CHECK(p.conductance(i, j) == g_expect[i][j]);
      CHECK(p.susceptance(i, j) == b_expect[i][j]);
    }
  CHECK(p.wind_driven(0));
  CHECK(p.wind_driven(1));
  CHECK(!p.wind_driven(2));
}

TEST_CASE("electrical power at reference angle vectors") {
  GridParameters p = three_machine();

  // frozen values from an independent evaluation of the double sum
  Eigen::VectorXd pe0 = electrical_power(Eigen::VectorXd::Zero(3), p);
  CHECK(pe0[0] == doctest::Approx(1.464105321316).epsilon(1e-12));
  CHECK(pe0[1] == doctest::Approx(1.025895298518).epsilon(1e-12));
  CHECK(pe0[2] == doctest::Approx(0.753577916553).epsilon(1e-12));

  Eigen::VectorXd th(3);
  th << 0.0431, 0.4584, 0.2372;
  Eigen::VectorXd pe1 = electrical_power(th, p);
  CHECK(pe1[0] == doctest::Approx(0.5615267309674764).epsilon(1e-12));
  CHECK(pe1[1] == doctest::Approx(1.8711884889093737).epsilon(1e-12));
  CHECK(pe1[2] == doctest::Approx(0.735659627120677).epsilon(1e-12));

  th << -0.3, 0.7, 1.9;
  Eigen::VectorXd pe2 = electrical_power(th, p);
  CHECK(pe2[0] == doctest::Approx(-1.368442744525292).epsilon(1e-12));
  CHECK(pe2[1] == doctest::Approx(1.0022305613086395).epsilon(1e-12));
  CHECK(pe2[2] == doctest::Approx(2.28074826208683).epsilon(1e-12));
}

TEST_CASE("single machine power is E^2 g at any angle") {
  GridParameters p = single_machine(0.73, -2.1);
  for (double th : {0.0, 0.3, -1.7, 12.0}) {
    Eigen::VectorXd pe = electrical_power(Eigen::VectorXd::Constant(1, th), p);
    CHECK(pe[0] == doctest::Approx(1.1 * 1.1 * 0.73).epsilon(1e-14));
  }
}

TEST_CASE("electrical power sees only angle differences") {
  GridParameters p = three_machine();
  Eigen::VectorXd th(3);
  th << 0.2, -0.4, 1.1;
  Eigen::VectorXd base = electrical_power(th, p);
  for (double shift : {0.7, -3.0, 100.0}) {
    Eigen::VectorXd shifted = electrical_power(th.array() + shift, p);
    CHECK((shifted - base).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("zero conductance with symmetric susceptance balances to zero total power") {
  GridParameters p = three_machine();
  p.conductance.setZero();
  Eigen::VectorXd th(3);
  th << 0.9, -0.2, 0.45;
  Eigen::VectorXd pe = electrical_power(th, p);
  CHECK(std::abs(pe.sum()) < 1e-13);
}

TEST_CASE("power rejects wrong angle dimension") {
  GridParameters p = three_machine();
  CHECK_THROWS_AS(electrical_power(Eigen::VectorXd::Zero(2), p), ContractError);
}

TEST_CASE("drift vanishes at a constructed equilibrium") {
  GridParameters p = three_machine();
  GridState s;
  s.theta.resize(3);
  s.theta << 0.1, 0.5, 0.3;
  s.omega = Eigen::VectorXd::Constant(3, p.sync_speed);
  s.wind_fluct = Eigen::VectorXd::Zero(3);
  p.wind_mean = electrical_power(s.theta, p);
  SwingDrift d = swing_drift(s, p);
  CHECK(d.dtheta.cwiseAbs().maxCoeff() == 0.0);
  CHECK(d.domega.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("angle rate is the base speed at unit speed deviation") {
  GridParameters p = three_machine();
  GridState s;
  s.theta = Eigen::VectorXd::Zero(3);
  s.omega = Eigen::VectorXd::Constant(3, p.sync_speed + 1.0);
  s.wind_fluct = Eigen::VectorXd::Zero(3);
  SwingDrift d = swing_drift(s, p);
  for (int k = 0; k < 3; ++k) CHECK(d.dtheta[k] == doctest::Approx(120.0).epsilon(1e-14));
}

TEST_CASE("speed drift recomposes from its parts") {
  GridParameters p = three_machine();
  GridState s;
  s.theta.resize(3);
  s.theta << -0.1, 0.8, 0.25;
  s.omega.resize(3);
  s.omega << 0.02, -0.01, 0.005;
  s.wind_fluct.resize(3);
  s.wind_fluct << 0.03, -0.02, 0.0;
  SwingDrift d = swing_drift(s, p);
  Eigen::VectorXd pe = electrical_power(s.theta, p);
  for (int k = 0; k < 3; ++k) {
    double expect = (p.wind_mean[k] + s.wind_fluct[k] - pe[k] -
                     p.damping[k] * (s.omega[k] - p.sync_speed)) /
                    (2.0 * p.inertia[k]);
    CHECK(d.domega[k] == doctest::Approx(expect).epsilon(1e-14));
  }
}

TEST_CASE("drift depends on speed only through the deviation") {
  GridParameters p = three_machine();
  GridState s;
  s.theta.resize(3);
  s.theta << 0.1, 0.4, -0.2;
  s.omega.resize(3);
  s.omega << 0.01, 0.02, -0.03;
  s.wind_fluct = Eigen::VectorXd::Zero(3);
  SwingDrift base = swing_drift(s, p);

  GridParameters p2 = p;
  p2.sync_speed += 0.5;
  GridState s2 = s;
  s2.omega.array() += 0.5;
  SwingDrift shifted = swing_drift(s2, p2);
  CHECK((base.dtheta - shifted.dtheta).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((base.domega - shifted.domega).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("drift rejects non-finite states") {
  GridParameters p = three_machine();
  GridState s;
  s.theta = Eigen::VectorXd::Zero(3);
  s.theta[1] = std::numeric_limits<double>::quiet_NaN();
  s.omega = Eigen::VectorXd::Zero(3);
  s.wind_fluct = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(swing_drift(s, p), ContractError);
}

TEST_CASE("parameter validation rejects broken instances") {
  GridParameters good = three_machine();
  CHECK_NOTHROW(good.validate());

  GridParameters p = good;
  p.inertia[1] = 0.0;
  CHECK_THROWS_AS(p.validate(), ContractError);

  p = good;
  p.conductance = Eigen::MatrixXd::Zero(2, 2);
  CHECK_THROWS_AS(p.validate(), ContractError);

  p = good;
  p.wind_sigma[0] = -0.01;
  CHECK_THROWS_AS(p.validate(), ContractError);

  p = good;
  p.wind_lambda[0] = 0.0;  // wind driven row needs a positive correlation time
  CHECK_THROWS_AS(p.validate(), ContractError);

  p = good;
  p.wind_lambda[2] = -1.0;  // ignored where sigma = 0
  CHECK_NOTHROW(p.validate());

  p = good;
  p.damping[2] = -0.1;
  CHECK_THROWS_AS(p.validate(), ContractError);
}
