#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "phigpr/arima.hpp"
#include "phigpr/config_file.hpp"
#include "phigpr/errors.hpp"
#include "phigpr/rng.hpp"

using namespace phigpr;

namespace {

Eigen::VectorXd ar2_series(int n, double p1, double p2, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const int burn = 500;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n + burn);
  for (int t = 0; t < n + burn; ++t) {
    double v = nd(rng);
    if (t >= 1) v += p1 * y[t - 1];
    if (t >= 2) v += p2 * y[t - 2];
    y[t] = v;
  }
  return y.tail(n);
}

Eigen::VectorXd arma21_series(int n, double p1, double p2, double t1, double mu, double sd,
                              std::uint64_t seed) {
  std::mt19937_64 rng = make_engine(seed);
  std::normal_distribution<double> nd(0.0, sd);
  const int burn = 500;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n + burn);
  double e_prev = 0.0;
  for (int t = 0; t < n + burn; ++t) {
    double e = nd(rng);
    double v = e + t1 * e_prev;
    if (t >= 1) v += p1 * y[t - 1];
    if (t >= 2) v += p2 * y[t - 2];
    y[t] = v;
    e_prev = e;
  }
  return (y.tail(n).array() + mu).matrix();
}

Eigen::VectorXd white_series(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::VectorXd y(n);
  for (int t = 0; t < n; ++t) y[t] = nd(rng);
  return y;
}

ArimaModel hand_model(int p, int q, std::initializer_list<double> ar,
                      std::initializer_list<double> ma, double mu, double var) {
  ArimaModel m;
  m.p = p;
  m.q = q;
  m.ar.resize(p);
  int i = 0;
  for (double a : ar) m.ar[i++] = a;
  m.ma.resize(q);
  i = 0;
  for (double a : ma) m.ma[i++] = a;
  m.intercept = mu;
  m.innovation_var = var;
  m.n_obs = 100;
  return m;
}

}  // namespace

TEST_CASE("a constant-order fit recovers the exact closed-form estimates") {
  std::mt19937_64 rng = make_engine(12);
  std::normal_distribution<double> nd(1.5, 0.3);
  Eigen::VectorXd y(400);
  for (int t = 0; t < 400; ++t) y[t] = nd(rng);

  ArimaModel m = fit_arima(y, 0, 0);
  CHECK(m.intercept == y.mean());
  double mle_var = (y.array() - y.mean()).square().sum() / 400.0;
  CHECK(m.innovation_var == doctest::Approx(mle_var).epsilon(1e-10));
  CHECK(m.p == 0);
  CHECK(m.q == 0);
  CHECK(m.n_obs == 400);
}

TEST_CASE("a first-order fit lands near the generating coefficient") {
  Eigen::VectorXd y = ar2_series(2000, 0.8, 0.0, 555);
  ArimaModel m = fit_arima(y, 1, 0);
  CHECK(m.ar[0] > 0.75);
  CHECK(m.ar[0] < 0.85);
  double se_theory = std::sqrt((1.0 - 0.64) / 2000.0);
  REQUIRE(m.ar_se.size() == 1);
  CHECK(m.ar_se[0] > 0.5 * se_theory);
  CHECK(m.ar_se[0] < 2.0 * se_theory);
}

TEST_CASE("a mixed fit stays within three standard errors of the generator") {
  Eigen::VectorXd y = arma21_series(3000, 0.5, -0.25, 0.4, 0.3, std::sqrt(1.5), 77);
  ArimaModel m = fit_arima(y, 2, 1);
  REQUIRE(m.ar_se.size() == 2);
  REQUIRE(m.ma_se.size() == 1);
  CHECK(std::abs(m.ar[0] - 0.5) < 3.0 * m.ar_se[0]);
  CHECK(std::abs(m.ar[1] + 0.25) < 3.0 * m.ar_se[1]);
  CHECK(std::abs(m.ma[0] - 0.4) < 3.0 * m.ma_se[0]);
  CHECK(std::abs(m.intercept - 0.3) < 0.15);
  CHECK(m.innovation_var > 1.2);
  CHECK(m.innovation_var < 1.8);
}

TEST_CASE("information criterion arithmetic") {
  ArimaModel m = hand_model(2, 1, {0.5, -0.25}, {0.4}, 0.0, 1.0);
  m.loglik = -100.0;
  CHECK(aic(m) == 210.0);
  ArimaModel flat = hand_model(0, 0, {}, {}, 0.0, 1.0);
  flat.loglik = 0.0;
  CHECK(aic(flat) == 4.0);
}

TEST_CASE("order selection mostly identifies a second-order recursion") {
  int hits = 0;
  for (unsigned s = 0; s < 10; ++s) {
    Eigen::VectorXd y = ar2_series(3000, 1.5, -0.7, 1700 + s);
    ArimaModel m = select_order(y, 5, 2, 4);
    if (m.p == 2 && m.q == 0) ++hits;
  }
  // AIC overfits by design (a finite chance of accepting one spurious
  // coefficient), so a clear majority is the right bar
  CHECK(hits >= 6);
}

TEST_CASE("order selection keeps white noise at order zero") {
  int hits = 0;
  for (unsigned s = 0; s < 10; ++s) {
    Eigen::VectorXd y = white_series(1000, 300 + s);
    ArimaModel m = select_order(y, 1, 0, 4);
    if (m.p == 0 && m.q == 0) ++hits;
  }
  CHECK(hits >= 8);
}

TEST_CASE("order selection is reproducible across thread counts") {
  Eigen::VectorXd y = ar2_series(800, 1.5, -0.7, 42);
  ArimaModel a = select_order(y, 3, 1, 1);
  ArimaModel b = select_order(y, 3, 1, 4);
  CHECK(a.p == b.p);
  CHECK(a.q == b.q);
  CHECK((a.ar - b.ar).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.innovation_var == b.innovation_var);
  CHECK(a.loglik == b.loglik);
}

TEST_CASE("selection skips orders the series is too short to support") {
  Eigen::VectorXd y = white_series(35, 9);
  ArimaModel m = select_order(y, 5, 3, 1);
  CHECK(m.p + m.q <= 2);  // 10 (p + q + 1) <= 35
}

TEST_CASE("autoregressive forecasts follow the geometric pull to the mean") {
  ArimaModel m = hand_model(1, 0, {0.9}, {}, 2.0, 1.0);
  Eigen::VectorXd hist(3);
  hist << 1.0, 1.5, 4.0;
  ArimaForecast f = arima_forecast(m, hist, 10);
  REQUIRE(f.mean.size() == 10);
  for (int h = 1; h <= 10; ++h) {
    double mean_ref = 2.0 + std::pow(0.9, h) * (4.0 - 2.0);
    double var_ref = (1.0 - std::pow(0.81, h)) / (1.0 - 0.81);
    CHECK(std::abs(f.mean[h - 1] - mean_ref) < 1e-8);
    CHECK(std::abs(f.variance[h - 1] - var_ref) < 1e-8);
  }
  for (int h = 1; h < 10; ++h) CHECK(f.variance[h] >= f.variance[h - 1]);

  ArimaForecast far = arima_forecast(m, hist, 1000);
  CHECK(far.variance[999] == doctest::Approx(1.0 / 0.19).epsilon(1e-6));
  CHECK(far.mean[999] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("order-zero forecasts are flat at the intercept") {
  ArimaModel m = hand_model(0, 0, {}, {}, 0.7, 2.5);
  Eigen::VectorXd hist = Eigen::VectorXd::Constant(5, 3.0);
  ArimaForecast f = arima_forecast(m, hist, 4);
  for (int h = 0; h < 4; ++h) {
    CHECK(f.mean[h] == 0.7);
    CHECK(f.variance[h] == 2.5);
  }
}

TEST_CASE("standardized residuals of a matched fit look white") {
  Eigen::VectorXd y = ar2_series(2000, 1.5, -0.7, 99);
  ArimaModel m = fit_arima(y, 2, 0);
  Eigen::VectorXd r = arima_residuals(m, y);
  REQUIRE(r.size() == 2000);
  double mean = r.mean();
  double var = (r.array() - mean).square().sum() / (r.size() - 1);
  CHECK(std::abs(var - 1.0) < 0.1);
  for (int lag = 1; lag <= 5; ++lag) {
    double acf = 0.0;
    for (Eigen::Index t = lag; t < r.size(); ++t) acf += (r[t] - mean) * (r[t - lag] - mean);
    acf /= (r.size() - lag) * var;
    CHECK(std::abs(acf) < 3.0 / std::sqrt(2000.0));
  }
}

TEST_CASE("shifting the series only moves the intercept") {
  Eigen::VectorXd y = ar2_series(1200, 0.5, 0.2, 31);
  ArimaModel base = fit_arima(y, 2, 1);
  ArimaModel moved = fit_arima((y.array() + 100.0).matrix(), 2, 1);
  CHECK((base.ar - moved.ar).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((base.ma - moved.ma).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(std::abs(moved.intercept - base.intercept - 100.0) < 1e-9);
  CHECK(std::abs(moved.loglik - base.loglik) < 1e-6);
}

TEST_CASE("likelihood evaluation matches a dense-covariance oracle") {
  ArimaModel m = hand_model(2, 1, {0.5, -0.25}, {0.4}, 0.3, 1.5);
  Eigen::VectorXd y(12);
  y << 0.81, -0.17, 0.93, 1.44, 0.20, -0.61, 0.37, 1.02, -0.24, 0.55, 0.11, -0.78;
  CHECK(arima_loglik(m, y) == doctest::Approx(-15.99728211662342).epsilon(1e-10));
}

TEST_CASE("series too short for the requested order are rejected") {
  Eigen::VectorXd y = white_series(25, 4);
  CHECK_THROWS_AS(fit_arima(y, 1, 1), ContractError);  // needs 10 (p + q + 1) = 30
  CHECK_NOTHROW(fit_arima(y, 1, 0));
}

TEST_CASE("model validation rejects unstable or inconsistent parameters") {
  CHECK_THROWS_AS(hand_model(1, 0, {1.2}, {}, 0.0, 1.0).validate(), ContractError);
  CHECK_THROWS_AS(hand_model(0, 1, {}, {-1.5}, 0.0, 1.0).validate(), ContractError);
  CHECK_THROWS_AS(hand_model(1, 0, {0.5}, {}, 0.0, -1.0).validate(), ContractError);
  ArimaModel wrong = hand_model(2, 0, {0.5, 0.1}, {}, 0.0, 1.0);
  wrong.ar.resize(1);
  CHECK_THROWS_AS(wrong.validate(), ContractError);
  CHECK_NOTHROW(hand_model(2, 1, {0.5, -0.25}, {0.4}, 0.3, 1.5).validate());
}

TEST_CASE("fitted models survive the config round-trip") {
  Eigen::VectorXd y = ar2_series(900, 1.5, -0.7, 8);
  ArimaModel m = fit_arima(y, 2, 1);
  ConfigFile cfg;
  arima_to_config(m, "omega_2-omega_1", cfg);
  CHECK(cfg.get_string("arima", "channel") == "omega_2-omega_1");
  ArimaModel back = arima_from_config(cfg);
  CHECK(back.p == m.p);
  CHECK(back.q == m.q);
  CHECK((back.ar - m.ar).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.ma - m.ma).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.intercept == m.intercept);
  CHECK(back.innovation_var == m.innovation_var);
  CHECK(back.loglik == m.loglik);
  CHECK(back.n_obs == m.n_obs);
  REQUIRE(back.ar_se.size() == 2);
  CHECK((back.ar_se - m.ar_se).cwiseAbs().maxCoeff() == 0.0);

  ArimaModel plain = fit_arima(y, 1, 0, false);
  CHECK(plain.ar_se.size() == 0);
  ConfigFile cfg2;
  arima_to_config(plain, "theta_2-theta_1", cfg2);
  ArimaModel back2 = arima_from_config(cfg2);
  CHECK(back2.ar_se.size() == 0);
  CHECK(back2.ar[0] == plain.ar[0]);
}
