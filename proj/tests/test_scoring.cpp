#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "phigpr/errors.hpp"
#include "phigpr/metrics.hpp"

using namespace phigpr;

namespace {

EvalSeries make_series(std::initializer_list<double> err, double sd) {
  EvalSeries s;
  const Eigen::Index n = static_cast<Eigen::Index>(err.size());
  s.times = Eigen::VectorXd::LinSpaced(n, 1.0, static_cast<double>(n));
  s.truth = Eigen::VectorXd::Zero(n);
  s.mean.resize(n);
  Eigen::Index i = 0;
  for (double e : err) s.mean[i++] = e;
  s.stddev = Eigen::VectorXd::Constant(n, sd);
  return s;
}

}  // namespace

TEST_CASE("log score reference points") {
  EvalSeries unit = make_series({0.0}, 1.0);
  CHECK(log_predictive_probability(unit) == doctest::Approx(-0.9189385332046727).epsilon(1e-14));

  EvalSeries zero = make_series({0.0}, 1.0 / std::sqrt(2.0 * M_PI));
  CHECK(std::abs(log_predictive_probability(zero)) < 1e-14);

  EvalSeries two = make_series({1.0, -1.0}, 1.0);
  CHECK(log_predictive_probability(two) ==
        doctest::Approx(-2.8378770664093453).epsilon(1e-14));
}

TEST_CASE("log score is a sum and ignores point order") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  EvalSeries s;
  s.times = Eigen::VectorXd::LinSpaced(20, 0.0, 19.0);
  s.truth.resize(20);
  s.mean.resize(20);
  s.stddev.resize(20);
  for (int i = 0; i < 20; ++i) {
    s.truth[i] = nd(rng);
    s.mean[i] = s.truth[i] + 0.3 * nd(rng);
    s.stddev[i] = 0.2 + std::abs(nd(rng));
  }
  double total = log_predictive_probability(s);

  EvalSeries head = s.window(-1.0, 9.5);
  EvalSeries tail = s.window(9.5, 100.0);
  CHECK(head.times.size() + tail.times.size() == 20);
  CHECK(log_predictive_probability(head) + log_predictive_probability(tail) ==
        doctest::Approx(total).epsilon(1e-12));

  std::vector<int> order(20);
  for (int i = 0; i < 20; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  EvalSeries shuffled = s;
  for (int i = 0; i < 20; ++i) {
    shuffled.times[i] = s.times[order[i]];
    shuffled.mean[i] = s.mean[order[i]];
    shuffled.stddev[i] = s.stddev[order[i]];
    shuffled.truth[i] = s.truth[order[i]];
  }
  CHECK(log_predictive_probability(shuffled) == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("the predictive spread that maximizes the log score is the rms error") {
  EvalSeries s = make_series({0.5, -1.0, 2.0, 0.3, -0.7}, 1.0);
  double mse = s.mean.squaredNorm() / 5.0;
  auto at_sd = [&](double sd) {
    EvalSeries t = s;
    t.stddev = Eigen::VectorXd::Constant(5, sd);
    return log_predictive_probability(t);
  };
  double best = at_sd(std::sqrt(mse));
  CHECK(best > at_sd(0.8 * std::sqrt(mse)));
  CHECK(best > at_sd(1.25 * std::sqrt(mse)));
}

TEST_CASE("coverage counts exact fractions") {
  EvalSeries s = make_series({0.5, 1.5, 2.5, 1.9}, 1.0);
  CHECK(coverage(s, 2.0) == 0.75);
  CHECK(coverage(s, 1.0) == 0.25);
  EvalSeries three = make_series({0.0, 1.0, 3.0}, 1.0);
  CHECK(coverage(three, 2.0) == 2.0 / 3.0);
  // a zero-spread point that hits the truth still counts as covered
  EvalSeries exact = make_series({0.0}, 0.0);
  CHECK(coverage(exact, 2.0) == 1.0);
  // multiplier zero admits exact hits only
  CHECK(coverage(s, 0.0) == 0.0);
  CHECK(coverage(exact, 0.0) == 1.0);
  CHECK_THROWS_AS(coverage(s, -1.0), ContractError);
}

TEST_CASE("rms error arithmetic and scaling") {
  EvalSeries s = make_series({3.0, -4.0}, 1.0);
  CHECK(rmse(s) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-14));
  EvalSeries scaled = s;
  scaled.mean *= 3.0;
  CHECK(rmse(scaled) == doctest::Approx(3.0 * std::sqrt(12.5)).epsilon(1e-13));
  EvalSeries perfect = make_series({0.0, 0.0}, 1.0);
  CHECK(rmse(perfect) == 0.0);
}

TEST_CASE("time windows are open below and closed above") {
  EvalSeries s = make_series({1.0, 2.0, 3.0, 4.0, 5.0}, 1.0);  // times 1..5
  EvalSeries w = s.window(2.0, 4.0);
  REQUIRE(w.times.size() == 2);
  CHECK(w.times[0] == 3.0);
  CHECK(w.times[1] == 4.0);
  CHECK(w.mean[0] == 3.0);

  // roundoff-sized misses on the window edges do not change membership
  EvalSeries w2 = s.window(2.0 + 5e-10, 4.0 - 5e-10);
  CHECK(w2.times.size() == 2);
  CHECK(s.window(0.0, 0.5).times.size() == 0);
  CHECK(s.window(-10.0, 10.0).times.size() == 5);
}

TEST_CASE("malformed series are rejected") {
  EvalSeries s = make_series({1.0, 2.0}, 1.0);
  s.stddev[1] = -0.1;
  CHECK_THROWS_AS(s.validate(), ContractError);

  EvalSeries zero_off = make_series({1.0}, 0.0);  // zero spread but wrong mean
  CHECK_THROWS_AS(zero_off.validate(), ContractError);

  EvalSeries zero_on = make_series({0.0}, 0.0);
  CHECK_NOTHROW(zero_on.validate());
  CHECK_THROWS_AS(log_predictive_probability(zero_on), ContractError);

  EvalSeries ragged = make_series({1.0, 2.0}, 1.0);
  ragged.truth.resize(1);
  CHECK_THROWS_AS(rmse(ragged), ContractError);

  EvalSeries empty;
  CHECK_THROWS_AS(empty.validate(), ContractError);
}
