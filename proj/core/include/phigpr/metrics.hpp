#pragma once

#include <Eigen/Core>

namespace phigpr {

/// A predictive marginal N(mean_i, stddev_i^2) per time point together with
/// the reference value it is judged against.
struct EvalSeries {
  Eigen::VectorXd times;
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
  Eigen::VectorXd truth;

  EvalSeries window(double t_min, double t_max) const;  // keeps t_min < t <= t_max
  void validate() const;
};

/// sum_i [ -(mean_i - truth_i)^2 / (2 s_i^2) - log(sqrt(2 pi) s_i) ].
/// Requires every stddev > 0.
double log_predictive_probability(const EvalSeries& s);

/// Fraction of points with |truth - mean| <= multiplier * stddev.
double coverage(const EvalSeries& s, double multiplier);

double rmse(const EvalSeries& s);

}  // namespace phigpr
