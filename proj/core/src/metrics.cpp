#include "phigpr/metrics.hpp"

#include <cmath>
#include <vector>

#include "phigpr/errors.hpp"

namespace phigpr {

void EvalSeries::validate() const {
  const Eigen::Index n = times.size();
  if (mean.size() != n || stddev.size() != n || truth.size() != n)
    throw ContractError("EvalSeries: mismatched lengths");
  if (n == 0) throw ContractError("EvalSeries: empty");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(stddev[i] >= 0.0)) throw ContractError("EvalSeries: negative or NaN stddev");
    if (stddev[i] == 0.0 && mean[i] != truth[i])
      throw ContractError("EvalSeries: zero stddev with mean != truth");
  }
}

EvalSeries EvalSeries::window(double t_min, double t_max) const {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < times.size(); ++i)
    if (times[i] > t_min + 1e-9 && times[i] <= t_max + 1e-9) keep.push_back(i);
  EvalSeries out;
  out.times.resize(static_cast<Eigen::Index>(keep.size()));
  out.mean.resize(out.times.size());
  out.stddev.resize(out.times.size());
  out.truth.resize(out.times.size());
  for (std::size_t j = 0; j < keep.size(); ++j) {
    out.times[static_cast<Eigen::Index>(j)] = times[keep[j]];
    out.mean[static_cast<Eigen::Index>(j)] = mean[keep[j]];
    out.stddev[static_cast<Eigen::Index>(j)] = stddev[keep[j]];
    out.truth[static_cast<Eigen::Index>(j)] = truth[keep[j]];
  }
  return out;
}

double log_predictive_probability(const EvalSeries& s) {
  s.validate();
  constexpr double half_log_two_pi = 0.91893853320467274;  // log(2 pi) / 2
  double acc = 0.0;
  for (Eigen::Index i = 0; i < s.times.size(); ++i) {
    double sd = s.stddev[i];
    if (!(sd > 0.0))
      throw ContractError("log_predictive_probability: zero stddev at t = " +
                          std::to_string(s.times[i]));
    double z = (s.mean[i] - s.truth[i]) / sd;
    acc += -0.5 * z * z - std::log(sd) - half_log_two_pi;
  }
  return acc;
}

double coverage(const EvalSeries& s, double multiplier) {
  s.validate();
  if (!(multiplier >= 0.0)) throw ContractError("coverage: multiplier must be nonnegative");
  Eigen::Index hit = 0;
  for (Eigen::Index i = 0; i < s.times.size(); ++i)
    if (std::abs(s.truth[i] - s.mean[i]) <= multiplier * s.stddev[i]) ++hit;
  return static_cast<double>(hit) / static_cast<double>(s.times.size());
}

double rmse(const EvalSeries& s) {
  s.validate();
  return std::sqrt((s.mean - s.truth).squaredNorm() / static_cast<double>(s.times.size()));
}

}  // namespace phigpr
