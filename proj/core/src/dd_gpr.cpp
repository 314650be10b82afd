#include "phigpr/dd_gpr.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "phigpr/config_file.hpp"
#include "phigpr/errors.hpp"
#include "phigpr/parallel.hpp"
#include "phigpr/rng.hpp"

namespace phigpr {
namespace {

constexpr double kDeltaTol = 1e-12;
constexpr double kHalfLogTwoPi = 0.91893853320467274;

struct LagTerms {
  double se, rq, per, delta;
};

LagTerms lag_terms(const KernelSpec& s, double d) {
  const auto& g = s.gamma;
  LagTerms t;
  t.se = std::exp(-d * d / (2.0 * g[1] * g[1]));
  double q = d * d / (2.0 * g[3] * g[4] * g[4]);
  t.rq = std::pow(1.0 + q, -g[3]);
  double sn = std::sin(M_PI * d / 24.0);
  t.per = std::exp(-2.0 * sn * sn / (g[6] * g[6]));
  t.delta = std::abs(d) <= kDeltaTol ? 1.0 : 0.0;
  return t;
}

Eigen::MatrixXd gram(const KernelSpec& s, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::MatrixXd k(a.size(), b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j) k(i, j) = kernel_eval(s, a[i], b[j]);
  return k;
}

// Smooth part of the kernel: everything but the white delta term, which acts
// as observation noise and must not leak into cross or target blocks.
Eigen::MatrixXd gram_smooth(const KernelSpec& s, const Eigen::VectorXd& a,
                            const Eigen::VectorXd& b) {
  const auto& g = s.gamma;
  Eigen::MatrixXd k(a.size(), b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j) {
      LagTerms t = lag_terms(s, a[i] - b[j]);
      k(i, j) = g[0] * g[0] * t.se + g[2] * g[2] * t.rq + g[5] * g[5] * t.per;
    }
  return k;
}

struct EvalResult {
  double value;
  Eigen::Matrix<double, 9, 1> grad;  // d/d log gamma_1..8, d/d mean
};

// Value and gradient of the log marginal likelihood at one parameter point.
// Returns nullopt when the gram matrix fails to factor.
std::optional<EvalResult> evaluate(const KernelSpec& s, const Eigen::VectorXd& times,
                                   const Eigen::VectorXd& values, bool want_grad) {
  const Eigen::Index n = times.size();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      double v = kernel_eval(s, times[i], times[j]);
      k(i, j) = v;
      k(j, i) = v;
    }
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) return std::nullopt;

  Eigen::VectorXd r = values.array() - s.const_mean;
  Eigen::VectorXd alpha = llt.solve(r);
  double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  EvalResult out;
  out.value = -0.5 * r.dot(alpha) - 0.5 * log_det - static_cast<double>(n) * kHalfLogTwoPi;
  if (!want_grad) {
    out.grad.setZero();
    return out;
  }

  // W = alpha alpha' - K^{-1}; dL/dtheta = tr(W dK/dtheta) / 2
  Eigen::MatrixXd kinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  const auto& g = s.gamma;
  Eigen::Matrix<double, 8, 1> dg = Eigen::Matrix<double, 8, 1>::Zero();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double w = alpha[i] * alpha[j] - kinv(i, j);
      double d = times[i] - times[j];
      LagTerms t = lag_terms(s, d);
      double q = d * d / (2.0 * g[3] * g[4] * g[4]);
      double sn = std::sin(M_PI * d / 24.0);
      dg[0] += w * 2.0 * g[0] * t.se;
      dg[1] += w * g[0] * g[0] * t.se * d * d / (g[1] * g[1] * g[1]);
      dg[2] += w * 2.0 * g[2] * t.rq;
      dg[3] += w * g[2] * g[2] * t.rq * (q / (1.0 + q) - std::log1p(q));
      dg[4] += w * g[2] * g[2] * t.rq * 2.0 * g[3] * q / (g[4] * (1.0 + q));
      dg[5] += w * 2.0 * g[5] * t.per;
      dg[6] += w * g[5] * g[5] * t.per * 4.0 * sn * sn / (g[6] * g[6] * g[6]);
      dg[7] += w * 2.0 * g[7] * t.delta;
    }
  }
  for (int p = 0; p < 8; ++p) out.grad[p] = 0.5 * dg[p] * g[static_cast<std::size_t>(p)];
  out.grad[8] = alpha.sum();
  return out;
}

KernelSpec spec_from_params(const Eigen::Matrix<double, 9, 1>& x) {
  KernelSpec s;
  for (int p = 0; p < 8; ++p) s.gamma[static_cast<std::size_t>(p)] = std::exp(x[p]);
  s.const_mean = x[8];
  return s;
}

struct StartResult {
  double best_value = -std::numeric_limits<double>::infinity();
  Eigen::Matrix<double, 9, 1> best_x;
  int iterations = 0;
  bool usable = false;
};

StartResult run_start(Eigen::Matrix<double, 9, 1> x, const Eigen::VectorXd& times,
                      const Eigen::VectorXd& values, const DdFitConfig& cfg, double mean_scale) {
  StartResult res;
  Eigen::Matrix<double, 9, 1> step;
  step.head<8>().setConstant(0.05);
  step[8] = 0.05 * mean_scale;
  Eigen::Matrix<double, 9, 1> prev_grad = Eigen::Matrix<double, 9, 1>::Zero();
  const double step_min = 1e-10, step_max = 0.5;

  auto clamp_logs = [&](Eigen::Matrix<double, 9, 1>& p) {
    for (int i = 0; i < 8; ++i) p[i] = std::clamp(p[i], -cfg.log_bound, cfg.log_bound);
  };
  clamp_logs(x);

  auto ev = evaluate(spec_from_params(x), times, values, true);
  int backoffs = 0;
  while (!ev && backoffs < 8) {
    // a bad random start, pull the delta amplitude up to regularize
    x[7] = std::min(cfg.log_bound, x[7] + 2.0);
    ev = evaluate(spec_from_params(x), times, values, true);
    ++backoffs;
  }
  if (!ev) return res;
  res.usable = true;
  res.best_value = ev->value;
  res.best_x = x;

  for (int it = 0; it < cfg.max_iter; ++it) {
    res.iterations = it + 1;
    Eigen::Matrix<double, 9, 1> grad = ev->grad;
    if (grad.cwiseAbs().maxCoeff() < cfg.grad_tol) break;
    Eigen::Matrix<double, 9, 1> x_new = x;
    for (int i = 0; i < 9; ++i) {
      double prod = grad[i] * prev_grad[i];
      if (prod > 0.0)
        step[i] = std::min(step[i] * 1.2, i < 8 ? step_max : step_max * mean_scale);
      else if (prod < 0.0) {
        step[i] = std::max(step[i] * 0.5, i < 8 ? step_min : step_min * mean_scale);
        grad[i] = 0.0;  // iRprop-: no move on a sign flip
      }
      if (grad[i] > 0.0)
        x_new[i] += step[i];
      else if (grad[i] < 0.0)
        x_new[i] -= step[i];
    }
    clamp_logs(x_new);
    auto ev_new = evaluate(spec_from_params(x_new), times, values, true);
    if (!ev_new) {
      // factorization failed there; shrink every step and stay put
      step *= 0.25;
      prev_grad.setZero();
      if (step.head<8>().maxCoeff() <= step_min) break;
      continue;
    }
    x = x_new;
    prev_grad = grad;
    ev = ev_new;
    if (ev->value > res.best_value) {
      res.best_value = ev->value;
      res.best_x = x;
    }
  }
  return res;
}

}  // namespace

void KernelSpec::validate() const {
  for (int p : {1, 3, 4, 6})
    if (!(gamma[static_cast<std::size_t>(p)] > 0.0))
      throw ContractError("KernelSpec: scale parameters must be positive");
  for (int p : {0, 2, 5, 7})
    if (gamma[static_cast<std::size_t>(p)] < 0.0)
      throw ContractError("KernelSpec: amplitudes must be nonnegative");
  if (!std::isfinite(const_mean)) throw ContractError("KernelSpec: non-finite mean");
}

double kernel_eval(const KernelSpec& spec, double t, double tau) {
  const auto& g = spec.gamma;
  LagTerms terms = lag_terms(spec, t - tau);
  return g[0] * g[0] * terms.se + g[2] * g[2] * terms.rq + g[5] * g[5] * terms.per +
         g[7] * g[7] * terms.delta;
}

double log_marginal_likelihood(const KernelSpec& spec, const ChannelObservations& obs) {
  spec.validate();
  if (obs.times.size() != obs.values.size() || obs.times.size() == 0)
    throw ContractError("log_marginal_likelihood: bad observation block");
  auto ev = evaluate(spec, obs.times, obs.values, false);
  if (!ev) throw IllConditionedError("log_marginal_likelihood: gram matrix is not positive definite");
  return ev->value;
}

LmlGradient lml_gradient(const KernelSpec& spec, const ChannelObservations& obs) {
  spec.validate();
  if (obs.times.size() != obs.values.size() || obs.times.size() == 0)
    throw ContractError("lml_gradient: bad observation block");
  auto ev = evaluate(spec, obs.times, obs.values, true);
  if (!ev) throw IllConditionedError("lml_gradient: gram matrix is not positive definite");
  LmlGradient out;
  out.value = ev->value;
  for (int p = 0; p < 8; ++p) out.d_log_gamma[static_cast<std::size_t>(p)] = ev->grad[p];
  out.d_mean = ev->grad[8];
  return out;
}

KernelSpec fit_kernel(const ChannelObservations& obs, const DdFitConfig& cfg) {
  const Eigen::Index n = obs.times.size();
  if (n != obs.values.size()) throw ContractError("fit_kernel: times/values length mismatch");
  if (n < 4) throw ContractError("fit_kernel: need at least four points");
  if (cfg.n_starts < 1) throw ContractError("fit_kernel: n_starts must be >= 1");

  double mean_y = obs.values.mean();
  double sd_y = std::sqrt((obs.values.array() - mean_y).square().sum() /
                          static_cast<double>(std::max<Eigen::Index>(1, n - 1)));
  if (!(sd_y > 0.0)) sd_y = 1e-8;
  double t_span = obs.times.maxCoeff() - obs.times.minCoeff();
  if (!(t_span > 0.0)) throw ContractError("fit_kernel: degenerate time span");
  double dt_min = t_span;
  for (Eigen::Index i = 1; i < n; ++i)
    dt_min = std::min(dt_min, std::abs(obs.times[i] - obs.times[i - 1]));
  if (!(dt_min > 0.0)) dt_min = t_span / static_cast<double>(n);

  // All start points drawn up front from one engine, then optimized in
  // parallel; identical for every thread count.
  std::vector<Eigen::Matrix<double, 9, 1>> starts;
  starts.reserve(static_cast<std::size_t>(cfg.n_starts));
  {
    Eigen::Matrix<double, 9, 1> mid;
    mid << std::log(0.5 * sd_y), std::log(t_span / 4.0), std::log(0.5 * sd_y),
        0.0, std::log(t_span / 4.0), std::log(0.5 * sd_y), 0.0, std::log(0.1 * sd_y), mean_y;
    starts.push_back(mid);
    std::mt19937_64 engine = make_engine(cfg.seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    auto log_uniform = [&](double lo, double hi) {
      return std::log(lo) + u01(engine) * (std::log(hi) - std::log(lo));
    };
    for (int si = 1; si < cfg.n_starts; ++si) {
      Eigen::Matrix<double, 9, 1> x;
      x[0] = log_uniform(0.05 * sd_y, 2.0 * sd_y);
      x[1] = log_uniform(std::max(dt_min, t_span / 100.0), t_span);
      x[2] = log_uniform(0.05 * sd_y, 2.0 * sd_y);
      x[3] = log_uniform(0.3, 5.0);
      x[4] = log_uniform(std::max(dt_min, t_span / 100.0), t_span);
      x[5] = log_uniform(0.05 * sd_y, 2.0 * sd_y);
      x[6] = log_uniform(0.3, 5.0);
      x[7] = log_uniform(1e-3 * sd_y, sd_y);
      x[8] = mean_y + (u01(engine) - 0.5) * sd_y;
      starts.push_back(x);
    }
  }

  std::vector<StartResult> results(starts.size());
  parallel_for(starts.size(), cfg.n_threads, [&](std::size_t si) {
    results[si] = run_start(starts[si], obs.times, obs.values, cfg, sd_y);
  });

  int best = -1;
  for (std::size_t si = 0; si < results.size(); ++si) {
    if (!results[si].usable) continue;
    if (best < 0 || results[si].best_value > results[static_cast<std::size_t>(best)].best_value)
      best = static_cast<int>(si);
  }
  if (best < 0) throw FitError("fit_kernel: every start failed to factor the gram matrix");

  const StartResult& win = results[static_cast<std::size_t>(best)];
  KernelSpec spec = spec_from_params(win.best_x);
  spec.final_objective = win.best_value;
  spec.start_index = best;
  spec.iterations = win.iterations;
  return spec;
}

GpPosterior kernel_forecast(const KernelSpec& spec, const ChannelObservations& obs,
                            const Eigen::VectorXd& target_times) {
  spec.validate();
  if (obs.times.size() != obs.values.size() || obs.times.size() == 0)
    throw ContractError("kernel_forecast: bad observation block");
  if (target_times.size() == 0) throw ContractError("kernel_forecast: no target times");

  const double g8 = spec.gamma[7];
  JointGp joint;
  joint.k_oo = gram_smooth(spec, obs.times, obs.times);
  joint.k_oo.diagonal().array() += g8 * g8;
  joint.k_ot = gram_smooth(spec, obs.times, target_times);
  joint.k_tt = gram_smooth(spec, target_times, target_times);
  joint.mean_obs = Eigen::VectorXd::Constant(obs.times.size(), spec.const_mean);
  joint.mean_target = Eigen::VectorXd::Constant(target_times.size(), spec.const_mean);
  joint.obs.times = obs.times;
  joint.target.times = target_times;
  joint.obs_noise_std = Eigen::VectorXd::Constant(1, g8);

  ObservationSet data;
  data.values = obs.values;
  data.noise_std = Eigen::VectorXd::Constant(1, g8);
  return condition(joint, data);
}

void kernel_spec_to_config(const KernelSpec& spec, const std::string& channel, ConfigFile& cfg) {
  Eigen::VectorXd g(8);
  for (int p = 0; p < 8; ++p) g[p] = spec.gamma[static_cast<std::size_t>(p)];
  cfg.set_raw("dd-gpr", "channel", channel);
  cfg.set_vector("dd-gpr", "gamma", g);
  cfg.set_double("dd-gpr", "const_mean", spec.const_mean);
  cfg.set_double("dd-gpr", "final_objective", spec.final_objective);
  cfg.set_int("dd-gpr", "start_index", spec.start_index);
  cfg.set_int("dd-gpr", "iterations", spec.iterations);
}

KernelSpec kernel_spec_from_config(const ConfigFile& cfg) {
  KernelSpec spec;
  Eigen::VectorXd g = cfg.get_vector("dd-gpr", "gamma");
  if (g.size() != 8) throw ConfigError("dd-gpr: gamma must have 8 entries");
  for (int p = 0; p < 8; ++p) spec.gamma[static_cast<std::size_t>(p)] = g[p];
  spec.const_mean = cfg.get_double("dd-gpr", "const_mean");
  spec.final_objective = cfg.get_double("dd-gpr", "final_objective", 0.0);
  spec.start_index = static_cast<int>(cfg.get_int("dd-gpr", "start_index", -1));
  spec.iterations = static_cast<int>(cfg.get_int("dd-gpr", "iterations", 0));
  spec.validate();
  return spec;
}

}  // namespace phigpr
