#include "phigpr/sde_sim.hpp"

#include <cmath>
#include <limits>

#include "phigpr/errors.hpp"
#include "phigpr/parallel.hpp"
#include "phigpr/rng.hpp"

namespace phigpr {
namespace {

constexpr double kInvSqrt12 = 0.28867513459481287;  // 1/sqrt(12)

double stability_limit(const GridParameters& p) {
  double lim = std::numeric_limits<double>::infinity();
  for (int k = 0; k < p.n_gen; ++k)
    if (p.wind_driven(k)) lim = std::min(lim, p.wind_lambda[k] / 10.0);
  return lim;
}

long n_steps_for(const SimConfig& cfg) {
  double raw = cfg.t_end / cfg.step;
  long n = std::lround(raw);
  if (std::abs(raw - static_cast<double>(n)) > 1e-9 * std::max(1.0, raw) || n < 1)
    throw ContractError("simulate: t_end must be a positive integer multiple of step");
  return n;
}

}  // namespace

Eigen::VectorXd sample_stationary_wind(const GridParameters& p, std::mt19937_64& rng) {
  p.validate();
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(p.n_gen);
  for (int k = 0; k < p.n_gen; ++k)
    if (p.wind_driven(k)) out[k] = p.wind_sigma[k] * normal(rng);
  return out;
}

GridState scheme_step(const GridState& state, const GridParameters& p, double h,
                      std::vector<std::mt19937_64>& gen_streams) {
  const int n = p.n_gen;
  if (!(h > 0.0)) throw ContractError("scheme_step: h must be positive");
  if (h > stability_limit(p) * (1.0 + 1e-12))
    throw ContractError("scheme_step: h exceeds min(lambda)/10 over wind-driven generators");
  if (static_cast<int>(gen_streams.size()) != n)
    throw ContractError("scheme_step: one rng stream per generator required");

  Eigen::VectorXd xi = Eigen::VectorXd::Zero(n), eta = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < n; ++k) {
    if (!p.wind_driven(k)) continue;
    // Fresh distribution per generator: the polar method caches a variate and
    // a shared object would leak it across streams.
    std::normal_distribution<double> normal(0.0, 1.0);
    xi[k] = normal(gen_streams[k]);
    eta[k] = normal(gen_streams[k]);
  }

  const double sqrt_h = std::sqrt(h);
  SwingDrift f0 = swing_drift(state, p);

  // Predictor: Euler for the swing states, Euler-Maruyama for the wind.
  GridState mid;
  mid.theta = state.theta + h * f0.dtheta;
  mid.omega = state.omega + h * f0.domega;
  mid.wind_fluct = state.wind_fluct;
  for (int k = 0; k < n; ++k) {
    if (!p.wind_driven(k)) continue;
    double a = -1.0 / p.wind_lambda[k];
    double b = p.wind_sigma[k] * std::sqrt(2.0 / p.wind_lambda[k]);
    mid.wind_fluct[k] = state.wind_fluct[k] + b * xi[k] * sqrt_h + a * state.wind_fluct[k] * h;
  }

  // Once the predictor overflows the corrector drift is undefined; hand the
  // non-finite state back so the caller can flag the blow-up step.
  if (!mid.theta.allFinite() || !mid.omega.allFinite() || !mid.wind_fluct.allFinite()) return mid;

  SwingDrift f1 = swing_drift(mid, p);

  GridState next;
  next.theta = state.theta + 0.5 * h * (f0.dtheta + f1.dtheta);
  next.omega = state.omega + 0.5 * h * (f0.domega + f1.domega);
  next.wind_fluct = state.wind_fluct;
  for (int k = 0; k < n; ++k) {
    if (!p.wind_driven(k)) continue;
    double a = -1.0 / p.wind_lambda[k];
    double b = p.wind_sigma[k] * std::sqrt(2.0 / p.wind_lambda[k]);
    double cross = kInvSqrt12 * a * b * h * sqrt_h * eta[k];
    next.wind_fluct[k] = state.wind_fluct[k] + b * xi[k] * sqrt_h +
                         0.5 * h * a * (state.wind_fluct[k] + mid.wind_fluct[k]) + cross;
    // The same h^{3/2} term enters the speed through the 1/(2H) channel.
    next.omega[k] += kInvSqrt12 * (1.0 / (2.0 * p.inertia[k])) * b * h * sqrt_h * eta[k];
  }
  return next;
}

Trajectory simulate(const SimConfig& cfg, const GridParameters& p) {
  p.validate();
  const int n = p.n_gen;
  if (cfg.init_theta.size() != n || cfg.init_omega.size() != n)
    throw ContractError("simulate: initial state has wrong dimensions");
  if (cfg.record_stride < 1) throw ContractError("simulate: record_stride must be >= 1");
  if (!(cfg.step > 0.0)) throw ContractError("simulate: step must be positive");
  if (cfg.step > stability_limit(p) * (1.0 + 1e-12))
    throw ContractError("simulate: step exceeds min(lambda)/10 over wind-driven generators");
  const long n_steps = n_steps_for(cfg);
  if (n_steps % cfg.record_stride != 0)
    throw ContractError("simulate: record_stride must divide the step count");

  std::vector<std::mt19937_64> streams;
  streams.reserve(n);
  for (int k = 0; k < n; ++k)
    streams.push_back(make_engine(derive_seed(cfg.seed, static_cast<std::uint64_t>(k))));

  GridState state;
  state.theta = cfg.init_theta;
  state.omega = cfg.init_omega;
  if (cfg.init_wind) {
    if (cfg.init_wind->size() != n) throw ContractError("simulate: init_wind has wrong length");
    state.wind_fluct = *cfg.init_wind;
    for (int k = 0; k < n; ++k)
      if (!p.wind_driven(k) && state.wind_fluct[k] != 0.0)
        throw ContractError("simulate: nonzero init_wind on a generator with sigma = 0");
  } else {
    state.wind_fluct = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < n; ++k) {
      if (!p.wind_driven(k)) continue;
      std::normal_distribution<double> normal(0.0, 1.0);
      state.wind_fluct[k] = p.wind_sigma[k] * normal(streams[k]);
    }
  }

  const long n_rec = n_steps / cfg.record_stride + 1;
  Trajectory out;
  out.times.resize(n_rec);
  out.theta.resize(n_rec, n);
  out.omega.resize(n_rec, n);
  out.wind.resize(n_rec, n);

  auto record = [&](long slot, long step_idx) {
    out.times[slot] = static_cast<double>(step_idx) * cfg.step;
    out.theta.row(slot) = state.theta.transpose();
    out.omega.row(slot) = state.omega.transpose();
    out.wind.row(slot) = state.wind_fluct.transpose();
  };
  record(0, 0);
  for (long i = 0; i < n_steps; ++i) {
    state = scheme_step(state, p, cfg.step, streams);
    if (!state.theta.allFinite() || !state.omega.allFinite() || !state.wind_fluct.allFinite())
      throw IntegrationBlowup("simulate: state became non-finite at step " + std::to_string(i + 1),
                              i + 1);
    if ((i + 1) % cfg.record_stride == 0) record((i + 1) / cfg.record_stride, i + 1);
  }
  return out;
}

Ensemble generate_ensemble(const SimConfig& cfg, const GridParameters& p, int n_members,
                           int n_threads) {
  if (n_members < 1) throw ContractError("generate_ensemble: n_members must be >= 1");
  Ensemble ens;
  ens.members.resize(static_cast<std::size_t>(n_members));
  ens.seeds.resize(static_cast<std::size_t>(n_members));
  for (int i = 0; i < n_members; ++i)
    ens.seeds[static_cast<std::size_t>(i)] = derive_seed(cfg.seed, static_cast<std::uint64_t>(i));
  parallel_for(static_cast<std::size_t>(n_members), n_threads, [&](std::size_t i) {
    SimConfig member_cfg = cfg;
    member_cfg.seed = ens.seeds[i];
    ens.members[i] = simulate(member_cfg, p);
  });
  return ens;
}

Trajectory subsample(const Trajectory& traj, double interval) {
  if (traj.n_times() < 2) throw ContractError("subsample: trajectory too short");
  double spacing = traj.times[1] - traj.times[0];
  double ratio = interval / spacing;
  long m = std::lround(ratio);
  if (m < 1 || std::abs(ratio - static_cast<double>(m)) > 1e-9 * std::max(1.0, std::abs(ratio)))
    throw ContractError("subsample: interval is not an integer multiple of the recorded spacing");
  const Eigen::Index n_out = (traj.n_times() - 1) / m + 1;
  Trajectory out;
  out.times.resize(n_out);
  out.theta.resize(n_out, traj.n_gen());
  out.omega.resize(n_out, traj.n_gen());
  out.wind.resize(n_out, traj.n_gen());
  for (Eigen::Index j = 0; j < n_out; ++j) {
    Eigen::Index src = j * m;
    out.times[j] = traj.times[src];
    out.theta.row(j) = traj.theta.row(src);
    out.omega.row(j) = traj.omega.row(src);
    out.wind.row(j) = traj.wind.row(src);
  }
  return out;
}

}  // namespace phigpr
