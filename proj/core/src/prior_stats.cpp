#include "phigpr/prior_stats.hpp"

#include <algorithm>
#include <cmath>

#include "phigpr/errors.hpp"
#include "phigpr/parallel.hpp"

namespace phigpr {
namespace {

// Packed index for the pair (i, j) with i <= j among nc channels.
std::size_t pair_index(int i, int j, int nc) {
  return static_cast<std::size_t>(i) * nc - static_cast<std::size_t>(i) * (i + 1) / 2 +
         static_cast<std::size_t>(j);
}

const char* kind_prefix(ChannelKind k) {
  switch (k) {
    case ChannelKind::Theta:
    case ChannelKind::ThetaRel:
      return "theta";
    case ChannelKind::Omega:
    case ChannelKind::OmegaRel:
      return "omega";
    case ChannelKind::WindFluct:
      return "pwind";
  }
  return "?";
}

// A channel as a linear combination of raw channels present in a table.
struct Expansion {
  int pos[2] = {-1, -1};
  double coeff[2] = {0.0, 0.0};
  int n = 0;
};

Expansion expand_channel(const MomentTable& table, const StateChannel& ch) {
  Expansion e;
  int direct = table.channel_position(ch);
  if (direct >= 0) {
    e.pos[0] = direct;
    e.coeff[0] = 1.0;
    e.n = 1;
    return e;
  }
  if (ch.is_relative()) {
    ChannelKind raw = ch.kind == ChannelKind::ThetaRel ? ChannelKind::Theta : ChannelKind::Omega;
    int pk = table.channel_position({raw, ch.index, 0});
    int pr = table.channel_position({raw, ch.reference, 0});
    if (pk >= 0 && pr >= 0) {
      e.pos[0] = pk;
      e.coeff[0] = 1.0;
      e.pos[1] = pr;
      e.coeff[1] = -1.0;
      e.n = 2;
      return e;
    }
  }
  throw ContractError("moment table does not cover channel " + channel_label(ch));
}

}  // namespace

StateChannel theta_channel(int k) { return {ChannelKind::Theta, k, 0}; }
StateChannel omega_channel(int k) { return {ChannelKind::Omega, k, 0}; }
StateChannel wind_channel(int k) { return {ChannelKind::WindFluct, k, 0}; }
StateChannel theta_rel_channel(int k, int ref) { return {ChannelKind::ThetaRel, k, ref}; }
StateChannel omega_rel_channel(int k, int ref) { return {ChannelKind::OmegaRel, k, ref}; }

std::string channel_label(const StateChannel& ch) {
  std::string base = std::string(kind_prefix(ch.kind)) + "_" + std::to_string(ch.index);
  if (ch.is_relative())
    base += "-" + std::string(kind_prefix(ch.kind)) + "_" + std::to_string(ch.reference);
  return base;
}

StateChannel parse_channel_label(const std::string& label) {
  auto parse_raw = [](const std::string& s, StateChannel& out) -> bool {
    auto us = s.rfind('_');
    if (us == std::string::npos || us + 1 >= s.size()) return false;
    std::string prefix = s.substr(0, us);
    int idx = 0;
    try {
      std::size_t used = 0;
      idx = std::stoi(s.substr(us + 1), &used);
      if (used != s.size() - us - 1) return false;
    } catch (...) {
      return false;
    }
    if (prefix == "theta") out.kind = ChannelKind::Theta;
    else if (prefix == "omega") out.kind = ChannelKind::Omega;
    else if (prefix == "pwind") out.kind = ChannelKind::WindFluct;
    else return false;
    out.index = idx;
    out.reference = 0;
    return true;
  };
  auto dash = label.find('-');
  StateChannel ch;
  if (dash == std::string::npos) {
    if (!parse_raw(label, ch)) throw ContractError("bad channel label: " + label);
    return ch;
  }
  StateChannel lhs, rhs;
  if (!parse_raw(label.substr(0, dash), lhs) || !parse_raw(label.substr(dash + 1), rhs) ||
      lhs.kind != rhs.kind || lhs.kind == ChannelKind::WindFluct)
    throw ContractError("bad channel label: " + label);
  ch.kind = lhs.kind == ChannelKind::Theta ? ChannelKind::ThetaRel : ChannelKind::OmegaRel;
  ch.index = lhs.index;
  ch.reference = rhs.index;
  return ch;
}

Eigen::VectorXd channel_values(const Trajectory& traj, const StateChannel& ch) {
  const int n = traj.n_gen();
  auto col = [&](const Eigen::MatrixXd& m, int k) -> Eigen::VectorXd {
    if (k < 1 || k > n) throw ContractError("channel index out of range: " + channel_label(ch));
    return m.col(k - 1);
  };
  switch (ch.kind) {
    case ChannelKind::Theta:
      return col(traj.theta, ch.index);
    case ChannelKind::Omega:
      return col(traj.omega, ch.index);
    case ChannelKind::WindFluct:
      return col(traj.wind, ch.index);
    case ChannelKind::ThetaRel:
      if (ch.index == ch.reference) throw ContractError("relative channel needs distinct generators");
      return col(traj.theta, ch.index) - col(traj.theta, ch.reference);
    case ChannelKind::OmegaRel:
      if (ch.index == ch.reference) throw ContractError("relative channel needs distinct generators");
      return col(traj.omega, ch.index) - col(traj.omega, ch.reference);
  }
  throw ContractError("unknown channel kind");
}

int MomentTable::channel_position(const StateChannel& ch) const {
  for (std::size_t i = 0; i < channels.size(); ++i)
    if (channels[i] == ch) return static_cast<int>(i);
  return -1;
}

const Eigen::MatrixXd& MomentTable::pair(int i, int j) const {
  return pair_cov[pair_index(i, j, static_cast<int>(channels.size()))];
}

double MomentTable::cov_entry(int i, int j, Eigen::Index a, Eigen::Index b) const {
  return i <= j ? pair(i, j)(a, b) : pair(j, i)(b, a);
}

Eigen::Index grid_index_of(const Eigen::VectorXd& grid, double t) {
  const double* begin = grid.data();
  const double* end = begin + grid.size();
  const double* it = std::lower_bound(begin, end, t - 1e-12);
  double tol = 1e-9 * std::max(1.0, std::abs(t));
  for (const double* c : {it, it == begin ? it : it - 1}) {
    if (c != end && std::abs(*c - t) <= tol) return c - begin;
  }
  throw ContractError("time " + std::to_string(t) + " is not on the moment grid");
}

MomentTable ensemble_moments(const Ensemble& ens, const std::vector<StateChannel>& channels,
                             const Eigen::VectorXd& grid, int n_threads) {
  const std::size_t n_mem = ens.members.size();
  if (n_mem < 2) throw ContractError("ensemble_moments: need at least two members");
  if (channels.empty()) throw ContractError("ensemble_moments: no channels requested");
  if (grid.size() < 1) throw ContractError("ensemble_moments: empty grid");
  const Trajectory& first = ens.members.front();
  for (const auto& m : ens.members)
    if (m.times.size() != first.times.size() || (m.times.array() != first.times.array()).any())
      throw ContractError("ensemble_moments: members do not share a time grid");

  std::vector<Eigen::Index> grid_idx(static_cast<std::size_t>(grid.size()));
  for (Eigen::Index g = 0; g < grid.size(); ++g)
    grid_idx[static_cast<std::size_t>(g)] = grid_index_of(first.times, grid[g]);

  const int nc = static_cast<int>(channels.size());
  const Eigen::Index ng = grid.size();
  const Eigen::Index nm = static_cast<Eigen::Index>(n_mem);

  MomentTable table;
  table.grid = grid;
  table.channels = channels;
  table.n_members = static_cast<int>(n_mem);
  table.means.resize(static_cast<std::size_t>(nc));

  // Demeaned member-by-time value matrices, one per channel.
  std::vector<Eigen::MatrixXd> demeaned(static_cast<std::size_t>(nc));
  parallel_for(static_cast<std::size_t>(nc), n_threads, [&](std::size_t c) {
    Eigen::MatrixXd v(nm, ng);
    for (Eigen::Index m = 0; m < nm; ++m) {
      Eigen::VectorXd full = channel_values(ens.members[static_cast<std::size_t>(m)],
                                            channels[c]);
      for (Eigen::Index g = 0; g < ng; ++g) v(m, g) = full[grid_idx[static_cast<std::size_t>(g)]];
    }
    Eigen::RowVectorXd mean = v.colwise().mean();
    table.means[c] = mean.transpose();
    v.rowwise() -= mean;
    demeaned[c] = std::move(v);
  });

  const std::size_t n_pairs = static_cast<std::size_t>(nc) * (nc + 1) / 2;
  table.pair_cov.resize(n_pairs);
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(n_pairs);
  for (int i = 0; i < nc; ++i)
    for (int j = i; j < nc; ++j) pairs.emplace_back(i, j);

  const double norm = 1.0 / static_cast<double>(nm - 1);
  parallel_for(n_pairs, n_threads, [&](std::size_t idx) {
    auto [i, j] = pairs[idx];
    Eigen::MatrixXd k(ng, ng);
    if (i == j) {
      // rank update keeps the diagonal blocks exactly symmetric
      k.setZero();
      k.selfadjointView<Eigen::Lower>().rankUpdate(demeaned[static_cast<std::size_t>(i)].transpose(),
                                                   norm);
      k.triangularView<Eigen::StrictlyUpper>() =
          k.transpose().triangularView<Eigen::StrictlyUpper>();
    } else {
      k.noalias() = demeaned[static_cast<std::size_t>(i)].transpose() *
                    demeaned[static_cast<std::size_t>(j)];
      k *= norm;
    }
    table.pair_cov[pair_index(i, j, nc)] = std::move(k);
  });
  return table;
}

RelativeStats relative_channel_stats(const MomentTable& table, ChannelKind rel_kind, int k, int ref) {
  if (rel_kind != ChannelKind::ThetaRel && rel_kind != ChannelKind::OmegaRel)
    throw ContractError("relative_channel_stats: kind must be a relative kind");
  if (k == ref) throw ContractError("relative_channel_stats: identical generators");
  StateChannel ch{rel_kind, k, ref};
  Expansion e = expand_channel(table, ch);
  RelativeStats out;
  out.mean = Eigen::VectorXd::Zero(table.grid.size());
  out.cov = Eigen::MatrixXd::Zero(table.grid.size(), table.grid.size());
  for (int a = 0; a < e.n; ++a) {
    out.mean += e.coeff[a] * table.means[static_cast<std::size_t>(e.pos[a])];
    for (int b = 0; b < e.n; ++b) {
      double w = e.coeff[a] * e.coeff[b];
      int i = e.pos[a], j = e.pos[b];
      if (i <= j)
        out.cov += w * table.pair(i, j);
      else
        out.cov += w * table.pair(j, i).transpose();
    }
  }
  return out;
}

namespace {

// Mean vector and covariance blocks between two channel/time block specs,
// channels expanded over the raw table entries.
Eigen::VectorXd block_mean(const MomentTable& table, const BlockSpec& spec,
                           const std::vector<Expansion>& exp,
                           const std::vector<Eigen::Index>& tidx) {
  const Eigen::Index nt = spec.times.size();
  Eigen::VectorXd out(static_cast<Eigen::Index>(spec.channels.size()) * nt);
  for (std::size_t c = 0; c < spec.channels.size(); ++c) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(nt);
    for (int a = 0; a < exp[c].n; ++a) {
      const Eigen::VectorXd& full = table.means[static_cast<std::size_t>(exp[c].pos[a])];
      for (Eigen::Index t = 0; t < nt; ++t)
        m[t] += exp[c].coeff[a] * full[tidx[static_cast<std::size_t>(t)]];
    }
    out.segment(static_cast<Eigen::Index>(c) * nt, nt) = m;
  }
  return out;
}

void fill_cov_block(const MomentTable& table, Eigen::Ref<Eigen::MatrixXd> dst,
                    const Expansion& row_exp, const std::vector<Eigen::Index>& row_t,
                    const Expansion& col_exp, const std::vector<Eigen::Index>& col_t) {
  dst.setZero();
  for (int a = 0; a < row_exp.n; ++a) {
    for (int b = 0; b < col_exp.n; ++b) {
      double w = row_exp.coeff[a] * col_exp.coeff[b];
      int i = row_exp.pos[a], j = col_exp.pos[b];
      if (i <= j)
        dst += w * table.pair(i, j)(row_t, col_t);
      else
        dst += w * table.pair(j, i)(col_t, row_t).transpose();
    }
  }
}

std::vector<Eigen::Index> map_times(const MomentTable& table, const Eigen::VectorXd& times) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(times.size()));
  for (Eigen::Index t = 0; t < times.size(); ++t)
    idx[static_cast<std::size_t>(t)] = grid_index_of(table.grid, times[t]);
  return idx;
}

}  // namespace

JointGp assemble_joint(const MomentTable& table, const ObsSpec& obs, const BlockSpec& target) {
  if (obs.block.channels.empty() || obs.block.times.size() == 0)
    throw ContractError("assemble_joint: empty observation block");
  if (target.channels.empty() || target.times.size() == 0)
    throw ContractError("assemble_joint: empty target block");

  const std::size_t n_oc = obs.block.channels.size();
  const std::size_t n_tc = target.channels.size();
  Eigen::VectorXd noise = obs.noise_std;
  if (noise.size() == 1 && n_oc > 1) noise = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n_oc), noise[0]);
  if (noise.size() != static_cast<Eigen::Index>(n_oc))
    throw ContractError("assemble_joint: noise_std length does not match observed channels");
  if ((noise.array() < 0).any()) throw ContractError("assemble_joint: negative noise std");

  std::vector<Expansion> obs_exp, tgt_exp;
  for (const auto& ch : obs.block.channels) obs_exp.push_back(expand_channel(table, ch));
  for (const auto& ch : target.channels) tgt_exp.push_back(expand_channel(table, ch));
  std::vector<Eigen::Index> obs_t = map_times(table, obs.block.times);
  std::vector<Eigen::Index> tgt_t = map_times(table, target.times);

  const Eigen::Index nt_o = obs.block.times.size();
  const Eigen::Index nt_t = target.times.size();
  JointGp joint;
  joint.obs = obs.block;
  joint.target = target;
  joint.obs_noise_std = noise;
  joint.mean_obs = block_mean(table, obs.block, obs_exp, obs_t);
  joint.mean_target = block_mean(table, target, tgt_exp, tgt_t);

  joint.k_oo.resize(static_cast<Eigen::Index>(n_oc) * nt_o, static_cast<Eigen::Index>(n_oc) * nt_o);
  for (std::size_t ci = 0; ci < n_oc; ++ci)
    for (std::size_t cj = 0; cj < n_oc; ++cj)
      fill_cov_block(table,
                     joint.k_oo.block(static_cast<Eigen::Index>(ci) * nt_o,
                                      static_cast<Eigen::Index>(cj) * nt_o, nt_o, nt_o),
                     obs_exp[ci], obs_t, obs_exp[cj], obs_t);

  joint.k_ot.resize(static_cast<Eigen::Index>(n_oc) * nt_o, static_cast<Eigen::Index>(n_tc) * nt_t);
  for (std::size_t ci = 0; ci < n_oc; ++ci)
    for (std::size_t cj = 0; cj < n_tc; ++cj)
      fill_cov_block(table,
                     joint.k_ot.block(static_cast<Eigen::Index>(ci) * nt_o,
                                      static_cast<Eigen::Index>(cj) * nt_t, nt_o, nt_t),
                     obs_exp[ci], obs_t, tgt_exp[cj], tgt_t);

  joint.k_tt.resize(static_cast<Eigen::Index>(n_tc) * nt_t, static_cast<Eigen::Index>(n_tc) * nt_t);
  for (std::size_t ci = 0; ci < n_tc; ++ci)
    for (std::size_t cj = 0; cj < n_tc; ++cj)
      fill_cov_block(table,
                     joint.k_tt.block(static_cast<Eigen::Index>(ci) * nt_t,
                                      static_cast<Eigen::Index>(cj) * nt_t, nt_t, nt_t),
                     tgt_exp[ci], tgt_t, tgt_exp[cj], tgt_t);

  // exact symmetry for the factorizations downstream
  joint.k_oo.triangularView<Eigen::StrictlyUpper>() =
      joint.k_oo.transpose().triangularView<Eigen::StrictlyUpper>();
  joint.k_tt.triangularView<Eigen::StrictlyUpper>() =
      joint.k_tt.transpose().triangularView<Eigen::StrictlyUpper>();

  for (std::size_t c = 0; c < n_oc; ++c) {
    double s2 = noise[static_cast<Eigen::Index>(c)] * noise[static_cast<Eigen::Index>(c)];
    if (s2 > 0.0)
      joint.k_oo.diagonal()
          .segment(static_cast<Eigen::Index>(c) * nt_o, nt_o)
          .array() += s2;
  }
  if ((noise.array() == 0.0).any()) {
    double jitter = 1e-10 * joint.k_oo.diagonal().maxCoeff();
    if (jitter > 0.0) joint.k_oo.diagonal().array() += jitter;
  }
  return joint;
}

}  // namespace phigpr
