#pragma once

#include <string>

#include "phigpr/prior_stats.hpp"
#include "phigpr/sde_sim.hpp"

namespace phigpr {

/// Binary container, little-endian throughout. Common header:
///   bytes 0..7   magic "PGBIN01\0"
///   bytes 8..11  u32 format version (currently 1)
///   bytes 12..15 u32 payload kind (1 = ensemble, 2 = moment table)
///
/// Ensemble payload (kind 1):
///   u32 n_gen, u64 n_members, u64 n_times
///   f64[n_times]              shared time grid
///   u64[n_members]            per-member seeds
///   then per member, row-major (time major, generator minor):
///     f64[n_times * n_gen] theta
///     f64[n_times * n_gen] omega
///     f64[n_times * n_gen] wind
///
/// Moment-table payload (kind 2):
///   u32 n_channels, u64 n_times, u64 n_members
///   per channel: u32 kind enum, i32 index, i32 reference
///   f64[n_times]              grid
///   per channel: f64[n_times] mean
///   per pair (i <= j, packed upper-triangle order): f64[n_times * n_times]
///     covariance block, row-major
void write_ensemble(const std::string& path, const Ensemble& ens);
Ensemble read_ensemble(const std::string& path);

void write_moment_table(const std::string& path, const MomentTable& table);
MomentTable read_moment_table(const std::string& path);

}  // namespace phigpr
