#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>

#include "phigpr/gpr.hpp"

namespace phigpr {

class ConfigFile;

/// Stationary composite kernel over time lags d = t - tau:
///   g1^2 exp(-d^2 / (2 g2^2))
/// + g3^2 (1 + d^2 / (2 g4 g5^2))^(-g4)
/// + g6^2 exp(-2 sin^2(pi d / 24) / g7^2)
/// + g8^2 [|d| <= 1e-12]
/// The last term is a Kronecker delta on the lag and doubles as the noise
/// variance on the gram diagonal. Scale parameters g2, g4, g5, g7 must be
/// positive; amplitudes are nonnegative.
struct KernelSpec {
  std::array<double, 8> gamma{1, 1, 1, 1, 1, 1, 1, 0};
  double const_mean = 0.0;

  // fit provenance
  double final_objective = 0.0;  // log marginal likelihood at the optimum
  int start_index = -1;
  int iterations = 0;

  void validate() const;
};

double kernel_eval(const KernelSpec& spec, double t, double tau);

/// One scalar time series to fit.
struct ChannelObservations {
  Eigen::VectorXd times;
  Eigen::VectorXd values;
};

/// log N(values | const_mean, K) with K built from `spec` over the times.
double log_marginal_likelihood(const KernelSpec& spec, const ChannelObservations& obs);

/// Value and gradient in (log gamma_1..8, const_mean) coordinates.
struct LmlGradient {
  double value = 0.0;
  std::array<double, 8> d_log_gamma{};
  double d_mean = 0.0;
};
LmlGradient lml_gradient(const KernelSpec& spec, const ChannelObservations& obs);

struct DdFitConfig {
  int n_starts = 8;
  int max_iter = 500;
  double grad_tol = 1e-6;       // infinity norm in log-parameter space
  double log_bound = 10.0;      // |log gamma| box
  std::uint64_t seed = 99;
  int n_threads = 1;
};

/// Multi-start maximization of the log marginal likelihood with a sign-based
/// adaptive step rule per coordinate. Deterministic for a fixed seed; returns
/// the best iterate ever evaluated across all starts.
KernelSpec fit_kernel(const ChannelObservations& obs, const DdFitConfig& cfg = {});

/// GP prediction at target_times under the fitted kernel and constant mean,
/// delegated to the shared conditioning routine.
GpPosterior kernel_forecast(const KernelSpec& spec, const ChannelObservations& obs,
                            const Eigen::VectorXd& target_times);

void kernel_spec_to_config(const KernelSpec& spec, const std::string& channel, ConfigFile& cfg);
KernelSpec kernel_spec_from_config(const ConfigFile& cfg);

}  // namespace phigpr
