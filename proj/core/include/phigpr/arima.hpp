#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

namespace phigpr {

class ConfigFile;

/// ARMA(p, q) with intercept, fitted by exact Gaussian maximum likelihood
/// (state-space innovations recursion on the demeaned series). Differencing
/// degree is fixed at zero. Convention:
///   y_t = intercept + sum_i ar[i] (y_{t-i} - intercept)
///                   + e_t + sum_j ma[j] e_{t-j},   e ~ N(0, innovation_var)
/// Fitted models are strictly stationary and invertible.
struct ArimaModel {
  int p = 0;
  int q = 0;
  Eigen::VectorXd ar;
  Eigen::VectorXd ma;
  double intercept = 0.0;
  double innovation_var = 0.0;
  std::int64_t n_obs = 0;
  double loglik = 0.0;

  // standard errors of ar/ma from the observed information matrix; empty when
  // the fit was run without them (order-grid cells)
  Eigen::VectorXd ar_se;
  Eigen::VectorXd ma_se;

  void validate() const;
};

/// Exact maximum-likelihood fit. The intercept is the sample mean and the
/// innovation variance is concentrated out of the likelihood, so the search
/// runs over p+q unconstrained coordinates (partial-autocorrelation / tanh
/// reparameterization). Requires series length >= 10 (p + q + 1). Throws
/// FitError when the optimizer fails to converge within 200 iterations.
ArimaModel fit_arima(const Eigen::VectorXd& series, int p, int q, bool with_se = true);

/// -2 loglik + 2 (p + q + 2): AR and MA coefficients, intercept, variance.
double aic(const ArimaModel& model);

/// Fits every order in [0, p_max] x [0, q_max] whose length precondition
/// holds and returns the minimum-AIC model (refit with standard errors).
/// Ties break to smaller p+q, then smaller p. Cells that fail to converge
/// are skipped; if every cell fails, throws FitError.
ArimaModel select_order(const Eigen::VectorXd& series, int p_max, int q_max, int n_threads = 1);

struct ArimaForecast {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};

/// Iterated-expectation forecast `horizon` steps past the end of `history`,
/// with variances from the psi-weight recursion:
///   var_h = innovation_var * sum_{j<h} psi_j^2.
ArimaForecast arima_forecast(const ArimaModel& model, const Eigen::VectorXd& history,
                             int horizon);

/// Standardized one-step innovations v_t / sqrt(F_t) from filtering `series`
/// under the model.
Eigen::VectorXd arima_residuals(const ArimaModel& model, const Eigen::VectorXd& series);

/// Exact Gaussian log-likelihood of `series` under the model exactly as
/// given (no refitting, the model's own innovation variance).
double arima_loglik(const ArimaModel& model, const Eigen::VectorXd& series);

void arima_to_config(const ArimaModel& model, const std::string& channel, ConfigFile& cfg);
ArimaModel arima_from_config(const ConfigFile& cfg);

}  // namespace phigpr
