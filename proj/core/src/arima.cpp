#include "phigpr/arima.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "phigpr/config_file.hpp"
#include "phigpr/errors.hpp"
#include "phigpr/parallel.hpp"

namespace phigpr {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogTwoPi = 1.8378770664093453;

// Durbin-Levinson step-up: partial autocorrelations -> AR coefficients.
Eigen::VectorXd pacf_to_ar(const Eigen::VectorXd& k) {
  const Eigen::Index m = k.size();
  Eigen::VectorXd phi(m), work(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    work.head(j) = phi.head(j);
    phi[j] = k[j];
    for (Eigen::Index i = 0; i < j; ++i) phi[i] = work[i] - k[j] * work[j - 1 - i];
  }
  return phi;
}

// Inverse recursion; false when a level hits |k| >= 1 (non-stationary input).
bool ar_to_pacf(const Eigen::VectorXd& phi, Eigen::VectorXd& k) {
  const Eigen::Index m = phi.size();
  k.resize(m);
  Eigen::VectorXd cur = phi, prev(m);
  for (Eigen::Index j = m - 1; j >= 0; --j) {
    k[j] = cur[j];
    if (!(std::abs(k[j]) < 1.0)) return false;
    double denom = 1.0 - k[j] * k[j];
    for (Eigen::Index i = 0; i < j; ++i)
      prev[i] = (cur[i] + k[j] * cur[j - 1 - i]) / denom;
    cur.head(j) = prev.head(j);
  }
  return true;
}

struct ArmaParams {
  Eigen::VectorXd phi, theta;
};

// tanh / partial-autocorrelation map from unconstrained coordinates.
ArmaParams params_from_u(const Eigen::VectorXd& u, int p, int q) {
  ArmaParams out;
  out.phi = pacf_to_ar(u.head(p).array().tanh().matrix());
  out.theta = -pacf_to_ar(u.segment(p, q).array().tanh().matrix());
  return out;
}

// Companion-form transition: (T a)_i = phi_pad[i] a_0 + a_{i+1}.
void apply_transition(const Eigen::VectorXd& phi_pad, const Eigen::VectorXd& a,
                      Eigen::VectorXd& out) {
  const Eigen::Index r = phi_pad.size();
  for (Eigen::Index i = 0; i + 1 < r; ++i) out[i] = phi_pad[i] * a[0] + a[i + 1];
  out[r - 1] = phi_pad[r - 1] * a[0];
}

// P = T P T' + R R' by doubling; T must be stable.
std::optional<Eigen::MatrixXd> stationary_state_cov(const Eigen::VectorXd& phi_pad,
                                                    const Eigen::VectorXd& rvec) {
  const Eigen::Index r = phi_pad.size();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(r, r);
  t.col(0) = phi_pad;
  for (Eigen::Index i = 0; i + 1 < r; ++i) t(i, i + 1) = 1.0;
  Eigen::MatrixXd p = rvec * rvec.transpose();
  Eigen::MatrixXd a = t;
  for (int it = 0; it < 100; ++it) {
    Eigen::MatrixXd incr = a * p * a.transpose();
    p += incr;
    if (!p.allFinite()) return std::nullopt;
    if (incr.cwiseAbs().maxCoeff() <= 1e-16 * p.cwiseAbs().maxCoeff()) break;
    a = (a * a).eval();
  }
  return p;
}

struct FilterOutput {
  bool ok = false;
  double sum_log_f = 0.0;
  double sum_v2_f = 0.0;
  Eigen::VectorXd a_next;     // predictive state after the last observation
  Eigen::VectorXd std_resid;  // v_t / sqrt(F_t)
};

// Steady-state Kalman pass with unit innovation variance.
FilterOutput run_filter(const ArmaParams& par, const Eigen::VectorXd& z, bool want_resid) {
  const int p = static_cast<int>(par.phi.size());
  const int q = static_cast<int>(par.theta.size());
  const Eigen::Index r = std::max(p, q + 1);
  const Eigen::Index n = z.size();
  Eigen::VectorXd phi_pad = Eigen::VectorXd::Zero(r);
  phi_pad.head(p) = par.phi;
  Eigen::VectorXd rvec = Eigen::VectorXd::Zero(r);
  rvec[0] = 1.0;
  rvec.segment(1, q) = par.theta;

  FilterOutput out;
  auto p0 = stationary_state_cov(phi_pad, rvec);
  if (!p0) return out;
  Eigen::MatrixXd cov = *p0;

  Eigen::VectorXd a = Eigen::VectorXd::Zero(r), a_new(r), gain(r), tp0(r);
  if (want_resid) out.std_resid.resize(n);
  bool frozen = false;
  double f = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    if (!frozen) {
      f = cov(0, 0);
      if (!(f > 1e-300) || !std::isfinite(f)) return out;
      apply_transition(phi_pad, cov.col(0), tp0);
      gain = tp0 / f;
    }
    double v = z[t] - a[0];
    out.sum_log_f += std::log(f);
    out.sum_v2_f += v * v / f;
    if (want_resid) out.std_resid[t] = v / std::sqrt(f);
    apply_transition(phi_pad, a, a_new);
    a = a_new + gain * v;
    if (!frozen) {
      // T P T' computed column-by-column through the companion structure
      Eigen::MatrixXd m1(r, r), m2(r, r);
      for (Eigen::Index j = 0; j < r; ++j) {
        Eigen::VectorXd col(r);
        apply_transition(phi_pad, cov.col(j), col);
        m1.col(j) = col;
      }
      for (Eigen::Index j = 0; j < r; ++j) {
        Eigen::VectorXd col(r);
        apply_transition(phi_pad, m1.row(j).transpose(), col);
        m2.col(j) = col;
      }
      Eigen::MatrixXd cov_new =
          m2 + rvec * rvec.transpose() - tp0 * tp0.transpose() / f;
      cov_new = 0.5 * (cov_new + cov_new.transpose()).eval();
      if ((cov_new - cov).cwiseAbs().maxCoeff() <
          1e-13 * (1.0 + cov.cwiseAbs().maxCoeff()))
        frozen = true;
      cov = cov_new;
    }
  }
  out.a_next = a;
  out.ok = true;
  return out;
}

// Concentrated log-likelihood: sigma^2 profiled out analytically.
double concentrated_negll(const ArmaParams& par, const Eigen::VectorXd& z,
                          double* sigma2_out = nullptr) {
  FilterOutput f = run_filter(par, z, false);
  if (!f.ok) return kInf;
  const double n = static_cast<double>(z.size());
  double sigma2 = f.sum_v2_f / n;
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) return kInf;
  if (sigma2_out) *sigma2_out = sigma2;
  double ll = -0.5 * n * (kLogTwoPi + std::log(sigma2)) - 0.5 * f.sum_log_f - 0.5 * n;
  return std::isfinite(ll) ? -ll : kInf;
}

constexpr double kUBound = 15.0;

Eigen::VectorXd project_box(Eigen::VectorXd u) {
  for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = std::clamp(u[i], -kUBound, kUBound);
  return u;
}

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x, xm = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return g;
}

// Sample autocovariances (1/n, demeaned input assumed).
Eigen::VectorXd autocov(const Eigen::VectorXd& z, Eigen::Index max_lag) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(max_lag + 1);
  const Eigen::Index n = z.size();
  for (Eigen::Index j = 0; j <= max_lag; ++j)
    c[j] = z.tail(n - j).dot(z.head(n - j)) / static_cast<double>(n);
  return c;
}

// Levinson recursion on autocovariances; returns AR coefficients and the
// partial autocorrelation sequence.
void levinson(const Eigen::VectorXd& c, Eigen::Index m, Eigen::VectorXd& phi,
              Eigen::VectorXd& pacf) {
  phi = Eigen::VectorXd::Zero(m);
  pacf = Eigen::VectorXd::Zero(m);
  if (m == 0) return;
  double err = c[0];
  Eigen::VectorXd work(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    double acc = c[j + 1];
    for (Eigen::Index i = 0; i < j; ++i) acc -= phi[i] * c[j - i];
    double k = err > 0.0 ? acc / err : 0.0;
    k = std::clamp(k, -0.98, 0.98);
    pacf[j] = k;
    work.head(j) = phi.head(j);
    phi[j] = k;
    for (Eigen::Index i = 0; i < j; ++i) phi[i] = work[i] - k * work[j - 1 - i];
    err *= (1.0 - k * k);
    if (!(err > 0.0)) err = 1e-12 * c[0];
  }
}

// Hannan-Rissanen: residuals from a long AR fit, then one least-squares pass
// over lagged values and lagged residuals.
std::optional<ArmaParams> hannan_rissanen(const Eigen::VectorXd& z, int p, int q) {
  const Eigen::Index n = z.size();
  Eigen::Index lag = std::min<Eigen::Index>(n / 4, std::max<Eigen::Index>(20, 2 * (p + q)));
  if (lag < 1 || n - lag < p + q + 5) return std::nullopt;
  Eigen::VectorXd phi_long, pacf_long;
  levinson(autocov(z, lag), lag, phi_long, pacf_long);
  Eigen::VectorXd resid = Eigen::VectorXd::Zero(n);
  for (Eigen::Index t = lag; t < n; ++t) {
    double pred = 0.0;
    for (Eigen::Index i = 0; i < lag; ++i) pred += phi_long[i] * z[t - 1 - i];
    resid[t] = z[t] - pred;
  }
  Eigen::Index t0 = lag + std::max(p, q);
  Eigen::Index rows = n - t0;
  if (rows < p + q + 2) return std::nullopt;
  Eigen::MatrixXd design(rows, p + q);
  Eigen::VectorXd rhs(rows);
  for (Eigen::Index t = t0; t < n; ++t) {
    Eigen::Index row = t - t0;
    rhs[row] = z[t];
    for (int i = 0; i < p; ++i) design(row, i) = z[t - 1 - i];
    for (int j = 0; j < q; ++j) design(row, p + j) = resid[t - 1 - j];
  }
  Eigen::VectorXd coef = design.colPivHouseholderQr().solve(rhs);
  if (!coef.allFinite()) return std::nullopt;
  ArmaParams out;
  out.phi = coef.head(p);
  out.theta = coef.tail(q);
  return out;
}

// Unconstrained coordinates for a (phi, theta) pair; nullopt when either
// polynomial sits on or inside the unit circle.
std::optional<Eigen::VectorXd> u_from_params(const ArmaParams& par) {
  Eigen::VectorXd k_ar, k_ma;
  if (!ar_to_pacf(par.phi, k_ar)) return std::nullopt;
  if (!ar_to_pacf(-par.theta, k_ma)) return std::nullopt;
  Eigen::VectorXd u(par.phi.size() + par.theta.size());
  for (Eigen::Index i = 0; i < k_ar.size(); ++i)
    u[i] = std::atanh(std::clamp(k_ar[i], -0.98, 0.98));
  for (Eigen::Index j = 0; j < k_ma.size(); ++j)
    u[k_ar.size() + j] = std::atanh(std::clamp(k_ma[j], -0.98, 0.98));
  return u;
}

struct OptimResult {
  Eigen::VectorXd x;
  double f;
};

// BFGS with central finite differences and Armijo backtracking. Throws
// FitError when 200 iterations pass without meeting either the gradient or
// the stall tolerance.
OptimResult minimize(const std::function<double(const Eigen::VectorXd&)>& obj,
                     const Eigen::VectorXd& x0) {
  const Eigen::Index dim = x0.size();
  const double fd_h = 6e-6;
  Eigen::VectorXd x = project_box(x0);
  double f = obj(x);
  if (!std::isfinite(f)) {
    x.setZero();
    f = obj(x);
  }
  if (!std::isfinite(f)) throw FitError("arima: likelihood undefined at every start");
  Eigen::VectorXd g = fd_gradient(obj, x, fd_h);
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(dim, dim);
  int stall_count = 0;
  const int max_iter = 200;
  for (int iter = 0; iter < max_iter; ++iter) {
    double gtol = 1e-6 * std::max(100.0, std::abs(f));
    if (g.cwiseAbs().maxCoeff() < gtol) return {x, f};

    Eigen::VectorXd d = -(h_inv * g);
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      h_inv.setIdentity();
      d = -g;
      slope = g.dot(d);
    }
    double step = 1.0;
    double f_new = kInf;
    Eigen::VectorXd x_new;
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      x_new = project_box(x + step * d);
      f_new = obj(x_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // descent exhausted; accept as converged only if the gradient is small
      if (g.cwiseAbs().maxCoeff() < 1e-3 * std::max(100.0, std::abs(f))) return {x, f};
      throw FitError("arima: line search failed before convergence");
    }
    Eigen::VectorXd g_new = fd_gradient(obj, x_new, fd_h);
    Eigen::VectorXd s = x_new - x;
    Eigen::VectorXd y = g_new - g;
    double sy = s.dot(y);
    if (sy > 1e-12) {
      Eigen::MatrixXd outer = Eigen::MatrixXd::Identity(dim, dim) - s * y.transpose() / sy;
      h_inv = outer * h_inv * outer.transpose() + s * s.transpose() / sy;
    }
    double drop = f - f_new;
    x = x_new;
    f = f_new;
    g = g_new;
    if (drop < 1e-10 * (1.0 + std::abs(f)))
      ++stall_count;
    else
      stall_count = 0;
    if (stall_count >= 2) return {x, f};
  }
  throw FitError("arima: no convergence within 200 iterations");
}

Eigen::VectorXd psi_weights(const ArimaModel& m, int count) {
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(count);
  if (count == 0) return psi;
  psi[0] = 1.0;
  for (int j = 1; j < count; ++j) {
    double v = j <= m.q ? m.ma[j - 1] : 0.0;
    for (int i = 1; i <= std::min(j, m.p); ++i) v += m.ar[i - 1] * psi[j - i];
    psi[j] = v;
  }
  return psi;
}

// Observed-information standard errors: numerical Hessian of the negative
// concentrated log-likelihood in raw (phi, theta) coordinates.
void attach_standard_errors(ArimaModel& model, const Eigen::VectorXd& z) {
  const int dim = model.p + model.q;
  if (dim == 0) {
    model.ar_se.resize(0);
    model.ma_se.resize(0);
    return;
  }
  auto raw_obj = [&](const Eigen::VectorXd& c) {
    ArmaParams par{c.head(model.p), c.tail(model.q)};
    Eigen::VectorXd k;
    if (!ar_to_pacf(par.phi, k) || !ar_to_pacf(-par.theta, k)) return kInf;
    return concentrated_negll(par, z);
  };
  Eigen::VectorXd c0(dim);
  c0.head(model.p) = model.ar;
  c0.tail(model.q) = model.ma;
  double f0 = raw_obj(c0);
  Eigen::MatrixXd hess(dim, dim);
  Eigen::VectorXd h(dim);
  for (int i = 0; i < dim; ++i) h[i] = 1e-4 * std::max(1.0, std::abs(c0[i]));
  Eigen::VectorXd c = c0;
  for (int i = 0; i < dim; ++i) {
    c[i] = c0[i] + h[i];
    double fp = raw_obj(c);
    c[i] = c0[i] - h[i];
    double fm = raw_obj(c);
    c[i] = c0[i];
    hess(i, i) = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
    for (int j = 0; j < i; ++j) {
      c[i] = c0[i] + h[i];
      c[j] = c0[j] + h[j];
      double fpp = raw_obj(c);
      c[j] = c0[j] - h[j];
      double fpm = raw_obj(c);
      c[i] = c0[i] - h[i];
      c[j] = c0[j] + h[j];
      double fmp = raw_obj(c);
      c[j] = c0[j] - h[j];
      double fmm = raw_obj(c);
      c[i] = c0[i];
      c[j] = c0[j];
      hess(i, j) = hess(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
    }
  }
  Eigen::VectorXd se = Eigen::VectorXd::Constant(dim, kInf);
  if (hess.allFinite()) {
    Eigen::LLT<Eigen::MatrixXd> llt(hess);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(dim, dim));
      for (int i = 0; i < dim; ++i) se[i] = cov(i, i) > 0.0 ? std::sqrt(cov(i, i)) : kInf;
    }
  }
  model.ar_se = se.head(model.p);
  model.ma_se = se.tail(model.q);
}

}  // namespace

void ArimaModel::validate() const {
  if (p < 0 || q < 0) throw ContractError("ArimaModel: negative order");
  if (ar.size() != p || ma.size() != q) throw ContractError("ArimaModel: coefficient size mismatch");
  if (!(innovation_var > 0.0)) throw ContractError("ArimaModel: innovation variance must be positive");
  Eigen::VectorXd k;
  if (!ar_to_pacf(ar, k)) throw ContractError("ArimaModel: AR polynomial root on or inside the unit circle");
  if (!ar_to_pacf(-ma, k)) throw ContractError("ArimaModel: MA polynomial root on or inside the unit circle");
}

ArimaModel fit_arima(const Eigen::VectorXd& series, int p, int q, bool with_se) {
  if (p < 0 || q < 0) throw ContractError("fit_arima: negative order");
  const Eigen::Index n = series.size();
  if (n < 10 * (p + q + 1))
    throw ContractError("fit_arima: series shorter than 10 (p + q + 1)");
  double mean = series.mean();
  Eigen::VectorXd z = series.array() - mean;
  if (z.cwiseAbs().maxCoeff() == 0.0) throw ContractError("fit_arima: constant series");

  ArimaModel model;
  model.p = p;
  model.q = q;
  model.intercept = mean;
  model.n_obs = n;

  Eigen::VectorXd u_best = Eigen::VectorXd::Zero(p + q);
  if (p + q > 0) {
    // warm starts: data partial autocorrelations for the AR block, a
    // Hannan-Rissanen regression when a MA block is present
    std::vector<Eigen::VectorXd> candidates;
    candidates.push_back(Eigen::VectorXd::Zero(p + q));
    if (q == 0) {
      Eigen::VectorXd phi0, pacf0;
      levinson(autocov(z, p), p, phi0, pacf0);
      Eigen::VectorXd u(p);
      for (int i = 0; i < p; ++i) u[i] = std::atanh(pacf0[i]);
      candidates.push_back(u);
    } else if (auto hr = hannan_rissanen(z, p, q)) {
      if (auto u = u_from_params(*hr)) candidates.push_back(*u);
    }
    auto obj = [&](const Eigen::VectorXd& u) {
      return concentrated_negll(params_from_u(u, p, q), z);
    };
    double best = kInf;
    for (const auto& cand : candidates) {
      double f = obj(project_box(cand));
      if (f < best) {
        best = f;
        u_best = cand;
      }
    }
    OptimResult opt = minimize(obj, u_best);
    u_best = opt.x;
  }

  ArmaParams par = params_from_u(u_best, p, q);
  double sigma2 = 0.0;
  double negll = concentrated_negll(par, z, &sigma2);
  if (!std::isfinite(negll)) throw FitError("fit_arima: likelihood undefined at the optimum");
  model.ar = par.phi;
  model.ma = par.theta;
  model.innovation_var = sigma2;
  model.loglik = -negll;
  model.validate();
  if (with_se)
    attach_standard_errors(model, z);
  else {
    model.ar_se.resize(0);
    model.ma_se.resize(0);
  }
  return model;
}

double aic(const ArimaModel& model) {
  return -2.0 * model.loglik + 2.0 * (model.p + model.q + 2);
}

ArimaModel select_order(const Eigen::VectorXd& series, int p_max, int q_max, int n_threads) {
  if (p_max < 0 || q_max < 0) throw ContractError("select_order: negative grid bound");
  struct Cell {
    int p, q;
    bool ok = false;
    double aic_value = kInf;
  };
  std::vector<Cell> cells;
  for (int p = 0; p <= p_max; ++p)
    for (int q = 0; q <= q_max; ++q)
      if (series.size() >= 10 * (p + q + 1)) cells.push_back({p, q});
  if (cells.empty()) throw ContractError("select_order: series too short for every order");

  parallel_for(cells.size(), n_threads, [&](std::size_t i) {
    try {
      ArimaModel m = fit_arima(series, cells[i].p, cells[i].q, false);
      cells[i].aic_value = aic(m);
      cells[i].ok = true;
    } catch (const std::exception&) {
      // non-converged cell, excluded from selection
    }
  });

  const Cell* best = nullptr;
  for (const Cell& cell : cells) {
    if (!cell.ok) continue;
    if (!best || cell.aic_value < best->aic_value ||
        (cell.aic_value == best->aic_value &&
         (cell.p + cell.q < best->p + best->q ||
          (cell.p + cell.q == best->p + best->q && cell.p < best->p))))
      best = &cell;
  }
  if (!best) throw FitError("select_order: every candidate order failed to fit");
  return fit_arima(series, best->p, best->q, true);
}

ArimaForecast arima_forecast(const ArimaModel& model, const Eigen::VectorXd& history,
                             int horizon) {
  model.validate();
  if (horizon < 1) throw ContractError("arima_forecast: horizon must be positive");
  if (history.size() < 1) throw ContractError("arima_forecast: empty history");
  Eigen::VectorXd z = history.array() - model.intercept;
  ArmaParams par{model.ar, model.ma};
  FilterOutput f = run_filter(par, z, false);
  if (!f.ok) throw NumericalError("arima_forecast: state filter failed");

  ArimaForecast out;
  out.mean.resize(horizon);
  out.variance.resize(horizon);
  const Eigen::Index r = f.a_next.size();
  Eigen::VectorXd phi_pad = Eigen::VectorXd::Zero(r);
  phi_pad.head(model.p) = model.ar;
  Eigen::VectorXd a = f.a_next, a_new(r);
  Eigen::VectorXd psi = psi_weights(model, horizon);
  double acc = 0.0;
  for (int hstep = 0; hstep < horizon; ++hstep) {
    out.mean[hstep] = model.intercept + a[0];
    acc += psi[hstep] * psi[hstep];
    out.variance[hstep] = model.innovation_var * acc;
    apply_transition(phi_pad, a, a_new);
    a = a_new;
  }
  return out;
}

double arima_loglik(const ArimaModel& model, const Eigen::VectorXd& series) {
  model.validate();
  if (series.size() < 1) throw ContractError("arima_loglik: empty series");
  Eigen::VectorXd z = series.array() - model.intercept;
  ArmaParams par{model.ar, model.ma};
  FilterOutput f = run_filter(par, z, false);
  if (!f.ok) throw NumericalError("arima_loglik: state filter failed");
  const double n = static_cast<double>(series.size());
  return -0.5 * n * (kLogTwoPi + std::log(model.innovation_var)) - 0.5 * f.sum_log_f -
         0.5 * f.sum_v2_f / model.innovation_var;
}

Eigen::VectorXd arima_residuals(const ArimaModel& model, const Eigen::VectorXd& series) {
  model.validate();
  Eigen::VectorXd z = series.array() - model.intercept;
  ArmaParams par{model.ar, model.ma};
  FilterOutput f = run_filter(par, z, true);
  if (!f.ok) throw NumericalError("arima_residuals: state filter failed");
  return f.std_resid / std::sqrt(model.innovation_var);
}

void arima_to_config(const ArimaModel& model, const std::string& channel, ConfigFile& cfg) {
  cfg.set_raw("arima", "channel", channel);
  cfg.set_int("arima", "p", model.p);
  cfg.set_int("arima", "q", model.q);
  if (model.p > 0) cfg.set_vector("arima", "ar", model.ar);
  if (model.q > 0) cfg.set_vector("arima", "ma", model.ma);
  cfg.set_double("arima", "intercept", model.intercept);
  cfg.set_double("arima", "innovation_var", model.innovation_var);
  cfg.set_int("arima", "n_obs", model.n_obs);
  cfg.set_double("arima", "loglik", model.loglik);
  if (model.ar_se.size() == model.p && model.p > 0) cfg.set_vector("arima", "ar_se", model.ar_se);
  if (model.ma_se.size() == model.q && model.q > 0) cfg.set_vector("arima", "ma_se", model.ma_se);
}

ArimaModel arima_from_config(const ConfigFile& cfg) {
  ArimaModel m;
  m.p = static_cast<int>(cfg.get_int("arima", "p"));
  m.q = static_cast<int>(cfg.get_int("arima", "q"));
  m.ar = m.p > 0 ? cfg.get_vector("arima", "ar") : Eigen::VectorXd();
  m.ma = m.q > 0 ? cfg.get_vector("arima", "ma") : Eigen::VectorXd();
  m.intercept = cfg.get_double("arima", "intercept");
  m.innovation_var = cfg.get_double("arima", "innovation_var");
  m.n_obs = cfg.get_int("arima", "n_obs");
  m.loglik = cfg.get_double("arima", "loglik");
  if (cfg.has("arima", "ar_se")) m.ar_se = cfg.get_vector("arima", "ar_se");
  if (cfg.has("arima", "ma_se")) m.ma_se = cfg.get_vector("arima", "ma_se");
  m.validate();
  return m;
}

}  // namespace phigpr
