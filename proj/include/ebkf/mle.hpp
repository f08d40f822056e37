#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "ebkf/detail/nelder_mead.hpp"
#include "ebkf/errors.hpp"
#include "ebkf/kalman.hpp"
#include "ebkf/series.hpp"
#include "ebkf/state_space.hpp"

namespace ebkf {

struct FitResult {
  StateSpaceSpec spec;
  double neg2_loglik = 0.0;
  bool converged = false;
  int evaluations = 0;
};

namespace detail {

/// Map unconstrained optimizer coordinates onto a valid spec. AR coefficients
/// go through tanh (partial-autocorrelation form for AR(2)), which enforces
/// the stationary region; the shock variance is log-parameterized.
inline StateSpaceSpec theta_to_spec(Family family, const std::vector<double>& th) {
  StateSpaceSpec s;
  s.family = family;
  s.intercept = th[0];
  if (family == Family::ar2) {
    const double psi1 = std::tanh(th[1]), psi2 = std::tanh(th[2]);
    s.phi = {psi1 * (1.0 - psi2), psi2};
    s.innovation_variance = std::exp(std::clamp(th[3], -40.0, 10.0));
  } else {
    s.phi = {std::tanh(th[1])};
    s.innovation_variance = std::exp(std::clamp(th[2], -40.0, 10.0));
  }
  return s;
}

/// Gaussian prediction-error -2 log-likelihood via the innovations
/// decomposition. The first state_dim observed terms are dropped under a
/// diffuse start (their contribution is dominated by the diffuse scale).
inline double neg2_loglik(const ObservationSeries& series, const StateSpaceSpec& spec) {
  const FilterOutput out = forward_filter(series, spec);
  const std::size_t skip = has_stationary_start(spec) ? 0 : static_cast<std::size_t>(build_matrices(spec).state_dim);
  double ll = 0.0;
  std::size_t seen = 0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series.is_missing(i)) continue;
    if (seen++ < skip) continue;
    const double F = out.posterior_variance[i] + spec.obs_noise_variance;
    const double z = out.residual[i];
    if (!(F > 0.0) || !std::isfinite(F) || !std::isfinite(z)) return 1e300;
    ll += std::log(2.0 * std::numbers::pi * F) + z * z / F;
  }
  return ll;
}

inline double lag1_autocorr(const std::vector<double>& x) {
  const std::size_t n = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double c0 = 0.0, c1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    c0 += (x[i] - mean) * (x[i] - mean);
    if (i + 1 < n) c1 += (x[i] - mean) * (x[i + 1] - mean);
  }
  return c0 > 0.0 ? c1 / c0 : 0.0;
}

}  // namespace detail

/// Gaussian MLE of the family's parameters (intercept, AR coefficients,
/// innovation variance) by derivative-free search over the stationarity-
/// enforcing reparameterization, with 5 deterministic restarts. The
/// observation noise variance stays fixed at the spec default. If no restart
/// meets the tolerance the best iterate is still returned, flagged
/// converged = false.
inline FitResult fit_mle(const ObservationSeries& series, Family family) {
  if (series.observed_count() < 30) throw spec_error("fit_mle: need at least 30 observed values");

  std::vector<double> obs;
  obs.reserve(series.size());
  for (std::size_t i = 0; i < series.size(); ++i)
    if (!series.is_missing(i)) obs.push_back(series.value(i));

  // Moment-based starting point; for arima110 the dynamics live on differences.
  std::vector<double> base = obs;
  if (family == Family::arima110) {
    base.resize(obs.size() - 1);
    for (std::size_t i = 0; i + 1 < obs.size(); ++i) base[i] = obs[i + 1] - obs[i];
  }
  double mean = 0.0;
  for (double v : base) mean += v;
  mean /= static_cast<double>(base.size());
  double var = 0.0;
  for (double v : base) var += (v - mean) * (v - mean);
  var /= static_cast<double>(base.size());
  const double rho = std::clamp(detail::lag1_autocorr(base), -0.9, 0.9);
  const double log_v0 = std::log(std::max(var * 0.5, 1e-4));

  const std::size_t dim = family == Family::ar2 ? 4 : 3;
  std::vector<double> start(dim, 0.0);
  start[0] = mean;
  start[1] = std::atanh(rho);
  start[dim - 1] = log_v0;

  auto objective = [&](const std::vector<double>& th) {
    return detail::neg2_loglik(series, detail::theta_to_spec(family, th));
  };

  // Fixed restart offsets: sign flips on the AR coordinate plus variance shifts.
  const double offsets[5][3] = {
      {0.0, 0.0, 0.0}, {0.0, -0.6, 1.5}, {0.0, 0.6, -1.5}, {0.0, -1.2, 0.0}, {0.0, 0.0, 3.0}};
  std::vector<double> step(dim, 0.3);
  step[0] = 0.25 * std::sqrt(var) + 0.1;
  step[dim - 1] = 0.8;

  FitResult best;
  best.neg2_loglik = 1e301;
  for (const auto& off : offsets) {
    std::vector<double> s0 = start;
    s0[1] = start[1] + off[1];
    if (family == Family::ar2) s0[2] = off[1] * -0.5;
    s0[dim - 1] = start[dim - 1] + off[2];
    const detail::NmResult r = detail::nelder_mead(objective, s0, step, 4000, 1e-10);
    best.evaluations += r.evaluations;
    if (r.fx < best.neg2_loglik) {
      best.neg2_loglik = r.fx;
      best.spec = detail::theta_to_spec(family, r.x);
      best.converged = r.converged;
    }
  }
  if (best.neg2_loglik >= 1e300)
    throw data_error("fit_mle: likelihood not finite at any iterate");
  return best;
}

}  // namespace ebkf
