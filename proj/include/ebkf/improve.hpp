#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "ebkf/corrector.hpp"
#include "ebkf/errors.hpp"
#include "ebkf/filter_output.hpp"
#include "ebkf/kalman.hpp"
#include "ebkf/series.hpp"
#include "ebkf/state_space.hpp"

namespace ebkf {

/// Retrospective empirical-Bayes improvement: one corrector built from all
/// residuals Z_1..Z_n of the leave-one-out predictor, then
/// improved[i] = tilde_mu[i] + delta_hat(Z_i). Missing indices carry the
/// predictor forward unchanged.
inline std::vector<double> improve_retrospective(const ObservationSeries& series,
                                                 const FilterOutput& filter_out,
                                                 const BandwidthPolicy& policy = {}) {
  const std::size_t n = series.size();
  if (filter_out.size() != n)
    throw spec_error("improve_retrospective: filter output length does not match series");
  std::vector<double> sample;
  sample.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    if (!series.is_missing(i)) sample.push_back(filter_out.residual[i]);
  if (sample.empty()) return filter_out.tilde_mu;

  const EbCorrector corr = EbCorrector::with_policy(std::move(sample), policy);
  std::vector<double> improved(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (series.is_missing(i))
      improved[i] = filter_out.tilde_mu[i];
    else
      improved[i] = filter_out.tilde_mu[i] + corr.delta_hat(filter_out.residual[i]);
  }
  return improved;
}

/// Sequential empirical-Bayes improvement. For i <= warmup the plain Kalman
/// update hat_mu[i] is emitted; afterwards improved[i] = tilde_mu[i] +
/// delta_hat_i(Z_i), where the corrector at step i holds the residuals
/// observed so far (Z_1..Z_i; the current residual is itself a function of
/// Y_1..Y_i, so including it keeps the strict prefix property) and the
/// bandwidth tracks the growing sample size. Output at i depends on
/// Y_1..Y_i only.
inline std::vector<double> improve_sequential(const ObservationSeries& series,
                                              const StateSpaceSpec& spec, std::size_t warmup,
                                              const BandwidthPolicy& policy = {}) {
  if (warmup < 1) throw spec_error("improve_sequential: warmup must be >= 1");
  const FilterOutput out = forward_filter(series, spec);
  const std::size_t n = series.size();
  std::vector<double> improved(n);
  std::vector<double> sample;
  sample.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!series.is_missing(i)) sample.push_back(out.residual[i]);
    if (i < warmup || series.is_missing(i) || sample.empty()) {
      improved[i] = out.hat_mu[i];
      continue;
    }
    const EbCorrector corr(sample, policy.bandwidth(sample.size()));
    improved[i] = out.tilde_mu[i] + corr.delta_hat(out.residual[i]);
  }
  return improved;
}

}  // namespace ebkf
