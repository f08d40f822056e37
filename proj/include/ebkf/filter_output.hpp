#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ebkf/errors.hpp"
#include "ebkf/series.hpp"

namespace ebkf {

/// Per-index output of the Gaussian filters.
///
/// tilde_mu[i] is the predictor of mu_i from the conditioning set that
/// excludes observation i (strict past for the forward filter, everything
/// except i for the leave-one-out smoother). posterior_variance[i] is the
/// variance of mu_i under that same conditioning set, gain[i] the weight on
/// the predictor in the update, residual[i] = y_i - tilde_mu[i] (NaN at
/// missing indices, where gain is 1 and hat_mu falls back to tilde_mu).
struct FilterOutput {
  std::vector<double> tilde_mu;
  std::vector<double> hat_mu;
  std::vector<double> gain;
  std::vector<double> residual;
  std::vector<double> posterior_variance;

  std::size_t size() const { return tilde_mu.size(); }

  void resize(std::size_t n) {
    tilde_mu.resize(n);
    hat_mu.resize(n);
    gain.resize(n);
    residual.resize(n);
    posterior_variance.resize(n);
  }
};

/// Consistency check on the gain identity hat = g*tilde + (1-g)*y at every
/// non-missing index (1e-10 relative). Producers run this in debug builds;
/// tests may call it directly.
inline void check_filter_output(const FilterOutput& out, const ObservationSeries& series) {
  const std::size_t n = series.size();
  if (out.size() != n || out.hat_mu.size() != n || out.gain.size() != n ||
      out.residual.size() != n || out.posterior_variance.size() != n)
    throw spec_error("FilterOutput: field lengths disagree with series length");
  for (std::size_t i = 0; i < n; ++i) {
    if (series.is_missing(i)) continue;
    const double y = series.value(i);
    const double expect = out.gain[i] * out.tilde_mu[i] + (1.0 - out.gain[i]) * y;
    const double scale = std::max({1.0, std::abs(out.hat_mu[i]), std::abs(out.tilde_mu[i]), std::abs(y)});
    if (!(std::abs(out.hat_mu[i] - expect) <= 1e-10 * scale))
      throw spec_error("FilterOutput: gain identity violated at index " + std::to_string(i));
    const double r = y - out.tilde_mu[i];
    if (!(std::abs(out.residual[i] - r) <= 1e-12 * scale))
      throw spec_error("FilterOutput: residual identity violated at index " + std::to_string(i));
  }
}

}  // namespace ebkf
