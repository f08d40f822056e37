#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "ebkf/errors.hpp"
#include "ebkf/filter_output.hpp"
#include "ebkf/rng.hpp"

namespace ebkf {

/// One realization of the sparse-shock AR(1) model: mu_0 = 0,
/// mu_i = phi mu_{i-1} + X_i I_i with X_i ~ N(0, shock_sd^2) and
/// I_i ~ Bernoulli(bern_p); Y_i = mu_i + eps_i with unit Gaussian noise.
struct SimulationTruth {
  std::vector<double> mu;
  std::vector<double> y;
  std::vector<double> shocks;           // U_i = X_i I_i
  std::vector<std::uint8_t> indicators; // I_i
};

/// Deterministic given (seed); the shock, gate and noise streams are
/// independent so that changing one never perturbs the others.
inline SimulationTruth simulate_sparse_ar(std::size_t n, double phi, double shock_sd,
                                          double bern_p, Seed seed) {
  if (n < 1) throw spec_error("simulate_sparse_ar: n must be >= 1");
  if (!(shock_sd >= 0.0)) throw spec_error("simulate_sparse_ar: shock_sd must be >= 0");
  if (!(bern_p >= 0.0 && bern_p <= 1.0)) throw spec_error("simulate_sparse_ar: bern_p must be in [0,1]");

  auto shock_rng = substream(seed, {stream_tag::shock});
  auto gate_rng = substream(seed, {stream_tag::gate});
  auto noise_rng = substream(seed, {stream_tag::noise});
  std::normal_distribution<double> shock(0.0, shock_sd > 0.0 ? shock_sd : 1.0);
  std::bernoulli_distribution gate(bern_p);
  std::normal_distribution<double> noise(0.0, 1.0);

  SimulationTruth t;
  t.mu.resize(n);
  t.y.resize(n);
  t.shocks.resize(n);
  t.indicators.resize(n);
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = shock(shock_rng);
    const bool on = bern_p >= 1.0 ? true : (bern_p <= 0.0 ? false : gate(gate_rng));
    const double u = (on && shock_sd > 0.0) ? x : 0.0;
    m = phi * m + u;
    t.mu[i] = m;
    t.shocks[i] = u;
    t.indicators[i] = on ? 1 : 0;
    t.y[i] = m + noise(noise_rng);
  }
  return t;
}

/// Exact Tweedie rule for the realized nu-sample: with
/// f_Z(z) = m^{-1} sum_j phi(z - nu_j), returns delta^n(z) = z + f'_Z/f_Z,
/// which equals the posterior mean of nu under the empirical prior.
/// Evaluated through max-shifted Gaussian weights.
inline double population_delta(std::span<const double> nu_sample, double z) {
  if (nu_sample.empty()) throw spec_error("population_delta: empty nu sample");
  double max_log = -std::numeric_limits<double>::infinity();
  for (double nu : nu_sample) {
    const double d = z - nu;
    max_log = std::max(max_log, -0.5 * d * d);
  }
  double wsum = 0.0, nsum = 0.0;
  for (double nu : nu_sample) {
    const double d = z - nu;
    const double w = std::exp(-0.5 * d * d - max_log);
    wsum += w;
    nsum += w * nu;
  }
  return nsum / wsum;
}

/// delta^n(z) with nu_i = mu_i - tilde_mu_i taken from a simulation paired
/// with its filter output (the estimand that delta_hat approximates).
inline double population_delta_oracle(const SimulationTruth& truth, const FilterOutput& filter_out,
                                      double z) {
  if (truth.mu.size() != filter_out.size())
    throw spec_error("population_delta_oracle: truth and filter output lengths disagree");
  std::vector<double> nu(truth.mu.size());
  for (std::size_t i = 0; i < nu.size(); ++i) nu[i] = truth.mu[i] - filter_out.tilde_mu[i];
  return population_delta(nu, z);
}

}  // namespace ebkf
