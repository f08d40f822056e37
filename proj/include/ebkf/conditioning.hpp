#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ebkf/errors.hpp"
#include "ebkf/series.hpp"
#include "ebkf/state_space.hpp"

namespace ebkf {

struct ConditionalMoments {
  double mean;
  double variance;
};

/// Exact multivariate-normal conditioning on the joint law of (mu, Y): the
/// brute-force counterpart of the recursive filters, used as their test
/// oracle. Builds the dense covariance of mu_1..mu_n from the state-space
/// recursion (same initialization rules as the filter) and solves the normal
/// conditioning system for one target index.
class GaussianConditioningOracle {
public:
  GaussianConditioningOracle(const ObservationSeries& series, const StateSpaceSpec& spec)
      : series_(series), spec_(spec) {
    validate_spec(spec);
    n_ = series.size();
    if (n_ > 200) throw spec_error("gaussian_conditioning_oracle: n must be <= 200 (dense covariance)");
    build();
  }

  /// Conditional mean/variance of mu_target given {Y_j : j in conditioning}.
  ConditionalMoments condition(std::span<const std::size_t> conditioning, std::size_t target) const {
    if (target >= n_) throw spec_error("gaussian_conditioning_oracle: target out of range");
    for (std::size_t j : conditioning) {
      if (j >= n_) throw spec_error("gaussian_conditioning_oracle: conditioning index out of range");
      if (series_.is_missing(j))
        throw spec_error("gaussian_conditioning_oracle: conditioning on missing index " + std::to_string(j));
    }
    const auto k = static_cast<Eigen::Index>(conditioning.size());
    if (k == 0) return {mean_[target], cov_(static_cast<Eigen::Index>(target), static_cast<Eigen::Index>(target))};

    Eigen::MatrixXd S(k, k);
    Eigen::VectorXd c(k), d(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      const auto ja = static_cast<Eigen::Index>(conditioning[static_cast<std::size_t>(a)]);
      for (Eigen::Index b = 0; b < k; ++b) {
        const auto jb = static_cast<Eigen::Index>(conditioning[static_cast<std::size_t>(b)]);
        S(a, b) = cov_(ja, jb);
      }
      S(a, a) += spec_.obs_noise_variance;
      c(a) = cov_(static_cast<Eigen::Index>(target), ja);
      d(a) = series_.value(conditioning[static_cast<std::size_t>(a)]) - mean_[conditioning[static_cast<std::size_t>(a)]];
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
    if (ldlt.info() != Eigen::Success)
      throw data_error("gaussian_conditioning_oracle: singular conditioning covariance");
    const Eigen::VectorXd w = ldlt.solve(c);
    const double mean = mean_[target] + w.dot(d);
    const double var = cov_(static_cast<Eigen::Index>(target), static_cast<Eigen::Index>(target)) - w.dot(c);
    if (!std::isfinite(mean) || !std::isfinite(var))
      throw data_error("gaussian_conditioning_oracle: singular conditioning covariance");
    return {mean, std::max(var, 0.0)};
  }

private:
  void build() {
    const StateSpaceMatrices m = build_matrices(spec_);
    const int d = m.state_dim;
    const Eigen::MatrixXd T = m.transition.topLeftCorner(d, d);
    const Eigen::VectorXd r = m.shock_loading.head(d);
    const Eigen::MatrixXd Q = spec_.innovation_variance * r * r.transpose();

    Eigen::MatrixXd V;  // Var(state_i)
    if (has_stationary_start(spec_))
      V = stationary_state_covariance(spec_, m).topLeftCorner(d, d);
    else
      V = spec_.diffuse_scale * Eigen::MatrixXd::Identity(d, d);

    const auto ni = static_cast<Eigen::Index>(n_);
    cov_.resize(ni, ni);
    mean_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) mean_[i] = deterministic_level(spec_, i);
    for (Eigen::Index i = 0; i < ni; ++i) {
      cov_(i, i) = V(0, 0);
      // Cov(mu_j, mu_i) = h T^{j-i} V_i h' for j > i
      Eigen::VectorXd w = V.col(0);
      for (Eigen::Index j = i + 1; j < ni; ++j) {
        w = T * w;
        cov_(j, i) = w(0);
        cov_(i, j) = w(0);
      }
      V = T * V * T.transpose() + Q;
      V = 0.5 * (V + V.transpose().eval());
    }
  }

  ObservationSeries series_;
  StateSpaceSpec spec_;
  std::size_t n_ = 0;
  Eigen::MatrixXd cov_;
  std::vector<double> mean_;
};

inline ConditionalMoments gaussian_conditioning_oracle(const ObservationSeries& series,
                                                       const StateSpaceSpec& spec,
                                                       std::span<const std::size_t> conditioning,
                                                       std::size_t target) {
  return GaussianConditioningOracle(series, spec).condition(conditioning, target);
}

}  // namespace ebkf
