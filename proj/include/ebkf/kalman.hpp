#pragma once

#include <Eigen/Dense>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "ebkf/errors.hpp"
#include "ebkf/filter_output.hpp"
#include "ebkf/series.hpp"
#include "ebkf/state_space.hpp"

namespace ebkf {

namespace detail {

inline constexpr std::size_t no_index = static_cast<std::size_t>(-1);

/// Pseudo-inverse of a symmetric PSD matrix. Rank-deficient predictions
/// occur legitimately when the innovation variance is zero; directions with
/// variance below the absolute floor carry a deterministic prediction, so
/// the smoother correction along them is zero (inverting them would only
/// overflow once the geometric decay reaches the denormal range).
template <int Dim>
Eigen::Matrix<double, Dim, Dim> psd_pinv(const Eigen::Matrix<double, Dim, Dim>& A) {
  constexpr double floor = 1e-250;
  if constexpr (Dim == 1) {
    Eigen::Matrix<double, 1, 1> out;
    out(0, 0) = A(0, 0) > floor ? 1.0 / A(0, 0) : 0.0;
    return out;
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, Dim, Dim>> es(A);
    const auto& vals = es.eigenvalues();
    const double tol = std::max(vals.cwiseAbs().maxCoeff() * 1e-13, floor);
    Eigen::Matrix<double, Dim, 1> inv;
    for (int k = 0; k < Dim; ++k) inv(k) = vals(k) > tol ? 1.0 / vals(k) : 0.0;
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  }
}

/// Stored forward pass of the Kalman recursion on the centered state.
template <int Dim>
struct FilterPass {
  using Vec = Eigen::Matrix<double, Dim, 1>;
  using Mat = Eigen::Matrix<double, Dim, Dim>;
  std::vector<Vec> a_pred, a_filt;
  std::vector<Mat> P_pred, P_filt;

  void resize(std::size_t n) {
    a_pred.resize(n);
    a_filt.resize(n);
    P_pred.resize(n);
    P_filt.resize(n);
  }
};

template <int Dim>
void init_state(const StateSpaceSpec& spec, const StateSpaceMatrices& m,
                Eigen::Matrix<double, Dim, 1>& a, Eigen::Matrix<double, Dim, Dim>& P) {
  a.setZero();
  if (has_stationary_start(spec)) {
    const Eigen::Matrix2d S = stationary_state_covariance(spec, m);
    P = S.topLeftCorner<Dim, Dim>();
  } else {
    P = spec.diffuse_scale * Eigen::Matrix<double, Dim, Dim>::Identity();
  }
}

/// Forward filter over the centered observations. `extra_masked` treats one
/// additional index as missing (leave-one-out passes). If `out` is non-null
/// the observable-scale outputs are produced as a side effect.
template <int Dim>
void forward_pass(const ObservationSeries& series, const StateSpaceSpec& spec,
                  const StateSpaceMatrices& m, std::size_t extra_masked, FilterPass<Dim>& fp,
                  FilterOutput* out) {
  using Vec = Eigen::Matrix<double, Dim, 1>;
  using Mat = Eigen::Matrix<double, Dim, Dim>;
  const std::size_t n = series.size();
  const double obs_var = spec.obs_noise_variance;
  const Eigen::Matrix<double, Dim, Dim> T = m.transition.topLeftCorner<Dim, Dim>();
  const Vec r = m.shock_loading.head<Dim>();
  const Mat Q = spec.innovation_variance * r * r.transpose();

  fp.resize(n);
  if (out) out->resize(n);

  Vec a;
  Mat P;
  init_state<Dim>(spec, m, a, P);

  for (std::size_t i = 0; i < n; ++i) {
    fp.a_pred[i] = a;
    fp.P_pred[i] = P;
    const bool miss = series.is_missing(i) || i == extra_masked;
    const double det = deterministic_level(spec, i);
    const double tau2 = std::max(P(0, 0), 0.0);

    if (out) {
      out->tilde_mu[i] = det + a(0);
      out->posterior_variance[i] = tau2;
    }

    if (!miss) {
      const double w = series.value(i) - det;
      if (!std::isfinite(w)) throw data_error("forward_filter: non-finite observation at index " + std::to_string(i));
      const double z = w - a(0);
      const double F = tau2 + obs_var;
      const Vec K = P.col(0) / F;  // P h' / F with h = (1,0,..)
      a += K * z;
      // Joseph-form update keeps P symmetric PSD under the diffuse start.
      Mat IKH = Mat::Identity();
      IKH.col(0) -= K;
      P = IKH * P * IKH.transpose() + obs_var * K * K.transpose();
      if (out) {
        const double g = obs_var / F;
        out->gain[i] = g;
        out->residual[i] = z;
        out->hat_mu[i] = g * out->tilde_mu[i] + (1.0 - g) * series.value(i);
      }
    } else if (out) {
      out->gain[i] = 1.0;
      out->residual[i] = std::numeric_limits<double>::quiet_NaN();
      out->hat_mu[i] = out->tilde_mu[i];
    }
    fp.a_filt[i] = a;
    fp.P_filt[i] = P;

    a = T * a;
    P = T * P * T.transpose() + Q;
    P = (0.5 * (P + P.transpose().eval())).eval();
  }
}

/// Rauch-Tung-Striebel backward pass; returns the smoothed mean/variance of
/// the observable component (centered scale).
template <int Dim>
void smooth_pass(const FilterPass<Dim>& fp, const StateSpaceMatrices& m,
                 std::vector<double>& mean0, std::vector<double>& var0) {
  using Vec = Eigen::Matrix<double, Dim, 1>;
  using Mat = Eigen::Matrix<double, Dim, Dim>;
  const std::size_t n = fp.a_pred.size();
  const Eigen::Matrix<double, Dim, Dim> T = m.transition.topLeftCorner<Dim, Dim>();
  mean0.resize(n);
  var0.resize(n);

  Vec ms = fp.a_filt[n - 1];
  Mat Ps = fp.P_filt[n - 1];
  mean0[n - 1] = ms(0);
  var0[n - 1] = std::max(Ps(0, 0), 0.0);
  for (std::size_t t = n - 1; t-- > 0;) {
    const Mat J = fp.P_filt[t] * T.transpose() * psd_pinv<Dim>(fp.P_pred[t + 1]);
    ms = fp.a_filt[t] + J * (ms - fp.a_pred[t + 1]);
    Ps = fp.P_filt[t] + J * (Ps - fp.P_pred[t + 1]) * J.transpose();
    Ps = (0.5 * (Ps + Ps.transpose().eval())).eval();
    mean0[t] = ms(0);
    var0[t] = std::max(Ps(0, 0), 0.0);
  }
}

}  // namespace detail

/// Sequential one-step predictor and update: tilde_mu[i] = E[mu_i | Y_1..Y_{i-1}],
/// hat_mu[i] = E[mu_i | Y_1..Y_i]. Missing indices skip the update step.
inline FilterOutput forward_filter(const ObservationSeries& series, const StateSpaceSpec& spec) {
  validate_spec(spec);
  const StateSpaceMatrices m = build_matrices(spec);
  FilterOutput out;
  if (m.state_dim == 1) {
    detail::FilterPass<1> fp;
    detail::forward_pass<1>(series, spec, m, detail::no_index, fp, &out);
  } else {
    detail::FilterPass<2> fp;
    detail::forward_pass<2>(series, spec, m, detail::no_index, fp, &out);
  }
#ifndef NDEBUG
  check_filter_output(out, series);
#endif
  return out;
}

/// Fixed-interval smoother: mean[i] = E[mu_i | all observed Y], variance[i]
/// the matching conditional variance.
struct SmoothedMoments {
  std::vector<double> mean;
  std::vector<double> variance;
};

inline SmoothedMoments fixed_interval_smooth(const ObservationSeries& series,
                                             const StateSpaceSpec& spec) {
  validate_spec(spec);
  const StateSpaceMatrices m = build_matrices(spec);
  SmoothedMoments sm;
  auto run = [&](auto dim_tag) {
    constexpr int D = decltype(dim_tag)::value;
    detail::FilterPass<D> fp;
    detail::forward_pass<D>(series, spec, m, detail::no_index, fp, nullptr);
    detail::smooth_pass<D>(fp, m, sm.mean, sm.variance);
  };
  if (m.state_dim == 1)
    run(std::integral_constant<int, 1>{});
  else
    run(std::integral_constant<int, 2>{});
  for (std::size_t i = 0; i < series.size(); ++i) sm.mean[i] += deterministic_level(spec, i);
  return sm;
}

/// Retrospective leave-one-out predictors: tilde_mu[i] = E[mu_i | Y_j, j != i]
/// via one smoother pass per index with that index masked; hat_mu[i] =
/// E[mu_i | all Y] assembled through the exact gain identity.
inline FilterOutput loo_predictors(const ObservationSeries& series, const StateSpaceSpec& spec) {
  validate_spec(spec);
  const StateSpaceMatrices m = build_matrices(spec);
  const std::size_t n = series.size();
  const double obs_var = spec.obs_noise_variance;
  FilterOutput out;
  out.resize(n);

  auto run = [&](auto dim_tag) {
    constexpr int D = decltype(dim_tag)::value;
    detail::FilterPass<D> fp;
    std::vector<double> mean0, var0;
    for (std::size_t i = 0; i < n; ++i) {
      detail::forward_pass<D>(series, spec, m, i, fp, nullptr);
      detail::smooth_pass<D>(fp, m, mean0, var0);
      const double det = deterministic_level(spec, i);
      const double tilde = det + mean0[i];
      const double tau2 = var0[i];
      out.tilde_mu[i] = tilde;
      out.posterior_variance[i] = tau2;
      if (series.is_missing(i)) {
        out.gain[i] = 1.0;
        out.residual[i] = std::numeric_limits<double>::quiet_NaN();
        out.hat_mu[i] = tilde;
      } else {
        const double g = obs_var / (obs_var + tau2);
        out.gain[i] = g;
        out.residual[i] = series.value(i) - tilde;
        out.hat_mu[i] = g * tilde + (1.0 - g) * series.value(i);
      }
    }
  };
  if (m.state_dim == 1)
    run(std::integral_constant<int, 1>{});
  else
    run(std::integral_constant<int, 2>{});
#ifndef NDEBUG
  check_filter_output(out, series);
#endif
  return out;
}

}  // namespace ebkf
