#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ebkf/errors.hpp"

namespace ebkf {

enum class Family { ar1, ar2, arima110 };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::ar1: return "ar1";
    case Family::ar2: return "ar2";
    case Family::arima110: return "arima110";
  }
  return "?";
}

inline Family family_from_name(const std::string& s) {
  if (s == "ar1" || s == "AR1") return Family::ar1;
  if (s == "ar2" || s == "AR2") return Family::ar2;
  if (s == "arima110" || s == "ARIMA110" || s == "arima(1,1,0)") return Family::arima110;
  throw spec_error("unknown model family '" + s + "' (expected ar1, ar2 or arima110)");
}

/// Model specification for the three supported families.
///
/// Convention: mu_i = intercept*(1 - sum phi) + sum_k phi_k mu_{i-k} + U_i for
/// the AR families, so `intercept` is the mean level. For arima110 the same
/// convention applies to the differenced process, so `intercept` is a per-step
/// drift.
struct StateSpaceSpec {
  Family family = Family::ar1;
  std::vector<double> phi;             // 1 coefficient (ar1, arima110) or 2 (ar2)
  double intercept = 0.0;
  double innovation_variance = 1.0;    // Var of the state shock U_i
  double obs_noise_variance = 1.0;     // Var of eps_i; the paper fixes this to 1
  double diffuse_scale = 1e7;          // initial state variance when no stationary start exists
};

inline std::size_t expected_phi_count(Family f) { return f == Family::ar2 ? 2 : 1; }

inline void validate_spec(const StateSpaceSpec& spec) {
  const std::size_t want = expected_phi_count(spec.family);
  if (spec.phi.size() != want)
    throw spec_error(std::string("invalid spec: phi must have ") + std::to_string(want) +
                     " entries for family " + family_name(spec.family) + ", got " +
                     std::to_string(spec.phi.size()));
  for (double p : spec.phi)
    if (!std::isfinite(p)) throw spec_error("invalid spec: phi has a non-finite entry");
  if (!std::isfinite(spec.intercept)) throw spec_error("invalid spec: intercept must be finite");
  if (!(spec.innovation_variance >= 0.0) || !std::isfinite(spec.innovation_variance))
    throw spec_error("invalid spec: innovation_variance must be >= 0");
  if (!(spec.obs_noise_variance > 0.0) || !std::isfinite(spec.obs_noise_variance))
    throw spec_error("invalid spec: obs_noise_variance must be > 0");
  if (!(spec.diffuse_scale > 0.0) || !std::isfinite(spec.diffuse_scale))
    throw spec_error("invalid spec: diffuse_scale must be > 0");
}

/// Stationarity of the AR polynomial. For arima110 this refers to the
/// differenced AR(1); the level process is always nonstationary.
inline bool ar_poly_stationary(const StateSpaceSpec& spec) {
  if (spec.family == Family::ar2) {
    const double p1 = spec.phi[0], p2 = spec.phi[1];
    return std::abs(p2) < 1.0 && p1 + p2 < 1.0 && p2 - p1 < 1.0;
  }
  return std::abs(spec.phi[0]) < 1.0;
}

/// Canonical state-space embedding of the three families. The state is the
/// centered (intercept/drift removed) level process and, for the
/// two-dimensional families, its lag.
struct StateSpaceMatrices {
  Eigen::Matrix2d transition = Eigen::Matrix2d::Zero();
  Eigen::Vector2d shock_loading = Eigen::Vector2d::Zero();
  Eigen::RowVector2d observation_row = Eigen::RowVector2d::Zero();
  int state_dim = 1;
};

inline StateSpaceMatrices build_matrices(const StateSpaceSpec& spec) {
  validate_spec(spec);
  StateSpaceMatrices m;
  m.shock_loading(0) = 1.0;
  m.observation_row(0) = 1.0;
  switch (spec.family) {
    case Family::ar1:
      m.state_dim = 1;
      m.transition(0, 0) = spec.phi[0];
      break;
    case Family::ar2:
      m.state_dim = 2;
      m.transition(0, 0) = spec.phi[0];
      m.transition(0, 1) = spec.phi[1];
      m.transition(1, 0) = 1.0;
      break;
    case Family::arima110:
      // x_i = (1+phi) x_{i-1} - phi x_{i-2} + U_i
      m.state_dim = 2;
      m.transition(0, 0) = 1.0 + spec.phi[0];
      m.transition(0, 1) = -spec.phi[0];
      m.transition(1, 0) = 1.0;
      break;
  }
  return m;
}

/// Deterministic observation component at (0-based) index i: the mean level
/// for AR families, a linear drift for arima110.
inline double deterministic_level(const StateSpaceSpec& spec, std::size_t i) {
  if (spec.family == Family::arima110) return spec.intercept * static_cast<double>(i + 1);
  return spec.intercept;
}

/// Whether the filter can start from the stationary distribution of the state.
inline bool has_stationary_start(const StateSpaceSpec& spec) {
  return spec.family != Family::arima110 && ar_poly_stationary(spec) &&
         spec.innovation_variance > 0.0;
}

/// Stationary covariance of the (centered) state: solves P = T P T' + q r r'.
inline Eigen::Matrix2d stationary_state_covariance(const StateSpaceSpec& spec,
                                                   const StateSpaceMatrices& m) {
  Eigen::Matrix2d P = Eigen::Matrix2d::Zero();
  if (m.state_dim == 1) {
    P(0, 0) = spec.innovation_variance / (1.0 - spec.phi[0] * spec.phi[0]);
    return P;
  }
  // vec(P) = (I4 - T (x) T)^{-1} vec(q r r')
  const Eigen::Matrix2d T = m.transition;
  const Eigen::Matrix2d Q = spec.innovation_variance * m.shock_loading * m.shock_loading.transpose();
  Eigen::Matrix4d A = Eigen::Matrix4d::Identity();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          A(i + 2 * j, k + 2 * l) -= T(i, k) * T(j, l);
  Eigen::Vector4d q;
  q << Q(0, 0), Q(1, 0), Q(0, 1), Q(1, 1);
  const Eigen::Vector4d p = A.fullPivLu().solve(q);
  P << p(0), p(2), p(1), p(3);
  P = 0.5 * (P + P.transpose().eval());
  return P;
}

}  // namespace ebkf
