#pragma once

#include <cmath>

namespace ebkf {

/// Logistic-density kernel K(x) = 2/(e^x + e^-x)^2, the derivative of the
/// logistic cdf (1 + e^{-2x})^{-1}. Integrates to 1 (antiderivative is
/// tanh(x)/2). Evaluated through t = e^{-2|x|} so large |x| underflows to 0
/// instead of overflowing.
inline double kernel(double x) {
  const double t = std::exp(-2.0 * std::abs(x));
  const double onept = 1.0 + t;
  return 2.0 * t / (onept * onept);
}

/// K'(x) = -4 (e^x - e^-x)/(e^x + e^-x)^3. Odd, K'(0) = 0, and
/// K'(x)/K(x) = -2 tanh(x), which is what bounds the Tweedie correction.
inline double kernel_deriv(double x) {
  const double t = std::exp(-2.0 * std::abs(x));
  const double onept = 1.0 + t;
  const double mag = 4.0 * t * (1.0 - t) / (onept * onept * onept);
  return x >= 0.0 ? -mag : mag;
}

namespace detail {

/// log K(x) up to the additive constant log 2; never overflows.
inline double kernel_log_unnorm(double x) {
  const double ax = std::abs(x);
  return -2.0 * (ax + std::log1p(std::exp(-2.0 * ax)));
}

/// K'(x)/K(x) = -2 tanh(x), in (-2, 2).
inline double kernel_ratio(double x) { return -2.0 * std::tanh(x); }

}  // namespace detail

}  // namespace ebkf
