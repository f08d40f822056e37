#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ebkf/errors.hpp"

namespace ebkf {

/// Ordered real-valued observations with an optional per-index missing mask.
/// Missing entries stay in place (the leave-one-out smoother needs
/// "present but ignored" semantics); their stored value is ignored.
class ObservationSeries {
public:
  ObservationSeries() = default;

  explicit ObservationSeries(std::vector<double> values)
      : values_(std::move(values)), missing_(values_.size(), false) {
    validate();
  }

  ObservationSeries(std::vector<double> values, std::vector<bool> missing)
      : values_(std::move(values)), missing_(std::move(missing)) {
    if (missing_.size() != values_.size())
      throw spec_error("ObservationSeries: missing mask length " + std::to_string(missing_.size()) +
                       " != values length " + std::to_string(values_.size()));
    validate();
  }

  std::size_t size() const { return values_.size(); }
  double value(std::size_t i) const { return values_[i]; }
  bool is_missing(std::size_t i) const { return missing_[i]; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<bool>& missing_mask() const { return missing_; }

  std::size_t observed_count() const {
    std::size_t k = 0;
    for (std::size_t i = 0; i < size(); ++i)
      if (!missing_[i]) ++k;
    return k;
  }

  /// Copy with one extra index masked (used by the leave-one-out smoother).
  ObservationSeries with_masked(std::size_t i) const {
    ObservationSeries out = *this;
    out.missing_[i] = true;
    return out;
  }

private:
  void validate() const {
    if (values_.empty()) throw spec_error("ObservationSeries: length must be >= 1");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!missing_[i] && !std::isfinite(values_[i]))
        throw spec_error("ObservationSeries: non-finite value at index " + std::to_string(i));
    }
  }

  std::vector<double> values_;
  std::vector<bool> missing_;
};

}  // namespace ebkf
