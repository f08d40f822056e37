#pragma once

#include <stdexcept>
#include <string>

namespace ebkf {

/// Invalid model specification or operation precondition.
class spec_error : public std::invalid_argument {
public:
  explicit spec_error(const std::string& what) : std::invalid_argument(what) {}
};

/// Malformed or unusable input data (files, series, counts).
class data_error : public std::runtime_error {
public:
  explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ebkf
