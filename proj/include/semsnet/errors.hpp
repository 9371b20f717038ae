#pragma once

#include <stdexcept>

namespace semsnet {

/// Malformed or inconsistent input data (files, sessions, windows).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration value or incompatible shapes requested by a caller.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure while fitting a model.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace semsnet
