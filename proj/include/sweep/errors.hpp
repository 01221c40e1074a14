#pragma once

#include <stdexcept>
#include <string>

namespace sweep {

/// Invalid model or scaling parameters (a violated inequality is named in what()).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The requested predictor does not apply (e.g. no invasion, Assumption 1 fails).
class RegimeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Integrator failure, unreachable tolerance, or a search hitting its time cap.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed experiment configuration.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Too few samples for a requested statistic.
class InsufficientSampleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An output path cannot be created or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sweep
