#pragma once

#include <stdexcept>
#include <string>

namespace pcflow {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or grid mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Argument outside the admissible set (|a| >= 1, f <= 0, R outside (0,1], ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Non-finite or otherwise unusable field values.
class StateError : public Error {
 public:
  using Error::Error;
};

class SolvabilityError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A monitored invariant left its admissible range during a run.
class MonitorError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pcflow
