#pragma once

#include <stdexcept>
#include <string>

namespace gtrans {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unparseable or out-of-range input file content.
class MalformedInputError : public Error {
 public:
  using Error::Error;
};

// Matrix or vector shapes that do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf, non-converging iteration, degenerate representation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Objects that were not produced together (e.g. a trace from another model).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

// A statistic whose defining set is empty.
class UndefinedStatisticError : public Error {
 public:
  using Error::Error;
};

// Training diverged.
class OptimizationError : public Error {
 public:
  using Error::Error;
};

// Rejection sampling ran out of retries.
class SamplingError : public Error {
 public:
  using Error::Error;
};

// Bad or missing configuration key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gtrans
