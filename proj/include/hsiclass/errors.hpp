#pragma once

#include <stdexcept>
#include <string>

namespace hsiclass {

// Base for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file contents (headers, models, traces, tables).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Structurally valid input that violates a semantic contract.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Operands whose shapes do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Out-of-range or inconsistent parameter values.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Filesystem failures (open, short read, write).
class IoError : public Error {
 public:
  using Error::Error;
};

// Iterative solver hit its sweep cap; message carries the residual.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace hsiclass
