#pragma once

#include <stdexcept>
#include <string>

namespace forceflow {

// Base for every error raised by the library. Subclasses name the failure
// category so callers (and the CLI) can report the stage that broke.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or non-finite input data.
class InputError : public Error {
 public:
  using Error::Error;
};

// Parameter outside its admissible range.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Underflow, divergence or non-convergence during a computation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Corrupt or truncated file.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Graph-structure violation (e.g. disconnected graph for an eigenmap).
class StructuralError : public Error {
 public:
  using Error::Error;
};

}  // namespace forceflow
