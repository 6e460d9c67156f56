#pragma once

#include <stdexcept>
#include <string>

namespace dualgnn {

// Base class for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An input violates a documented precondition or invariant.
struct ValidationError : Error {
  using Error::Error;
};

// Array/matrix dimensions disagree (e.g. manifest vs payload).
struct ShapeError : Error {
  using Error::Error;
};

// An operation that must produce at least one item produced none.
struct EmptyResultError : Error {
  using Error::Error;
};

// File system or format problem.
struct IoError : Error {
  using Error::Error;
};

// Non-finite loss during optimization.
struct DivergenceError : Error {
  using Error::Error;
};

// Invalid configuration value; `field` carries the dotted path (e.g. "model.dropout").
struct ConfigError : Error {
  ConfigError(std::string field_path, const std::string& what)
      : Error(field_path + ": " + what), field(std::move(field_path)) {}
  std::string field;
};

}  // namespace dualgnn
