#pragma once

#include <stdexcept>

namespace znet {

// Base class for all engine errors. The CLI maps user-facing problems
// (ConfigError, ParseError, IoError) to exit code 2 and everything else
// (shape/contract/numeric violations) to exit code 1.
class Error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor or volume dimensions violate an operation's contract.
class ShapeError : public Error {
  using Error::Error;
};

// An API was called in a state it does not support (wrong mode, missing
// gradients, unknown parameter name).
class ContractError : public Error {
  using Error::Error;
};

// A non-finite value appeared where a finite one is required.
class NumericError : public Error {
  using Error::Error;
};

// Malformed input file (MetaImage header, config file, checkpoint).
class ParseError : public Error {
  using Error::Error;
};

// Invalid or inconsistent user configuration.
class ConfigError : public Error {
  using Error::Error;
};

// Degenerate volume geometry (zero-sized resample target, shape outside grid).
class GeometryError : public Error {
  using Error::Error;
};

// A metric has no defined value for the given input (e.g. empty mask).
class UndefinedMetricError : public Error {
  using Error::Error;
};

// Filesystem failure (unreadable payload, unwritable output directory).
class IoError : public Error {
  using Error::Error;
};

}  // namespace znet
