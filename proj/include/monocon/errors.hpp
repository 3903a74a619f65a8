#pragma once

#include <stdexcept>
#include <string>

namespace monocon {

// Error taxonomy maps onto the CLI exit codes: ConfigError -> 2,
// FormatError and DimensionError -> 3, DegenerateError and DomainError -> 4.

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape mismatch between operands, or input data of the wrong width.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Mathematically invalid input, e.g. log of a non-positive entry.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Numerically degenerate state: zero-norm embedding rows, batches without
// any positive pair, constant inputs to rank correlation.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or flag values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed files (EMB1 / MCK1 parse failures, digest mismatches).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace monocon
