#pragma once

#include <stdexcept>
#include <string>

namespace kfree {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numeric failure in the geometry layer (overflow, degenerate input,
/// a classification that cannot be made at the configured tolerance).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// A computation needed an element outside the enumerated word ball.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// A three-valued oracle answered "undecided" where a decision was required.
class CertificationError : public Error {
 public:
  using Error::Error;
};

/// A configured size cap (subset scan, nerve dimension, simplex count) was hit.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

/// Malformed input (words, scenario files, simplices).
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace kfree
