#pragma once

#include <stdexcept>
#include <string>

namespace pfol {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: wrong dimension, non-finite entries, empty inputs.
class InputError : public Error {
 public:
  using Error::Error;
};

/// The requested operation is not available for this set kind.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// Invalid algorithm or experiment parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Out-of-order calls in the online protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

/// A documented invariant was observed to fail at runtime.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace pfol
