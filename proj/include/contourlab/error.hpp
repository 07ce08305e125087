#pragma once

#include <stdexcept>
#include <string>

namespace contourlab {

/// Base of all library errors. The CLI maps each subclass to an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Sampling could not satisfy the geometric constraints within its retry budget,
/// or an input violated a data invariant.
class ConstraintError : public Error {
 public:
  using Error::Error;
};

class ManifestError : public ConstraintError {
 public:
  using ConstraintError::ConstraintError;
};

inline constexpr const char* kVersion = CONTOURLAB_VERSION;

}  // namespace contourlab
