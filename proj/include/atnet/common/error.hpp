#pragma once

#include <stdexcept>
#include <string>

namespace atnet {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands with incompatible shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Bad configuration values or command-line usage.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Missing files, malformed manifests, inconsistent clips.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss or other numerical breakdown.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Binary container decode failures. The three subclasses are distinct so
/// callers can tell a foreign file from a stale one from a cut-off one.
class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class BadMagicError : public FormatError {
 public:
  using FormatError::FormatError;
};

class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

class TruncatedError : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace atnet
