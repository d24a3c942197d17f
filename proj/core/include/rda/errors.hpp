#pragma once

#include <stdexcept>
#include <string>

namespace rda {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller handed in something with the wrong shape (dimension mismatch,
/// empty batch, etc.).
class InputError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value. `field()` names the offending key when known.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::string field = {})
      : Error(what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

enum class FormatErrorKind {
  MagicMismatch,
  BadVersion,
  BadHeader,
  Truncated,
  TrailingData,
  NonFinite,
  BadLabel,
  InconsistentDims,
  BadDocument,
};

const char* to_string(FormatErrorKind kind) noexcept;

/// A file was readable but its contents violate the format.
class FormatError : public Error {
 public:
  FormatError(FormatErrorKind kind, const std::string& what)
      : Error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  FormatErrorKind kind() const noexcept { return kind_; }

 private:
  FormatErrorKind kind_;
};

/// Non-finite values appeared during training, optimisation or scoring.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace rda
