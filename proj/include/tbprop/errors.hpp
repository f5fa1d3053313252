#pragma once

#include <stdexcept>
#include <string>

namespace tbprop {

enum class ErrorKind { Validation, Unsupported, Numeric, Resource };

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::Validation, what) {}
};

/// Operation exists but not for this topology or parameter regime.
class UnsupportedError : public Error {
 public:
  explicit UnsupportedError(const std::string& what)
      : Error(ErrorKind::Unsupported, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorKind::Numeric, what) {}
};

class ResourceError : public Error {
 public:
  explicit ResourceError(const std::string& what)
      : Error(ErrorKind::Resource, what) {}
};

/// A series did not reach its tail tolerance within the term budget.
class TruncationError : public NumericError {
 public:
  TruncationError(const std::string& what, double achieved_tail)
      : NumericError(what), achieved_tail_(achieved_tail) {}
  double achieved_tail() const noexcept { return achieved_tail_; }

 private:
  double achieved_tail_;
};

/// Photon subtraction from a state with no photons in the excitation plane.
class UndefinedStateError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

namespace detail {
inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}
}  // namespace detail

}  // namespace tbprop
