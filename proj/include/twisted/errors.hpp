#pragma once

#include <stdexcept>
#include <string>

namespace twisted {

/// Base for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied value violates a documented precondition. `field` names it.
class InvalidArgument : public Error {
 public:
  InvalidArgument(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Direct summation was asked for more terms than the configured cap.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

/// Two blocks of a set share elements or are out of order.
class OverlapError : public Error {
 public:
  using Error::Error;
};

/// Persisted document is unreadable or describes an invalid set.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A mathematical inequality that must hold (beyond numerical slack) failed.
class AuditFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace twisted
