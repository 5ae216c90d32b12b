#pragma once

#include <stdexcept>
#include <string>

namespace frolov {

/// Base class of every error thrown by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments or parameters outside an operation's domain.
class domain_error : public error {
 public:
  using error::error;
};

/// A smoothness class outside every covered rate regime.
class unsupported_class : public domain_error {
 public:
  using domain_error::domain_error;
};

/// The dual search box contains no nonzero lattice point.
class radius_too_small : public domain_error {
 public:
  using domain_error::domain_error;
};

/// Enumeration would visit more candidates than the configured budget.
class budget_exceeded : public error {
 public:
  using error::error;
};

/// Root isolation did not produce the expected number of certified roots.
/// Signals a precision bug, not a user error.
class certification_failure : public error {
 public:
  using error::error;
};

}  // namespace frolov
