#pragma once

#include <stdexcept>
#include <string>

namespace cansys {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the arguments was violated (bad input data, invalid
/// Hamiltonian, point outside the closed upper half-plane, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A requested accuracy could not be certified, or a computation degenerated
/// numerically. `achieved_bound` carries the best bound that was reached.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, double achieved_bound)
      : Error(what), achieved_bound_(achieved_bound) {}

  double achieved_bound() const noexcept { return achieved_bound_; }

 private:
  double achieved_bound_;
};

}  // namespace cansys
