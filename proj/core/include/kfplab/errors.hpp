#pragma once

#include <stdexcept>
#include <string>

namespace kfplab {

/// Invalid arguments: dimension mismatches, out-of-range parameters,
/// malformed potentials.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A discretization would exceed the configured matrix budget.
class BudgetError : public std::runtime_error {
 public:
  BudgetError(const std::string& what, std::size_t requested, std::size_t limit)
      : std::runtime_error(what), requested_(requested), limit_(limit) {}
  std::size_t requested() const noexcept { return requested_; }
  std::size_t limit() const noexcept { return limit_; }

 private:
  std::size_t requested_;
  std::size_t limit_;
};

/// An iterative method hit its iteration cap or a quadrature failed to settle.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kfplab
