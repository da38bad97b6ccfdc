#ifndef PAULI_ERRORS_HPP
#define PAULI_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pauli {

/// Base class of every error raised by the library. The exit code is what
/// the command line tool returns when the error reaches `main`.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual int exit_code() const noexcept { return 1; }
};

/// Malformed or out-of-range input (bad config value, t outside [0,T], ...).
class InputError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

/// A numerical procedure did not reach its accuracy target.
class ConvergenceError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

/// A state is not contained by the grid, in position or momentum space.
class GridError : public Error {
 public:
  enum class Side { Position, Momentum };

  GridError(const std::string& what, Side side) : Error(what), side_(side) {}
  int exit_code() const noexcept override { return 4; }
  Side side() const noexcept { return side_; }

 private:
  Side side_;
};

/// The thermal ensemble needs more single-particle levels than were supplied.
class NeedsMoreLevelsError : public ConvergenceError {
 public:
  NeedsMoreLevelsError(const std::string& what, std::size_t required)
      : ConvergenceError(what), required_(required) {}
  std::size_t required_levels() const noexcept { return required_; }

 private:
  std::size_t required_;
};

}  // namespace pauli

#endif  // PAULI_ERRORS_HPP
