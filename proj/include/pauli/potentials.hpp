#ifndef PAULI_POTENTIALS_HPP
#define PAULI_POTENTIALS_HPP

#include <cmath>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "pauli/errors.hpp"
#include "pauli/grid.hpp"

// Natural units throughout: hbar = m = 1 and the reference trap frequency is
// 1, so lengths are in d = sqrt(hbar/(m omega)), times in 1/omega and
// energies in hbar*omega.

namespace pauli {

enum class Task { Expansion, Transport, Splitting };
enum class Shape { Linear, Sinusoidal };

inline std::string_view to_string(Task t) {
  switch (t) {
    case Task::Expansion: return "expansion";
    case Task::Transport: return "transport";
    case Task::Splitting: return "splitting";
  }
  return "?";
}

inline std::string_view to_string(Shape s) {
  return s == Shape::Linear ? "linear" : "sinusoidal";
}

/// omega(t) from omega_i to omega_f; V = omega^2 (x^2 + lambda x^4) / 2.
struct ExpansionParams {
  double omega_i = 1.0;
  double omega_f = 0.01;
};

/// x0(t) from x0_i to x0_f; V = omega^2 ((x-x0)^2 + lambda (x-x0)^4) / 2.
struct TransportParams {
  double x0_i = 0.0;
  double x0_f = 90.0;
  double omega = 1.0;
};

/// h(t) from h_i to h_f; V = omega^2 x^2 / 2 + h exp(-x^2/d^2), d = omega^{-1/2}.
struct SplittingParams {
  double h_i = 0.0;
  double h_f = 20.0;
  double omega = 1.0;
};

using TaskParams = std::variant<ExpansionParams, TransportParams, SplittingParams>;

/// Interpolation fraction s(t) in [0,1] for the given schedule shape.
inline double schedule_fraction(Shape shape, double t, double T) {
  if (shape == Shape::Linear) return t / T;
  const double s = std::sin(std::numbers::pi * t / (2.0 * T));
  return s * s;
}

class PotentialSchedule {
 public:
  PotentialSchedule(TaskParams params, Shape shape, double T, double lambda)
      : params_(params), shape_(shape), T_(T), lambda_(lambda) {
    validate();
  }

  static PotentialSchedule expansion(Shape shape, double T, double lambda,
                                     double omega_i = 1.0, double omega_f = 0.01) {
    return {ExpansionParams{omega_i, omega_f}, shape, T, lambda};
  }
  static PotentialSchedule transport(Shape shape, double T, double lambda, double x0_i = 0.0,
                                     double x0_f = 90.0, double omega = 1.0) {
    return {TransportParams{x0_i, x0_f, omega}, shape, T, lambda};
  }
  static PotentialSchedule splitting(Shape shape, double T, double h_i = 0.0,
                                     double h_f = 20.0, double omega = 1.0) {
    return {SplittingParams{h_i, h_f, omega}, shape, T, 0.0};
  }

  Task task() const noexcept {
    return static_cast<Task>(params_.index());
  }
  Shape shape() const noexcept { return shape_; }
  double T() const noexcept { return T_; }
  double lambda() const noexcept { return lambda_; }
  const TaskParams& params() const noexcept { return params_; }

  PotentialSchedule with_T(double T) const { return {params_, shape_, T, lambda_}; }
  PotentialSchedule with_lambda(double lambda) const { return {params_, shape_, T_, lambda}; }
  PotentialSchedule with_shape(Shape shape) const { return {params_, shape, T_, lambda_}; }

  /// (c_i, c_f) of the controlled quantity: omega, x0 or h.
  std::pair<double, double> control_endpoints() const {
    return std::visit(
        [](const auto& p) -> std::pair<double, double> {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, ExpansionParams>) return {p.omega_i, p.omega_f};
          else if constexpr (std::is_same_v<P, TransportParams>) return {p.x0_i, p.x0_f};
          else return {p.h_i, p.h_f};
        },
        params_);
  }

  bool is_static() const {
    const auto [ci, cf] = control_endpoints();
    return ci == cf;
  }

  /// Control value at time t. Exact at both endpoints.
  double control_value(double t) const {
    if (!(t >= 0.0 && t <= T_)) {
      std::ostringstream os;
      os << "control_value: t = " << t << " outside [0, " << T_ << "]";
      throw InputError(os.str());
    }
    const auto [ci, cf] = control_endpoints();
    const double s = schedule_fraction(shape_, t, T_);
    return (1.0 - s) * ci + s * cf;
  }

  /// Centre of parity symmetry at time t.
  double center(double t) const {
    if (task() == Task::Transport) return control_value(t);
    return 0.0;
  }

  void evaluate_into(const Grid& grid, double t, std::span<double> out) const {
    const double c = control_value(t);
    const std::size_t n = grid.size();
    std::visit(
        [&](const auto& p) {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, ExpansionParams>) {
            const double a = 0.5 * c * c;
            for (std::size_t j = 0; j < n; ++j) {
              const double x2 = grid.x(j) * grid.x(j);
              out[j] = a * (x2 + lambda_ * x2 * x2);
            }
          } else if constexpr (std::is_same_v<P, TransportParams>) {
            const double a = 0.5 * p.omega * p.omega;
            for (std::size_t j = 0; j < n; ++j) {
              const double y = grid.x(j) - c;
              const double y2 = y * y;
              out[j] = a * (y2 + lambda_ * y2 * y2);
            }
          } else {
            const double a = 0.5 * p.omega * p.omega;
            for (std::size_t j = 0; j < n; ++j) {
              const double x2 = grid.x(j) * grid.x(j);
              out[j] = a * x2 + c * std::exp(-x2 * p.omega);
            }
          }
        },
        params_);
  }

  std::vector<double> evaluate(const Grid& grid, double t) const {
    std::vector<double> v(grid.size());
    evaluate_into(grid, t, v);
    return v;
  }

  /// Pointwise value, for checks that do not need a whole lattice.
  double value_at(double x, double t) const {
    const double c = control_value(t);
    return std::visit(
        [&](const auto& p) {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, ExpansionParams>) {
            const double x2 = x * x;
            return 0.5 * c * c * (x2 + lambda_ * x2 * x2);
          } else if constexpr (std::is_same_v<P, TransportParams>) {
            const double y2 = (x - c) * (x - c);
            return 0.5 * p.omega * p.omega * (y2 + lambda_ * y2 * y2);
          } else {
            return 0.5 * p.omega * p.omega * x * x + c * std::exp(-x * x * p.omega);
          }
        },
        params_);
  }

  std::string describe() const {
    std::ostringstream os;
    const auto [ci, cf] = control_endpoints();
    os << to_string(task()) << '/' << to_string(shape_) << " T=" << T_ << " lambda=" << lambda_
       << " control " << ci << "->" << cf;
    return os.str();
  }

 private:
  void validate() const {
    if (!(T_ > 0.0)) throw InputError("schedule: T must be positive");
    if (!(lambda_ >= 0.0)) throw InputError("schedule: lambda must be >= 0");
    std::visit(
        [](const auto& p) {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, ExpansionParams>) {
            if (!(p.omega_i > 0.0 && p.omega_f > 0.0)) {
              throw InputError("schedule: omega_i and omega_f must be positive");
            }
          } else {
            if (!(p.omega > 0.0)) throw InputError("schedule: omega must be positive");
          }
        },
        params_);
  }

  TaskParams params_;
  Shape shape_;
  double T_;
  double lambda_;
};

}  // namespace pauli

#endif  // PAULI_POTENTIALS_HPP
