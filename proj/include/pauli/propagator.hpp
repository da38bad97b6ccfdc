#ifndef PAULI_PROPAGATOR_HPP
#define PAULI_PROPAGATOR_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <vector>

#include "pauli/errors.hpp"
#include "pauli/fft.hpp"
#include "pauli/grid.hpp"
#include "pauli/potentials.hpp"
#include "pauli/spectral.hpp"

namespace pauli {

struct PropagationSettings {
  double dt = 1e-3;               ///< requested step; shrunk so that T/dt is an integer
  bool store_trajectory = false;  ///< record t, norm and <x> after every step
  double tolerance = 1e-4;        ///< overlap change allowed when dt is halved
  std::size_t check_interval = 1000;
  int max_dt_halvings = 5;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> norms;
  std::vector<double> mean_positions;
};

struct Propagation {
  std::vector<Wavefunction> states;
  std::vector<Trajectory> trajectories;  ///< one per state, empty unless requested
  std::size_t steps = 0;
  double dt = 0.0;
};

/// round(T/dt) steps, at least one.
inline std::size_t step_count(double T, double dt) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(T / dt)));
}

namespace detail {

inline void check_batch(const std::vector<Wavefunction>& states, std::size_t step) {
  for (std::size_t s = 0; s < states.size(); ++s) {
    const auto& amps = states[s].amplitudes();
    double peak = 0.0;
    for (const auto& a : amps) {
      const double m = std::abs(a);
      if (!std::isfinite(m)) {
        std::ostringstream os;
        os << "propagate: non-finite amplitude in state " << s << " at step " << step;
        throw ConvergenceError(os.str());
      }
      peak = std::max(peak, m);
    }
    const double edge = std::max(std::abs(amps.front()), std::abs(amps.back()));
    if (edge >= kContainmentRatio * peak) {
      std::ostringstream os;
      os << "propagate: state " << s << " reached the grid boundary at step " << step
         << " (edge/peak = " << edge / peak << ")";
      throw GridError(os.str(), GridError::Side::Position);
    }
  }
}

// Edge-to-peak ratio of a spectrum in FFT order; the edges are the slots
// around the Nyquist index n/2.
inline double spectral_edge_ratio(std::span<const complex> spectrum) {
  const std::size_t n = spectrum.size();
  double peak = 0.0;
  for (const auto& a : spectrum) peak = std::max(peak, std::abs(a));
  if (peak == 0.0) return 0.0;
  const double edge = std::max({std::abs(spectrum[n / 2]), std::abs(spectrum[n / 2 - 1]),
                                std::abs(spectrum[(n / 2 + 1) % n])});
  return edge / peak;
}

// psi[j] *= factor[j], written out to avoid the checked complex product.
inline void multiply(std::span<complex> psi, std::span<const complex> factor) {
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const double a = psi[j].real();
    const double b = psi[j].imag();
    const double c = factor[j].real();
    const double d = factor[j].imag();
    psi[j] = complex(a * c - b * d, a * d + b * c);
  }
}

}  // namespace detail

/**
 * Strang split-operator evolution of a batch of states from t = 0 to T:
 *   exp(-i V(t+dt/2) dt/2) exp(-i K dt) exp(-i V(t+dt/2) dt/2)
 * with the kinetic factor applied exactly on the momentum lattice. The
 * potential phase is shared by the batch; each state is otherwise updated
 * independently, so results do not depend on batch composition.
 */
inline Propagation propagate_states(std::vector<Wavefunction> states, const PotentialSchedule& schedule,
                                    const PropagationSettings& settings) {
  if (!(settings.dt > 0.0)) throw InputError("propagate: dt must be positive");
  if (settings.dt > schedule.T()) throw InputError("propagate: dt must not exceed T");
  if (states.empty()) return {};
  const Grid grid = states.front().grid();
  for (const auto& w : states) {
    if (!(w.grid() == grid)) throw InputError("propagate: states live on different grids");
    if (std::abs(w.norm_squared() - 1.0) > 1e-8) throw InputError("propagate: initial state is not normalized");
  }

  const std::size_t n = grid.size();
  const std::size_t steps = step_count(schedule.T(), settings.dt);
  const double dt = schedule.T() / static_cast<double>(steps);

  std::vector<complex> kinetic(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double k = grid.k_fft_order(j);
    kinetic[j] = std::polar(1.0 / static_cast<double>(n), -0.5 * k * k * dt);
  }

  Propagation out;
  out.steps = steps;
  out.dt = dt;
  if (settings.store_trajectory) out.trajectories.resize(states.size());

  std::vector<double> potential(n);
  std::vector<complex> phase(n);
  const bool frozen = schedule.is_static();
  const std::size_t interval = std::max<std::size_t>(1, settings.check_interval);

  for (std::size_t step = 0; step < steps; ++step) {
    if (!frozen || step == 0) {
      const double t_mid = (static_cast<double>(step) + 0.5) * dt;
      schedule.evaluate_into(grid, t_mid, potential);
      for (std::size_t j = 0; j < n; ++j) phase[j] = std::polar(1.0, -0.5 * potential[j] * dt);
    }
    const bool check = (step + 1) % interval == 0 || step + 1 == steps;
    for (std::size_t s = 0; s < states.size(); ++s) {
      auto& psi = states[s].amplitudes();
      detail::multiply(psi, phase);
      detail::fft_forward(psi);
      if (check) {
        const double ratio = detail::spectral_edge_ratio(psi);
        if (ratio >= kContainmentRatio) {
          std::ostringstream os;
          os << "propagate: state " << s << " reached the momentum cutoff at step " << step + 1
             << " (edge/peak = " << ratio << ")";
          throw GridError(os.str(), GridError::Side::Momentum);
        }
      }
      detail::multiply(psi, kinetic);
      detail::fft_backward(psi);
      detail::multiply(psi, phase);
      if (settings.store_trajectory) {
        auto& tr = out.trajectories[s];
        tr.times.push_back(static_cast<double>(step + 1) * dt);
        tr.norms.push_back(states[s].norm());
        tr.mean_positions.push_back(states[s].mean_position());
      }
    }
    if (check) detail::check_batch(states, step + 1);
  }
  out.states = std::move(states);
  return out;
}

/// Single state evolved to t = T.
inline Wavefunction propagate(const Wavefunction& initial, const PotentialSchedule& schedule,
                              const PropagationSettings& settings) {
  return std::move(propagate_states({initial}, schedule, settings).states.front());
}

/// The `count` lowest states of `basis` evolved to t = T.
inline std::vector<Wavefunction> propagate_basis(const EigenBasis& basis, std::size_t count,
                                                 const PotentialSchedule& schedule,
                                                 const PropagationSettings& settings) {
  if (count > basis.size()) throw InputError("propagate_basis: count exceeds basis size");
  std::vector<Wavefunction> init(basis.states.begin(), basis.states.begin() + static_cast<std::ptrdiff_t>(count));
  return std::move(propagate_states(std::move(init), schedule, settings).states);
}

/**
 * Default lattice for a task, in units of the trap length d:
 *   expansion  [-40 d_f, 40 d_f], 2048 points, d_f the smaller of the
 *              harmonic and quartic lengths of the final trap;
 *   transport  [x0_i - 15, x0_f + 15], 8192 points;
 *   splitting  [-12, 12], 2048 points.
 * `n_points` overrides the point count when nonzero.
 */
inline Grid default_grid(const PotentialSchedule& schedule, std::size_t n_points = 0) {
  return std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ExpansionParams>) {
          const double w = std::min(p.omega_i, p.omega_f);
          double d_f = 1.0 / std::sqrt(w);
          if (schedule.lambda() > 0.0) {
            d_f = std::min(d_f, std::pow(1.0 / (w * w * schedule.lambda()), 1.0 / 6.0));
          }
          return Grid::symmetric(40.0 * d_f, n_points ? n_points : 2048);
        } else if constexpr (std::is_same_v<P, TransportParams>) {
          const double d = 1.0 / std::sqrt(p.omega);
          const double lo = std::min(p.x0_i, p.x0_f) - 15.0 * d;
          const double hi = std::max(p.x0_i, p.x0_f) + 15.0 * d;
          return Grid(lo, hi, n_points ? n_points : 8192);
        } else {
          return Grid::symmetric(12.0 / std::sqrt(p.omega), n_points ? n_points : 2048);
        }
      },
      schedule.params());
}

/// Grid enlarged after a containment failure: twice the span about the same
/// centre for position leaks, twice the resolution for momentum leaks.
inline Grid enlarged(const Grid& g, GridError::Side side) {
  if (side == GridError::Side::Momentum) return Grid(g.x_min(), g.x_max(), 2 * g.size());
  const double c = g.center();
  const double half = 0.5 * (g.x_max() - g.x_min());
  return Grid(c - 2.0 * half, c + 2.0 * half, 2 * g.size());
}

}  // namespace pauli

#endif  // PAULI_PROPAGATOR_HPP
