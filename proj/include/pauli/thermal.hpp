#ifndef PAULI_THERMAL_HPP
#define PAULI_THERMAL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <vector>

#include "pauli/errors.hpp"
#include "pauli/fidelity.hpp"

namespace pauli {

/// Occupied single-particle levels, zero-based and strictly increasing.
struct OccupationConfig {
  std::vector<std::size_t> levels;
  double excitation_energy = 0.0;  ///< sum_j (E[levels[j]] - E[j])
};

/// Canonical ensemble truncated at excitation energy e_cut.
struct ThermalEnsemble {
  double tau = 0.0;
  std::vector<OccupationConfig> configs;
  std::vector<double> weights;
  double partition_sum = 1.0;  ///< Z over the retained configurations
  double e_cut = 0.0;
  std::size_t max_levels = 0;  ///< levels needed to represent every config
  double omitted_estimate = 0.0;
};

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) comp_ += (sum_ - t) + x;
    else comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

namespace detail {

// Calls visit(levels, excitation) for every N-fermion configuration whose
// excitation energy is at most e_max. Pruning uses the exact minimal
// completion: later particles packed directly above the current one.
inline void for_each_config(std::span<const double> energies, std::size_t n, double e_max, bool complete,
                            const std::function<void(const std::vector<std::size_t>&, double)>& visit) {
  const std::size_t m = energies.size();
  std::vector<std::size_t> levels(n);
  // Lower bound of the added excitation when particles j..n-1 start at `level`.
  const auto completion = [&](std::size_t j, std::size_t level) {
    double s = 0.0;
    for (std::size_t r = j; r < n; ++r) {
      const std::size_t idx = level + (r - j);
      const double e = idx < m ? energies[idx] : energies[m - 1];
      s += e - energies[r];
    }
    return s;
  };
  const auto shortage = [&](std::size_t required) {
    const double spacing = m >= 2 ? std::max(energies[m - 1] - energies[m - 2], 1e-12) : 1.0;
    const double reach = e_max - (energies[m - 1] - energies[n - 1]);
    const auto extra = static_cast<std::size_t>(std::ceil(std::max(reach, 0.0) / spacing)) + 1;
    std::ostringstream os;
    os << "thermal: " << m << " levels do not cover excitations up to " << e_max << "; need at least "
       << std::max(required, m + extra) << " levels";
    throw NeedsMoreLevelsError(os.str(), std::max(required, m + extra));
  };

  std::function<void(std::size_t, std::size_t, double)> recurse = [&](std::size_t j, std::size_t start,
                                                                        double base) {
    if (j == n) {
      visit(levels, base);
      return;
    }
    for (std::size_t level = start;; ++level) {
      const double bound = base + completion(j, level);
      if (bound > e_max * (1.0 + 1e-14) + 1e-14) break;
      if (level + (n - 1 - j) >= m) {
        if (complete) break;
        shortage(level + (n - j) + 1);
      }
      levels[j] = level;
      recurse(j + 1, level + 1, base + energies[level] - energies[j]);
    }
  };
  recurse(0, 0, 0.0);
}

}  // namespace detail

/**
 * Canonical weights p_m = exp(-sum_j (E_m(j) - E_j)/tau)/Z over N-fermion
 * configurations with excitation energy at most e_cut.
 *
 * Excitations are grouped in shells of width w = max(2 tau, E_N+1 - E_N,
 * E_N - E_N-1). The cutoff grows by one shell at a time, starting from
 * tau ln(1/tail_bound), until the last two shells S_prev, S_last are occupied,
 * decay (r = S_last/S_prev < 1), and the geometric tail S_last r/(1 - r) is
 * below tail_bound of the retained weight. Weights are renormalized over the
 * retained set.
 *
 * With `complete_spectrum` the energies are taken as the whole spectrum
 * (a finite level system); otherwise needing levels beyond the supplied
 * ones raises NeedsMoreLevelsError.
 */
inline ThermalEnsemble enumerate_ensemble(std::span<const double> energies, std::size_t n, double tau,
                                          double tail_bound = 1e-6, bool complete_spectrum = false) {
  if (!(tau >= 0.0)) throw InputError("enumerate_ensemble: tau must be >= 0");
  if (n == 0) throw InputError("enumerate_ensemble: need at least one particle");
  if (energies.size() < n) throw InputError("enumerate_ensemble: fewer energies than particles");
  if (!(tail_bound > 0.0 && tail_bound < 1.0)) throw InputError("enumerate_ensemble: tail_bound must be in (0,1)");
  for (std::size_t i = 1; i < energies.size(); ++i) {
    if (energies[i] < energies[i - 1]) throw InputError("enumerate_ensemble: energies must be ascending");
  }

  ThermalEnsemble ens;
  ens.tau = tau;
  if (tau == 0.0) {
    OccupationConfig ground;
    ground.levels.resize(n);
    std::iota(ground.levels.begin(), ground.levels.end(), std::size_t{0});
    ens.configs.push_back(std::move(ground));
    ens.weights = {1.0};
    ens.max_levels = n;
    return ens;
  }

  double width = 2.0 * tau;
  if (n < energies.size()) width = std::max(width, energies[n] - energies[n - 1]);
  if (n >= 2) width = std::max(width, energies[n - 1] - energies[n - 2]);
  const auto first_shell = static_cast<std::size_t>(std::ceil(tau * std::log(1.0 / tail_bound) / width));

  for (std::size_t shells = std::max<std::size_t>(first_shell, 1);; ++shells) {
    const double e_cut = static_cast<double>(shells) * width;
    std::vector<CompensatedSum> shell(shells + 1);
    detail::for_each_config(energies, n, e_cut, complete_spectrum, [&](const std::vector<std::size_t>&, double e) {
      const auto k = std::min(shells, static_cast<std::size_t>(std::ceil(e / width)));
      shell[k].add(std::exp(-e / tau));
    });
    // A finite level system is exhausted once its top configuration is inside.
    bool exhausted = false;
    if (complete_spectrum) {
      double top = 0.0;
      for (std::size_t j = 0; j < n; ++j) top += energies[energies.size() - n + j] - energies[j];
      exhausted = top <= e_cut;
    }
    CompensatedSum kept;
    for (const auto& s : shell) kept.add(s.value());
    const double last = shell[shells].value();
    const double prev = shell[shells - 1].value();
    double omitted = 0.0;
    // Beyond e_cut every Boltzmann factor underflows, so nothing is omitted.
    if (std::exp(-e_cut / tau) == 0.0) exhausted = true;
    if (!exhausted) {
      if (last <= 0.0 || prev <= 0.0 || last >= prev) continue;
      const double r = last / prev;
      omitted = last * r / (1.0 - r);
    }
    if (omitted < tail_bound * kept.value()) {
      ens.e_cut = e_cut;
      ens.omitted_estimate = omitted / kept.value();
      break;
    }
  }

  detail::for_each_config(energies, n, ens.e_cut, complete_spectrum, [&](const std::vector<std::size_t>& levels, double e) {
    ens.configs.push_back({levels, e});
  });
  // Deterministic order: by excitation, then lexicographically.
  std::sort(ens.configs.begin(), ens.configs.end(), [](const OccupationConfig& a, const OccupationConfig& b) {
    if (a.excitation_energy != b.excitation_energy) return a.excitation_energy < b.excitation_energy;
    return a.levels < b.levels;
  });
  CompensatedSum z;
  ens.weights.reserve(ens.configs.size());
  for (const auto& c : ens.configs) {
    ens.weights.push_back(std::exp(-c.excitation_energy / tau));
    z.add(ens.weights.back());
    ens.max_levels = std::max(ens.max_levels, c.levels.back() + 1);
  }
  ens.partition_sum = z.value();
  for (auto& w : ens.weights) w /= ens.partition_sum;
  return ens;
}

/// Ensemble average sum_m p_m F_m from an existing evolution.
struct ThermalFidelity {
  FidelityResult result;
  ThermalEnsemble ensemble;
  double min_config_fidelity = 1.0;
  double max_config_fidelity = 0.0;
};

inline ThermalFidelity ensemble_fidelity(const EvolvedLevels& ev, std::size_t n_protected, std::size_t n_buffer,
                                         double tau, double tail_bound = 1e-6) {
  const std::size_t n = n_protected + n_buffer;
  if (n == 0) throw InputError("thermal fidelity: need N_p + N_b >= 1");
  ThermalFidelity out;
  out.ensemble = enumerate_ensemble(ev.initial_energies, n, tau, tail_bound);
  if (out.ensemble.max_levels > ev.levels()) {
    std::ostringstream os;
    os << "thermal fidelity: ensemble reaches level " << out.ensemble.max_levels << " but only " << ev.levels()
       << " levels were evolved";
    throw NeedsMoreLevelsError(os.str(), out.ensemble.max_levels);
  }
  CompensatedSum f;
  for (std::size_t c = 0; c < out.ensemble.configs.size(); ++c) {
    const OverlapMatrix a = select_overlaps(ev.overlaps, out.ensemble.configs[c].levels, n_protected);
    const double fm = fidelity_fast(a).value;
    out.min_config_fidelity = std::min(out.min_config_fidelity, fm);
    out.max_config_fidelity = std::max(out.max_config_fidelity, fm);
    f.add(out.ensemble.weights[c] * fm);
  }
  out.result = {std::clamp(f.value(), 0.0, 1.0), FidelityMethod::GramDeterminant, n, n_protected, n_buffer};
  return out;
}

/**
 * Number of initial levels that must be evolved so that ensembles for N
 * particles at every temperature up to tau_max are representable, together
 * with the number of initial energies needed to plan them.
 */
struct ThermalPlan {
  std::size_t levels = 0;
  std::size_t spectrum = 0;
};

inline ThermalPlan plan_thermal_levels(const PotentialSchedule& schedule, std::size_t n, double tau_max,
                                       double tail_bound, const EvolveOptions& options = {}) {
  if (tau_max == 0.0) return {n, n};
  Grid grid = options.grid ? *options.grid : default_grid(schedule, options.n_points);
  std::size_t spectrum = n + 16;
  for (int attempt = 0; attempt < 12; ++attempt) {
    try {
      if (4 * spectrum >= grid.size()) grid = Grid(grid.x_min(), grid.x_max(), 2 * grid.size());
      const EigenBasis basis = solve(schedule, grid, 0.0, spectrum);
      const ThermalEnsemble ens = enumerate_ensemble(basis.energies, n, tau_max, tail_bound);
      // One spare level absorbs cutoff shifts between this grid and the evolution grid.
      return {ens.max_levels + 1, std::max(spectrum, ens.max_levels + 1)};
    } catch (const NeedsMoreLevelsError& e) {
      spectrum = std::max(spectrum + 8, e.required_levels() + 4);
    } catch (const GridError& e) {
      if (options.grid) throw;
      grid = enlarged(grid, e.side());
    }
  }
  throw ConvergenceError("thermal: could not determine the number of levels to evolve");
}

/// Evolution sized for thermal averages up to tau_max.
inline EvolvedLevels evolve_for_temperature(const PotentialSchedule& schedule, std::size_t n_protected,
                                            std::size_t n_max, double tau_max, double tail_bound,
                                            const PropagationSettings& settings, EvolveOptions options = {}) {
  const ThermalPlan plan = plan_thermal_levels(schedule, n_max, tau_max, tail_bound, options);
  options.spectrum_levels = std::max(options.spectrum_levels, plan.spectrum);
  return evolve_levels(schedule, plan.levels, n_protected, settings, options);
}

/// Finite-temperature protected fidelity sum_m p_m F_m of a scenario.
inline FidelityResult thermal_fidelity(const PotentialSchedule& schedule, std::size_t n_protected,
                                       std::size_t n_buffer, double tau, const PropagationSettings& settings,
                                       const EvolveOptions& options = {}, double tail_bound = 1e-6) {
  const std::size_t n = n_protected + n_buffer;
  if (n == 0) throw InputError("thermal_fidelity: need N_p + N_b >= 1");
  const EvolvedLevels ev = evolve_for_temperature(schedule, n_protected, n, tau, tail_bound, settings, options);
  return ensemble_fidelity(ev, n_protected, n_buffer, tau, tail_bound).result;
}

}  // namespace pauli

#endif  // PAULI_THERMAL_HPP
