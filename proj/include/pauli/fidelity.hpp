#ifndef PAULI_FIDELITY_HPP
#define PAULI_FIDELITY_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <sstream>
#include <string_view>
#include <vector>

#include "pauli/errors.hpp"
#include "pauli/grid.hpp"
#include "pauli/potentials.hpp"
#include "pauli/propagator.hpp"
#include "pauli/spectral.hpp"

namespace pauli {

/**
 * A[j][i] = <psi_j(T)|phi_i>: rows are the N evolved occupied states, columns
 * the N_p protected target states. Rows and columns are both slices of
 * orthonormal families, so every singular value is at most one.
 */
class OverlapMatrix {
 public:
  OverlapMatrix() = default;

  explicit OverlapMatrix(Eigen::MatrixXcd entries) : entries_(std::move(entries)) {
    if (entries_.cols() > entries_.rows()) {
      throw InputError("overlap matrix: N_p exceeds N");
    }
    for (Eigen::Index c = 0; c < entries_.cols(); ++c) {
      if (entries_.col(c).norm() > 1.0 + 1e-8) {
        throw InputError("overlap matrix: column " + std::to_string(c) + " has norm above one");
      }
    }
    if (entries_.cols() > 0) {
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(entries_);
      if (svd.singularValues()(0) > 1.0 + 1e-8) {
        throw InputError("overlap matrix: singular value above one");
      }
    }
  }

  const Eigen::MatrixXcd& entries() const noexcept { return entries_; }
  std::size_t n_total() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
  std::size_t n_protected() const noexcept { return static_cast<std::size_t>(entries_.cols()); }
  std::size_t n_buffer() const noexcept { return n_total() - n_protected(); }

 private:
  Eigen::MatrixXcd entries_;
};

enum class FidelityMethod { Oracle, GramDeterminant };

inline std::string_view to_string(FidelityMethod m) {
  return m == FidelityMethod::Oracle ? "oracle" : "gram";
}

struct FidelityResult {
  double value = 0.0;
  FidelityMethod method = FidelityMethod::GramDeterminant;
  std::size_t n_total = 0;
  std::size_t n_protected = 0;
  std::size_t n_buffer = 0;
};

/// Largest sizes accepted by fidelity_oracle.
inline constexpr std::size_t kOracleMaxTotal = 12;
inline constexpr std::size_t kOracleMaxProtected = 6;

/**
 * Sum over every N_p-subset U of the rows (ascending) and every permutation
 * sigma of the protected labels:
 *   F = sum_U | sum_sigma sgn(sigma) prod_i A[U(sigma(i))][i] |^2.
 * Exponential cost; kept as the reference for fidelity_fast.
 */
inline FidelityResult fidelity_oracle(const OverlapMatrix& overlaps) {
  const std::size_t n = overlaps.n_total();
  const std::size_t np = overlaps.n_protected();
  if (n > kOracleMaxTotal || np > kOracleMaxProtected) {
    std::ostringstream os;
    os << "fidelity_oracle: N = " << n << ", N_p = " << np << " exceeds the enumeration limit (N <= "
       << kOracleMaxTotal << ", N_p <= " << kOracleMaxProtected << "); use the Gram determinant path";
    throw InputError(os.str());
  }
  FidelityResult r{1.0, FidelityMethod::Oracle, n, np, n - np};
  if (np == 0) return r;
  const auto& a = overlaps.entries();

  std::vector<std::size_t> perm(np);
  double total = 0.0;
  // Subsets as selection masks in lexicographic order.
  std::vector<bool> mask(n, false);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(np), true);
  std::vector<std::size_t> subset(np);
  do {
    for (std::size_t j = 0, c = 0; j < n; ++j) {
      if (mask[j]) subset[c++] = j;
    }
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    complex amp = 0.0;
    do {
      std::size_t inversions = 0;
      for (std::size_t p = 0; p < np; ++p) {
        for (std::size_t q = p + 1; q < np; ++q) inversions += perm[p] > perm[q];
      }
      complex term = inversions % 2 ? -1.0 : 1.0;
      for (std::size_t i = 0; i < np; ++i) {
        term *= a(static_cast<Eigen::Index>(subset[perm[i]]), static_cast<Eigen::Index>(i));
      }
      amp += term;
    } while (std::next_permutation(perm.begin(), perm.end()));
    total += std::norm(amp);
  } while (std::prev_permutation(mask.begin(), mask.end()));
  r.value = total;
  return r;
}

/**
 * det(A^H A), equal to the subset sum by the Cauchy-Binet identity, via a
 * pivoted LDL^T factorization of the N_p x N_p Gram matrix.
 */
inline FidelityResult fidelity_fast(const OverlapMatrix& overlaps) {
  const std::size_t n = overlaps.n_total();
  const std::size_t np = overlaps.n_protected();
  FidelityResult r{1.0, FidelityMethod::GramDeterminant, n, np, n - np};
  if (np == 0) return r;
  const auto& a = overlaps.entries();
  const Eigen::MatrixXcd gram = a.adjoint() * a;
  const Eigen::LDLT<Eigen::MatrixXcd> ldlt(gram);
  complex det = 1.0;
  const auto d = ldlt.vectorD();
  for (Eigen::Index i = 0; i < d.size(); ++i) det *= d(i);
  if (std::abs(det.imag()) > 1e-12) {
    throw ConvergenceError("fidelity_fast: Gram determinant has imaginary residue " +
                           std::to_string(det.imag()));
  }
  const double value = det.real();
  if (value < -1e-10 || value > 1.0 + 1e-10) {
    std::ostringstream os;
    os << "fidelity_fast: Gram determinant " << value << " outside [0, 1]";
    throw ConvergenceError(os.str());
  }
  r.value = std::clamp(value, 0.0, 1.0);
  return r;
}

/// Overlap matrix built from the given rows of a larger master matrix and
/// its first `n_protected` columns.
inline OverlapMatrix select_overlaps(const Eigen::MatrixXcd& master, std::span<const std::size_t> rows,
                                     std::size_t n_protected) {
  if (n_protected > static_cast<std::size_t>(master.cols())) {
    throw InputError("select_overlaps: not enough target states");
  }
  Eigen::MatrixXcd a(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_protected));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= static_cast<std::size_t>(master.rows())) {
      throw InputError("select_overlaps: row index beyond the evolved levels");
    }
    a.row(static_cast<Eigen::Index>(r)) =
        master.row(static_cast<Eigen::Index>(rows[r])).head(static_cast<Eigen::Index>(n_protected));
  }
  return OverlapMatrix(std::move(a));
}

/// Master overlap matrix <evolved_j|target_i>.
inline Eigen::MatrixXcd overlap_table(std::span<const Wavefunction> evolved, std::span<const Wavefunction> targets) {
  Eigen::MatrixXcd m(static_cast<Eigen::Index>(evolved.size()), static_cast<Eigen::Index>(targets.size()));
  for (std::size_t j = 0; j < evolved.size(); ++j) {
    for (std::size_t i = 0; i < targets.size(); ++i) {
      m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = inner_product(evolved[j], targets[i]);
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Scenario pipeline.

/// Everything needed to evaluate fidelities for any occupation of the lowest
/// `levels` initial eigenstates: their energies and the overlaps of their
/// evolved versions with the lowest final eigenstates.
struct EvolvedLevels {
  PotentialSchedule schedule;
  Grid grid;
  std::vector<double> initial_energies;
  std::vector<double> final_energies;
  Eigen::MatrixXcd overlaps;  ///< levels x targets
  double dt = 0.0;
  std::size_t steps = 0;
  double dt_check_delta = -1.0;  ///< max overlap change under dt halving, -1 if not checked
  int grid_refinements = 0;

  std::size_t levels() const noexcept { return static_cast<std::size_t>(overlaps.rows()); }
  std::size_t targets() const noexcept { return static_cast<std::size_t>(overlaps.cols()); }

  /// Zero-temperature fidelity with the lowest N_p + N_b levels occupied.
  FidelityResult fidelity(std::size_t n_protected, std::size_t n_buffer, bool use_oracle = false) const {
    std::vector<std::size_t> rows(n_protected + n_buffer);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    const OverlapMatrix a = select_overlaps(overlaps, rows, n_protected);
    if (use_oracle && a.n_total() <= kOracleMaxTotal && a.n_protected() <= kOracleMaxProtected) {
      return fidelity_oracle(a);
    }
    return fidelity_fast(a);
  }
};

struct EvolveOptions {
  bool auto_dt = true;      ///< halve dt until overlaps move by less than settings.tolerance
  bool auto_grid = true;    ///< enlarge the grid on containment failures
  int max_grid_refinements = 3;
  std::size_t n_points = 0; ///< 0: task default
  std::size_t spectrum_levels = 0; ///< initial energies to report, at least `levels`
  std::optional<Grid> grid; ///< explicit lattice, overrides n_points
};

namespace detail {

inline EvolvedLevels evolve_once(const PotentialSchedule& schedule, const Grid& grid, std::size_t levels,
                                 std::size_t targets, const PropagationSettings& settings,
                                 const EigenBasis& initial, const EigenBasis& final_basis) {
  auto prop = propagate_states(
      std::vector<Wavefunction>(initial.states.begin(), initial.states.begin() + static_cast<std::ptrdiff_t>(levels)),
      schedule, settings);
  EvolvedLevels out{schedule, grid, initial.energies, final_basis.energies,
                    overlap_table(prop.states, std::span(final_basis.states).first(targets)),
                    prop.dt, prop.steps};
  return out;
}

}  // namespace detail

/**
 * Solves the t = 0 and t = T traps, evolves the lowest `levels` initial
 * eigenstates and tabulates their overlaps with the lowest `targets` final
 * eigenstates. With auto_dt the step is halved until every overlap changes by
 * less than settings.tolerance; the finer run is returned.
 */
inline EvolvedLevels evolve_levels(const PotentialSchedule& schedule, std::size_t levels, std::size_t targets,
                                   PropagationSettings settings, const EvolveOptions& options = {}) {
  if (levels == 0) throw InputError("evolve_levels: need at least one level");
  Grid grid = options.grid ? *options.grid : default_grid(schedule, options.n_points);
  const std::size_t solve_count = std::max({levels, targets, options.spectrum_levels});
  for (int refinement = 0;; ++refinement) {
    try {
      const EigenBasis initial = solve(schedule, grid, 0.0, solve_count);
      const EigenBasis final_basis = solve(schedule, grid, schedule.T(), std::max<std::size_t>(targets, 1));
      for (std::size_t i = 0; i < levels; ++i) require_contained(initial.states[i], "initial level " + std::to_string(i));
      for (std::size_t i = 0; i < targets; ++i) require_contained(final_basis.states[i], "target " + std::to_string(i));

      EvolvedLevels result = detail::evolve_once(schedule, grid, levels, targets, settings, initial, final_basis);
      if (options.auto_dt) {
        for (int halving = 0;; ++halving) {
          PropagationSettings finer = settings;
          finer.dt = result.dt / 2.0;
          EvolvedLevels refined = detail::evolve_once(schedule, grid, levels, targets, finer, initial, final_basis);
          const double delta = (refined.overlaps - result.overlaps).cwiseAbs().maxCoeff();
          refined.dt_check_delta = delta;
          result = std::move(refined);
          if (delta < settings.tolerance) break;
          if (halving + 1 >= settings.max_dt_halvings) {
            std::ostringstream os;
            os << "evolve_levels: overlaps still change by " << delta << " at dt = " << result.dt;
            throw ConvergenceError(os.str());
          }
        }
      }
      result.grid_refinements = refinement;
      return result;
    } catch (const GridError& e) {
      if (!options.auto_grid || options.grid || refinement >= options.max_grid_refinements) throw;
      grid = enlarged(grid, e.side());
    }
  }
}

/**
 * Zero-temperature fidelity of a single scenario: the lowest N_p + N_b
 * eigenstates of the initial trap are evolved and the protected fidelity
 * against the N_p lowest final eigenstates is returned.
 */
inline FidelityResult scenario_fidelity(const PotentialSchedule& schedule, std::size_t n_protected,
                                        std::size_t n_buffer, const PropagationSettings& settings,
                                        const EvolveOptions& options = {}, bool verify_oracle = false) {
  const std::size_t n = n_protected + n_buffer;
  if (n == 0) throw InputError("scenario_fidelity: need N_p + N_b >= 1");
  const EvolvedLevels ev = evolve_levels(schedule, n, n_protected, settings, options);
  return ev.fidelity(n_protected, n_buffer, verify_oracle);
}

}  // namespace pauli

#endif  // PAULI_FIDELITY_HPP
