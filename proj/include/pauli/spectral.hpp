#ifndef PAULI_SPECTRAL_HPP
#define PAULI_SPECTRAL_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

#include "pauli/errors.hpp"
#include "pauli/fft.hpp"
#include "pauli/grid.hpp"
#include "pauli/potentials.hpp"

namespace pauli {

/// Lowest eigenpairs of H = -1/2 d^2/dx^2 + V on a Grid, ascending in energy.
struct EigenBasis {
  Grid grid;
  std::vector<double> energies;
  std::vector<Wavefunction> states;

  std::size_t size() const noexcept { return energies.size(); }
};

/// Apply H = T + V on the periodic lattice, with T exact in momentum space.
inline std::vector<complex> apply_hamiltonian(const Wavefunction& w, std::span<const double> potential) {
  const Grid& g = w.grid();
  const std::size_t n = g.size();
  std::vector<complex> buf(w.amplitudes());
  detail::fft_forward(buf);
  for (std::size_t j = 0; j < n; ++j) {
    const double k = g.k_fft_order(j);
    buf[j] *= 0.5 * k * k / static_cast<double>(n);
  }
  detail::fft_backward(buf);
  for (std::size_t j = 0; j < n; ++j) buf[j] += potential[j] * w[j];
  return buf;
}

/// ||H phi - E phi|| with the dx-weighted norm.
inline double eigen_residual(const Wavefunction& phi, double energy, std::span<const double> potential) {
  auto hphi = apply_hamiltonian(phi, potential);
  double s = 0.0;
  for (std::size_t j = 0; j < hphi.size(); ++j) s += std::norm(hphi[j] - energy * phi[j]);
  return std::sqrt(s * phi.grid().dx());
}

/// Re <phi|P phi> with P: x -> -x.
inline double parity(const Wavefunction& phi) {
  return inner_product(phi, reflect(phi)).real();
}

namespace detail {

// Largest-magnitude amplitude made real and positive; near ties (relative
// 1e-9) go to the lowest grid index.
inline void fix_phase(Wavefunction& w) {
  double peak = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) peak = std::max(peak, std::abs(w[j]));
  if (peak == 0.0) return;
  std::size_t pick = 0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (std::abs(w[j]) >= peak * (1.0 - 1e-9)) {
      pick = j;
      break;
    }
  }
  const complex a = w[pick];
  w.scale(std::conj(a) / std::abs(a));
}

// First row of the periodic Fourier-grid kinetic matrix on `m` points.
inline std::vector<double> kinetic_row(std::size_t m, double dx) {
  const Grid g(0.0, dx * static_cast<double>(m), m);
  std::vector<complex> buf(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double k = g.k_fft_order(j);
    buf[j] = 0.5 * k * k / static_cast<double>(m);
  }
  fft_backward(buf);
  std::vector<double> row(m);
  for (std::size_t j = 0; j < m; ++j) row[j] = buf[j].real();
  return row;
}

struct WindowSolution {
  std::vector<double> energies;
  std::vector<double> vectors;  // column-major, m x k
  double worst_edge = 0.0;
};

// Eigenvalues of the symmetric tridiagonal (d, e) below `shift`.
inline std::size_t tridiagonal_count(const Eigen::VectorXd& d, const Eigen::VectorXd& e, double shift) {
  std::size_t count = 0;
  double q = 1.0;
  const double tiny = std::numeric_limits<double>::min();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    q = d(i) - shift - (i == 0 ? 0.0 : e(i - 1) * e(i - 1) / q);
    if (std::abs(q) < tiny) q = -tiny;
    if (q < 0.0) ++count;
  }
  return count;
}

// Solves (T - shift) y = b in place for the tridiagonal T by Gaussian
// elimination with partial pivoting. Zero pivots are replaced by a tiny
// value, which is what inverse iteration wants.
inline void tridiagonal_solve(const Eigen::VectorXd& d, const Eigen::VectorXd& e, double shift, Eigen::VectorXd& b) {
  const Eigen::Index n = d.size();
  const double eps = std::numeric_limits<double>::epsilon() * std::max(1.0, d.cwiseAbs().maxCoeff());
  // Row i of the eliminated system: u0[i] x_i + u1[i] x_{i+1} + u2[i] x_{i+2}.
  Eigen::VectorXd u0(n), u1 = Eigen::VectorXd::Zero(n), u2 = Eigen::VectorXd::Zero(n);
  double a = d(0) - shift;
  double c = n > 1 ? e(0) : 0.0;
  double f = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double below = e(i);
    const double below_diag = d(i + 1) - shift;
    const double below_next = i + 2 < n ? e(i + 1) : 0.0;
    if (std::abs(a) >= std::abs(below)) {
      if (a == 0.0) a = eps;
      const double m = below / a;
      u0(i) = a;
      u1(i) = c;
      u2(i) = f;
      b(i + 1) -= m * b(i);
      a = below_diag - m * c;
      c = below_next - m * f;
      f = 0.0;
    } else {
      const double m = a / below;
      u0(i) = below;
      u1(i) = below_diag;
      u2(i) = below_next;
      std::swap(b(i), b(i + 1));
      b(i + 1) -= m * b(i);
      const double na = c - m * below_diag;
      const double nc = f - m * below_next;
      a = na;
      c = nc;
      f = 0.0;
    }
  }
  u0(n - 1) = a == 0.0 ? eps : a;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double r = b(i);
    if (i + 1 < n) r -= u1(i) * b(i + 1);
    if (i + 2 < n) r -= u2(i) * b(i + 2);
    b(i) = r / u0(i);
  }
}

// Lowest k eigenpairs of a symmetric tridiagonal matrix: eigenvalues by
// Sturm bisection, vectors by inverse iteration, reorthogonalized within
// clusters of close eigenvalues.
inline void tridiagonal_lowest(const Eigen::VectorXd& d, const Eigen::VectorXd& e, std::size_t k,
                               std::vector<double>& values, Eigen::MatrixXd& vectors) {
  const Eigen::Index n = d.size();
  double lo = std::numeric_limits<double>::max();
  double hi = std::numeric_limits<double>::lowest();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = (i > 0 ? std::abs(e(i - 1)) : 0.0) + (i + 1 < n ? std::abs(e(i)) : 0.0);
    lo = std::min(lo, d(i) - r);
    hi = std::max(hi, d(i) + r);
  }
  const double norm = std::max(std::abs(lo), std::abs(hi));
  values.assign(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    double a = i == 0 ? lo : values[i - 1];
    double b = hi;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      if (tridiagonal_count(d, e, mid) > i) b = mid;
      else a = mid;
    }
    values[i] = 0.5 * (a + b);
  }

  vectors.resize(n, static_cast<Eigen::Index>(k));
  const double cluster = 1e-3 * norm;
  std::size_t cluster_start = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (i > 0 && values[i] - values[i - 1] > cluster) cluster_start = i;
    Eigen::VectorXd y(n);
    // Deterministic, non-symmetric start vector.
    for (Eigen::Index r = 0; r < n; ++r) y(r) = 1.0 + 0.5 * std::sin(0.7 * static_cast<double>(r) + static_cast<double>(i));
    y.normalize();
    for (int it = 0; it < 6; ++it) {
      tridiagonal_solve(d, e, values[i], y);
      for (std::size_t j = cluster_start; j < i; ++j) {
        const auto col = vectors.col(static_cast<Eigen::Index>(j));
        y -= col.dot(y) * col;
      }
      const double growth = y.norm();
      y /= growth;
      if (it >= 2 && growth * std::numeric_limits<double>::epsilon() * norm > 1e-3) break;
    }
    vectors.col(static_cast<Eigen::Index>(i)) = y;
  }
}

// Lowest k eigenpairs of the periodic Fourier-grid Hamiltonian on the window:
// Householder tridiagonalization, then the selected pairs of the tridiagonal
// matrix mapped back through the Householder reflectors.
inline WindowSolution solve_window(std::span<const double> v, double dx, std::size_t k) {
  const std::size_t m = v.size();
  const auto row = kinetic_row(m, dx);
  const auto mi = static_cast<Eigen::Index>(m);
  Eigen::MatrixXd h(mi, mi);
  for (Eigen::Index c = 0; c < mi; ++c) {
    for (Eigen::Index r = 0; r < mi; ++r) h(r, c) = row[static_cast<std::size_t>(r >= c ? r - c : c - r)];
    h(c, c) += v[static_cast<std::size_t>(c)];
  }
  const Eigen::Tridiagonalization<Eigen::MatrixXd> tri(h);
  const Eigen::VectorXd d = tri.diagonal();
  const Eigen::VectorXd e = tri.subDiagonal();
  WindowSolution out;
  Eigen::MatrixXd y;
  tridiagonal_lowest(d, e, k, out.energies, y);
  const Eigen::MatrixXd z = tri.matrixQ() * y;
  out.vectors.resize(m * k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto col = z.col(static_cast<Eigen::Index>(i));
    double peak = 0.0;
    for (Eigen::Index r = 0; r < mi; ++r) {
      out.vectors[i * m + static_cast<std::size_t>(r)] = col(r);
      peak = std::max(peak, std::abs(col(r)));
    }
    const double edge = std::max(std::abs(col(0)), std::abs(col(mi - 1)));
    out.worst_edge = std::max(out.worst_edge, edge / peak);
  }
  return out;
}

// Midpoint of the index range where V lies within `depth` of its minimum.
inline std::size_t well_center(std::span<const double> v, double depth) {
  const double vmin = *std::min_element(v.begin(), v.end());
  std::size_t first = v.size();
  std::size_t last = 0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (v[j] <= vmin + depth) {
      first = std::min(first, j);
      last = j;
    }
  }
  return (first + last) / 2;
}

inline std::size_t next_pow2(std::size_t x) {
  std::size_t p = 1;
  while (p < x) p <<= 1;
  return p;
}

}  // namespace detail

/**
 * Lowest `count` eigenpairs of the Fourier-grid Hamiltonian on `grid`.
 *
 * The dense matrix is diagonalized on the smallest power-of-two sub-window
 * (same dx, centred on the well) whose eigenvectors vanish at the window
 * edges to 1e-8 min(1, dx^2) of their peak; the window grows up to the full
 * grid. Vectors
 * are then embedded back into the full lattice and checked there: unit norm,
 * mutual orthogonality below 1e-8 and residual below 1e-6 max(|E|, 1).
 */
inline EigenBasis solve(std::span<const double> potential, const Grid& grid, std::size_t count) {
  const std::size_t n = grid.size();
  if (potential.size() != n) throw InputError("solve: potential length does not match grid");
  if (count == 0 || 4 * count >= n) {
    std::ostringstream os;
    os << "solve: need 0 < K < n_points/4, got K = " << count << " with n_points = " << n;
    throw InputError(os.str());
  }
  const double dx = grid.dx();
  const std::size_t center = detail::well_center(potential, 1.0);

  std::size_t window = std::min(n, std::max<std::size_t>(256, detail::next_pow2(8 * count)));
  detail::WindowSolution sol;
  std::size_t offset = 0;
  for (;;) {
    if (window >= n) {
      offset = 0;
    } else {
      const std::size_t half = window / 2;
      offset = center >= half ? center - half : 0;
      offset = std::min(offset, n - window);
    }
    sol = detail::solve_window(potential.subspan(offset, window), dx, count);
    const double tolerance = window >= n ? kContainmentRatio : 1e-8 * std::min(1.0, dx * dx);
    if (sol.worst_edge < tolerance) break;
    if (window >= n) {
      std::ostringstream os;
      os << "solve: eigenstates reach the grid boundary (edge/peak = " << sol.worst_edge
         << "); enlarge the domain";
      throw GridError(os.str(), GridError::Side::Position);
    }
    window *= 2;
  }

  EigenBasis basis{grid, sol.energies, {}};
  basis.states.reserve(count);
  const double inv_sqrt_dx = 1.0 / std::sqrt(dx);
  for (std::size_t i = 0; i < count; ++i) {
    Wavefunction w(grid);
    const double* col = sol.vectors.data() + i * window;
    for (std::size_t r = 0; r < window; ++r) w[offset + r] = col[r] * inv_sqrt_dx;
    detail::fix_phase(w);
    basis.states.push_back(std::move(w));
  }

  // Exactly degenerate pairs: even state first (symmetric grids only).
  if (grid.is_symmetric()) {
    for (std::size_t i = 0; i + 1 < count; ++i) {
      const double scale = std::max(1.0, std::abs(basis.energies[i]));
      if (basis.energies[i + 1] - basis.energies[i] <= 4.0 * std::numeric_limits<double>::epsilon() * scale &&
          parity(basis.states[i]) < 0.0 && parity(basis.states[i + 1]) > 0.0) {
        std::swap(basis.states[i], basis.states[i + 1]);
      }
    }
  }

  for (std::size_t i = 0; i < count; ++i) {
    const double ratio = edge_ratio(to_momentum(basis.states[i]).amplitudes);
    if (ratio >= kContainmentRatio) {
      std::ostringstream os;
      os << "solve: state " << i << " reaches the momentum cutoff (edge/peak = " << ratio
         << "); refine the grid";
      throw GridError(os.str(), GridError::Side::Momentum);
    }
  }

  std::size_t worst = 0;
  double worst_ratio = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double bound = 1e-6 * std::max(std::abs(basis.energies[i]), 1.0);
    const double ratio = eigen_residual(basis.states[i], basis.energies[i], potential) / bound;
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      worst = i;
    }
  }
  if (worst_ratio >= 1.0) {
    std::ostringstream os;
    os << "solve: residual bound exceeded, worst at state index " << worst << " (residual/bound = "
       << worst_ratio << ")";
    throw ConvergenceError(os.str());
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (std::abs(basis.states[i].norm_squared() - 1.0) > 1e-8) {
      throw ConvergenceError("solve: state " + std::to_string(i) + " is not normalized");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (std::abs(inner_product(basis.states[j], basis.states[i])) >= 1e-8) {
        throw ConvergenceError("solve: states " + std::to_string(j) + " and " + std::to_string(i) +
                               " are not orthogonal");
      }
    }
  }
  return basis;
}

inline EigenBasis solve(const PotentialSchedule& schedule, const Grid& grid, double t, std::size_t count) {
  const auto v = schedule.evaluate(grid, t);
  return solve(v, grid, count);
}

// ---------------------------------------------------------------------------
// Finite-difference oracle: 3-point Laplacian with Dirichlet walls, energies by
// Sturm-sequence bisection. Independent of the FFT path used by `solve`.

/// Number of eigenvalues of the tridiagonal matrix (diag, off) below `shift`.
inline std::size_t sturm_count(std::span<const double> diag, double off, double shift) {
  std::size_t count = 0;
  double q = 1.0;
  const double off2 = off * off;
  for (std::size_t i = 0; i < diag.size(); ++i) {
    q = diag[i] - shift - (i == 0 ? 0.0 : off2 / q);
    if (q == 0.0) q = -std::numeric_limits<double>::epsilon() * (std::abs(diag[i]) + std::abs(off));
    if (q < 0.0) ++count;
  }
  return count;
}

/// Lowest `count` eigenvalues of -1/2 psi'' + V psi on (x_min, x_max), step h.
inline std::vector<double> finite_difference_energies(const std::function<double(double)>& potential,
                                                      double x_min, double x_max, double h,
                                                      std::size_t count) {
  const auto interior = static_cast<std::size_t>(std::llround((x_max - x_min) / h)) - 1;
  if (interior < 4 * count) throw InputError("finite_difference_energies: grid too coarse");
  std::vector<double> diag(interior);
  double lo = std::numeric_limits<double>::max();
  double hi = std::numeric_limits<double>::lowest();
  const double off = -0.5 / (h * h);
  for (std::size_t i = 0; i < interior; ++i) {
    diag[i] = 1.0 / (h * h) + potential(x_min + static_cast<double>(i + 1) * h);
    lo = std::min(lo, diag[i] - 2.0 * std::abs(off));
    hi = std::max(hi, diag[i] + 2.0 * std::abs(off));
  }
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    double a = i == 0 ? lo : out[i - 1];
    double b = hi;
    // Tighten the upper bracket before the main bisection.
    for (double probe = std::max(a, 0.0) + 1.0; probe < b; probe = 2.0 * probe + 1.0) {
      if (sturm_count(diag, off, probe) > i) {
        b = probe;
        break;
      }
    }
    for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::abs(b)); ++it) {
      const double mid = 0.5 * (a + b);
      if (sturm_count(diag, off, mid) > i) b = mid;
      else a = mid;
    }
    out[i] = 0.5 * (a + b);
  }
  return out;
}

/// Richardson extrapolation of the O(h^2) finite-difference energies.
inline std::vector<double> finite_difference_energies_extrapolated(
    const std::function<double(double)>& potential, double x_min, double x_max, double h,
    std::size_t count) {
  const auto coarse = finite_difference_energies(potential, x_min, x_max, h, count);
  const auto fine = finite_difference_energies(potential, x_min, x_max, 0.5 * h, count);
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = (4.0 * fine[i] - coarse[i]) / 3.0;
  return out;
}

// ---------------------------------------------------------------------------

/// Solves on `grid`, doubling the domain or the resolution until every state
/// is contained in position and momentum space.
inline EigenBasis solve_contained(const std::function<double(double)>& potential, Grid grid,
                                  std::size_t count, int max_refinements = 6) {
  for (int attempt = 0;; ++attempt) {
    try {
      std::vector<double> v(grid.size());
      for (std::size_t j = 0; j < grid.size(); ++j) v[j] = potential(grid.x(j));
      EigenBasis basis = solve(v, grid, count);
      for (std::size_t i = 0; i < count; ++i) {
        require_contained(basis.states[i], "solve_contained");
      }
      return basis;
    } catch (const GridError& e) {
      if (attempt >= max_refinements) throw;
      const double half = 0.5 * (grid.x_max() - grid.x_min());
      if (e.side() == GridError::Side::Position) {
        grid = Grid(grid.center() - 2.0 * half, grid.center() + 2.0 * half, 2 * grid.size());
      } else {
        grid = Grid(grid.x_min(), grid.x_max(), 2 * grid.size());
      }
    }
  }
}

/// Delta E(N) = E_{N+1} - E_N for V = (x^2 + lambda x^4)/2 (omega_i = 1).
struct GapPoint {
  std::size_t N;
  double delta_e;
};

inline std::vector<GapPoint> fermi_gap_profile(double lambda, std::size_t n_max,
                                               const Grid& initial_grid = Grid::symmetric(12.0, 1024)) {
  if (!(lambda >= 0.0)) throw InputError("fermi_gap_profile: lambda must be >= 0");
  if (n_max < 1) throw InputError("fermi_gap_profile: N_max must be >= 1");
  const auto v = [lambda](double x) { return 0.5 * (x * x + lambda * x * x * x * x); };
  const EigenBasis basis = solve_contained(v, initial_grid, n_max + 1);
  std::vector<GapPoint> out;
  out.reserve(n_max);
  for (std::size_t n = 1; n <= n_max; ++n) {
    out.push_back({n, basis.energies[n] - basis.energies[n - 1]});
  }
  return out;
}

}  // namespace pauli

#endif  // PAULI_SPECTRAL_HPP
