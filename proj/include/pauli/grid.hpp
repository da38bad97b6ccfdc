#ifndef PAULI_GRID_HPP
#define PAULI_GRID_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "pauli/errors.hpp"
#include "pauli/fft.hpp"

namespace pauli {

using complex = std::complex<double>;

/// Relative amplitude allowed at the edges of the position or momentum grid.
inline constexpr double kContainmentRatio = 1e-6;

/**
 * Uniform periodic lattice x_j = x_min + j*dx, j = 0..n-1, with
 * dx = (x_max - x_min)/n. The companion momentum lattice has spacing
 * dk = 2*pi/(n*dx) and spans [-pi/dx, pi/dx).
 */
class Grid {
 public:
  Grid(double x_min, double x_max, std::size_t n_points)
      : x_min_(x_min), x_max_(x_max), n_(n_points) {
    if (!(x_max > x_min)) throw InputError("grid: x_max must exceed x_min");
    if (n_points < 2 || (n_points & (n_points - 1)) != 0) {
      throw InputError("grid: n_points must be a power of two >= 2, got " +
                       std::to_string(n_points));
    }
  }

  /// Lattice [-half_width, half_width).
  static Grid symmetric(double half_width, std::size_t n_points) {
    return Grid(-half_width, half_width, n_points);
  }

  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  std::size_t size() const noexcept { return n_; }
  double dx() const noexcept { return (x_max_ - x_min_) / static_cast<double>(n_); }
  double dk() const noexcept { return 2.0 * std::numbers::pi / (x_max_ - x_min_); }
  double x(std::size_t j) const noexcept { return x_min_ + static_cast<double>(j) * dx(); }
  double center() const noexcept { return 0.5 * (x_min_ + x_max_); }
  double k_max() const noexcept { return std::numbers::pi / dx(); }

  /// Momentum of ascending index m: (m - n/2) * dk.
  double k(std::size_t m) const noexcept {
    return (static_cast<double>(m) - static_cast<double>(n_ / 2)) * dk();
  }

  /// Momentum belonging to slot j of an unshifted DFT output.
  double k_fft_order(std::size_t j) const noexcept {
    const auto n = static_cast<double>(n_);
    const auto jj = static_cast<double>(j);
    return (j < n_ / 2 ? jj : jj - n) * dk();
  }

  std::vector<double> x_values() const {
    std::vector<double> out(n_);
    for (std::size_t j = 0; j < n_; ++j) out[j] = x(j);
    return out;
  }

  std::vector<double> k_values() const {
    std::vector<double> out(n_);
    for (std::size_t m = 0; m < n_; ++m) out[m] = k(m);
    return out;
  }

  /// True when x -> -x maps the lattice onto itself (j -> n - j mod n).
  bool is_symmetric() const noexcept { return x_min_ == -x_max_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  double x_min_;
  double x_max_;
  std::size_t n_;
};

/// Complex amplitudes on a Grid, normalized with the measure dx.
class Wavefunction {
 public:
  explicit Wavefunction(Grid grid) : grid_(grid), amplitudes_(grid.size()) {}

  Wavefunction(Grid grid, std::vector<complex> amplitudes)
      : grid_(grid), amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() != grid_.size()) {
      throw InputError("wavefunction: amplitude count does not match grid");
    }
  }

  /// Samples `f` on the lattice. The result is not normalized.
  static Wavefunction sample(Grid grid, const std::function<complex(double)>& f) {
    Wavefunction w(grid);
    for (std::size_t j = 0; j < grid.size(); ++j) w.amplitudes_[j] = f(grid.x(j));
    return w;
  }

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return amplitudes_.size(); }
  std::vector<complex>& amplitudes() noexcept { return amplitudes_; }
  const std::vector<complex>& amplitudes() const noexcept { return amplitudes_; }
  complex& operator[](std::size_t j) { return amplitudes_[j]; }
  const complex& operator[](std::size_t j) const { return amplitudes_[j]; }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& a : amplitudes_) s += std::norm(a);
    return s * grid_.dx();
  }
  double norm() const { return std::sqrt(norm_squared()); }

  Wavefunction& normalize() {
    const double n = norm();
    if (!(n > 0.0)) throw InputError("wavefunction: cannot normalize a zero state");
    for (auto& a : amplitudes_) a /= n;
    return *this;
  }

  Wavefunction& scale(complex c) {
    for (auto& a : amplitudes_) a *= c;
    return *this;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& a : amplitudes_) m = std::max(m, std::abs(a));
    return m;
  }

  /// <x> = sum x |psi|^2 dx, for a normalized state.
  double mean_position() const {
    double s = 0.0;
    for (std::size_t j = 0; j < size(); ++j) s += grid_.x(j) * std::norm(amplitudes_[j]);
    return s * grid_.dx();
  }

 private:
  Grid grid_;
  std::vector<complex> amplitudes_;
};

/// Amplitudes on the ascending momentum lattice, normalized with measure dk.
struct MomentumWavefunction {
  Grid grid;
  std::vector<complex> amplitudes;

  double norm_squared() const {
    double s = 0.0;
    for (const auto& a : amplitudes) s += std::norm(a);
    return s * grid.dk();
  }
};

/// <a|b> = sum conj(a) b dx.
inline complex inner_product(const Wavefunction& a, const Wavefunction& b) {
  if (!(a.grid() == b.grid())) throw InputError("inner_product: grid mismatch");
  const auto& va = a.amplitudes();
  const auto& vb = b.amplitudes();
  double re = 0.0;
  double im = 0.0;
  for (std::size_t j = 0; j < va.size(); ++j) {
    // conj(a) * b expanded to avoid temporaries in the hot loop
    re += va[j].real() * vb[j].real() + va[j].imag() * vb[j].imag();
    im += va[j].real() * vb[j].imag() - va[j].imag() * vb[j].real();
  }
  return complex(re, im) * a.grid().dx();
}

/**
 * Discrete approximation of the continuous transform
 * phi(k) = (2 pi)^{-1/2} int exp(-i k x) psi(x) dx,
 * sampled on the ascending momentum lattice. Parseval holds exactly:
 * sum |phi|^2 dk = sum |psi|^2 dx.
 */
inline MomentumWavefunction to_momentum(const Wavefunction& w) {
  const Grid& g = w.grid();
  const std::size_t n = g.size();
  std::vector<complex> buf(w.amplitudes());
  // (-1)^j shifts the DFT output so slot m carries k_m = (m - n/2) dk.
  for (std::size_t j = 1; j < n; j += 2) buf[j] = -buf[j];
  detail::fft_forward(buf);
  const double scale = g.dx() / std::sqrt(2.0 * std::numbers::pi);
  for (std::size_t m = 0; m < n; ++m) {
    buf[m] *= std::polar(scale, -g.k(m) * g.x_min());
  }
  return {g, std::move(buf)};
}

/// Exact inverse of to_momentum.
inline Wavefunction to_position(const MomentumWavefunction& p) {
  const Grid& g = p.grid;
  const std::size_t n = g.size();
  std::vector<complex> buf(p.amplitudes);
  if (buf.size() != n) throw InputError("to_position: amplitude count does not match grid");
  const double scale = std::sqrt(2.0 * std::numbers::pi) / (g.dx() * static_cast<double>(n));
  for (std::size_t m = 0; m < n; ++m) {
    buf[m] *= std::polar(scale, g.k(m) * g.x_min());
  }
  detail::fft_backward(buf);
  for (std::size_t j = 1; j < n; j += 2) buf[j] = -buf[j];
  return Wavefunction(g, std::move(buf));
}

/// Edge-to-peak amplitude ratios in position and momentum space.
struct Containment {
  double position_ratio = 0.0;
  double momentum_ratio = 0.0;

  bool position_ok() const noexcept { return position_ratio < kContainmentRatio; }
  bool momentum_ok() const noexcept { return momentum_ratio < kContainmentRatio; }
  bool ok() const noexcept { return position_ok() && momentum_ok(); }
};

inline double edge_ratio(const std::vector<complex>& v) {
  double peak = 0.0;
  for (const auto& a : v) peak = std::max(peak, std::abs(a));
  if (peak == 0.0) return 0.0;
  return std::max(std::abs(v.front()), std::abs(v.back())) / peak;
}

inline Containment containment(const Wavefunction& w) {
  return {edge_ratio(w.amplitudes()), edge_ratio(to_momentum(w).amplitudes)};
}

/// Throws GridError naming `what` if `w` leaks onto the edges of either lattice.
inline void require_contained(const Wavefunction& w, const std::string& what) {
  const Containment c = containment(w);
  if (!c.position_ok()) {
    std::ostringstream os;
    os << what << ": state reaches the grid boundary (edge/peak = " << c.position_ratio
       << "); enlarge the domain";
    throw GridError(os.str(), GridError::Side::Position);
  }
  if (!c.momentum_ok()) {
    std::ostringstream os;
    os << what << ": state reaches the momentum cutoff (edge/peak = " << c.momentum_ratio
       << "); refine the grid";
    throw GridError(os.str(), GridError::Side::Momentum);
  }
}

/// Parity image x -> -x. Requires a symmetric grid.
inline Wavefunction reflect(const Wavefunction& w) {
  const Grid& g = w.grid();
  if (!g.is_symmetric()) throw InputError("reflect: grid is not symmetric about x = 0");
  const std::size_t n = g.size();
  Wavefunction out(g);
  for (std::size_t j = 0; j < n; ++j) out[(n - j) % n] = w[j];
  return out;
}

}  // namespace pauli

#endif  // PAULI_GRID_HPP
