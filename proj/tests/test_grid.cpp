#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pauli/grid.hpp"
#include "pauli/potentials.hpp"
#include "pauli/spectral.hpp"

using namespace pauli;

namespace {

Wavefunction gaussian(const Grid& g, double center, double width, double k0 = 0.0) {
  auto w = Wavefunction::sample(g, [&](double x) {
    const double u = (x - center) / width;
    return std::exp(-0.5 * u * u) * std::polar(1.0, k0 * x);
  });
  w.normalize();
  return w;
}

Wavefunction random_state(const Grid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Wavefunction w(g);
  for (std::size_t j = 0; j < g.size(); ++j) w[j] = complex(n01(rng), n01(rng));
  w.normalize();
  return w;
}

}  // namespace

TEST(Grid, RejectsNonPowerOfTwo) {
  EXPECT_THROW(Grid(-1.0, 1.0, 1000), InputError);
  EXPECT_THROW(Grid(1.0, -1.0, 1024), InputError);
  EXPECT_NO_THROW(Grid(-1.0, 1.0, 1024));
}

TEST(Grid, SpacingAndMomentumLattice) {
  const Grid g(-10.0, 30.0, 256);
  EXPECT_DOUBLE_EQ(g.dx(), 40.0 / 256);
  EXPECT_NEAR(g.k(0), -std::numbers::pi / g.dx(), 1e-12);
  EXPECT_NEAR(g.k(255) + g.dk(), std::numbers::pi / g.dx(), 1e-12);
  EXPECT_NEAR(g.dk(), 2.0 * std::numbers::pi / (256 * g.dx()), 1e-15);
  EXPECT_DOUBLE_EQ(g.k_fft_order(0), 0.0);
  EXPECT_DOUBLE_EQ(g.k_fft_order(255), -g.dk());
}

TEST(InnerProduct, NormalizedStateHasUnitOverlap) {
  const Grid g = Grid::symmetric(12.0, 1024);
  const auto w = gaussian(g, 0.3, 0.8, 1.5);
  const complex s = inner_product(w, w);
  EXPECT_NEAR(s.real(), 1.0, 1e-12);
  EXPECT_NEAR(s.imag(), 0.0, 1e-12);
}

TEST(InnerProduct, EigenstatesAreOrthogonal) {
  const Grid g = Grid::symmetric(12.0, 1024);
  const auto basis = solve(PotentialSchedule::expansion(Shape::Linear, 1.0, 1.0), g, 0.0, 2);
  EXPECT_LT(std::abs(inner_product(basis.states[0], basis.states[1])), 1e-8);
}

TEST(InnerProduct, DisplacedGaussianOverlap) {
  // Independent oracle: |<g_0|g_s>| = exp(-s^2/4) for unit-width oscillator ground states.
  const Grid g = Grid::symmetric(15.0, 2048);
  const double s = 2.0;
  const auto a = gaussian(g, 0.0, 1.0);
  const auto b = gaussian(g, s, 1.0);
  const double oracle = std::exp(-s * s / 4.0);
  EXPECT_NEAR(std::abs(inner_product(a, b)), oracle, 1e-4);
  EXPECT_NEAR(oracle, 0.367879, 1e-6);
}

TEST(InnerProduct, ConjugateSymmetricAndSesquilinear) {
  const Grid g = Grid::symmetric(8.0, 256);
  std::mt19937_64 rng(7);
  const auto a = random_state(g, rng);
  const auto b = random_state(g, rng);
  const auto c = random_state(g, rng);
  const complex ab = inner_product(a, b);
  EXPECT_NEAR(std::abs(ab - std::conj(inner_product(b, a))), 0.0, 1e-14);

  const complex alpha(0.3, -1.2);
  const complex beta(-0.7, 0.4);
  Wavefunction lin(g);
  Wavefunction anti(g);
  for (std::size_t j = 0; j < g.size(); ++j) {
    lin[j] = alpha * b[j] + beta * c[j];
    anti[j] = alpha * a[j] + beta * c[j];
  }
  const complex expect_lin = alpha * ab + beta * inner_product(a, c);
  EXPECT_NEAR(std::abs(inner_product(a, lin) - expect_lin), 0.0, 1e-13);
  const complex expect_anti = std::conj(alpha) * ab + std::conj(beta) * inner_product(c, b);
  EXPECT_NEAR(std::abs(inner_product(anti, b) - expect_anti), 0.0, 1e-13);
}

TEST(InnerProduct, GridMismatchIsRejected) {
  const Wavefunction a(Grid::symmetric(8.0, 256));
  const Wavefunction b(Grid::symmetric(8.0, 512));
  EXPECT_THROW(inner_product(a, b), InputError);
}

TEST(Transform, RoundTripIsIdentity) {
  const Grid g(-5.0, 11.0, 512);
  std::mt19937_64 rng(11);
  const auto w = random_state(g, rng);
  const auto back = to_position(to_momentum(w));
  for (std::size_t j = 0; j < g.size(); ++j) EXPECT_NEAR(std::abs(back[j] - w[j]), 0.0, 1e-12);
}

TEST(Transform, ParsevalHoldsForRandomStates) {
  const Grid g = Grid::symmetric(20.0, 1024);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto w = random_state(g, rng);
    EXPECT_NEAR(std::sqrt(to_momentum(w).norm_squared()), w.norm(), 1e-12);
  }
}

TEST(Transform, ConstantMapsToZeroMomentum) {
  const Grid g = Grid::symmetric(4.0, 64);
  Wavefunction w(g);
  for (std::size_t j = 0; j < g.size(); ++j) w[j] = 1.0;
  const auto p = to_momentum(w);
  const std::size_t zero = g.size() / 2;
  EXPECT_NEAR(g.k(zero), 0.0, 1e-15);
  EXPECT_GT(std::abs(p.amplitudes[zero]), 1.0);
  for (std::size_t m = 0; m < g.size(); ++m) {
    if (m != zero) {
      EXPECT_NEAR(std::abs(p.amplitudes[m]), 0.0, 1e-12);
    }
  }
}

TEST(Transform, GaussianFourierPair) {
  // Analytic pair: width d in x gives |phi(k)| proportional to exp(-k^2 d^2/2),
  // centred on the carrier momentum k0.
  const Grid g = Grid::symmetric(20.0, 1024);
  const double d = 1.3;
  const double k0 = 2.0;
  const auto w = gaussian(g, 0.0, d, k0);
  const auto p = to_momentum(w);
  const double amp0 = std::sqrt(d / std::sqrt(std::numbers::pi));
  double mean_k = 0.0;
  double worst = 0.0;
  for (std::size_t m = 0; m < g.size(); ++m) {
    const double k = g.k(m);
    const double expect = amp0 * std::exp(-0.5 * (k - k0) * (k - k0) * d * d);
    worst = std::max(worst, std::abs(std::abs(p.amplitudes[m]) - expect));
    mean_k += k * std::norm(p.amplitudes[m]) * g.dk();
  }
  EXPECT_LT(worst, 1e-10);
  EXPECT_NEAR(mean_k, k0, 1e-10);
}

TEST(Containment, DetectsEdgeLeak) {
  const Grid g = Grid::symmetric(5.0, 256);
  EXPECT_NO_THROW(require_contained(gaussian(g, 0.0, 0.7), "centred"));
  try {
    require_contained(gaussian(g, 4.5, 0.7), "shifted");
    FAIL() << "expected a grid error";
  } catch (const GridError& e) {
    EXPECT_EQ(e.side(), GridError::Side::Position);
  }
  try {
    require_contained(gaussian(g, 0.0, 0.05), "narrow");
    FAIL() << "expected a grid error";
  } catch (const GridError& e) {
    EXPECT_EQ(e.side(), GridError::Side::Momentum);
  }
}

TEST(Reflect, MapsXToMinusX) {
  const Grid g = Grid::symmetric(6.0, 128);
  const auto w = gaussian(g, 1.0, 0.6);
  const auto r = reflect(w);
  const auto mirror = gaussian(g, -1.0, 0.6);
  for (std::size_t j = 1; j < g.size(); ++j) EXPECT_NEAR(std::abs(r[j] - mirror[j]), 0.0, 1e-12);
}
