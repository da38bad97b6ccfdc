#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pauli/fidelity.hpp"
#include "random_overlaps.hpp"

using namespace pauli;
using pauli::testing::sub_unitary;

namespace {

OverlapMatrix make(std::initializer_list<std::initializer_list<complex>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto np = static_cast<Eigen::Index>(rows.begin()->size());
  Eigen::MatrixXcd a(n, np);
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (const auto& v : row) a(r, c++) = v;
    ++r;
  }
  return OverlapMatrix(a);
}

}  // namespace

TEST(Oracle, HandWorkedCases) {
  EXPECT_DOUBLE_EQ(fidelity_oracle(make({{1.0, 0.0}, {0.0, 1.0}})).value, 1.0);
  // Rows swapped: the determinant changes sign, the fidelity does not.
  EXPECT_DOUBLE_EQ(fidelity_oracle(make({{0.0, 1.0}, {1.0, 0.0}, {0.0, 0.0}})).value, 1.0);
  // N_p = 1 reduces to the squared column norm.
  EXPECT_NEAR(fidelity_oracle(make({{0.6}, {complex(0.0, 0.5)}, {0.2}})).value, 0.36 + 0.25 + 0.04, 1e-15);
  // Rotation by 30 degrees between levels 1 and 2, level 0 untouched, N_p = 2:
  // only rows {0,1} and {0,2} contribute, giving cos^2 + sin^2 = 1.
  const double c = std::cos(M_PI / 6);
  const double s = std::sin(M_PI / 6);
  EXPECT_NEAR(fidelity_oracle(make({{1.0, 0.0}, {0.0, c}, {0.0, s}})).value, 1.0, 1e-15);
  // Same rotation with level 2 unoccupied: cos^2.
  EXPECT_NEAR(fidelity_oracle(make({{1.0, 0.0}, {0.0, c}})).value, 0.75, 1e-15);
  // 2 x 2 determinant: |a d - b c|^2.
  EXPECT_NEAR(fidelity_oracle(make({{0.5, 0.5}, {0.5, -0.5}})).value, 0.25, 1e-15);
}

TEST(Oracle, RejectsOversizedInput) {
  EXPECT_THROW(fidelity_oracle(OverlapMatrix(Eigen::MatrixXcd::Zero(13, 2))), InputError);
  EXPECT_THROW(fidelity_oracle(OverlapMatrix(Eigen::MatrixXcd::Zero(8, 7))), InputError);
}

TEST(OverlapMatrix, RejectsNonContractions) {
  EXPECT_THROW(OverlapMatrix(Eigen::MatrixXcd::Zero(2, 3)), InputError);
  Eigen::MatrixXcd big = Eigen::MatrixXcd::Zero(2, 1);
  big(0, 0) = 0.9;
  big(1, 0) = 0.9;
  EXPECT_THROW(OverlapMatrix{big}, InputError);
  Eigen::MatrixXcd sv(2, 2);
  sv << 0.7, 0.7, 0.7, 0.7;
  EXPECT_THROW(OverlapMatrix{sv}, InputError);
}

TEST(FastPath, MatchesOracleOnHaarSubUnitaries) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> pick(1, 8);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = pick(rng);
    const int np = std::uniform_int_distribution<int>(1, std::min(n, 4))(rng);
    const int m = n + std::uniform_int_distribution<int>(0, 6)(rng);
    const OverlapMatrix a(sub_unitary(n, np, m, rng));
    const double oracle = fidelity_oracle(a).value;
    const double fast = fidelity_fast(a).value;
    EXPECT_NEAR(fast, oracle, 1e-10) << "n=" << n << " np=" << np << " m=" << m;
    EXPECT_GE(fast, 0.0);
    EXPECT_LE(fast, 1.0 + 1e-10);
  }
}

TEST(FastPath, FullUnitaryGivesOne) {
  std::mt19937_64 rng(5);
  for (int n = 1; n <= 8; ++n) {
    const OverlapMatrix a(sub_unitary(n, std::min(n, 4), n, rng));
    EXPECT_NEAR(fidelity_fast(a).value, 1.0, 1e-12);
  }
}

TEST(FastPath, AppendingABufferRowNeverLowersFidelity) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::MatrixXcd full = sub_unitary(10, 3, 14, rng);
    double prev = 0.0;
    for (Eigen::Index n = 3; n <= 10; ++n) {
      const double f = fidelity_fast(OverlapMatrix(full.topRows(n))).value;
      EXPECT_GE(f - prev, -1e-12);
      prev = f;
    }
  }
}

TEST(FastPath, InvariantUnderRowAndColumnPhases) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXcd a = sub_unitary(6, 3, 9, rng);
    Eigen::MatrixXcd b = a;
    for (Eigen::Index r = 0; r < b.rows(); ++r) b.row(r) *= std::polar(1.0, angle(rng));
    for (Eigen::Index c = 0; c < b.cols(); ++c) b.col(c) *= std::polar(1.0, angle(rng));
    EXPECT_NEAR(fidelity_fast(OverlapMatrix(a)).value, fidelity_fast(OverlapMatrix(b)).value, 1e-12);
  }
}

TEST(FastPath, ZeroColumnGivesZero) {
  std::mt19937_64 rng(3);
  Eigen::MatrixXcd a = sub_unitary(5, 3, 7, rng);
  a.col(1).setZero();
  EXPECT_NEAR(fidelity_fast(OverlapMatrix(a)).value, 0.0, 1e-14);
  EXPECT_NEAR(fidelity_oracle(OverlapMatrix(a)).value, 0.0, 1e-14);
}

TEST(FastPath, NoProtectedParticlesIsTriviallyOne) {
  EXPECT_EQ(fidelity_fast(OverlapMatrix(Eigen::MatrixXcd::Zero(3, 0))).value, 1.0);
}

TEST(SelectOverlaps, PicksRowsAndLeadingColumns) {
  Eigen::MatrixXcd master = Eigen::MatrixXcd::Identity(5, 4);
  const std::vector<std::size_t> rows = {0, 2, 3};
  const auto a = select_overlaps(master, rows, 2);
  EXPECT_EQ(a.n_total(), 3u);
  EXPECT_EQ(a.n_protected(), 2u);
  EXPECT_EQ(a.entries()(0, 0), complex(1.0));
  EXPECT_EQ(a.entries()(1, 1), complex(0.0));
  const std::vector<std::size_t> bad = {0, 7};
  EXPECT_THROW(select_overlaps(master, bad, 2), InputError);
  EXPECT_THROW(select_overlaps(master, rows, 5), InputError);
}

TEST(Scenario, StaticTrapIsPerfect) {
  const auto s = PotentialSchedule::expansion(Shape::Sinusoidal, 2.0, 1.0, 1.0, 1.0);
  PropagationSettings st;
  st.dt = 1e-2;
  EvolveOptions opt;
  opt.n_points = 512;
  opt.auto_dt = false;
  for (std::size_t nb : {0u, 1u, 3u}) {
    EXPECT_NEAR(scenario_fidelity(s, 2, nb, st, opt).value, 1.0, 1e-8) << "N_b = " << nb;
  }
}

TEST(Scenario, ExpansionParityDecouplesOddBuffers) {
  const auto s = PotentialSchedule::expansion(Shape::Linear, 3.0, 1.0, 1.0, 0.1);
  PropagationSettings st;
  st.dt = 2e-3;
  EvolveOptions opt;
  opt.n_points = 1024;
  opt.auto_dt = false;
  const auto ev = evolve_levels(s, 6, 1, st, opt);
  for (std::size_t k = 0; k < 2; ++k) {
    const double even = ev.fidelity(1, 2 * k).value;
    const double odd = ev.fidelity(1, 2 * k + 1).value;
    EXPECT_NEAR(odd, even, 1e-6) << "k = " << k;
  }
  EXPECT_LT(ev.fidelity(1, 0).value, ev.fidelity(1, 2).value);
}

TEST(Scenario, OracleAndFastAgreeOnPhysicalOverlaps) {
  const auto s = PotentialSchedule::splitting(Shape::Sinusoidal, 1.0);
  PropagationSettings st;
  st.dt = 2e-3;
  EvolveOptions opt;
  opt.n_points = 1024;
  opt.auto_dt = false;
  const auto ev = evolve_levels(s, 6, 2, st, opt);
  for (std::size_t nb = 0; nb <= 4; ++nb) {
    const auto fast = ev.fidelity(2, nb);
    const auto oracle = ev.fidelity(2, nb, true);
    EXPECT_EQ(oracle.method, FidelityMethod::Oracle);
    EXPECT_NEAR(fast.value, oracle.value, 1e-10);
  }
}
