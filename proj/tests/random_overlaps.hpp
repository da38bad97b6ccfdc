#ifndef PAULI_TESTS_RANDOM_OVERLAPS_HPP
#define PAULI_TESTS_RANDOM_OVERLAPS_HPP

#include <Eigen/Dense>

#include <random>

namespace pauli::testing {

// Haar-random unitary of size m (QR of a complex Ginibre matrix, phases of R
// divided out).
inline Eigen::MatrixXcd haar_unitary(Eigen::Index m, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Eigen::MatrixXcd z(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) z(i, j) = {n01(rng), n01(rng)};
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < m; ++j) q.col(j) *= r(j, j) / std::abs(r(j, j));
  return q;
}

// n x np top-left block of a Haar unitary of size m >= n: a contraction with
// the structure of a physical overlap table.
inline Eigen::MatrixXcd sub_unitary(Eigen::Index n, Eigen::Index np, Eigen::Index m, std::mt19937_64& rng) {
  return haar_unitary(m, rng).topLeftCorner(n, np);
}

}  // namespace pauli::testing

#endif
