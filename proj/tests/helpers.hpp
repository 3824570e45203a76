// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include "costa/linalg.hpp"
#include "costa/rng.hpp"

namespace costa::testing {

inline double rel_frobenius(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double denom = std::max(1e-300, b.norm());
  return (a - b).norm() / denom;
}

inline SymMatrix random_symmetric(Eigen::Index n, Rng& rng, double scale = 1.0) {
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      m(i, j) = scale * rng.normal();
    }
  }
  return SymMatrix(m);
}

inline SymMatrix random_psd(Eigen::Index n, Rng& rng, double scale = 1.0) {
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      m(i, j) = scale * rng.normal();
    }
  }
  return SymMatrix(m * m.transpose());
}

// Commuting pair sharing a random eigenbasis: a with eigenvalues in (0,1),
// b with log-uniform eigenvalues.
struct CommutingPair {
  SymMatrix a;
  SymMatrix b;
};

inline CommutingPair random_commuting_pair(Eigen::Index n, Rng& rng,
                                           double lo = 1e-2, double hi = 1e3) {
  const Eigen::MatrixXd q = random_orthogonal(n, rng);
  Eigen::VectorXd a_eigs(n), b_eigs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a_eigs(i) = rng.uniform(0.01, 0.99);
    b_eigs(i) = rng.log_uniform(lo, hi);
  }
  return {SymMatrix(q * a_eigs.asDiagonal() * q.transpose()),
          SymMatrix(q * b_eigs.asDiagonal() * q.transpose())};
}

}  // namespace costa::testing
