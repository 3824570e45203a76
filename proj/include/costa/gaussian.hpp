// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "costa/linalg.hpp"

namespace costa {

/// Zero-mean Gaussian vector, identified by its covariance. Differential
/// entropy is translation invariant, so means are not modeled.
class GaussianVector {
 public:
  explicit GaussianVector(SymMatrix cov, double tol = kDefaultTol);

  Eigen::Index dim() const { return cov_.dim(); }
  const SymMatrix& cov() const { return cov_; }

 private:
  SymMatrix cov_;
};

/// Differential entropy in nats: (n*ln(2*pi*e) + logdet(cov)) / 2.
/// Returns -infinity when the covariance is singular to working precision
/// (min eigenvalue <= tol * spectral norm).
double gaussian_entropy(const GaussianVector& g, double tol = 1e-12);

/// Entropy power e^{2h/n}; h = -infinity maps to 0.
double entropy_power(double h_nats, Eigen::Index n);

/// Log-domain entropy power, 2h/n.
double log_entropy_power(double h_nats, Eigen::Index n);

/// Covariance of Z given M*X + Z for independent zero-mean Gaussians
/// X ~ N(0, sigma_x), Z ~ N(0, sigma_z):
///   sigma_z - sigma_z (M sigma_x M^T + sigma_z)^{-1} sigma_z.
/// Raises SingularError when M sigma_x M^T + sigma_z is not strictly PD.
SymMatrix conditional_cov(const SymMatrix& sigma_x, const SymMatrix& sigma_z,
                          const SymMatrix& m);

}  // namespace costa
