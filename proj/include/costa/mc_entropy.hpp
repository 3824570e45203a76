// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "costa/gaussian.hpp"
#include "costa/linalg.hpp"

namespace costa {

struct MixtureComponent {
  double weight = 1.0;
  Eigen::VectorXd mean;
  SymMatrix cov;
};

/// Finite Gaussian mixture; weights positive and summing to one within 1e-12,
/// every component covariance strictly PD.
struct MixtureSpec {
  std::vector<MixtureComponent> components;

  Eigen::Index dim() const;
  void validate() const;
  static MixtureSpec single_gaussian(SymMatrix cov);
};

struct EntropyEstimate {
  double estimate = 0.0;        // nats
  double standard_error = 0.0;
  std::size_t samples = 0;
  int k = 0;
};

enum class McConclusion { consistent, inconclusive, suspicious };

const char* to_string(McConclusion c);

/// Monte-Carlo verdict on one commuting-case instance. `suspicious` flags a
/// statistically significant apparent violation, which (the theorem being
/// proved) means estimator bias needs investigation, not a disproof.
struct McReport {
  double lhs_estimate = 0.0;
  double rhs_estimate = 0.0;
  double se_lhs = 0.0;
  double se_rhs = 0.0;
  EntropyEstimate h_x;      // h(X)
  EntropyEstimate h_x_az;   // h(X + a^{1/2} Z)
  EntropyEstimate h_x_z;    // h(X + Z)
  std::size_t samples = 0;
  int k = 0;
  McConclusion conclusion = McConclusion::inconclusive;
  std::uint64_t seed = 0;
  std::string detail;
};

/// m i.i.d. draws (rows) from the mixture; Gaussian components sampled as
/// mean + L g with L the Cholesky factor. Deterministic per seed.
Eigen::MatrixXd sample(const MixtureSpec& spec, std::size_t m,
                       std::uint64_t seed);
Eigen::MatrixXd sample(const GaussianVector& g, std::size_t m,
                       std::uint64_t seed);

/// Kozachenko-Leonenko k-nearest-neighbor entropy estimate in nats:
///   psi(m) - psi(k) + log V_n + (n/m) sum_i log eps_i,
/// eps_i the distance from sample i to its k-th nearest neighbor. Exact
/// neighbor distances via a sorted-first-coordinate pruned scan. Duplicate
/// points (eps = 0) are perturbed by a deterministic jitter of
/// 1e-12 * max-abs-coordinate and the distances recomputed once. The standard
/// error comes from 16-fold subsampling (index mod 16); when m < 16(k+1) it
/// falls back to the asymptotic per-point variance.
EntropyEstimate knn_entropy(const Eigen::MatrixXd& samples, int k);

/// Plain O(m^2) k-th neighbor distances; reference path for the pruned scan.
std::vector<double> knn_distances_bruteforce(const Eigen::MatrixXd& samples,
                                             int k);
std::vector<double> knn_distances(const Eigen::MatrixXd& samples, int k);

/// Estimates each side of the commuting-case theorem from three independent
/// sample sets (X alone, X + a^{1/2}Z, X + Z) and classifies the outcome.
/// Requires commuting (a, sigma_z).
McReport mc_commuting_check(const MixtureSpec& x_spec, const SymMatrix& sigma_z,
                           const SymMatrix& a, std::size_t m, int k,
                           std::uint64_t seed, double tol = kDefaultTol);

/// Worker count: explicit request > set_default_thread_count >
/// COSTA_EPI_THREADS env > hardware.
unsigned thread_count(unsigned requested = 0);

/// Process-wide override, used by the CLI --threads flag; 0 restores auto.
void set_default_thread_count(unsigned n);

}  // namespace costa
