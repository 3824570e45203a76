// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "costa/epi.hpp"

namespace costa {

/// Configuration of the seeded counterexample search.
struct SearchConfig {
  Eigen::Index n = 2;
  int restarts = 16;
  int iterations = 1000;      // Nelder-Mead iterations per restart
  std::uint64_t seed = 0;
  double step_scale = 0.5;    // initial simplex edge in parameter space
  double eig_lo = 1e-2;       // covariance eigenvalue draw range
  double eig_hi = 1e3;
  double objective_tol = 1e-12;  // simplex spread at which a restart stops
  bool commuting_only = false;   // restrict a and sigma_z to a shared (axis) eigenbasis

  void validate() const;
};

struct RestartRecord {
  int restart = 0;
  std::vector<std::pair<int, double>> history;  // (iteration, running best objective)
  double best_objective = 0.0;
  Eigen::VectorXd best_params;
};

/// Search history. best_gap is re-evaluated through costa_check on the
/// decoded best instance, never taken from optimizer bookkeeping.
struct SearchTrace {
  EpiInstance best_instance;
  EpiReport best_report;
  double best_gap = 0.0;        // negative = violation magnitude
  double best_objective = 0.0;  // rhs - lhs; positive certifies violation
  int best_restart = 0;
  std::vector<RestartRecord> restarts;
  std::uint64_t total_evaluations = 0;
  std::uint64_t seed = 0;
};

std::size_t parameter_count(Eigen::Index n, bool commuting_only);

/// Feasible-by-construction parameterization:
///   sigma_x, sigma_z <- lower-triangular Cholesky factors, log diagonals;
///   a <- Q diag(logistic(theta)) Q^T with Q the Cayley transform of a
///        skew-symmetric parameter block (so 0 < a < I always).
/// The commuting restriction drops the Cayley block and makes sigma_z and a
/// diagonal (shared axis eigenbasis).
EpiInstance decode(const Eigen::VectorXd& params, Eigen::Index n,
                   bool commuting_only = false);

/// Inverse of decode up to 1e-9: log of Cholesky diagonals, logit of a's
/// eigenvalues, inverse Cayley of a's eigenbasis. Requires strictly PD
/// sigma_x, sigma_z and a eigenvalues inside (0, 1).
Eigen::VectorXd encode(const EpiInstance& inst, bool commuting_only = false);

/// rhs - lhs of the inequality at the decoded instance; positive values
/// certify violation. Returns -infinity when the instance cannot be
/// evaluated, so the optimizer discards the point.
double objective(const Eigen::VectorXd& params, Eigen::Index n,
                 bool commuting_only = false);

/// Seeded Nelder-Mead descents from `restarts` independent starting points;
/// each restart is fully determined by (seed, restart index) and the winner
/// is the deterministic argmax with lowest-restart-index tiebreak.
SearchTrace search_counterexample(const SearchConfig& cfg);

}  // namespace costa
