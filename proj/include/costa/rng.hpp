// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

#include "costa/linalg.hpp"

namespace costa {

/// Deterministic random source. The engine is std::mt19937_64 (bit-exact by
/// the standard) and all distributions are hand-rolled (uniform from the top
/// 53 bits, normal via Box-Muller) so streams do not depend on the standard
/// library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent substream fully determined by (seed, index).
  static Rng substream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64() { return engine_(); }
  double uniform01();                       // [0, 1)
  double uniform(double lo, double hi);     // [lo, hi)
  double log_uniform(double lo, double hi); // log-uniform over [lo, hi), lo > 0
  double normal();                          // standard normal, Box-Muller
  std::size_t index(std::size_t bound);     // uniform in {0, ..., bound-1}

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Haar-ish random orthogonal matrix: QR of a standard normal matrix with the
/// R diagonal sign fixed, then det flipped to +1 via the last column.
Eigen::MatrixXd random_orthogonal(Eigen::Index n, Rng& rng);

/// Random SPD matrix with eigenvalues drawn log-uniform over [eig_lo, eig_hi]
/// in a random orthogonal basis.
SymMatrix random_spd(Eigen::Index n, double eig_lo, double eig_hi, Rng& rng);

}  // namespace costa
