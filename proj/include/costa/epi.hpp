// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "costa/gaussian.hpp"
#include "costa/linalg.hpp"

namespace costa {

/// A triple (sigma_x, sigma_z, a) with a PSD and a <= I in the Loewner order.
/// a^{1/2} is always derived via psd_sqrt, never stored.
class EpiInstance {
 public:
  EpiInstance(SymMatrix sigma_x, SymMatrix sigma_z, SymMatrix a,
              double tol = kDefaultTol);

  Eigen::Index dim() const { return sigma_x_.dim(); }
  const SymMatrix& sigma_x() const { return sigma_x_; }
  const SymMatrix& sigma_z() const { return sigma_z_; }
  const SymMatrix& a() const { return a_; }
  SymMatrix a_sqrt() const { return psd_sqrt(a_); }

 private:
  SymMatrix sigma_x_;
  SymMatrix sigma_z_;
  SymMatrix a_;
};

struct DetEntry {
  std::string name;
  double value = 0.0;
  double log_value = 0.0;
};

/// Both sides of an entropy-power inequality, the gap, and the determinants
/// that built them (also in log-domain).
struct EpiReport {
  double lhs = 0.0;
  double rhs_term_x = 0.0;
  double rhs_term_xz = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
  bool violated = false;
  double log_lhs = 0.0;
  double log_rhs_term_x = 0.0;
  double log_rhs_term_xz = 0.0;
  std::vector<DetEntry> dets;
  std::string note;
};

/// Per-gamma record of the perturbation-path diagnostic.
struct GammaDiagnostic {
  double gamma = 0.0;
  SymMatrix d_gamma;
  SymMatrix cond_cov;
  Eigen::MatrixXd k_matrix;  // generally non-symmetric product
  Eigen::VectorXd eig_real;
  Eigen::VectorXd eig_imag;
  bool has_complex = false;
  double det_side = 0.0;
  bool det_side_defined = true;
  double trace_side = 0.0;
  bool amgm_holds = true;
  bool k_psd = true;
};

struct SplitResidual {
  SymMatrix residual;
  double norm = 0.0;  // max-abs entry
};

struct CanonicalReduction {
  EpiInstance canonical;
  double scale = 1.0;  // det(sigma_z)^{1/n}
};

/// Evaluates the matrix-parameter EPI for Gaussian X:
///   lhs  = 2*pi*e * det(sigma_x + a^{1/2} sigma_z a^{1/2})^{1/n}
///   rhs  = det(I-a)^{1/n} * 2*pi*e * det(sigma_x)^{1/n}
///        + det(a)^{1/n}   * 2*pi*e * det(sigma_x + sigma_z)^{1/n}
/// violated <=> gap < -tol * max(lhs, rhs).
EpiReport costa_check(const EpiInstance& inst, double tol = kDefaultTol);

/// Residual of the noise-splitting identity
///   a^{1/2} sigma_z a^{1/2} + (I-a)^{1/2} sigma_z (I-a)^{1/2} - sigma_z,
/// which is zero iff a and sigma_z commute.
SplitResidual splitting_identity_residual(const SymMatrix& a,
                                          const SymMatrix& sigma_z);

/// The triple EPI for independent Gaussians X, Y, W:
///   EP(X+W) EP(Y+W) >= EP(X) EP(Y) + EP(W) EP(X+Y+W).
EpiReport triple_epi_check(const SymMatrix& sigma_x, const SymMatrix& sigma_y,
                           const SymMatrix& sigma_w, double tol = kDefaultTol);

/// Same computation as costa_check, but requires a and sigma_z to commute;
/// the theorem then guarantees gap >= -tol*scale, and a violation is flagged
/// in the report note as an implementation bug.
EpiReport commuting_case_check(const EpiInstance& inst, double tol = kDefaultTol);

/// Perturbation-path diagnostic. For each gamma in [0,1):
///   d_gamma   = (I + gamma*(a^{-1} - I))^{1/2}   (grows from I; at gamma=1 it
///               is a^{-1/2}, so d_gamma X + Z matches X + a^{1/2} Z up to a
///               log-det shift)
///   cond_cov  = Cov(Z | d_gamma X + Z)
///   k         = sigma_z^{-1} * cond_cov * (I - d_gamma^{-2})
/// and the two sides of the AM-GM step det(k)^{1/n} vs tr(k)/n. det(k)^{1/n}
/// is undefined when det(k) < 0 and n is even; amgm_holds is then false.
/// Requires strictly PD a for gamma > 0; gamma >= 1 - 1e-12 is a domain error.
std::vector<GammaDiagnostic> gamma_path(const EpiInstance& inst,
                                        const std::vector<double>& gammas,
                                        double tol = kDefaultTol);

/// Reduction of a commuting instance to sigma_z' = I with diagonal a':
/// gap(inst) = det(sigma_z)^{1/n} * gap(canonical).
CanonicalReduction reduce_to_canonical(const EpiInstance& inst,
                                       double tol = kDefaultTol);

/// The built-in counterexample fixture:
///   sigma_x = [[200,100],[100,51]], sigma_z = diag(200,1),
///   a^{1/2} = [[10,5],[5,17]]/20.
EpiInstance counterexample_instance();
SymMatrix counterexample_a_sqrt();

}  // namespace costa
