// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <string>

#include "costa/errors.hpp"

namespace costa {

// Default relative tolerance for all boolean matrix predicates.
inline constexpr double kDefaultTol = 1e-9;

// Eigenvalues in [-kSqrtClampTol * scale, 0) are clamped to zero by psd_sqrt.
inline constexpr double kSqrtClampTol = 1e-10;

/// Dense real symmetric matrix. Symmetry is enforced on construction by
/// averaging (M + M^T)/2 and is exact thereafter; entries must be finite.
class SymMatrix {
 public:
  SymMatrix() : m_(Eigen::MatrixXd::Zero(0, 0)) {}
  explicit SymMatrix(Eigen::MatrixXd m);

  static SymMatrix identity(Eigen::Index n);
  static SymMatrix zero(Eigen::Index n);
  static SymMatrix from_diagonal(const Eigen::VectorXd& d);

  Eigen::Index dim() const { return m_.rows(); }
  const Eigen::MatrixXd& mat() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  double max_abs() const { return dim() == 0 ? 0.0 : m_.cwiseAbs().maxCoeff(); }

 private:
  Eigen::MatrixXd m_;
};

/// Spectral decomposition of a SymMatrix: eigenvalues ascending, orthonormal
/// basis columns with the first nonzero component of each column positive.
struct EigenDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd basis;
};

/// Result of diagonalizing two commuting symmetric matrices in one basis.
struct SimDiag {
  Eigen::MatrixXd basis;  // orthogonal; columns are shared eigenvectors
  Eigen::VectorXd a;      // diagonal of basis^T * A * basis
  Eigen::VectorXd b;      // diagonal of basis^T * B * basis
};

/// Determinant of a PSD matrix, exposed both directly and in log-domain.
/// log_value is -infinity when the matrix is singular to working precision.
struct DetValue {
  double value = 0.0;
  double log_value = 0.0;
};

EigenDecomposition sym_eig(const SymMatrix& m);

/// Unique PSD square root. Eigenvalues in [-tol*norm, 0) are clamped to zero;
/// anything lower raises NotPsdError with the offending eigenvalue.
SymMatrix psd_sqrt(const SymMatrix& m, double tol = kSqrtClampTol);

/// min eigenvalue >= -tol * max(1, spectral norm).
bool is_psd(const SymMatrix& m, double tol = kDefaultTol);

/// Loewner order: b - a is PSD.
bool loewner_leq(const SymMatrix& a, const SymMatrix& b, double tol = kDefaultTol);

/// max-abs of the commutator AB - BA, relative to 1 + |A||B|.
bool commutes(const SymMatrix& a, const SymMatrix& b, double tol = kDefaultTol);

/// Shared eigenbasis of two commuting symmetric matrices. Diagonalizes A
/// first, then B restricted to each (clustered) eigenspace of A, so repeated
/// eigenvalues of A are handled. Raises PreconditionError when the inputs do
/// not commute within tol.
SimDiag simultaneous_diagonalize(const SymMatrix& a, const SymMatrix& b,
                                 double tol = kDefaultTol);

/// Log-determinant of a strictly PD matrix via Cholesky (LDLT) in log-domain.
/// Raises SingularError when the smallest eigenvalue is within tol of zero.
double log_det_pd(const SymMatrix& m, double tol = 1e-12);

/// Determinant of a PSD matrix from its spectrum; tiny negative eigenvalues
/// inside the psd_sqrt clamping band count as zero.
DetValue det_psd(const SymMatrix& m);

/// Renders a matrix into error messages.
std::string format_matrix(const Eigen::MatrixXd& m);

}  // namespace costa
