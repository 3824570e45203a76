// SPDX-License-Identifier: Apache-2.0
#include "costa/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace costa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Flips eigenvector columns so the first component with magnitude above
// 1e-12 is positive. Unit-norm columns make an absolute cutoff safe.
void fix_column_signs(Eigen::MatrixXd& basis) {
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    for (Eigen::Index i = 0; i < basis.rows(); ++i) {
      const double v = basis(i, j);
      if (std::abs(v) > 1e-12) {
        if (v < 0) basis.col(j) = -basis.col(j);
        break;
      }
    }
  }
}

double spectral_scale(const Eigen::VectorXd& eigenvalues) {
  return eigenvalues.size() == 0 ? 0.0 : eigenvalues.cwiseAbs().maxCoeff();
}

}  // namespace

SymMatrix::SymMatrix(Eigen::MatrixXd m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("SymMatrix: input is " + std::to_string(m.rows()) +
                         "x" + std::to_string(m.cols()) + ", expected square");
  }
  if (m.rows() < 1) {
    throw DimensionError("SymMatrix: dimension must be >= 1");
  }
  if (!m.allFinite()) {
    throw Error("SymMatrix: non-finite entry in\n" + format_matrix(m));
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(Eigen::Index n) {
  return SymMatrix(Eigen::MatrixXd::Identity(n, n));
}

SymMatrix SymMatrix::zero(Eigen::Index n) {
  return SymMatrix(Eigen::MatrixXd::Zero(n, n));
}

SymMatrix SymMatrix::from_diagonal(const Eigen::VectorXd& d) {
  return SymMatrix(Eigen::MatrixXd(d.asDiagonal()));
}

EigenDecomposition sym_eig(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.mat());
  if (solver.info() != Eigen::Success) {
    throw Error("sym_eig: eigensolver failed to converge on\n" +
                format_matrix(m.mat()));
  }
  EigenDecomposition d;
  d.eigenvalues = solver.eigenvalues();
  d.basis = solver.eigenvectors();
  fix_column_signs(d.basis);
  return d;
}

SymMatrix psd_sqrt(const SymMatrix& m, double tol) {
  EigenDecomposition d = sym_eig(m);
  const double scale = spectral_scale(d.eigenvalues);
  Eigen::VectorXd roots(d.eigenvalues.size());
  for (Eigen::Index i = 0; i < d.eigenvalues.size(); ++i) {
    double v = d.eigenvalues(i);
    if (v < -tol * scale) {
      std::ostringstream os;
      os << "psd_sqrt: eigenvalue " << v << " below tolerance band "
         << -tol * scale << " for\n"
         << format_matrix(m.mat());
      throw NotPsdError(os.str());
    }
    roots(i) = v > 0 ? std::sqrt(v) : 0.0;
  }
  Eigen::MatrixXd r = d.basis * roots.asDiagonal() * d.basis.transpose();
  return SymMatrix(std::move(r));
}

bool is_psd(const SymMatrix& m, double tol) {
  EigenDecomposition d = sym_eig(m);
  const double scale = std::max(1.0, spectral_scale(d.eigenvalues));
  return d.eigenvalues.minCoeff() >= -tol * scale;
}

bool loewner_leq(const SymMatrix& a, const SymMatrix& b, double tol) {
  if (a.dim() != b.dim()) {
    throw DimensionError("loewner_leq: dimensions " + std::to_string(a.dim()) +
                         " vs " + std::to_string(b.dim()));
  }
  return is_psd(SymMatrix(b.mat() - a.mat()), tol);
}

bool commutes(const SymMatrix& a, const SymMatrix& b, double tol) {
  if (a.dim() != b.dim()) {
    throw DimensionError("commutes: dimensions " + std::to_string(a.dim()) +
                         " vs " + std::to_string(b.dim()));
  }
  const Eigen::MatrixXd c = a.mat() * b.mat() - b.mat() * a.mat();
  const double scale = 1.0 + a.max_abs() * b.max_abs();
  return c.cwiseAbs().maxCoeff() <= tol * scale;
}

SimDiag simultaneous_diagonalize(const SymMatrix& a, const SymMatrix& b,
                                 double tol) {
  if (!commutes(a, b, tol)) {
    throw PreconditionError(
        "simultaneous_diagonalize: inputs do not commute within tolerance " +
        std::to_string(tol));
  }
  const Eigen::Index n = a.dim();
  EigenDecomposition da = sym_eig(a);
  Eigen::MatrixXd u = da.basis;

  // Cluster near-equal eigenvalues of A; within each cluster the basis is
  // only determined up to rotation, so diagonalize B restricted there.
  const double cluster_tol = 1e-8 * (1.0 + spectral_scale(da.eigenvalues));
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n &&
           da.eigenvalues(end) - da.eigenvalues(end - 1) <= cluster_tol) {
      ++end;
    }
    const Eigen::Index width = end - start;
    if (width > 1) {
      Eigen::MatrixXd uc = u.middleCols(start, width);
      Eigen::MatrixXd b_sub = uc.transpose() * b.mat() * uc;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sub(
          0.5 * (b_sub + b_sub.transpose()));
      if (sub.info() != Eigen::Success) {
        throw Error("simultaneous_diagonalize: subspace eigensolver failed");
      }
      u.middleCols(start, width) = uc * sub.eigenvectors();
    }
    start = end;
  }
  fix_column_signs(u);

  SimDiag out;
  out.basis = u;
  const Eigen::MatrixXd a_rot = u.transpose() * a.mat() * u;
  const Eigen::MatrixXd b_rot = u.transpose() * b.mat() * u;
  out.a = a_rot.diagonal();
  out.b = b_rot.diagonal();

  const double off_a =
      (a_rot - Eigen::MatrixXd(out.a.asDiagonal())).cwiseAbs().maxCoeff();
  const double off_b =
      (b_rot - Eigen::MatrixXd(out.b.asDiagonal())).cwiseAbs().maxCoeff();
  const double allow_a = std::max(tol, cluster_tol) * (1.0 + a.max_abs());
  const double allow_b = std::max(tol, cluster_tol) * (1.0 + b.max_abs());
  if (off_a > allow_a || off_b > allow_b) {
    std::ostringstream os;
    os << "simultaneous_diagonalize: off-diagonal residual " << off_a << " / "
       << off_b << " exceeds tolerance";
    throw PreconditionError(os.str());
  }
  return out;
}

double log_det_pd(const SymMatrix& m, double tol) {
  EigenDecomposition d = sym_eig(m);
  const double scale = std::max(1.0, spectral_scale(d.eigenvalues));
  if (d.eigenvalues.minCoeff() <= tol * scale) {
    std::ostringstream os;
    os << "log_det_pd: matrix singular to working precision (min eigenvalue "
       << d.eigenvalues.minCoeff() << ")";
    throw SingularError(os.str());
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(m.mat());
  if (ldlt.info() != Eigen::Success) {
    throw SingularError("log_det_pd: LDLT factorization failed");
  }
  double log_det = 0.0;
  const auto diag = ldlt.vectorD();
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (diag(i) <= 0.0) {
      throw SingularError("log_det_pd: non-positive pivot in LDLT");
    }
    log_det += std::log(diag(i));
  }
  return log_det;
}

DetValue det_psd(const SymMatrix& m) {
  EigenDecomposition d = sym_eig(m);
  const double scale = spectral_scale(d.eigenvalues);
  DetValue out;
  double log_sum = 0.0;
  double product = 1.0;
  bool singular = false;
  for (Eigen::Index i = 0; i < d.eigenvalues.size(); ++i) {
    double v = d.eigenvalues(i);
    if (v < -kSqrtClampTol * scale) {
      std::ostringstream os;
      os << "det_psd: eigenvalue " << v << " below PSD tolerance band for\n"
         << format_matrix(m.mat());
      throw NotPsdError(os.str());
    }
    if (v <= 0.0) {
      singular = true;
      continue;
    }
    log_sum += std::log(v);
    product *= v;
  }
  out.value = singular ? 0.0 : product;
  out.log_value = singular ? -kInf : log_sum;
  return out;
}

std::string format_matrix(const Eigen::MatrixXd& m) {
  std::ostringstream os;
  os << m;
  return os.str();
}

}  // namespace costa
