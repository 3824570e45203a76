// SPDX-License-Identifier: Apache-2.0
#include "costa/epi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace costa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
const double kLog2PiE = std::log(2.0 * M_PI) + 1.0;

// Largest gamma accepted by gamma_path; at gamma = 1 the path endpoint needs
// a^{-1/2}, which the instance contract does not guarantee to exist.
constexpr double kGammaMax = 1.0 - 1e-12;

double finite_exp(double log_value) {
  return log_value == -kInf ? 0.0 : std::exp(log_value);
}

DetValue det_pd_strict(const SymMatrix& m, const char* what) {
  try {
    const double ld = log_det_pd(m);
    return DetValue{std::exp(ld), ld};
  } catch (const SingularError&) {
    throw SingularError(std::string(what) + " is singular to working precision");
  }
}

}  // namespace

EpiInstance::EpiInstance(SymMatrix sigma_x, SymMatrix sigma_z, SymMatrix a,
                         double tol)
    : sigma_x_(std::move(sigma_x)),
      sigma_z_(std::move(sigma_z)),
      a_(std::move(a)) {
  if (sigma_x_.dim() != sigma_z_.dim() || sigma_x_.dim() != a_.dim()) {
    throw DimensionError("EpiInstance: sigma_x, sigma_z, a must share one dimension");
  }
  if (!is_psd(a_, tol)) {
    throw NotPsdError("EpiInstance: a is not PSD\n" + format_matrix(a_.mat()));
  }
  if (!loewner_leq(a_, SymMatrix::identity(a_.dim()), tol)) {
    throw NotPsdError("EpiInstance: a exceeds I in the Loewner order\n" +
                      format_matrix(a_.mat()));
  }
  if (!is_psd(sigma_x_, tol)) {
    throw NotPsdError("EpiInstance: sigma_x is not PSD");
  }
  if (!is_psd(sigma_z_, tol)) {
    throw NotPsdError("EpiInstance: sigma_z is not PSD");
  }
}

EpiReport costa_check(const EpiInstance& inst, double tol) {
  const Eigen::Index n = inst.dim();
  const double dn = static_cast<double>(n);
  const SymMatrix root = inst.a_sqrt();
  const SymMatrix i_minus_a(Eigen::MatrixXd::Identity(n, n) - inst.a().mat());
  const SymMatrix lhs_cov(inst.sigma_x().mat() +
                          root.mat() * inst.sigma_z().mat() * root.mat());

  const DetValue d_ima = det_psd(i_minus_a);
  const DetValue d_a = det_psd(inst.a());
  const DetValue d_x = det_psd(inst.sigma_x());
  const DetValue d_xz =
      det_psd(SymMatrix(inst.sigma_x().mat() + inst.sigma_z().mat()));
  const DetValue d_lhs =
      det_pd_strict(lhs_cov, "costa_check: sigma_x + a^{1/2} sigma_z a^{1/2}");

  EpiReport r;
  r.log_lhs = kLog2PiE + d_lhs.log_value / dn;
  r.log_rhs_term_x = kLog2PiE + (d_ima.log_value + d_x.log_value) / dn;
  r.log_rhs_term_xz = kLog2PiE + (d_a.log_value + d_xz.log_value) / dn;
  r.lhs = finite_exp(r.log_lhs);
  r.rhs_term_x = finite_exp(r.log_rhs_term_x);
  r.rhs_term_xz = finite_exp(r.log_rhs_term_xz);
  r.rhs = r.rhs_term_x + r.rhs_term_xz;
  r.gap = r.lhs - r.rhs;
  r.violated = r.gap < -tol * std::max(r.lhs, r.rhs);
  r.dets = {{"i_minus_a", d_ima.value, d_ima.log_value},
            {"a", d_a.value, d_a.log_value},
            {"sigma_x", d_x.value, d_x.log_value},
            {"sigma_x_plus_sigma_z", d_xz.value, d_xz.log_value},
            {"lhs_cov", d_lhs.value, d_lhs.log_value}};
  return r;
}

SplitResidual splitting_identity_residual(const SymMatrix& a,
                                          const SymMatrix& sigma_z) {
  if (a.dim() != sigma_z.dim()) {
    throw DimensionError("splitting_identity_residual: dimension mismatch");
  }
  const Eigen::Index n = a.dim();
  const SymMatrix root_a = psd_sqrt(a);
  const SymMatrix root_ima =
      psd_sqrt(SymMatrix(Eigen::MatrixXd::Identity(n, n) - a.mat()));
  SplitResidual out;
  out.residual = SymMatrix(root_a.mat() * sigma_z.mat() * root_a.mat() +
                           root_ima.mat() * sigma_z.mat() * root_ima.mat() -
                           sigma_z.mat());
  out.norm = out.residual.max_abs();
  return out;
}

EpiReport triple_epi_check(const SymMatrix& sigma_x, const SymMatrix& sigma_y,
                           const SymMatrix& sigma_w, double tol) {
  if (sigma_x.dim() != sigma_y.dim() || sigma_x.dim() != sigma_w.dim()) {
    throw DimensionError("triple_epi_check: dimension mismatch");
  }
  const Eigen::Index n = sigma_x.dim();
  const double dn = static_cast<double>(n);

  const DetValue d_x = det_pd_strict(sigma_x, "triple_epi_check: sigma_x");
  const DetValue d_y = det_pd_strict(sigma_y, "triple_epi_check: sigma_y");
  const DetValue d_w = det_pd_strict(sigma_w, "triple_epi_check: sigma_w");
  const DetValue d_xw = det_pd_strict(
      SymMatrix(sigma_x.mat() + sigma_w.mat()), "triple_epi_check: sigma_x + sigma_w");
  const DetValue d_yw = det_pd_strict(
      SymMatrix(sigma_y.mat() + sigma_w.mat()), "triple_epi_check: sigma_y + sigma_w");
  const DetValue d_xyw =
      det_pd_strict(SymMatrix(sigma_x.mat() + sigma_y.mat() + sigma_w.mat()),
                    "triple_epi_check: sigma_x + sigma_y + sigma_w");

  EpiReport r;
  r.log_lhs = 2.0 * kLog2PiE + (d_xw.log_value + d_yw.log_value) / dn;
  r.log_rhs_term_x = 2.0 * kLog2PiE + (d_x.log_value + d_y.log_value) / dn;
  r.log_rhs_term_xz = 2.0 * kLog2PiE + (d_w.log_value + d_xyw.log_value) / dn;
  r.lhs = finite_exp(r.log_lhs);
  r.rhs_term_x = finite_exp(r.log_rhs_term_x);
  r.rhs_term_xz = finite_exp(r.log_rhs_term_xz);
  r.rhs = r.rhs_term_x + r.rhs_term_xz;
  r.gap = r.lhs - r.rhs;
  r.violated = r.gap < -tol * std::max(r.lhs, r.rhs);
  r.dets = {{"sigma_x", d_x.value, d_x.log_value},
            {"sigma_y", d_y.value, d_y.log_value},
            {"sigma_w", d_w.value, d_w.log_value},
            {"x_plus_w", d_xw.value, d_xw.log_value},
            {"y_plus_w", d_yw.value, d_yw.log_value},
            {"x_plus_y_plus_w", d_xyw.value, d_xyw.log_value}};
  return r;
}

EpiReport commuting_case_check(const EpiInstance& inst, double tol) {
  if (!commutes(inst.a(), inst.sigma_z(), tol)) {
    throw PreconditionError(
        "commuting_case_check: a and sigma_z do not commute; use costa_check for "
        "non-commuting instances");
  }
  EpiReport r = costa_check(inst, tol);
  if (r.violated) {
    r.note =
        "commuting_case_check: gap below -tol*scale on a commuting instance; the "
        "theorem guarantees non-violation, so this indicates an "
        "implementation or tolerance bug";
  } else {
    r.note = "commuting instance: theorem applies, gap >= 0 guaranteed";
  }
  return r;
}

std::vector<GammaDiagnostic> gamma_path(const EpiInstance& inst,
                                        const std::vector<double>& gammas,
                                        double tol) {
  const Eigen::Index n = inst.dim();
  const double dn = static_cast<double>(n);
  for (double g : gammas) {
    if (!(g >= 0.0) || g >= kGammaMax) {
      std::ostringstream os;
      os << "gamma_path: gamma = " << g << " outside [0, 1); at gamma = 1 the "
         << "path endpoint is a^{-1/2}, so d_gamma^{-2} may be undefined";
      throw DomainError(os.str());
    }
  }

  const EigenDecomposition a_eig = sym_eig(inst.a());
  const bool needs_inverse =
      std::any_of(gammas.begin(), gammas.end(), [](double g) { return g > 0.0; });
  const double a_scale = std::max(1.0, a_eig.eigenvalues.cwiseAbs().maxCoeff());
  if (needs_inverse && a_eig.eigenvalues.minCoeff() <= tol * a_scale) {
    throw DomainError(
        "gamma_path: a must be strictly PD for gamma > 0 (the path uses "
        "a^{-1})");
  }

  Eigen::LLT<Eigen::MatrixXd> z_llt(inst.sigma_z().mat());
  if (z_llt.info() != Eigen::Success) {
    throw SingularError("gamma_path: sigma_z is not strictly PD");
  }

  std::vector<GammaDiagnostic> out;
  out.reserve(gammas.size());
  for (double g : gammas) {
    GammaDiagnostic d;
    d.gamma = g;

    Eigen::VectorXd d2_eigs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      d2_eigs(i) = g == 0.0 ? 1.0 : 1.0 + g * (1.0 / a_eig.eigenvalues(i) - 1.0);
    }
    const Eigen::MatrixXd& u = a_eig.basis;
    d.d_gamma = SymMatrix(u * d2_eigs.cwiseSqrt().asDiagonal() * u.transpose());
    const Eigen::MatrixXd i_minus_dm2 =
        u * (1.0 - d2_eigs.array().inverse()).matrix().asDiagonal() *
        u.transpose();

    d.cond_cov = conditional_cov(inst.sigma_x(), inst.sigma_z(), d.d_gamma);
    d.k_matrix = z_llt.solve(d.cond_cov.mat()) * i_minus_dm2;

    Eigen::EigenSolver<Eigen::MatrixXd> es(d.k_matrix);
    if (es.info() != Eigen::Success) {
      throw Error("gamma_path: eigensolver failed on the AM-GM product matrix");
    }
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    const auto& ev = es.eigenvalues();
    std::sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
      if (ev(i).real() != ev(j).real()) return ev(i).real() < ev(j).real();
      return ev(i).imag() < ev(j).imag();
    });
    d.eig_real.resize(n);
    d.eig_imag.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      d.eig_real(i) = ev(order[i]).real();
      d.eig_imag(i) = ev(order[i]).imag();
    }
    const double k_scale = 1.0 + d.k_matrix.cwiseAbs().maxCoeff();
    d.has_complex = d.eig_imag.cwiseAbs().maxCoeff() > tol * k_scale;

    const double det_k = d.k_matrix.partialPivLu().determinant();
    d.trace_side = d.k_matrix.trace() / dn;
    if (det_k >= 0.0) {
      d.det_side = std::pow(det_k, 1.0 / dn);
      d.det_side_defined = true;
    } else if (n % 2 == 1) {
      d.det_side = -std::pow(-det_k, 1.0 / dn);
      d.det_side_defined = true;
    } else {
      d.det_side = kNaN;  // no real n-th root: the AM-GM left side is undefined
      d.det_side_defined = false;
    }
    d.amgm_holds = d.det_side_defined && d.det_side <= d.trace_side + tol;

    const double asym =
        (d.k_matrix - d.k_matrix.transpose()).cwiseAbs().maxCoeff();
    if (asym <= tol * k_scale) {
      d.k_psd = is_psd(SymMatrix(0.5 * (d.k_matrix + d.k_matrix.transpose())), tol);
    } else {
      d.k_psd = false;
    }
    out.push_back(std::move(d));
  }
  return out;
}

CanonicalReduction reduce_to_canonical(const EpiInstance& inst, double tol) {
  if (!commutes(inst.a(), inst.sigma_z(), tol)) {
    throw PreconditionError(
        "reduce_to_canonical: a and sigma_z do not commute");
  }
  const Eigen::Index n = inst.dim();

  // Whitening by sigma_z^{-1/2} sends sigma_z to I exactly and, because a
  // commutes with sigma_z, leaves a in place; a's own eigenbasis then
  // finishes the job. Avoiding a joint eigenbasis keeps the reduction
  // accurate when a has near-degenerate eigenvalues.
  const EigenDecomposition z_eig = sym_eig(inst.sigma_z());
  if (z_eig.eigenvalues.minCoeff() <= 0.0) {
    throw SingularError("reduce_to_canonical: sigma_z is singular");
  }
  const Eigen::MatrixXd whiten = z_eig.basis *
                                 z_eig.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal() *
                                 z_eig.basis.transpose();

  const EigenDecomposition a_eig = sym_eig(inst.a());
  Eigen::VectorXd a_diag = a_eig.eigenvalues;
  for (Eigen::Index i = 0; i < n; ++i) {
    a_diag(i) = std::clamp(a_diag(i), 0.0, 1.0);
  }
  const Eigen::MatrixXd sigma_x_canon =
      a_eig.basis.transpose() * whiten * inst.sigma_x().mat() * whiten *
      a_eig.basis;

  CanonicalReduction out{
      EpiInstance(SymMatrix(sigma_x_canon), SymMatrix::identity(n),
                  SymMatrix::from_diagonal(a_diag), tol),
      std::exp(z_eig.eigenvalues.array().log().sum() / static_cast<double>(n))};
  return out;
}

EpiInstance counterexample_instance() {
  Eigen::MatrixXd sigma_x(2, 2), sigma_z(2, 2);
  sigma_x << 200, 100, 100, 51;
  sigma_z << 200, 0, 0, 1;
  const Eigen::MatrixXd root = counterexample_a_sqrt().mat();
  return EpiInstance(SymMatrix(sigma_x), SymMatrix(sigma_z),
                     SymMatrix(root * root));
}

SymMatrix counterexample_a_sqrt() {
  Eigen::MatrixXd root(2, 2);
  root << 10, 5, 5, 17;
  return SymMatrix(root / 20.0);
}

}  // namespace costa
