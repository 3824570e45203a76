// SPDX-License-Identifier: Apache-2.0
#include "costa/gaussian.hpp"

#include <cmath>
#include <limits>

namespace costa {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLog2PiE = std::log(2.0 * M_PI) + 1.0;
}  // namespace

GaussianVector::GaussianVector(SymMatrix cov, double tol) : cov_(std::move(cov)) {
  if (!is_psd(cov_, tol)) {
    throw NotPsdError("GaussianVector: covariance is not PSD\n" +
                      format_matrix(cov_.mat()));
  }
}

double gaussian_entropy(const GaussianVector& g, double tol) {
  const Eigen::Index n = g.dim();
  double log_det;
  try {
    log_det = log_det_pd(g.cov(), tol);
  } catch (const SingularError&) {
    return -kInf;
  }
  return 0.5 * (static_cast<double>(n) * kLog2PiE + log_det);
}

double entropy_power(double h_nats, Eigen::Index n) {
  if (h_nats == -kInf) return 0.0;
  return std::exp(2.0 * h_nats / static_cast<double>(n));
}

double log_entropy_power(double h_nats, Eigen::Index n) {
  return 2.0 * h_nats / static_cast<double>(n);
}

SymMatrix conditional_cov(const SymMatrix& sigma_x, const SymMatrix& sigma_z,
                          const SymMatrix& m) {
  if (sigma_x.dim() != sigma_z.dim() || sigma_x.dim() != m.dim()) {
    throw DimensionError("conditional_cov: dimension mismatch");
  }
  const Eigen::MatrixXd obs_cov =
      m.mat() * sigma_x.mat() * m.mat().transpose() + sigma_z.mat();
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (obs_cov + obs_cov.transpose()));
  if (llt.info() != Eigen::Success) {
    throw SingularError(
        "conditional_cov: M sigma_x M^T + sigma_z is not strictly PD\n" +
        format_matrix(obs_cov));
  }
  const Eigen::MatrixXd reduction = sigma_z.mat() * llt.solve(sigma_z.mat());
  return SymMatrix(sigma_z.mat() - reduction);
}

}  // namespace costa
