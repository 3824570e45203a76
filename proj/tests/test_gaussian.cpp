// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "costa/gaussian.hpp"
#include "costa/mc_entropy.hpp"
#include "helpers.hpp"

using namespace costa;
using costa::testing::random_psd;
using costa::testing::rel_frobenius;

namespace {
const double kTwoPiE = 2.0 * M_PI * std::exp(1.0);
}

TEST_CASE("standard normal entropy") {
  Eigen::MatrixXd one(1, 1);
  one << 1.0;
  const double h = gaussian_entropy(GaussianVector(SymMatrix(one)));
  CHECK(h == doctest::Approx(0.5 * std::log(kTwoPiE)).epsilon(1e-12));
  CHECK(h == doctest::Approx(1.4189).epsilon(1e-4));
}

TEST_CASE("fixture sigma_x entropy via the hand determinant") {
  Eigen::MatrixXd sx(2, 2);
  sx << 200, 100, 100, 51;
  // det = 200*51 - 100^2 = 200 by hand
  const double h = gaussian_entropy(GaussianVector(SymMatrix(sx)));
  CHECK(h == doctest::Approx(0.5 * std::log(kTwoPiE * kTwoPiE * 200.0))
                 .epsilon(1e-12));
}

TEST_CASE("singular covariance reports minus infinity, not a number") {
  Eigen::VectorXd d(2);
  d << 1, 0;
  const double h = gaussian_entropy(GaussianVector(SymMatrix::from_diagonal(d)));
  CHECK(h == -std::numeric_limits<double>::infinity());
  CHECK(entropy_power(h, 2) == 0.0);
}

TEST_CASE("entropy power identity on random PD covariances") {
  Rng rng(42);
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.index(8));
    const SymMatrix cov = random_spd(n, 1e-2, 1e3, rng);
    const double h = gaussian_entropy(GaussianVector(cov));
    const double ep = entropy_power(h, n);
    const double expected =
        kTwoPiE * std::exp(log_det_pd(cov) / static_cast<double>(n));
    CHECK(ep == doctest::Approx(expected).epsilon(1e-9));
    CHECK(log_entropy_power(h, n) == doctest::Approx(std::log(ep)).epsilon(1e-12));
  }
}

TEST_CASE("entropy is monotone under PSD bumps") {
  Rng rng(43);
  for (int trial = 0; trial < 25; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.index(5));
    const SymMatrix cov = random_spd(n, 1e-1, 1e2, rng);
    const SymMatrix bump = random_psd(n, rng);
    const double h0 = gaussian_entropy(GaussianVector(cov));
    const double h1 =
        gaussian_entropy(GaussianVector(SymMatrix(cov.mat() + bump.mat())));
    CHECK(h1 >= h0 - 1e-12);
  }
}

TEST_CASE("conditional covariance edge cases") {
  Eigen::MatrixXd sx(2, 2), sz(2, 2);
  sx << 200, 100, 100, 51;
  sz << 200, 0, 0, 1;

  // conditioning on Z itself (M = 0 makes Y = Z)
  const SymMatrix c0 =
      conditional_cov(SymMatrix(sx), SymMatrix(sz), SymMatrix::zero(2));
  CHECK(c0.max_abs() <= 1e-9 * 200.0);

  // sigma_x = 0: Y = M*0 + Z again
  const SymMatrix c1 =
      conditional_cov(SymMatrix::zero(2), SymMatrix(sz), SymMatrix::identity(2));
  CHECK(c1.max_abs() <= 1e-9 * 200.0);

  CHECK_THROWS_AS(conditional_cov(SymMatrix::zero(2), SymMatrix::zero(2),
                                  SymMatrix::identity(2)),
                  SingularError);
}

TEST_CASE("conditional covariance is PSD and below sigma_z") {
  Rng rng(44);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.index(5));
    const SymMatrix sx = random_spd(n, 1e-1, 1e2, rng);
    const SymMatrix sz = random_spd(n, 1e-1, 1e2, rng);
    const SymMatrix m = random_psd(n, rng);
    const SymMatrix cc = conditional_cov(sx, sz, m);
    CHECK(is_psd(cc, 1e-8));
    CHECK(loewner_leq(cc, sz, 1e-8));
  }
}

TEST_CASE("conditional covariance agrees with a sampled regression") {
  // Cross-check by linear regression of Z on M X + Z over 1e5 paired samples.
  Eigen::MatrixXd sx(2, 2), sz(2, 2), mm(2, 2);
  sx << 200, 100, 100, 51;
  sz << 200, 0, 0, 1;
  mm << 0.8, 0.1, 0.1, 0.9;
  const SymMatrix sigma_x(sx), sigma_z(sz), m_mat(mm);
  const SymMatrix exact = conditional_cov(sigma_x, sigma_z, m_mat);

  const std::size_t samples = 100000;
  const Eigen::MatrixXd xs = sample(GaussianVector(sigma_x), samples, 991);
  const Eigen::MatrixXd zs = sample(GaussianVector(sigma_z), samples, 992);
  const Eigen::MatrixXd ys = xs * m_mat.mat().transpose() + zs;

  const double dm = static_cast<double>(samples);
  const Eigen::MatrixXd cyy = ys.transpose() * ys / dm;
  const Eigen::MatrixXd czy = zs.transpose() * ys / dm;
  const Eigen::MatrixXd czz = zs.transpose() * zs / dm;
  const Eigen::MatrixXd sampled =
      czz - czy * cyy.ldlt().solve(czy.transpose());

  for (Eigen::Index i = 0; i < 2; ++i) {
    for (Eigen::Index j = 0; j < 2; ++j) {
      // s.e. of a sample covariance entry of the residual
      const double se = std::sqrt(
          (exact(i, i) * exact(j, j) + exact(i, j) * exact(i, j)) / dm);
      CHECK(std::abs(sampled(i, j) - exact(i, j)) <= 3.0 * se);
    }
  }
}
