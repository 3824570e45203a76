// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "costa/epi.hpp"
#include "costa/mc_entropy.hpp"
#include "helpers.hpp"

using namespace costa;

namespace {

MixtureSpec fixture_x() {
  Eigen::MatrixXd sx(2, 2);
  sx << 200, 100, 100, 51;
  return MixtureSpec::single_gaussian(SymMatrix(sx));
}

}  // namespace

TEST_CASE("mixture validation") {
  MixtureSpec bad;
  bad.components.push_back({0.6, Eigen::VectorXd::Zero(2), SymMatrix::identity(2)});
  bad.components.push_back({0.6, Eigen::VectorXd::Zero(2), SymMatrix::identity(2)});
  CHECK_THROWS_AS(bad.validate(), Error);  // weights sum to 1.2

  MixtureSpec singular;
  Eigen::VectorXd d(2);
  d << 1, 0;
  singular.components.push_back(
      {1.0, Eigen::VectorXd::Zero(2), SymMatrix::from_diagonal(d)});
  CHECK_THROWS_AS(singular.validate(), NotPsdError);
}

TEST_CASE("sampling matches the target covariance") {
  const Eigen::MatrixXd s =
      sample(GaussianVector(SymMatrix::identity(3)), 100000, 7);
  const Eigen::MatrixXd cov =
      s.transpose() * s / static_cast<double>(s.rows());
  for (Eigen::Index i = 0; i < 3; ++i) {
    CHECK(cov(i, i) == doctest::Approx(1.0).epsilon(0.05));
    for (Eigen::Index j = 0; j < i; ++j) {
      CHECK(std::abs(cov(i, j)) <= 0.02);
    }
  }
}

TEST_CASE("single-component mixture equals the gaussian sampler stream") {
  Eigen::MatrixXd c(2, 2);
  c << 4, 1, 1, 2;
  const MixtureSpec spec = MixtureSpec::single_gaussian(SymMatrix(c));
  const Eigen::MatrixXd a = sample(spec, 500, 31);
  const Eigen::MatrixXd b = sample(GaussianVector(SymMatrix(c)), 500, 31);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("symmetric bimodal mixture has near-zero mean") {
  MixtureSpec spec;
  Eigen::VectorXd mu(2);
  mu << 4, 0;
  spec.components.push_back({0.5, mu, SymMatrix::identity(2)});
  spec.components.push_back({0.5, -mu, SymMatrix::identity(2)});
  const std::size_t m = 100000;
  const Eigen::MatrixXd s = sample(spec, m, 19);
  const Eigen::VectorXd mean = s.colwise().mean();
  // per-coordinate variance is about mu^2 + 1; three standard errors of the mean
  const double se0 = std::sqrt((mu(0) * mu(0) + 1.0) / static_cast<double>(m));
  CHECK(std::abs(mean(0)) <= 3.0 * se0);
  CHECK(std::abs(mean(1)) <= 3.0 * std::sqrt(1.0 / static_cast<double>(m)));
}

TEST_CASE("pruned neighbor distances equal the brute-force scan") {
  Rng rng(23);
  for (Eigen::Index n : {1, 2, 3}) {
    Eigen::MatrixXd pts(1500, n);
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      for (Eigen::Index j = 0; j < n; ++j) pts(i, j) = 3.0 * rng.normal();
    }
    const std::vector<double> fast = knn_distances(pts, 5);
    const std::vector<double> slow = knn_distances_bruteforce(pts, 5);
    REQUIRE(fast.size() == slow.size());
    for (std::size_t i = 0; i < fast.size(); ++i) {
      CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("knn entropy hits the closed form on Gaussian fixtures") {
  Eigen::MatrixXd one(1, 1);
  one << 1.0;
  const Eigen::MatrixXd s1 = sample(GaussianVector(SymMatrix(one)), 100000, 41);
  const EntropyEstimate e1 = knn_entropy(s1, 5);
  const double exact1 = gaussian_entropy(GaussianVector(SymMatrix(one)));
  CHECK(std::abs(e1.estimate - exact1) / exact1 <= 0.02);

  Eigen::MatrixXd sx(2, 2);
  sx << 200, 100, 100, 51;
  const Eigen::MatrixXd s2 = sample(GaussianVector(SymMatrix(sx)), 100000, 42);
  const EntropyEstimate e2 = knn_entropy(s2, 5);
  const double exact2 = gaussian_entropy(GaussianVector(SymMatrix(sx)));
  CHECK(std::abs(e2.estimate - exact2) / exact2 <= 0.02);
}

TEST_CASE("knn entropy scaling law h(cX) = h(X) + n log c") {
  Rng rng(29);
  Eigen::MatrixXd pts(20000, 2);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    for (Eigen::Index j = 0; j < 2; ++j) pts(i, j) = rng.normal();
  }
  const double c = 3.5;
  const EntropyEstimate base = knn_entropy(pts, 5);
  const EntropyEstimate scaled = knn_entropy(c * pts, 5);
  const double shift = 2.0 * std::log(c);
  CHECK(std::abs(scaled.estimate - base.estimate - shift) <=
        3.0 * (base.standard_error + scaled.standard_error) + 1e-6);
}

TEST_CASE("knn entropy is exactly translation invariant on grid-aligned data") {
  // Quantized samples keep x + 1 exact in floating point, so the distances
  // and therefore the estimate are bit-identical.
  Rng rng(31);
  Eigen::MatrixXd pts(5000, 2);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    for (Eigen::Index j = 0; j < 2; ++j) {
      pts(i, j) = std::round(rng.normal() * 1048576.0) / 1048576.0;
    }
  }
  const EntropyEstimate a = knn_entropy(pts, 5);
  const EntropyEstimate b = knn_entropy(
      pts + Eigen::MatrixXd::Constant(pts.rows(), pts.cols(), 1.0), 5);
  CHECK(a.estimate == b.estimate);
  CHECK(a.standard_error == b.standard_error);
}

TEST_CASE("duplicate points are jittered, not fatal") {
  Eigen::MatrixXd pts(40, 2);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    pts(i, 0) = static_cast<double>(i % 5);
    pts(i, 1) = static_cast<double>(i % 3);
  }
  const EntropyEstimate e = knn_entropy(pts, 3);
  CHECK(std::isfinite(e.estimate));
}

TEST_CASE("knn entropy rejects m <= k") {
  Eigen::MatrixXd pts = Eigen::MatrixXd::Random(4, 2);
  CHECK_THROWS_AS(knn_entropy(pts, 4), DomainError);
  CHECK_THROWS_AS(knn_entropy(pts, 0), DomainError);
}

TEST_CASE("estimator consistency: coverage at three standard errors") {
  // (n, m, k) chosen so the k-NN bias stays inside the band; k is exposed
  // for exactly this reason.
  struct Setup {
    Eigen::Index n;
    std::size_t m;
    int k;
  };
  for (const Setup& s : {Setup{1, 4096, 5}, Setup{2, 4096, 5}, Setup{3, 8192, 2}}) {
    const SymMatrix cov = SymMatrix::identity(s.n);
    const double exact = gaussian_entropy(GaussianVector(cov));
    int hits = 0;
    const int reps = 100;
    for (int rep = 0; rep < reps; ++rep) {
      const Eigen::MatrixXd pts =
          sample(GaussianVector(cov), s.m, 9000 + static_cast<std::uint64_t>(rep));
      const EntropyEstimate e = knn_entropy(pts, s.k);
      if (std::abs(e.estimate - exact) <= 3.0 * e.standard_error) ++hits;
    }
    CHECK(hits >= 95);
  }
}

TEST_CASE("mc_commuting_check on the exact Gaussian slice") {
  Eigen::VectorXd dz(2), da(2);
  dz << 200, 1;
  da << 0.25, 0.81;
  const SymMatrix sigma_z = SymMatrix::from_diagonal(dz);
  const SymMatrix a = SymMatrix::from_diagonal(da);
  const McReport r = mc_commuting_check(fixture_x(), sigma_z, a, 40000, 5, 1);
  CHECK(r.conclusion == McConclusion::consistent);

  // the exact evaluator is the oracle for both sides
  Eigen::MatrixXd sx(2, 2);
  sx << 200, 100, 100, 51;
  const EpiReport exact =
      costa_check(EpiInstance(SymMatrix(sx), sigma_z, a));
  CHECK(std::abs(r.lhs_estimate - exact.lhs) / exact.lhs <= 0.05);
  CHECK(std::abs(r.rhs_estimate - exact.rhs) / exact.rhs <= 0.05);
}

TEST_CASE("mc_commuting_check a = 0 edge: both sides estimate EP(X)") {
  const McReport r = mc_commuting_check(fixture_x(), SymMatrix::identity(2),
                                       SymMatrix::zero(2), 30000, 5, 3);
  CHECK(r.conclusion == McConclusion::consistent);
  CHECK(std::abs(r.lhs_estimate - r.rhs_estimate) <=
        3.0 * (r.se_lhs + r.se_rhs));
}

TEST_CASE("mc_commuting_check accepts a bimodal mixture") {
  MixtureSpec spec;
  Eigen::VectorXd mu(2);
  mu << 4, 0;
  spec.components.push_back({0.5, mu, SymMatrix::identity(2)});
  spec.components.push_back({0.5, -mu, SymMatrix::identity(2)});
  Eigen::VectorXd dz(2), da(2);
  dz << 2, 1;
  da << 0.5, 0.3;
  const McReport r = mc_commuting_check(spec, SymMatrix::from_diagonal(dz),
                                       SymMatrix::from_diagonal(da), 40000, 5, 1);
  CHECK(r.conclusion == McConclusion::consistent);
}

TEST_CASE("mc_commuting_check rejects non-commuting inputs") {
  const EpiInstance fixture = counterexample_instance();
  CHECK_THROWS_AS(mc_commuting_check(fixture_x(), fixture.sigma_z(), fixture.a(),
                                    1000, 5, 1),
                  PreconditionError);
}

TEST_CASE("no suspicious verdicts on the Gaussian commuting sweep") {
  Rng rng(55);
  for (int trial = 0; trial < 4; ++trial) {
    Eigen::VectorXd dz(2), da(2);
    dz << rng.log_uniform(0.5, 50.0), rng.log_uniform(0.5, 50.0);
    da << rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9);
    const McReport r = mc_commuting_check(
        MixtureSpec::single_gaussian(random_spd(2, 1.0, 30.0, rng)),
        SymMatrix::from_diagonal(dz), SymMatrix::from_diagonal(da), 20000, 5,
        100 + static_cast<std::uint64_t>(trial));
    CHECK(r.conclusion != McConclusion::suspicious);
  }
}
