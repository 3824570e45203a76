// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "costa/epi.hpp"
#include "helpers.hpp"

using namespace costa;
using costa::testing::random_commuting_pair;
using costa::testing::random_psd;

namespace {

const double kTwoPiE = 2.0 * M_PI * std::exp(1.0);

// Closed-form square root of a 2x2 PSD matrix:
//   sqrt(M) = (M + sqrt(det M) I) / sqrt(tr M + 2 sqrt(det M)).
// Independent of the eigendecomposition route used by the library.
Eigen::MatrixXd sqrt2x2(const Eigen::MatrixXd& m) {
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const double s = std::sqrt(det);
  const double t = std::sqrt(m.trace() + 2.0 * s);
  return (m + s * Eigen::MatrixXd::Identity(2, 2)) / t;
}

EpiInstance commuting_instance(Eigen::Index n, Rng& rng) {
  const auto pair = random_commuting_pair(n, rng);
  const SymMatrix sigma_x = random_spd(n, 1e-2, 1e3, rng);
  return EpiInstance(sigma_x, pair.b, pair.a);
}

}  // namespace

TEST_CASE("instance validation") {
  Eigen::MatrixXd sx(2, 2);
  sx << 200, 100, 100, 51;
  CHECK_THROWS_AS(EpiInstance(SymMatrix(sx), SymMatrix::identity(2),
                              SymMatrix(2.0 * Eigen::MatrixXd::Identity(2, 2))),
                  NotPsdError);  // a exceeds I
  CHECK_THROWS_AS(EpiInstance(SymMatrix(sx), SymMatrix::identity(3),
                              SymMatrix::identity(2)),
                  DimensionError);
  Eigen::MatrixXd neg = -Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(EpiInstance(SymMatrix(sx), SymMatrix::identity(2),
                              SymMatrix(neg)),
                  NotPsdError);
}

TEST_CASE("counterexample fixture reproduces the printed values") {
  const EpiReport r = costa_check(counterexample_instance());
  CHECK(r.lhs / kTwoPiE >= 19.52);
  CHECK(r.lhs / kTwoPiE <= 19.54);
  CHECK(r.rhs / kTwoPiE >= 40.27);
  CHECK(r.rhs / kTwoPiE <= 40.29);
  CHECK(r.violated);
  CHECK(r.rhs == r.rhs_term_x + r.rhs_term_xz);
  CHECK(r.gap == r.lhs - r.rhs);
  // det record sanity: det(sigma_x) = 200 by hand
  for (const auto& d : r.dets) {
    if (d.name == "sigma_x") CHECK(d.value == doctest::Approx(200.0));
  }
}

TEST_CASE("endpoint identities: a = I and a = 0 give zero gap") {
  Rng rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.index(5));
    const SymMatrix sx = random_spd(n, 1e-2, 1e3, rng);
    const SymMatrix sz = random_spd(n, 1e-2, 1e3, rng);

    const EpiReport at_identity =
        costa_check(EpiInstance(sx, sz, SymMatrix::identity(n)));
    CHECK(std::abs(at_identity.gap) <=
          1e-9 * std::max(at_identity.lhs, at_identity.rhs));
    CHECK_FALSE(at_identity.violated);

    const EpiReport at_zero =
        costa_check(EpiInstance(sx, sz, SymMatrix::zero(n)));
    CHECK(std::abs(at_zero.gap) <=
          1e-9 * std::max(at_zero.lhs, at_zero.rhs));
  }
}

TEST_CASE("splitting identity: commuting pairs cancel, the counterexample pair does not") {
  Eigen::VectorXd da(2), dz(2);
  da << 0.3, 0.8;
  dz << 5, 2;
  const SplitResidual diag = splitting_identity_residual(
      SymMatrix::from_diagonal(da), SymMatrix::from_diagonal(dz));
  CHECK(diag.norm <= 1e-12 * 5.0);

  const EpiInstance fixture = counterexample_instance();
  const SplitResidual bad =
      splitting_identity_residual(fixture.a(), fixture.sigma_z());
  CHECK(bad.norm > 0.1);

  // Independent oracle: evaluate the residual with the closed-form 2x2 roots.
  const Eigen::MatrixXd ra = sqrt2x2(fixture.a().mat());
  const Eigen::MatrixXd rima =
      sqrt2x2(Eigen::MatrixXd::Identity(2, 2) - fixture.a().mat());
  const Eigen::MatrixXd z = fixture.sigma_z().mat();
  const Eigen::MatrixXd oracle = ra * z * ra + rima * z * rima - z;
  CHECK((bad.residual.mat() - oracle).cwiseAbs().maxCoeff() <= 1e-9 * 200.0);

  // scalar a commutes with everything
  Rng rng(8);
  const SymMatrix any_z = random_psd(3, rng, 2.0);
  const SplitResidual half = splitting_identity_residual(
      SymMatrix(0.5 * Eigen::MatrixXd::Identity(3, 3)), any_z);
  CHECK(half.norm <= 1e-12 * (1.0 + any_z.max_abs()));
}

TEST_CASE("triple EPI: hand-checked equality at matched scalar Gaussians") {
  Eigen::MatrixXd one(1, 1);
  one << 1.0;
  const EpiReport r = triple_epi_check(SymMatrix(one), SymMatrix(one),
                                       SymMatrix(one));
  // lhs = (2 pi e * 2)^2, rhs = (2 pi e)^2 + 2 pi e * (2 pi e * 3)
  CHECK(r.lhs == doctest::Approx(4.0 * kTwoPiE * kTwoPiE).epsilon(1e-12));
  CHECK(r.rhs == doctest::Approx(4.0 * kTwoPiE * kTwoPiE).epsilon(1e-12));
  CHECK(std::abs(r.gap) <= 1e-9 * r.lhs);
}

TEST_CASE("triple EPI holds on random Gaussian triples") {
  Rng rng(9);
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.index(6));
    const EpiReport r =
        triple_epi_check(random_spd(n, 1e-2, 1e3, rng),
                         random_spd(n, 1e-2, 1e3, rng),
                         random_spd(n, 1e-2, 1e3, rng));
    CHECK(r.gap >= -1e-9 * std::max(r.lhs, r.rhs));
  }
}

TEST_CASE("triple EPI specializes to the commuting-case inequality") {
  // With Y = (I-a)^{1/2} Z1 and W = a^{1/2} Z2 for commuting (a, sigma_z),
  // dividing the triple inequality by EP(Z) reproduces both costa sides.
  Rng rng(10);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.index(4));
    const EpiInstance inst = commuting_instance(n, rng);
    const SymMatrix root = inst.a_sqrt();
    const SymMatrix root_c = psd_sqrt(
        SymMatrix(Eigen::MatrixXd::Identity(n, n) - inst.a().mat()));
    const SymMatrix sigma_y(root_c.mat() * inst.sigma_z().mat() * root_c.mat());
    const SymMatrix sigma_w(root.mat() * inst.sigma_z().mat() * root.mat());

    const EpiReport triple =
        triple_epi_check(inst.sigma_x(), sigma_y, sigma_w);
    const EpiReport costa = costa_check(inst);
    const double ep_z = kTwoPiE * std::exp(log_det_pd(inst.sigma_z()) /
                                           static_cast<double>(n));
    CHECK(triple.lhs == doctest::Approx(costa.lhs * ep_z).epsilon(1e-9));
    CHECK(triple.rhs == doctest::Approx(costa.rhs * ep_z).epsilon(1e-9));
    CHECK(costa.gap >= -1e-9 * std::max(costa.lhs, costa.rhs));
  }
}

TEST_CASE("commuting_case_check on commuting instances") {
  Eigen::MatrixXd sx(2, 2);
  sx << 200, 100, 100, 51;
  Eigen::VectorXd dz(2), da(2);
  dz << 200, 1;
  da << 0.25, 0.81;
  const EpiInstance inst(SymMatrix(sx), SymMatrix::from_diagonal(dz),
                         SymMatrix::from_diagonal(da));
  const EpiReport r = commuting_case_check(inst);
  CHECK(r.gap >= 0.0);
  CHECK_FALSE(r.violated);

  // n = 1 always commutes: scalar Costa EPI for Gaussians
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd x(1, 1), z(1, 1), a(1, 1);
    x << rng.log_uniform(1e-2, 1e3);
    z << rng.log_uniform(1e-2, 1e3);
    a << rng.uniform01();
    const EpiReport sr =
        commuting_case_check(EpiInstance(SymMatrix(x), SymMatrix(z), SymMatrix(a)));
    CHECK(sr.gap >= -1e-9 * std::max(sr.lhs, sr.rhs));
  }

  // a = I: equality
  const EpiReport eq = commuting_case_check(
      EpiInstance(SymMatrix(sx), SymMatrix::from_diagonal(dz),
                  SymMatrix::identity(2)));
  CHECK(std::abs(eq.gap) <= 1e-9 * eq.lhs);

  CHECK_THROWS_AS(commuting_case_check(counterexample_instance()), PreconditionError);
}

TEST_CASE("commuting-case sweep over random commuting instances") {
  Rng rng(12);
  for (int trial = 0; trial < 2000; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.index(6));
    const EpiReport r = commuting_case_check(commuting_instance(n, rng));
    CHECK(r.gap >= -1e-9 * std::max(r.lhs, r.rhs));
  }
}

TEST_CASE("gamma path: zero gamma is the exact AM-GM equality point") {
  const std::vector<GammaDiagnostic> rows = gamma_path(counterexample_instance(), {0.0});
  const GammaDiagnostic& d = rows.front();
  CHECK(d.k_matrix.cwiseAbs().maxCoeff() == 0.0);
  CHECK(d.eig_real.cwiseAbs().maxCoeff() == 0.0);
  CHECK(d.det_side == 0.0);
  CHECK(d.trace_side == 0.0);
  CHECK(d.amgm_holds);
  CHECK(d.k_psd);
  CHECK((d.d_gamma.mat() - Eigen::MatrixXd::Identity(2, 2))
            .cwiseAbs()
            .maxCoeff() <= 1e-12);
}

TEST_CASE("gamma path reproduces the printed eigenvalues at gamma = 0.5") {
  const std::vector<GammaDiagnostic> rows = gamma_path(counterexample_instance(), {0.5});
  const GammaDiagnostic& d = rows.front();
  REQUIRE(d.eig_real.size() == 2);
  CHECK(std::abs(d.eig_real(0) - (-0.7273)) <= 5e-4);
  CHECK(std::abs(d.eig_real(1) - (-0.0053)) <= 5e-4);
  CHECK_FALSE(d.has_complex);
  CHECK_FALSE(d.amgm_holds);
  CHECK_FALSE(d.k_psd);
  // both eigenvalues negative with even n: det > 0, trace < 0, so the AM-GM
  // comparison det^{1/n} <= tr/n fails
  CHECK(d.det_side > 0.0);
  CHECK(d.trace_side < 0.0);
}

TEST_CASE("gamma path on commuting instances: AM-GM holds along the grid") {
  Rng rng(13);
  std::vector<double> gammas;
  for (double g = 0.0; g < 0.96; g += 0.05) gammas.push_back(g);
  for (int trial = 0; trial < 12; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.index(4));
    const EpiInstance inst = commuting_instance(n, rng);
    for (const GammaDiagnostic& d : gamma_path(inst, gammas)) {
      CHECK(d.amgm_holds);
      CHECK_FALSE(d.has_complex);
      // repaired identity: the symmetrized form is PSD and trace-equal
      const EigenDecomposition de = sym_eig(d.d_gamma);
      Eigen::VectorXd w(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d2 = de.eigenvalues(i) * de.eigenvalues(i);
        w(i) = 1.0 - 1.0 / d2;
      }
      const Eigen::MatrixXd half_m =
          de.basis * w.cwiseMax(0.0).cwiseSqrt().asDiagonal() *
          de.basis.transpose();
      const SymMatrix z_root_inv =
          psd_sqrt(SymMatrix(inst.sigma_z().mat().inverse()));
      const Eigen::MatrixXd symmetrized = half_m * z_root_inv.mat() *
                                          d.cond_cov.mat() * z_root_inv.mat() *
                                          half_m;
      CHECK(is_psd(SymMatrix(symmetrized), 1e-7));
      CHECK(symmetrized.trace() ==
            doctest::Approx(d.k_matrix.trace()).epsilon(1e-7));
    }
  }
}

TEST_CASE("gamma path invariant: PSD k implies AM-GM holds") {
  Rng rng(14);
  std::vector<double> gammas;
  for (double g = 0.0; g < 0.96; g += 0.07) gammas.push_back(g);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.index(4));
    const SymMatrix sx = random_spd(n, 1e-1, 1e2, rng);
    const SymMatrix sz = random_spd(n, 1e-1, 1e2, rng);
    Eigen::VectorXd a_eigs(n);
    for (Eigen::Index i = 0; i < n; ++i) a_eigs(i) = rng.uniform(0.05, 0.95);
    const Eigen::MatrixXd q = random_orthogonal(n, rng);
    const EpiInstance inst(sx, sz,
                           SymMatrix(q * a_eigs.asDiagonal() * q.transpose()));
    for (const GammaDiagnostic& d : gamma_path(inst, gammas)) {
      if (d.k_psd) CHECK(d.amgm_holds);
    }
  }
}

TEST_CASE("gamma path domain errors") {
  const EpiInstance fixture = counterexample_instance();
  CHECK_THROWS_AS(gamma_path(fixture, {1.0}), DomainError);
  CHECK_THROWS_AS(gamma_path(fixture, {1.5}), DomainError);
  CHECK_THROWS_AS(gamma_path(fixture, {-0.1}), DomainError);
  CHECK_THROWS_AS(gamma_path(fixture, {1.0 - 1e-13}), DomainError);
  CHECK_NOTHROW(gamma_path(fixture, {0.99}));

  // singular a: the path needs a^{-1} for gamma > 0, but gamma = 0 is fine
  Eigen::VectorXd zero_one(2);
  zero_one << 0.0, 0.5;
  const EpiInstance singular(fixture.sigma_x(), fixture.sigma_z(),
                             SymMatrix::from_diagonal(zero_one));
  CHECK_NOTHROW(gamma_path(singular, {0.0}));
  CHECK_THROWS_AS(gamma_path(singular, {0.5}), DomainError);
}

TEST_CASE("canonical reduction basics") {
  // already canonical: identity sigma_z, diagonal a
  Rng rng(15);
  Eigen::VectorXd da(2);
  da << 0.3, 0.7;
  const EpiInstance canon_in(random_spd(2, 0.5, 2.0, rng),
                             SymMatrix::identity(2),
                             SymMatrix::from_diagonal(da));
  const CanonicalReduction self = reduce_to_canonical(canon_in);
  CHECK(self.scale == doctest::Approx(1.0).epsilon(1e-12));
  const EpiReport before = costa_check(canon_in);
  const EpiReport after = costa_check(self.canonical);
  CHECK(after.gap == doctest::Approx(before.gap).epsilon(1e-9));

  // scale = det(diag(4, 9))^{1/2} = 6
  Eigen::VectorXd dz(2);
  dz << 4, 9;
  const EpiInstance scaled(random_spd(2, 0.5, 2.0, rng),
                           SymMatrix::from_diagonal(dz),
                           SymMatrix(0.5 * Eigen::MatrixXd::Identity(2, 2)));
  const CanonicalReduction red = reduce_to_canonical(scaled);
  CHECK(red.scale == doctest::Approx(6.0).epsilon(1e-12));

  CHECK_THROWS_AS(reduce_to_canonical(counterexample_instance()), PreconditionError);
}

TEST_CASE("canonical reduction preserves the gap up to the det scale") {
  Rng rng(16);
  for (int trial = 0; trial < 400; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.index(6));
    const EpiInstance inst = commuting_instance(n, rng);
    const CanonicalReduction red = reduce_to_canonical(inst);
    const EpiReport orig = costa_check(inst);
    const EpiReport canon = costa_check(red.canonical);

    CHECK((red.canonical.sigma_z().mat() -
           Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-12);
    // For n = 1 the Gaussian gap is identically zero, so both sides are pure
    // rounding noise; the floor ties "relative" to the sides' scale, the same
    // scale the violation flag uses.
    const double expected = red.scale * canon.gap;
    const double denom = std::max({std::abs(orig.gap), std::abs(expected),
                                   1e-5 * std::max(orig.lhs, orig.rhs)});
    CHECK(std::abs(orig.gap - expected) / denom <= 1e-8);
  }
}
