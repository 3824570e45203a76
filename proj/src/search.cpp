// SPDX-License-Identifier: Apache-2.0
#include "costa/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "costa/rng.hpp"

namespace costa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogDiagClamp = 40.0;   // exp(+-40) keeps factors finite
constexpr double kEigClamp = 1e-12;      // keeps a's eigenvalues inside (0,1)

double logistic(double x) {
  const double v = 1.0 / (1.0 + std::exp(-x));
  return std::clamp(v, kEigClamp, 1.0 - kEigClamp);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

std::size_t tri_count(Eigen::Index n) {
  return static_cast<std::size_t>(n * (n + 1) / 2);
}

std::size_t skew_count(Eigen::Index n) {
  return static_cast<std::size_t>(n * (n - 1) / 2);
}

// Lower-triangular factor from packed params; diagonal entries are stored
// as logs and clamped before exponentiation.
Eigen::MatrixXd unpack_cholesky(const Eigen::VectorXd& params, std::size_t& idx,
                                Eigen::Index n) {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double p = params(static_cast<Eigen::Index>(idx++));
      l(i, j) = (i == j) ? std::exp(std::clamp(p, -kLogDiagClamp, kLogDiagClamp))
                         : p;
    }
  }
  return l;
}

void pack_cholesky(const SymMatrix& m, Eigen::VectorXd& params,
                   std::size_t& idx) {
  Eigen::LLT<Eigen::MatrixXd> llt(m.mat());
  if (llt.info() != Eigen::Success) {
    throw Error("encode: covariance is not strictly PD");
  }
  const Eigen::MatrixXd l = llt.matrixL();
  for (Eigen::Index i = 0; i < m.dim(); ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      params(static_cast<Eigen::Index>(idx++)) =
          (i == j) ? std::log(l(i, j)) : l(i, j);
    }
  }
}

Eigen::MatrixXd cayley_orthogonal(const Eigen::VectorXd& params,
                                  std::size_t& idx, Eigen::Index n) {
  Eigen::MatrixXd skew = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 1; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      const double p = params(static_cast<Eigen::Index>(idx++));
      skew(i, j) = p;
      skew(j, i) = -p;
    }
  }
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  // I - skew is nonsingular for every real skew-symmetric matrix.
  return (eye - skew).partialPivLu().solve(eye + skew);
}

void pack_cayley(const Eigen::MatrixXd& basis, Eigen::VectorXd& params,
                 std::size_t& idx) {
  const Eigen::Index n = basis.rows();
  Eigen::MatrixXd q = basis;
  if (q.determinant() < 0) q.col(n - 1) = -q.col(n - 1);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(eye + q);
  if (!lu.isInvertible()) {
    throw Error(
        "encode: eigenbasis contains a half-turn rotation, which the Cayley "
        "parameterization cannot represent");
  }
  Eigen::MatrixXd skew =
      ((eye + q).transpose().partialPivLu().solve((q - eye).transpose()))
          .transpose();
  skew = 0.5 * (skew - skew.transpose());
  for (Eigen::Index i = 1; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      params(static_cast<Eigen::Index>(idx++)) = skew(i, j);
    }
  }
}

struct NelderMeadResult {
  Eigen::VectorXd best;
  double best_value = kInf;  // minimized value (= gap)
  std::vector<std::pair<int, double>> history;  // (iteration, -running best)
  std::uint64_t evaluations = 0;
};

// Standard Nelder-Mead (reflection 1, expansion 2, contraction 0.5,
// shrink 0.5) with deterministic ordering.
template <typename F>
NelderMeadResult nelder_mead(F&& f, const Eigen::VectorXd& x0, double step,
                             int max_iterations, double spread_tol) {
  const Eigen::Index dim = x0.size();
  NelderMeadResult out;

  std::vector<Eigen::VectorXd> xs(static_cast<std::size_t>(dim) + 1, x0);
  std::vector<double> fs(xs.size());
  for (std::size_t i = 1; i < xs.size(); ++i) {
    xs[i](static_cast<Eigen::Index>(i - 1)) += step;
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    fs[i] = f(xs[i]);
    ++out.evaluations;
  }

  auto order = [&] {
    std::vector<std::size_t> idx(xs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    std::vector<Eigen::VectorXd> xs2;
    std::vector<double> fs2;
    xs2.reserve(xs.size());
    fs2.reserve(fs.size());
    for (std::size_t i : idx) {
      xs2.push_back(xs[i]);
      fs2.push_back(fs[i]);
    }
    xs.swap(xs2);
    fs.swap(fs2);
  };

  order();
  out.history.emplace_back(0, -fs[0]);
  double running_best = fs[0];

  const std::size_t worst = xs.size() - 1;
  for (int iter = 1; iter <= max_iterations; ++iter) {
    if (std::isfinite(fs[worst]) && std::isfinite(fs[0]) &&
        fs[worst] - fs[0] <= spread_tol) {
      break;
    }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (std::size_t i = 0; i < worst; ++i) centroid += xs[i];
    centroid /= static_cast<double>(worst);

    const Eigen::VectorXd reflected = centroid + (centroid - xs[worst]);
    const double f_reflected = f(reflected);
    ++out.evaluations;

    if (f_reflected < fs[0]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (reflected - centroid);
      const double f_expanded = f(expanded);
      ++out.evaluations;
      if (f_expanded < f_reflected) {
        xs[worst] = expanded;
        fs[worst] = f_expanded;
      } else {
        xs[worst] = reflected;
        fs[worst] = f_reflected;
      }
    } else if (f_reflected < fs[worst - 1]) {
      xs[worst] = reflected;
      fs[worst] = f_reflected;
    } else {
      const bool outside = f_reflected < fs[worst];
      const Eigen::VectorXd contracted =
          outside ? centroid + 0.5 * (reflected - centroid)
                  : centroid + 0.5 * (xs[worst] - centroid);
      const double f_contracted = f(contracted);
      ++out.evaluations;
      if (f_contracted < (outside ? f_reflected : fs[worst])) {
        xs[worst] = contracted;
        fs[worst] = f_contracted;
      } else {
        for (std::size_t i = 1; i < xs.size(); ++i) {
          xs[i] = xs[0] + 0.5 * (xs[i] - xs[0]);
          fs[i] = f(xs[i]);
          ++out.evaluations;
        }
      }
    }
    order();
    if (fs[0] < running_best) {
      running_best = fs[0];
      out.history.emplace_back(iter, -running_best);
    }
  }
  out.best = xs[0];
  out.best_value = fs[0];
  return out;
}

EpiInstance random_start(const SearchConfig& cfg, Rng& rng) {
  const Eigen::Index n = cfg.n;
  const SymMatrix sigma_x = random_spd(n, cfg.eig_lo, cfg.eig_hi, rng);

  Eigen::VectorXd z_eigs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    z_eigs(i) = rng.log_uniform(cfg.eig_lo, cfg.eig_hi);
  }
  Eigen::VectorXd a_eigs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a_eigs(i) = std::clamp(rng.uniform01(), kEigClamp, 1.0 - kEigClamp);
  }

  if (cfg.commuting_only) {
    return EpiInstance(sigma_x, SymMatrix::from_diagonal(z_eigs),
                       SymMatrix::from_diagonal(a_eigs));
  }
  const Eigen::MatrixXd qz = random_orthogonal(n, rng);
  const Eigen::MatrixXd qa = random_orthogonal(n, rng);
  return EpiInstance(
      sigma_x, SymMatrix(qz * z_eigs.asDiagonal() * qz.transpose()),
      SymMatrix(qa * a_eigs.asDiagonal() * qa.transpose()));
}

}  // namespace

void SearchConfig::validate() const {
  if (n < 1) throw Error("SearchConfig: n must be >= 1");
  if (restarts < 1) throw Error("SearchConfig: restarts must be >= 1");
  if (iterations < 1) throw Error("SearchConfig: iterations must be >= 1");
  if (!(eig_lo > 0.0)) throw Error("SearchConfig: eig_lo must be > 0");
  if (!(eig_hi > eig_lo)) throw Error("SearchConfig: eig_hi must exceed eig_lo");
  if (!(step_scale > 0.0)) throw Error("SearchConfig: step_scale must be > 0");
}

std::size_t parameter_count(Eigen::Index n, bool commuting_only) {
  if (commuting_only) {
    return tri_count(n) + 2 * static_cast<std::size_t>(n);
  }
  return 2 * tri_count(n) + static_cast<std::size_t>(n) + skew_count(n);
}

EpiInstance decode(const Eigen::VectorXd& params, Eigen::Index n,
                   bool commuting_only) {
  if (static_cast<std::size_t>(params.size()) !=
      parameter_count(n, commuting_only)) {
    throw Error("decode: expected " +
                std::to_string(parameter_count(n, commuting_only)) +
                " parameters, got " + std::to_string(params.size()));
  }
  if (!params.allFinite()) {
    throw Error("decode: non-finite parameter");
  }
  std::size_t idx = 0;
  const Eigen::MatrixXd lx = unpack_cholesky(params, idx, n);
  const SymMatrix sigma_x(lx * lx.transpose());

  if (commuting_only) {
    Eigen::VectorXd z_eigs(n), a_eigs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = params(static_cast<Eigen::Index>(idx++));
      z_eigs(i) = std::exp(2.0 * std::clamp(p, -kLogDiagClamp, kLogDiagClamp));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      a_eigs(i) = logistic(params(static_cast<Eigen::Index>(idx++)));
    }
    return EpiInstance(sigma_x, SymMatrix::from_diagonal(z_eigs),
                       SymMatrix::from_diagonal(a_eigs));
  }

  const Eigen::MatrixXd lz = unpack_cholesky(params, idx, n);
  const SymMatrix sigma_z(lz * lz.transpose());
  Eigen::VectorXd a_eigs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a_eigs(i) = logistic(params(static_cast<Eigen::Index>(idx++)));
  }
  const Eigen::MatrixXd q = cayley_orthogonal(params, idx, n);
  return EpiInstance(sigma_x, sigma_z,
                     SymMatrix(q * a_eigs.asDiagonal() * q.transpose()));
}

Eigen::VectorXd encode(const EpiInstance& inst, bool commuting_only) {
  const Eigen::Index n = inst.dim();
  Eigen::VectorXd params(
      static_cast<Eigen::Index>(parameter_count(n, commuting_only)));
  std::size_t idx = 0;
  pack_cholesky(inst.sigma_x(), params, idx);

  const EigenDecomposition a_eig = sym_eig(inst.a());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = a_eig.eigenvalues(i);
    if (!(d > 0.0) || !(d < 1.0)) {
      throw Error(
          "encode: a has an eigenvalue on the boundary of (0, 1); boundary "
          "instances are not representable");
    }
  }

  if (commuting_only) {
    const Eigen::MatrixXd& z = inst.sigma_z().mat();
    if ((z - Eigen::MatrixXd(z.diagonal().asDiagonal())).cwiseAbs().maxCoeff() >
            kDefaultTol * (1.0 + inst.sigma_z().max_abs()) ||
        (inst.a().mat() -
         Eigen::MatrixXd(inst.a().mat().diagonal().asDiagonal()))
                .cwiseAbs()
                .maxCoeff() > kDefaultTol * (1.0 + inst.a().max_abs())) {
      throw Error("encode: commuting-only encoding requires diagonal sigma_z and a");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(z(i, i) > 0.0)) throw Error("encode: sigma_z must be strictly PD");
      params(static_cast<Eigen::Index>(idx++)) = 0.5 * std::log(z(i, i));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = inst.a()(i, i);
      if (!(d > 0.0) || !(d < 1.0)) {
        throw Error(
            "encode: a has an eigenvalue on the boundary of (0, 1); boundary "
            "instances are not representable");
      }
      params(static_cast<Eigen::Index>(idx++)) = logit(d);
    }
    return params;
  }

  pack_cholesky(inst.sigma_z(), params, idx);
  for (Eigen::Index i = 0; i < n; ++i) {
    params(static_cast<Eigen::Index>(idx++)) = logit(a_eig.eigenvalues(i));
  }
  pack_cayley(a_eig.basis, params, idx);
  return params;
}

double objective(const Eigen::VectorXd& params, Eigen::Index n,
                 bool commuting_only) {
  try {
    const EpiInstance inst = decode(params, n, commuting_only);
    return -costa_check(inst).gap;
  } catch (const Error&) {
    return -kInf;  // infeasible or singular: discard the point
  }
}

SearchTrace search_counterexample(const SearchConfig& cfg) {
  cfg.validate();

  std::vector<RestartRecord> records;
  records.reserve(static_cast<std::size_t>(cfg.restarts));
  std::uint64_t evaluations = 0;

  auto gap_fn = [&](const Eigen::VectorXd& x) {
    const double obj = objective(x, cfg.n, cfg.commuting_only);
    return obj == -kInf ? kInf : -obj;
  };

  for (int r = 0; r < cfg.restarts; ++r) {
    Rng rng = Rng::substream(cfg.seed, static_cast<std::uint64_t>(r));
    const Eigen::VectorXd x0 =
        encode(random_start(cfg, rng), cfg.commuting_only);
    NelderMeadResult nm = nelder_mead(gap_fn, x0, cfg.step_scale,
                                      cfg.iterations, cfg.objective_tol);
    evaluations += nm.evaluations;
    RestartRecord rec;
    rec.restart = r;
    rec.history = std::move(nm.history);
    rec.best_objective = -nm.best_value;
    rec.best_params = std::move(nm.best);
    records.push_back(std::move(rec));
  }

  int best_r = 0;
  for (int r = 1; r < cfg.restarts; ++r) {
    if (records[static_cast<std::size_t>(r)].best_objective >
        records[static_cast<std::size_t>(best_r)].best_objective) {
      best_r = r;
    }
  }

  const RestartRecord& winner = records[static_cast<std::size_t>(best_r)];
  EpiInstance best = decode(winner.best_params, cfg.n, cfg.commuting_only);
  EpiReport report = costa_check(best);

  SearchTrace trace{std::move(best),
                    std::move(report),
                    0.0,
                    winner.best_objective,
                    best_r,
                    std::move(records),
                    evaluations,
                    cfg.seed};
  trace.best_gap = trace.best_report.gap;
  return trace;
}

}  // namespace costa
