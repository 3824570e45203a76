// SPDX-License-Identifier: Apache-2.0
#include "costa/mc_entropy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numeric>
#include <thread>

#include "costa/epi.hpp"
#include "costa/rng.hpp"

namespace costa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double digamma(double x) {
  double r = 0.0;
  while (x < 6.0) {
    r -= 1.0 / x;
    x += 1.0;
  }
  const double f = 1.0 / (x * x);
  return r + std::log(x) - 0.5 / x -
         f * (1.0 / 12.0 -
              f * (1.0 / 120.0 - f * (1.0 / 252.0 - f * (1.0 / 240.0))));
}

double log_unit_ball_volume(Eigen::Index n) {
  const double half = 0.5 * static_cast<double>(n);
  return half * std::log(M_PI) - std::lgamma(half + 1.0);
}

void parallel_over(std::size_t count, unsigned threads,
                   const std::function<void(std::size_t, std::size_t)>& body) {
  if (threads <= 1 || count < 2048) {
    body(0, count);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (count + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(body, lo, hi);
  }
  for (auto& th : pool) th.join();
}

// k-th neighbor distances using a scan ordered by the first coordinate:
// walking outward from each query, the scan stops once the first-coordinate
// gap alone exceeds the current k-th best distance. Exact for any data;
// degenerates to the full O(m^2) scan in the worst case.
std::vector<double> knn_kth_distances_pruned(const Eigen::MatrixXd& pts,
                                             int k, unsigned threads) {
  const std::size_t m = static_cast<std::size_t>(pts.rows());
  const Eigen::Index n = pts.cols();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pts(static_cast<Eigen::Index>(a), 0) <
           pts(static_cast<Eigen::Index>(b), 0);
  });
  Eigen::MatrixXd sorted(pts.rows(), pts.cols());
  for (std::size_t i = 0; i < m; ++i) {
    sorted.row(static_cast<Eigen::Index>(i)) =
        pts.row(static_cast<Eigen::Index>(order[i]));
  }

  std::vector<double> kth(m, 0.0);
  const std::size_t ku = static_cast<std::size_t>(k);
  parallel_over(m, threads, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> heap;  // max-heap of the k best squared distances
    heap.reserve(ku);
    for (std::size_t qi = lo; qi < hi; ++qi) {
      heap.clear();
      const Eigen::Index q = static_cast<Eigen::Index>(qi);
      const double qx = sorted(q, 0);
      std::ptrdiff_t left = static_cast<std::ptrdiff_t>(qi) - 1;
      std::size_t right = qi + 1;
      auto consider = [&](std::size_t j) {
        double d2 = 0.0;
        for (Eigen::Index c = 0; c < n; ++c) {
          const double diff =
              sorted(static_cast<Eigen::Index>(j), c) - sorted(q, c);
          d2 += diff * diff;
        }
        if (heap.size() < ku) {
          heap.push_back(d2);
          std::push_heap(heap.begin(), heap.end());
        } else if (d2 < heap.front()) {
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = d2;
          std::push_heap(heap.begin(), heap.end());
        }
      };
      while (true) {
        const double bound =
            heap.size() < ku ? kInf : heap.front();
        const bool can_left = left >= 0;
        const bool can_right = right < m;
        if (!can_left && !can_right) break;
        // Walk toward the nearer side in first-coordinate distance.
        double gap_left =
            can_left ? qx - sorted(static_cast<Eigen::Index>(left), 0) : kInf;
        double gap_right =
            can_right ? sorted(static_cast<Eigen::Index>(right), 0) - qx : kInf;
        if (std::min(gap_left, gap_right) * std::min(gap_left, gap_right) >
            bound) {
          break;
        }
        if (gap_left <= gap_right) {
          consider(static_cast<std::size_t>(left));
          --left;
        } else {
          consider(right);
          ++right;
        }
      }
      kth[order[qi]] = std::sqrt(heap.front());
    }
  });
  return kth;
}

double kl_from_distances(const std::vector<double>& kth, int k,
                         Eigen::Index n, std::vector<double>* log_eps_out) {
  const std::size_t m = kth.size();
  double sum_log = 0.0;
  if (log_eps_out) log_eps_out->resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double le = std::log(kth[i]);
    sum_log += le;
    if (log_eps_out) (*log_eps_out)[i] = le;
  }
  return digamma(static_cast<double>(m)) - digamma(static_cast<double>(k)) +
         log_unit_ball_volume(n) +
         static_cast<double>(n) * sum_log / static_cast<double>(m);
}

double kl_estimate(const Eigen::MatrixXd& samples, int k,
                   std::vector<double>* log_eps_out) {
  return kl_from_distances(knn_distances(samples, k), k, samples.cols(),
                           log_eps_out);
}

EntropyEstimate knn_entropy_impl(const Eigen::MatrixXd& samples, int k,
                                 bool allow_jitter) {
  const std::size_t m = static_cast<std::size_t>(samples.rows());
  const Eigen::Index n = samples.cols();

  const std::vector<double> kth = knn_distances(samples, k);
  const bool has_tie =
      std::any_of(kth.begin(), kth.end(), [](double d) { return d <= 0.0; });
  if (has_tie) {
    if (!allow_jitter) {
      throw Error("knn_entropy: duplicate points persist after jitter");
    }
    const double scale = samples.cwiseAbs().maxCoeff();
    Rng rng(0x7e577e57u);
    Eigen::MatrixXd jittered = samples;
    for (Eigen::Index i = 0; i < jittered.rows(); ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        jittered(i, j) += 1e-12 * std::max(scale, 1.0) * rng.normal();
      }
    }
    return knn_entropy_impl(jittered, k, false);
  }

  EntropyEstimate out;
  out.samples = m;
  out.k = k;

  std::vector<double> log_eps;
  out.estimate = kl_from_distances(kth, k, n, &log_eps);

  const std::size_t folds = 16;
  if (m >= folds * static_cast<std::size_t>(k + 1)) {
    std::vector<double> fold_estimates;
    fold_estimates.reserve(folds);
    for (std::size_t f = 0; f < folds; ++f) {
      std::vector<Eigen::Index> rows;
      for (std::size_t i = f; i < m; i += folds) {
        rows.push_back(static_cast<Eigen::Index>(i));
      }
      Eigen::MatrixXd fold(static_cast<Eigen::Index>(rows.size()), n);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        fold.row(static_cast<Eigen::Index>(i)) = samples.row(rows[i]);
      }
      fold_estimates.push_back(kl_estimate(fold, k, nullptr));
    }
    const double mean =
        std::accumulate(fold_estimates.begin(), fold_estimates.end(), 0.0) /
        static_cast<double>(folds);
    double var = 0.0;
    for (double e : fold_estimates) var += (e - mean) * (e - mean);
    var /= static_cast<double>(folds - 1);
    out.standard_error = std::sqrt(var / static_cast<double>(folds));
  } else {
    // Too few points for 16 folds: asymptotic per-point variance instead.
    const double dn = static_cast<double>(n);
    const double mean_le =
        std::accumulate(log_eps.begin(), log_eps.end(), 0.0) /
        static_cast<double>(m);
    double var = 0.0;
    for (double le : log_eps) var += (le - mean_le) * (le - mean_le);
    var /= static_cast<double>(m - 1);
    out.standard_error = dn * std::sqrt(var / static_cast<double>(m));
  }
  return out;
}

}  // namespace

Eigen::Index MixtureSpec::dim() const {
  if (components.empty()) {
    throw Error("MixtureSpec: no components");
  }
  return components.front().mean.size();
}

void MixtureSpec::validate() const {
  if (components.empty()) {
    throw Error("MixtureSpec: no components");
  }
  const Eigen::Index n = components.front().mean.size();
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.weight > 0.0)) {
      throw Error("MixtureSpec: weights must be positive");
    }
    if (c.mean.size() != n || c.cov.dim() != n) {
      throw DimensionError("MixtureSpec: component dimension mismatch");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(c.cov.mat());
    if (llt.info() != Eigen::Success) {
      throw NotPsdError("MixtureSpec: component covariance is not strictly PD");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error("MixtureSpec: weights sum to " + std::to_string(total) +
                ", expected 1");
  }
}

MixtureSpec MixtureSpec::single_gaussian(SymMatrix cov) {
  MixtureSpec spec;
  spec.components.push_back(
      {1.0, Eigen::VectorXd::Zero(cov.dim()), std::move(cov)});
  return spec;
}

Eigen::MatrixXd sample(const MixtureSpec& spec, std::size_t m,
                       std::uint64_t seed) {
  spec.validate();
  if (m < 1) throw DomainError("sample: m must be >= 1");
  const Eigen::Index n = spec.dim();

  std::vector<Eigen::MatrixXd> factors;
  std::vector<double> cumulative;
  factors.reserve(spec.components.size());
  double acc = 0.0;
  for (const auto& c : spec.components) {
    Eigen::LLT<Eigen::MatrixXd> llt(c.cov.mat());
    factors.push_back(llt.matrixL());
    acc += c.weight;
    cumulative.push_back(acc);
  }
  cumulative.back() = 1.0;

  Rng rng(seed);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m), n);
  Eigen::VectorXd g(n);
  for (std::size_t i = 0; i < m; ++i) {
    const double u = rng.uniform01();
    std::size_t c = 0;
    while (u >= cumulative[c] && c + 1 < cumulative.size()) ++c;
    for (Eigen::Index j = 0; j < n; ++j) g(j) = rng.normal();
    out.row(static_cast<Eigen::Index>(i)) =
        (spec.components[c].mean + factors[c] * g).transpose();
  }
  return out;
}

Eigen::MatrixXd sample(const GaussianVector& g, std::size_t m,
                       std::uint64_t seed) {
  return sample(MixtureSpec::single_gaussian(g.cov()), m, seed);
}

namespace {
void require_m_gt_k(const Eigen::MatrixXd& samples, int k) {
  if (k < 1 || samples.rows() <= k) {
    throw DomainError("knn distances: need m > k >= 1");
  }
}
}  // namespace

std::vector<double> knn_distances(const Eigen::MatrixXd& samples, int k) {
  require_m_gt_k(samples, k);
  return knn_kth_distances_pruned(samples, k, thread_count());
}

std::vector<double> knn_distances_bruteforce(const Eigen::MatrixXd& samples,
                                             int k) {
  require_m_gt_k(samples, k);
  const std::size_t m = static_cast<std::size_t>(samples.rows());
  const Eigen::Index n = samples.cols();
  const std::size_t ku = static_cast<std::size_t>(k);
  std::vector<double> kth(m, 0.0);
  std::vector<double> heap;
  for (std::size_t i = 0; i < m; ++i) {
    heap.clear();
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      double d2 = 0.0;
      for (Eigen::Index c = 0; c < n; ++c) {
        const double diff = samples(static_cast<Eigen::Index>(j), c) -
                            samples(static_cast<Eigen::Index>(i), c);
        d2 += diff * diff;
      }
      if (heap.size() < ku) {
        heap.push_back(d2);
        std::push_heap(heap.begin(), heap.end());
      } else if (d2 < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = d2;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    kth[i] = std::sqrt(heap.front());
  }
  return kth;
}

EntropyEstimate knn_entropy(const Eigen::MatrixXd& samples, int k) {
  return knn_entropy_impl(samples, k, true);
}

const char* to_string(McConclusion c) {
  switch (c) {
    case McConclusion::consistent: return "consistent";
    case McConclusion::inconclusive: return "inconclusive";
    case McConclusion::suspicious: return "suspicious";
  }
  return "unknown";
}

McReport mc_commuting_check(const MixtureSpec& x_spec, const SymMatrix& sigma_z,
                           const SymMatrix& a, std::size_t m, int k,
                           std::uint64_t seed, double tol) {
  x_spec.validate();
  const Eigen::Index n = x_spec.dim();
  if (sigma_z.dim() != n || a.dim() != n) {
    throw DimensionError("mc_commuting_check: dimension mismatch");
  }
  if (!commutes(a, sigma_z, tol)) {
    throw PreconditionError(
        "mc_commuting_check: a and sigma_z must commute (commuting slice)");
  }
  if (!is_psd(a, tol) ||
      !loewner_leq(a, SymMatrix::identity(n), tol)) {
    throw NotPsdError("mc_commuting_check: need PSD a with a <= I");
  }

  const SymMatrix root = psd_sqrt(a);
  const GaussianVector z(sigma_z);
  const double dn = static_cast<double>(n);

  // Independent sample sets per entropy term keep the error bars independent.
  const Eigen::MatrixXd x1 = sample(x_spec, m, Rng::substream(seed, 1).next_u64());
  const Eigen::MatrixXd x2 = sample(x_spec, m, Rng::substream(seed, 2).next_u64());
  const Eigen::MatrixXd z2 = sample(z, m, Rng::substream(seed, 3).next_u64());
  const Eigen::MatrixXd x3 = sample(x_spec, m, Rng::substream(seed, 4).next_u64());
  const Eigen::MatrixXd z3 = sample(z, m, Rng::substream(seed, 5).next_u64());

  McReport r;
  r.samples = m;
  r.k = k;
  r.seed = seed;
  r.h_x = knn_entropy(x1, k);
  r.h_x_az = knn_entropy(x2 + z2 * root.mat().transpose(), k);
  r.h_x_z = knn_entropy(x3 + z3, k);

  auto to_ep = [&](const EntropyEstimate& e) {
    const double ep = std::exp(2.0 * e.estimate / dn);
    return std::pair<double, double>(ep, ep * (2.0 / dn) * e.standard_error);
  };
  const auto [ep_x, se_x] = to_ep(r.h_x);
  const auto [ep_x_az, se_x_az] = to_ep(r.h_x_az);
  const auto [ep_x_z, se_x_z] = to_ep(r.h_x_z);

  const double c_x =
      std::exp(det_psd(SymMatrix(Eigen::MatrixXd::Identity(n, n) - a.mat()))
                   .log_value / dn);
  const double c_xz = std::exp(det_psd(a).log_value / dn);

  r.lhs_estimate = ep_x_az;
  r.se_lhs = se_x_az;
  r.rhs_estimate = c_x * ep_x + c_xz * ep_x_z;
  r.se_rhs = std::hypot(c_x * se_x, c_xz * se_x_z);

  if (r.lhs_estimate + 3.0 * r.se_lhs < r.rhs_estimate - 3.0 * r.se_rhs) {
    r.conclusion = McConclusion::suspicious;
    r.detail =
        "statistically significant apparent violation at 3 standard errors; "
        "the commuting-case theorem is proved, so investigate estimator bias "
        "rather than reading this as a disproof";
  } else if (r.lhs_estimate >= r.rhs_estimate - (r.se_lhs + r.se_rhs)) {
    r.conclusion = McConclusion::consistent;
    r.detail = "lhs >= rhs within combined standard errors";
  } else {
    r.conclusion = McConclusion::inconclusive;
    r.detail =
        "lhs below rhs by more than one combined standard error but not "
        "significant at 3; raise m to tighten the interval";
  }
  return r;
}

namespace {
std::atomic<unsigned> g_thread_override{0};
}  // namespace

unsigned thread_count(unsigned requested) {
  if (requested > 0) return requested;
  if (const unsigned forced = g_thread_override.load()) return forced;
  if (const char* env = std::getenv("COSTA_EPI_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

void set_default_thread_count(unsigned n) { g_thread_override.store(n); }

}  // namespace costa
