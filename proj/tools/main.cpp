// SPDX-License-Identifier: Apache-2.0
//
// costa-epi: verify the matrix-parameter entropy power inequality, reproduce
// the built-in counterexample, diagnose the AM-GM failure along the
// perturbation path, and search for new violating instances.
//
// Exit codes: 0 holds/consistent, 1 search found nothing, 2 invalid input,
// 3 inequality violated, 4 suspicious Monte-Carlo result.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "costa/epi.hpp"
#include "costa/io.hpp"
#include "costa/mc_entropy.hpp"
#include "costa/search.hpp"
#include "costa/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNotFound = 1;
constexpr int kExitInput = 2;
constexpr int kExitViolated = 3;
constexpr int kExitSuspicious = 4;

const double kTwoPiE = 2.0 * M_PI * std::exp(1.0);

double default_tol() {
  if (const char* env = std::getenv("COSTA_EPI_TOL")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != env && v > 0.0) return v;
  }
  return costa::kDefaultTol;
}

void emit(const costa::json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) throw costa::Error("cannot write report to " + out_path);
    out << j.dump(2) << "\n";
  }
}

// "lo:hi:step" grids or comma-separated lists.
std::vector<double> parse_gammas(const std::string& spec) {
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    double lo = 0.0, hi = 0.0, step = 0.0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 ||
        step <= 0.0 || hi < lo) {
      throw costa::Error("--gammas: expected \"lo:hi:step\" with step > 0");
    }
    for (double g = lo; g <= hi + 1e-12; g += step) out.push_back(g);
    return out;
  }
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  if (out.empty()) throw costa::Error("--gammas: empty list");
  return out;
}

void print_check_human(const costa::EpiReport& r, bool commuting) {
  std::printf("  lhs              %.10g\n", r.lhs);
  std::printf("  rhs_term_x       %.10g\n", r.rhs_term_x);
  std::printf("  rhs_term_xz      %.10g\n", r.rhs_term_xz);
  std::printf("  rhs              %.10g\n", r.rhs);
  std::printf("  gap              %.10g\n", r.gap);
  std::printf("  lhs / (2 pi e)   %.6f\n", r.lhs / kTwoPiE);
  std::printf("  rhs / (2 pi e)   %.6f\n", r.rhs / kTwoPiE);
  std::printf("  violated         %s\n", r.violated ? "yes" : "no");
  std::printf("  commuting        %s\n", commuting ? "yes" : "no");
  if (commuting) {
    std::printf("  note             commuting pair: the corrected theorem "
                "applies, gap >= 0 expected\n");
  }
  if (!r.note.empty()) std::printf("  note             %s\n", r.note.c_str());
}

void print_check_csv(const costa::EpiReport& r, bool commuting) {
  std::printf("field,value\n");
  std::printf("lhs,%.17g\n", r.lhs);
  std::printf("rhs_term_x,%.17g\n", r.rhs_term_x);
  std::printf("rhs_term_xz,%.17g\n", r.rhs_term_xz);
  std::printf("rhs,%.17g\n", r.rhs);
  std::printf("gap,%.17g\n", r.gap);
  std::printf("violated,%d\n", r.violated ? 1 : 0);
  std::printf("commuting,%d\n", commuting ? 1 : 0);
  for (const auto& d : r.dets) {
    std::printf("det_%s,%.17g\n", d.name.c_str(), d.value);
  }
}

int run_reproduce(bool as_json, const std::string& out_path) {
  const costa::EpiInstance inst = costa::counterexample_instance();
  const costa::EpiReport rep = costa::costa_check(inst);
  const bool commuting = costa::commutes(inst.a(), inst.sigma_z());
  const costa::SplitResidual split =
      costa::splitting_identity_residual(inst.a(), inst.sigma_z());
  const costa::GammaDiagnostic diag = costa::gamma_path(inst, {0.5}).front();

  const double lhs_scaled = rep.lhs / kTwoPiE;
  const double rhs_scaled = rep.rhs / kTwoPiE;
  const bool lhs_ok = lhs_scaled >= 19.52 && lhs_scaled <= 19.54;
  const bool rhs_ok = rhs_scaled >= 40.27 && rhs_scaled <= 40.29;
  const bool eig_ok = diag.eig_real.size() == 2 &&
                      std::abs(diag.eig_real(0) - (-0.7273)) <= 5e-4 &&
                      std::abs(diag.eig_real(1) - (-0.0053)) <= 5e-4;
  const bool all_ok = lhs_ok && rhs_ok && eig_ok && rep.violated &&
                      !commuting && split.norm > 0.1 && !diag.amgm_holds;

  if (as_json || !out_path.empty()) {
    costa::json payload;
    payload["instance"] = costa::instance_to_json(inst, "built-in counterexample");
    payload["epi"] = costa::epi_report_to_json(rep);
    payload["lhs_over_2pie"] = lhs_scaled;
    payload["rhs_over_2pie"] = rhs_scaled;
    payload["commuting"] = commuting;
    payload["splitting_residual_norm"] = split.norm;
    payload["gamma_05"] = costa::gamma_diagnostic_to_json(diag);
    payload["matches_printed_values"] = all_ok;
    emit(costa::report_envelope("reproduce", "fnv1a:builtin", payload), out_path);
  } else {
    std::printf("costa-epi reproduce: built-in counterexample (n = 2)\n");
    std::printf("  lhs / (2 pi e)          %10.6f   expected ~19.53\n", lhs_scaled);
    std::printf("  rhs / (2 pi e)          %10.6f   expected ~40.28\n", rhs_scaled);
    std::printf("  gap                     %10.4f\n", rep.gap);
    std::printf("  violated                %s\n", rep.violated ? "yes" : "no");
    std::printf("  commutes(a, sigma_z)    %s\n", commuting ? "yes" : "no");
    std::printf("  splitting residual      %10.6f   (> 0.1: identity needs commutation)\n",
                split.norm);
    std::printf("  gamma=0.5 eigenvalues   %10.6f %10.6f   expected ~{-0.7273, -0.0053}\n",
                diag.eig_real(0), diag.eig_real(1));
    std::printf("  amgm_holds at 0.5       %s\n", diag.amgm_holds ? "yes" : "no");
    std::printf("  matches printed values  %s\n", all_ok ? "yes" : "NO");
  }
  return all_ok ? kExitOk : kExitNotFound;
}

int run_check(const std::string& path, double tol, bool as_json, bool as_csv,
              const std::string& out_path) {
  const costa::LoadedInstance loaded = costa::load_instance_file(path);
  costa::EpiReport rep = costa::costa_check(loaded.instance, tol);
  const bool commuting =
      costa::commutes(loaded.instance.a(), loaded.instance.sigma_z(), tol);
  if (commuting && rep.note.empty()) {
    rep.note = "commuting pair: the corrected theorem applies";
  }
  if (as_json || !out_path.empty()) {
    costa::json payload = costa::epi_report_to_json(rep);
    payload["commuting"] = commuting;
    if (!loaded.label.empty()) payload["label"] = loaded.label;
    emit(costa::report_envelope("check", costa::file_digest(path), payload),
         out_path);
  } else if (as_csv) {
    print_check_csv(rep, commuting);
  } else {
    std::printf("costa-epi check: %s\n",
                loaded.label.empty() ? path.c_str() : loaded.label.c_str());
    print_check_human(rep, commuting);
  }
  return rep.violated ? kExitViolated : kExitOk;
}

int run_gamma_path(const std::string& path, const std::string& gamma_spec,
                   double tol, bool as_json, const std::string& out_path) {
  const costa::LoadedInstance loaded = costa::load_instance_file(path);
  const std::vector<double> gammas = parse_gammas(gamma_spec);
  const std::vector<costa::GammaDiagnostic> rows =
      costa::gamma_path(loaded.instance, gammas, tol);

  if (as_json || !out_path.empty()) {
    costa::json payload = costa::json::array();
    for (const auto& d : rows) payload.push_back(costa::gamma_diagnostic_to_json(d));
    emit(costa::report_envelope("gamma-path", costa::file_digest(path),
                                costa::json{{"rows", payload}}),
         out_path);
  } else {
    std::printf("costa-epi gamma-path: %s\n", path.c_str());
    std::printf("  %8s  %-28s %12s %12s  %-6s %-5s\n", "gamma", "eigenvalues",
                "det_side", "trace_side", "amgm", "k_psd");
    for (const auto& d : rows) {
      std::string eigs;
      for (Eigen::Index i = 0; i < d.eig_real.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%s%.5f", i ? " " : "", d.eig_real(i));
        eigs += buf;
      }
      std::printf("  %8.4f  %-28s %12.6g %12.6g  %-6s %-5s\n", d.gamma,
                  eigs.c_str(), d.det_side, d.trace_side,
                  d.amgm_holds ? "yes" : "no", d.k_psd ? "yes" : "no");
    }
  }
  return kExitOk;
}

int run_search(const costa::SearchConfig& cfg, const std::string& out_file,
               bool as_json, const std::string& out_path) {
  const costa::SearchTrace trace = costa::search_counterexample(cfg);
  // A find must be certified by the evaluator, not by optimizer bookkeeping.
  const double scale =
      std::max(trace.best_report.lhs, trace.best_report.rhs);
  const bool found = trace.best_report.gap < -1e-6 * scale;

  if (found && !out_file.empty()) {
    costa::save_instance_file(out_file, trace.best_instance,
                              "violating instance, seed " +
                                  std::to_string(cfg.seed));
  }
  if (as_json || !out_path.empty()) {
    costa::json payload = costa::search_trace_to_json(trace);
    payload["violation_found"] = found;
    emit(costa::report_envelope("search", "fnv1a:none", payload), out_path);
  } else {
    std::printf("costa-epi search: n=%ld restarts=%d iters=%d seed=%llu%s\n",
                static_cast<long>(cfg.n), cfg.restarts, cfg.iterations,
                static_cast<unsigned long long>(cfg.seed),
                cfg.commuting_only ? " (commuting-only)" : "");
    std::printf("  best objective (rhs-lhs)  %.10g\n", trace.best_objective);
    std::printf("  certified gap             %.10g\n", trace.best_gap);
    std::printf("  best restart              %d\n", trace.best_restart);
    std::printf("  evaluations               %llu\n",
                static_cast<unsigned long long>(trace.total_evaluations));
    std::printf("  violation found           %s\n", found ? "yes" : "no");
    if (found && !out_file.empty()) {
      std::printf("  instance written to       %s\n", out_file.c_str());
    } else if (found) {
      std::printf("%s\n",
                  costa::instance_to_json(trace.best_instance,
                                          "violating instance, seed " +
                                              std::to_string(cfg.seed))
                      .dump(2)
                      .c_str());
    }
  }
  return found ? kExitOk : kExitNotFound;
}

int run_mc(const std::string& mixture_path, const std::string& sigma_z_path,
           const std::string& a_path, std::size_t m, int k,
           std::uint64_t seed, double tol, bool as_json,
           const std::string& out_path) {
  const costa::MixtureSpec spec = costa::load_mixture_file(mixture_path);
  const costa::SymMatrix sigma_z = costa::load_matrix_file(sigma_z_path);
  const costa::SymMatrix a = costa::load_matrix_file(a_path);
  costa::McReport rep;
  try {
    rep = costa::mc_commuting_check(spec, sigma_z, a, m, k, seed, tol);
  } catch (const costa::PreconditionError& e) {
    std::cerr << "error: " << e.what()
              << "\nhint: non-commuting instances are exact territory; use "
                 "`costa-epi check` instead\n";
    return kExitInput;
  }

  if (as_json || !out_path.empty()) {
    const std::string digest = costa::fnv1a_digest(
        costa::file_digest(mixture_path) + costa::file_digest(sigma_z_path) +
        costa::file_digest(a_path));
    emit(costa::report_envelope("mc", digest, costa::mc_report_to_json(rep)),
         out_path);
  } else {
    std::printf("costa-epi mc: m=%zu k=%d seed=%llu\n", m, k,
                static_cast<unsigned long long>(seed));
    std::printf("  h(X)         %.6f +- %.6f\n", rep.h_x.estimate,
                rep.h_x.standard_error);
    std::printf("  h(X+A^1/2Z)  %.6f +- %.6f\n", rep.h_x_az.estimate,
                rep.h_x_az.standard_error);
    std::printf("  h(X+Z)       %.6f +- %.6f\n", rep.h_x_z.estimate,
                rep.h_x_z.standard_error);
    std::printf("  lhs          %.6g +- %.3g\n", rep.lhs_estimate, rep.se_lhs);
    std::printf("  rhs          %.6g +- %.3g\n", rep.rhs_estimate, rep.se_rhs);
    std::printf("  conclusion   %s\n", costa::to_string(rep.conclusion));
    std::printf("  %s\n", rep.detail.c_str());
  }
  return rep.conclusion == costa::McConclusion::suspicious ? kExitSuspicious
                                                           : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification and counterexample search for the matrix-parameter "
               "entropy power inequality"};
  app.set_version_flag("--version", costa::kVersion);
  app.require_subcommand(1);

  double tol = default_tol();
  app.add_option("--tol", tol, "relative tolerance (env COSTA_EPI_TOL)")
      ->capture_default_str();
  unsigned threads = 0;
  app.add_option("--threads", threads,
                 "worker threads (env COSTA_EPI_THREADS; 0 = auto)");

  // reproduce
  auto* reproduce = app.add_subcommand(
      "reproduce", "Reproduce the built-in counterexample numbers");
  bool rep_json = false;
  std::string rep_out;
  reproduce->add_flag("--json", rep_json, "emit a JSON report");
  reproduce->add_option("--out", rep_out, "write the JSON report to a file");

  // check
  auto* check = app.add_subcommand("check", "Check one instance file");
  std::string check_path;
  bool check_json = false, check_csv = false;
  std::string check_out;
  check->add_option("path", check_path, "instance file (JSON)")->required();
  auto* jopt = check->add_flag("--json", check_json, "emit a JSON report");
  check->add_flag("--csv", check_csv, "emit CSV key,value rows")->excludes(jopt);
  check->add_option("--out", check_out, "write the JSON report to a file");

  // gamma-path
  auto* gpath = app.add_subcommand(
      "gamma-path", "AM-GM diagnostic along the perturbation path");
  std::string gpath_file, gamma_spec = "0:0.95:0.05", gpath_out;
  bool gpath_json = false;
  gpath->add_option("path", gpath_file, "instance file (JSON)")->required();
  gpath->add_option("--gammas", gamma_spec,
                    "grid \"lo:hi:step\" or comma list, each in [0,1)")
      ->capture_default_str();
  gpath->add_flag("--json", gpath_json, "emit a JSON report");
  gpath->add_option("--out", gpath_out, "write the JSON report to a file");

  // search
  auto* search = app.add_subcommand("search", "Search for violating instances");
  costa::SearchConfig cfg;
  cfg.restarts = 32;
  cfg.iterations = 2000;
  cfg.seed = 42;
  long long search_n = 2;
  unsigned long long search_seed = 42;
  std::string search_out_file, search_report_out;
  bool search_json = false;
  search->add_option("--n", search_n, "dimension")->capture_default_str();
  search->add_option("--restarts", cfg.restarts, "independent restarts")
      ->capture_default_str();
  search->add_option("--iters", cfg.iterations, "iterations per restart")
      ->capture_default_str();
  search->add_option("--seed", search_seed, "random seed")->capture_default_str();
  search->add_option("--step-scale", cfg.step_scale, "initial simplex edge")
      ->capture_default_str();
  search->add_option("--eig-lo", cfg.eig_lo, "covariance eigenvalue draw floor")
      ->capture_default_str();
  search->add_option("--eig-hi", cfg.eig_hi, "covariance eigenvalue draw ceiling")
      ->capture_default_str();
  search->add_flag("--commuting-only", cfg.commuting_only,
                   "restrict a and sigma_z to a shared eigenbasis");
  search->add_option("--out", search_out_file,
                     "write the best instance file here when a violation is found");
  search->add_flag("--json", search_json, "emit a JSON report");
  search->add_option("--report-out", search_report_out,
                     "write the JSON report to a file");

  // mc
  auto* mc = app.add_subcommand(
      "mc", "Monte-Carlo check of the commuting case for non-Gaussian X");
  std::string mixture_path, sigma_z_path, a_path, mc_out;
  std::size_t mc_m = 100000;
  int mc_k = 5;
  unsigned long long mc_seed = 1;
  bool mc_json = false;
  mc->add_option("--mixture", mixture_path, "mixture spec file (JSON)")->required();
  mc->add_option("--sigma-z", sigma_z_path, "noise covariance file (JSON)")->required();
  mc->add_option("--a", a_path, "matrix parameter file (JSON)")->required();
  mc->add_option("--m", mc_m, "samples per entropy term")->capture_default_str();
  mc->add_option("--k", mc_k, "k-th nearest neighbor")->capture_default_str();
  mc->add_option("--seed", mc_seed, "random seed")->capture_default_str();
  mc->add_flag("--json", mc_json, "emit a JSON report");
  mc->add_option("--out", mc_out, "write the JSON report to a file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (threads > 0) costa::set_default_thread_count(threads);
    if (*reproduce) return run_reproduce(rep_json, rep_out);
    if (*check) return run_check(check_path, tol, check_json, check_csv, check_out);
    if (*gpath) return run_gamma_path(gpath_file, gamma_spec, tol, gpath_json, gpath_out);
    if (*search) {
      cfg.n = static_cast<Eigen::Index>(search_n);
      cfg.seed = search_seed;
      return run_search(cfg, search_out_file, search_json, search_report_out);
    }
    if (*mc) {
      return run_mc(mixture_path, sigma_z_path, a_path, mc_m, mc_k, mc_seed,
                    tol, mc_json, mc_out);
    }
  } catch (const costa::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}
