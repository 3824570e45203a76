// SPDX-License-Identifier: Apache-2.0
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "costa/epi.hpp"
#include "costa/gaussian.hpp"
#include "costa/mc_entropy.hpp"
#include "costa/search.hpp"
#include "costa/version.hpp"

namespace py = pybind11;
using namespace costa;

namespace {

SymMatrix as_sym(const Eigen::MatrixXd& m) { return SymMatrix(m); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Entropy power inequality verification and counterexample search";
  m.attr("__version__") = kVersion;

  py::register_exception<Error>(m, "CostaError");

  py::class_<EpiInstance>(m, "EpiInstance")
      .def(py::init([](const Eigen::MatrixXd& sx, const Eigen::MatrixXd& sz,
                       const Eigen::MatrixXd& a, double tol) {
             return EpiInstance(as_sym(sx), as_sym(sz), as_sym(a), tol);
           }),
           py::arg("sigma_x"), py::arg("sigma_z"), py::arg("a"),
           py::arg("tol") = kDefaultTol)
      .def_property_readonly("n", &EpiInstance::dim)
      .def_property_readonly(
          "sigma_x", [](const EpiInstance& i) { return i.sigma_x().mat(); })
      .def_property_readonly(
          "sigma_z", [](const EpiInstance& i) { return i.sigma_z().mat(); })
      .def_property_readonly("a",
                             [](const EpiInstance& i) { return i.a().mat(); })
      .def_property_readonly(
          "a_sqrt", [](const EpiInstance& i) { return i.a_sqrt().mat(); });

  py::class_<DetEntry>(m, "DetEntry")
      .def_readonly("name", &DetEntry::name)
      .def_readonly("value", &DetEntry::value)
      .def_readonly("log_value", &DetEntry::log_value);

  py::class_<EpiReport>(m, "EpiReport")
      .def_readonly("lhs", &EpiReport::lhs)
      .def_readonly("rhs_term_x", &EpiReport::rhs_term_x)
      .def_readonly("rhs_term_xz", &EpiReport::rhs_term_xz)
      .def_readonly("rhs", &EpiReport::rhs)
      .def_readonly("gap", &EpiReport::gap)
      .def_readonly("violated", &EpiReport::violated)
      .def_readonly("log_lhs", &EpiReport::log_lhs)
      .def_readonly("dets", &EpiReport::dets)
      .def_readonly("note", &EpiReport::note);

  py::class_<GammaDiagnostic>(m, "GammaDiagnostic")
      .def_readonly("gamma", &GammaDiagnostic::gamma)
      .def_property_readonly(
          "d_gamma", [](const GammaDiagnostic& d) { return d.d_gamma.mat(); })
      .def_property_readonly(
          "cond_cov", [](const GammaDiagnostic& d) { return d.cond_cov.mat(); })
      .def_readonly("k_matrix", &GammaDiagnostic::k_matrix)
      .def_readonly("eig_real", &GammaDiagnostic::eig_real)
      .def_readonly("eig_imag", &GammaDiagnostic::eig_imag)
      .def_readonly("has_complex", &GammaDiagnostic::has_complex)
      .def_readonly("det_side", &GammaDiagnostic::det_side)
      .def_readonly("det_side_defined", &GammaDiagnostic::det_side_defined)
      .def_readonly("trace_side", &GammaDiagnostic::trace_side)
      .def_readonly("amgm_holds", &GammaDiagnostic::amgm_holds)
      .def_readonly("k_psd", &GammaDiagnostic::k_psd);

  py::class_<SearchConfig>(m, "SearchConfig")
      .def(py::init<>())
      .def_readwrite("n", &SearchConfig::n)
      .def_readwrite("restarts", &SearchConfig::restarts)
      .def_readwrite("iterations", &SearchConfig::iterations)
      .def_readwrite("seed", &SearchConfig::seed)
      .def_readwrite("step_scale", &SearchConfig::step_scale)
      .def_readwrite("eig_lo", &SearchConfig::eig_lo)
      .def_readwrite("eig_hi", &SearchConfig::eig_hi)
      .def_readwrite("objective_tol", &SearchConfig::objective_tol)
      .def_readwrite("commuting_only", &SearchConfig::commuting_only);

  py::class_<SearchTrace>(m, "SearchTrace")
      .def_readonly("best_instance", &SearchTrace::best_instance)
      .def_readonly("best_report", &SearchTrace::best_report)
      .def_readonly("best_gap", &SearchTrace::best_gap)
      .def_readonly("best_objective", &SearchTrace::best_objective)
      .def_readonly("best_restart", &SearchTrace::best_restart)
      .def_readonly("total_evaluations", &SearchTrace::total_evaluations)
      .def_readonly("seed", &SearchTrace::seed);

  py::class_<EntropyEstimate>(m, "EntropyEstimate")
      .def_readonly("estimate", &EntropyEstimate::estimate)
      .def_readonly("standard_error", &EntropyEstimate::standard_error)
      .def_readonly("samples", &EntropyEstimate::samples)
      .def_readonly("k", &EntropyEstimate::k);

  py::enum_<McConclusion>(m, "McConclusion")
      .value("consistent", McConclusion::consistent)
      .value("inconclusive", McConclusion::inconclusive)
      .value("suspicious", McConclusion::suspicious);

  py::class_<McReport>(m, "McReport")
      .def_readonly("lhs_estimate", &McReport::lhs_estimate)
      .def_readonly("rhs_estimate", &McReport::rhs_estimate)
      .def_readonly("se_lhs", &McReport::se_lhs)
      .def_readonly("se_rhs", &McReport::se_rhs)
      .def_readonly("h_x", &McReport::h_x)
      .def_readonly("h_x_az", &McReport::h_x_az)
      .def_readonly("h_x_z", &McReport::h_x_z)
      .def_readonly("conclusion", &McReport::conclusion)
      .def_readonly("seed", &McReport::seed)
      .def_readonly("detail", &McReport::detail);

  // matrix predicates and factorizations
  m.def(
      "sym_eig",
      [](const Eigen::MatrixXd& mat) {
        const EigenDecomposition d = sym_eig(as_sym(mat));
        return py::make_tuple(d.eigenvalues, d.basis);
      },
      py::arg("m"), "Eigenvalues (ascending) and sign-fixed orthonormal basis");
  m.def(
      "psd_sqrt",
      [](const Eigen::MatrixXd& mat, double tol) {
        return psd_sqrt(as_sym(mat), tol).mat();
      },
      py::arg("m"), py::arg("tol") = kSqrtClampTol);
  m.def(
      "is_psd",
      [](const Eigen::MatrixXd& mat, double tol) {
        return is_psd(as_sym(mat), tol);
      },
      py::arg("m"), py::arg("tol") = kDefaultTol);
  m.def(
      "loewner_leq",
      [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double tol) {
        return loewner_leq(as_sym(a), as_sym(b), tol);
      },
      py::arg("a"), py::arg("b"), py::arg("tol") = kDefaultTol);
  m.def(
      "commutes",
      [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double tol) {
        return commutes(as_sym(a), as_sym(b), tol);
      },
      py::arg("a"), py::arg("b"), py::arg("tol") = kDefaultTol);
  m.def(
      "simultaneous_diagonalize",
      [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double tol) {
        const SimDiag sd = simultaneous_diagonalize(as_sym(a), as_sym(b), tol);
        return py::make_tuple(sd.basis, sd.a, sd.b);
      },
      py::arg("a"), py::arg("b"), py::arg("tol") = kDefaultTol);

  // Gaussian entropy algebra
  m.def(
      "gaussian_entropy",
      [](const Eigen::MatrixXd& cov, double tol) {
        return gaussian_entropy(GaussianVector(as_sym(cov)), tol);
      },
      py::arg("cov"), py::arg("tol") = 1e-12);
  m.def("entropy_power", &entropy_power, py::arg("h_nats"), py::arg("n"));
  m.def(
      "conditional_cov",
      [](const Eigen::MatrixXd& sx, const Eigen::MatrixXd& sz,
         const Eigen::MatrixXd& mat) {
        return conditional_cov(as_sym(sx), as_sym(sz), as_sym(mat)).mat();
      },
      py::arg("sigma_x"), py::arg("sigma_z"), py::arg("m"));

  // inequality evaluators
  m.def("costa_check", &costa_check, py::arg("instance"),
        py::arg("tol") = kDefaultTol);
  m.def("commuting_case_check", &commuting_case_check, py::arg("instance"),
        py::arg("tol") = kDefaultTol);
  m.def(
      "splitting_identity_residual",
      [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& sz) {
        const SplitResidual r = splitting_identity_residual(as_sym(a), as_sym(sz));
        return py::make_tuple(r.residual.mat(), r.norm);
      },
      py::arg("a"), py::arg("sigma_z"));
  m.def(
      "triple_epi_check",
      [](const Eigen::MatrixXd& sx, const Eigen::MatrixXd& sy,
         const Eigen::MatrixXd& sw, double tol) {
        return triple_epi_check(as_sym(sx), as_sym(sy), as_sym(sw), tol);
      },
      py::arg("sigma_x"), py::arg("sigma_y"), py::arg("sigma_w"),
      py::arg("tol") = kDefaultTol);
  m.def("gamma_path", &gamma_path, py::arg("instance"), py::arg("gammas"),
        py::arg("tol") = kDefaultTol);
  m.def(
      "reduce_to_canonical",
      [](const EpiInstance& inst, double tol) {
        const CanonicalReduction r = reduce_to_canonical(inst, tol);
        return py::make_tuple(r.canonical, r.scale);
      },
      py::arg("instance"), py::arg("tol") = kDefaultTol);
  m.def("counterexample_instance", &counterexample_instance,
        "The built-in counterexample fixture");

  // search
  m.def("search_counterexample", &search_counterexample, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def(
      "decode",
      [](const Eigen::VectorXd& params, Eigen::Index n, bool commuting_only) {
        return decode(params, n, commuting_only);
      },
      py::arg("params"), py::arg("n"), py::arg("commuting_only") = false);
  m.def(
      "encode",
      [](const EpiInstance& inst, bool commuting_only) {
        return encode(inst, commuting_only);
      },
      py::arg("instance"), py::arg("commuting_only") = false);
  m.def(
      "objective",
      [](const Eigen::VectorXd& params, Eigen::Index n, bool commuting_only) {
        return objective(params, n, commuting_only);
      },
      py::arg("params"), py::arg("n"), py::arg("commuting_only") = false,
      "rhs - lhs at the decoded instance; positive certifies violation");

  // Monte-Carlo entropy estimation
  m.def(
      "sample_gaussian",
      [](const Eigen::MatrixXd& cov, std::size_t m, std::uint64_t seed) {
        return sample(GaussianVector(as_sym(cov)), m, seed);
      },
      py::arg("cov"), py::arg("m"), py::arg("seed"));
  m.def(
      "knn_entropy",
      [](const Eigen::MatrixXd& samples, int k) {
        return knn_entropy(samples, k);
      },
      py::arg("samples"), py::arg("k") = 5,
      py::call_guard<py::gil_scoped_release>());
  m.def(
      "mc_commuting_check",
      [](const std::vector<py::tuple>& components, const Eigen::MatrixXd& sz,
         const Eigen::MatrixXd& a, std::size_t m, int k, std::uint64_t seed) {
        MixtureSpec spec;
        for (const auto& t : components) {
          spec.components.push_back({t[0].cast<double>(),
                                     t[1].cast<Eigen::VectorXd>(),
                                     as_sym(t[2].cast<Eigen::MatrixXd>())});
        }
        return mc_commuting_check(spec, as_sym(sz), as_sym(a), m, k, seed);
      },
      py::arg("components"), py::arg("sigma_z"), py::arg("a"),
      py::arg("m") = 100000, py::arg("k") = 5, py::arg("seed") = 1,
      "components: list of (weight, mean, cov) tuples");
}
