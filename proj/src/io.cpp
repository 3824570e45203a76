// SPDX-License-Identifier: Apache-2.0
#include "costa/io.hpp"

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <sstream>

#include "costa/version.hpp"

namespace costa {

namespace {

constexpr double kAsymmetryTol = 1e-9;

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open file: " + path);
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error("invalid JSON in " + path + ": " + e.what());
  }
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty()) {
    throw Error(name + ": expected a non-empty 2-D array");
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array()) {
    throw Error(name + ": expected a 2-D array of numbers");
  }
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(name + ": ragged rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) {
        throw Error(name + ": entry (" + std::to_string(i) + "," +
                    std::to_string(c) + ") is not a number");
      }
      m(i, c) = v.get<double>();
    }
  }
  if (!m.allFinite()) {
    throw Error(name + ": non-finite entry");
  }
  return m;
}

SymMatrix symmetric_from_json(const json& j, const std::string& name,
                              Eigen::Index expect_n) {
  const Eigen::MatrixXd m = matrix_from_json(j, name);
  if (m.rows() != m.cols()) {
    throw Error(name + ": matrix is " + std::to_string(m.rows()) + "x" +
                std::to_string(m.cols()) + ", expected square");
  }
  if (expect_n > 0 && m.rows() != expect_n) {
    throw Error(name + ": dimension " + std::to_string(m.rows()) +
                " does not match n = " + std::to_string(expect_n));
  }
  double worst = 0.0;
  Eigen::Index wi = 0, wj = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index c = i + 1; c < m.cols(); ++c) {
      const double d = std::abs(m(i, c) - m(c, i));
      if (d > worst) {
        worst = d;
        wi = i;
        wj = c;
      }
    }
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (worst > kAsymmetryTol * scale) {
    std::ostringstream os;
    os << name << ": asymmetry " << worst << " at (" << wi << "," << wj
       << ") exceeds the tolerance " << kAsymmetryTol * scale
       << "; refusing to symmetrize";
    throw Error(os.str());
  }
  return SymMatrix(m);
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(m(i, c));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

LoadedInstance parse_instance_json(const json& j) {
  if (!j.is_object()) {
    throw Error("instance file: expected a JSON object");
  }
  if (!j.contains("n") || !j["n"].is_number_integer()) {
    throw Error("instance file: missing integer field \"n\"");
  }
  const Eigen::Index n = j["n"].get<Eigen::Index>();
  if (n < 1) {
    throw Error("instance file: n must be >= 1");
  }
  for (const char* field : {"sigma_x", "sigma_z"}) {
    if (!j.contains(field)) {
      throw Error(std::string("instance file: missing field \"") + field + "\"");
    }
  }
  const SymMatrix sigma_x = symmetric_from_json(j["sigma_x"], "sigma_x", n);
  const SymMatrix sigma_z = symmetric_from_json(j["sigma_z"], "sigma_z", n);

  const bool has_a = j.contains("a");
  const bool has_root = j.contains("a_sqrt");
  if (has_a == has_root) {
    throw Error("instance file: provide exactly one of \"a\" or \"a_sqrt\"");
  }
  SymMatrix a = SymMatrix::identity(n);
  if (has_a) {
    a = symmetric_from_json(j["a"], "a", n);
  } else {
    const SymMatrix root = symmetric_from_json(j["a_sqrt"], "a_sqrt", n);
    a = SymMatrix(root.mat() * root.mat());
  }

  LoadedInstance out{EpiInstance(sigma_x, sigma_z, a),
                     j.value("label", std::string())};
  return out;
}

LoadedInstance load_instance_file(const std::string& path) {
  return parse_instance_json(load_json_file(path));
}

json instance_to_json(const EpiInstance& inst, const std::string& label) {
  json j;
  if (!label.empty()) j["label"] = label;
  j["n"] = inst.dim();
  j["sigma_x"] = matrix_to_json(inst.sigma_x().mat());
  j["sigma_z"] = matrix_to_json(inst.sigma_z().mat());
  j["a"] = matrix_to_json(inst.a().mat());
  return j;
}

void save_instance_file(const std::string& path, const EpiInstance& inst,
                        const std::string& label) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot write file: " + path);
  }
  out << instance_to_json(inst, label).dump(2) << "\n";
}

SymMatrix load_matrix_file(const std::string& path) {
  json j = load_json_file(path);
  if (j.is_object() && j.contains("matrix")) j = j["matrix"];
  return symmetric_from_json(j, path, 0);
}

MixtureSpec load_mixture_file(const std::string& path) {
  const json j = load_json_file(path);
  if (!j.is_object() || !j.contains("components") ||
      !j["components"].is_array() || j["components"].empty()) {
    throw Error("mixture file: expected { \"components\": [ ... ] }");
  }
  MixtureSpec spec;
  for (const auto& c : j["components"]) {
    MixtureComponent comp;
    if (!c.contains("weight") || !c["weight"].is_number()) {
      throw Error("mixture file: component missing numeric \"weight\"");
    }
    comp.weight = c["weight"].get<double>();
    if (!c.contains("mean") || !c["mean"].is_array()) {
      throw Error("mixture file: component missing array \"mean\"");
    }
    comp.mean.resize(static_cast<Eigen::Index>(c["mean"].size()));
    for (Eigen::Index i = 0; i < comp.mean.size(); ++i) {
      comp.mean(i) = c["mean"][static_cast<std::size_t>(i)].get<double>();
    }
    if (!c.contains("cov")) {
      throw Error("mixture file: component missing \"cov\"");
    }
    comp.cov = symmetric_from_json(c["cov"], "cov", comp.mean.size());
    spec.components.push_back(std::move(comp));
  }
  spec.validate();
  return spec;
}

json epi_report_to_json(const EpiReport& r) {
  json j;
  j["lhs"] = r.lhs;
  j["rhs_term_x"] = r.rhs_term_x;
  j["rhs_term_xz"] = r.rhs_term_xz;
  j["rhs"] = r.rhs;
  j["gap"] = r.gap;
  j["violated"] = r.violated;
  j["log_lhs"] = r.log_lhs;
  j["log_rhs_term_x"] = r.log_rhs_term_x;
  j["log_rhs_term_xz"] = r.log_rhs_term_xz;
  json dets;
  for (const auto& d : r.dets) {
    dets[d.name] = {{"value", d.value}, {"log", d.log_value}};
  }
  j["dets"] = std::move(dets);
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

json gamma_diagnostic_to_json(const GammaDiagnostic& d) {
  json j;
  j["gamma"] = d.gamma;
  j["eigenvalues_real"] = vector_to_json(d.eig_real);
  j["eigenvalues_imag"] = vector_to_json(d.eig_imag);
  j["has_complex"] = d.has_complex;
  j["det_side_defined"] = d.det_side_defined;
  j["det_side"] = d.det_side_defined ? json(d.det_side) : json();
  j["trace_side"] = d.trace_side;
  j["amgm_holds"] = d.amgm_holds;
  j["k_psd"] = d.k_psd;
  j["d_gamma"] = matrix_to_json(d.d_gamma.mat());
  j["cond_cov"] = matrix_to_json(d.cond_cov.mat());
  j["k_matrix"] = matrix_to_json(d.k_matrix);
  return j;
}

json search_trace_to_json(const SearchTrace& t) {
  json j;
  j["seed"] = t.seed;
  j["best_restart"] = t.best_restart;
  j["best_objective"] = t.best_objective;
  j["best_gap"] = t.best_gap;
  j["total_evaluations"] = t.total_evaluations;
  j["best_instance"] = instance_to_json(t.best_instance, "search best");
  j["best_report"] = epi_report_to_json(t.best_report);
  json restarts = json::array();
  for (const auto& r : t.restarts) {
    json h = json::array();
    for (const auto& [iter, obj] : r.history) {
      h.push_back({{"iteration", iter}, {"objective", obj}});
    }
    restarts.push_back({{"restart", r.restart},
                        {"best_objective", r.best_objective},
                        {"history", std::move(h)}});
  }
  j["restarts"] = std::move(restarts);
  return j;
}

json mc_report_to_json(const McReport& r) {
  auto entropy = [](const EntropyEstimate& e) {
    return json{{"estimate", e.estimate},
                {"standard_error", e.standard_error},
                {"samples", e.samples},
                {"k", e.k}};
  };
  json j;
  j["lhs_estimate"] = r.lhs_estimate;
  j["rhs_estimate"] = r.rhs_estimate;
  j["se_lhs"] = r.se_lhs;
  j["se_rhs"] = r.se_rhs;
  j["h_x"] = entropy(r.h_x);
  j["h_x_az"] = entropy(r.h_x_az);
  j["h_x_z"] = entropy(r.h_x_z);
  j["samples"] = r.samples;
  j["k"] = r.k;
  j["conclusion"] = to_string(r.conclusion);
  j["seed"] = r.seed;
  j["detail"] = r.detail;
  return j;
}

json report_envelope(const std::string& command, const std::string& input_digest,
                     json payload) {
  json j;
  j["tool"] = "costa-epi";
  j["version"] = kVersion;
  j["command"] = command;
  j["input_digest"] = input_digest;
  j["timestamp"] = utc_timestamp();
  j["report"] = std::move(payload);
  return j;
}

std::string fnv1a_digest(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "fnv1a:%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "fnv1a:missing";
  std::ostringstream os;
  os << in.rdbuf();
  return fnv1a_digest(os.str());
}

}  // namespace costa
