// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "json.hpp"

#include "costa/epi.hpp"
#include "costa/mc_entropy.hpp"
#include "costa/search.hpp"

namespace costa {

using json = nlohmann::ordered_json;

struct LoadedInstance {
  EpiInstance instance;
  std::string label;
};

/// Instance files are JSON documents:
///   { "label": "...", "n": 2,
///     "sigma_x": [[...], ...], "sigma_z": [[...], ...],
///     "a": [[...], ...] }           (or "a_sqrt" in place of "a")
/// Arrays are square, row-major, symmetric within 1e-9 relative (silently
/// symmetrized); larger asymmetry is a load error naming the worst entry.
LoadedInstance load_instance_file(const std::string& path);
LoadedInstance parse_instance_json(const json& j);
json instance_to_json(const EpiInstance& inst, const std::string& label);
void save_instance_file(const std::string& path, const EpiInstance& inst,
                        const std::string& label);

/// A bare 2-D JSON array, or an object with a "matrix" field.
SymMatrix load_matrix_file(const std::string& path);

/// { "components": [ { "weight": w, "mean": [...], "cov": [[...]] }, ... ] }
MixtureSpec load_mixture_file(const std::string& path);

json epi_report_to_json(const EpiReport& r);
json gamma_diagnostic_to_json(const GammaDiagnostic& d);
json search_trace_to_json(const SearchTrace& t);
json mc_report_to_json(const McReport& r);

/// ReportFile envelope: tool name, version, command, digest of the input
/// bytes, and a UTC timestamp around the payload.
json report_envelope(const std::string& command, const std::string& input_digest,
                     json payload);

std::string fnv1a_digest(const std::string& bytes);
std::string file_digest(const std::string& path);

}  // namespace costa
