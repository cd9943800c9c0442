#pragma once

// JSON encodings of the documents written by the cqreg tool.

#include <optional>
#include <string>

#include <json.hpp>

#include "cqr/inference.hpp"
#include "cqr/model.hpp"
#include "cqr/simulation.hpp"

namespace cqreg {

using nlohmann::json;

struct Metadata {
  std::string input;
  std::size_t n = 0;
  std::size_t p = 0;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> covariates;
};

json vector_json(const cqr::Vector& v);
cqr::Vector vector_from_json(const json& j);

json metadata_json(const Metadata& meta);
json process_json(const cqr::QuantileProcess& process);
/// Inverse of process_json (breakpoints, coefficients, tau_end; flags kept).
cqr::QuantileProcess process_from_json(const json& j);

json bootstrap_json(const cqr::BootstrapSummary& summary);
json trimmed_json(const cqr::TrimmedSummary& trimmed);
json monte_carlo_json(const cqr::MonteCarloReport& report);

/// Product-limit estimate, Nelson-Aalen increments and the cadlag inverse.
json km_json(const cqr::Dataset& data);

/// Compact JSON text with a trailing newline.
std::string dump(const json& j);

}  // namespace cqreg
