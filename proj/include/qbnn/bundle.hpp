#pragma once

// JSON file schemas exchanged between pipeline stages.

#include <optional>
#include <string>

#include <json.hpp>

#include "qbnn/bnn.hpp"
#include "qbnn/builder.hpp"
#include "qbnn/qubo_io.hpp"
#include "qbnn/solvers.hpp"

namespace qbnn {

/// {"schema": "qbnn.instance/1", "id", "source", "dataset": {"inputs", "labels"},
///  and after building: "architecture", "options", "qubo" (canonical JSON with var_names)}
struct InstanceBundle {
  std::string id;
  LabeledDataset data;
  nlohmann::json source = nlohmann::json::object();
  std::optional<BnnArchitecture> architecture;
  std::optional<BuildOptions> options;
  std::optional<NamedQubo> qubo;
};

nlohmann::json instance_to_json(const InstanceBundle& b);
InstanceBundle instance_from_json(const nlohmann::json& j);

/// {"schema": "qbnn.samples/1", "num_vars", "wall_time_ms", "meta": {...},
///  "samples": [{"bits": hex, "energy", "restart"}, ...]}
nlohmann::json sample_set_to_json(const SampleSet& s, std::size_t num_vars, const nlohmann::json& meta);
SampleSet sample_set_from_json(const nlohmann::json& j, std::size_t expected_num_vars);

nlohmann::json read_json_file(const std::string& path);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace qbnn
