#include "qbnn/bundle.hpp"

#include <fstream>
#include <sstream>

#include "qbnn/error.hpp"

namespace qbnn {

using nlohmann::json;

json instance_to_json(const InstanceBundle& b) {
  json inputs = json::array();
  for (const auto& row : b.data.inputs) {
    json r = json::array();
    for (const Spin s : row) r.push_back(static_cast<int>(s));
    inputs.push_back(std::move(r));
  }
  json labels = json::array();
  for (const Spin s : b.data.labels) labels.push_back(static_cast<int>(s));

  json j = {{"schema", "qbnn.instance/1"},
            {"id", b.id},
            {"source", b.source},
            {"dataset", {{"inputs", std::move(inputs)}, {"labels", std::move(labels)}}}};
  if (b.architecture) j["architecture"] = b.architecture->to_string();
  if (b.options) {
    j["options"] = {{"penalty", b.options->penalty}, {"fold_constant_inputs", b.options->fold_constant_inputs}};
  }
  if (b.qubo) j["qubo"] = qubo_to_json(b.qubo->qubo, b.qubo->var_names);
  return j;
}

namespace {

Spin spin_from(const json& v, const std::string& where) {
  if (!v.is_number_integer() || (v.get<int>() != 1 && v.get<int>() != -1)) {
    throw ParseError(where + ": expected +1 or -1");
  }
  return static_cast<Spin>(v.get<int>());
}

}  // namespace

InstanceBundle instance_from_json(const json& j) try {
  if (!j.is_object() || j.value("schema", "") != "qbnn.instance/1") {
    throw ParseError("not a qbnn.instance/1 bundle");
  }
  InstanceBundle b;
  b.id = j.value("id", "");
  if (j.contains("source")) b.source = j.at("source");
  if (!j.contains("dataset")) throw ParseError("instance: missing 'dataset'");
  const json& ds = j.at("dataset");
  const json& inputs = ds.at("inputs");
  const json& labels = ds.at("labels");
  if (!inputs.is_array() || !labels.is_array() || inputs.size() != labels.size()) {
    throw ParseError("dataset: 'inputs' and 'labels' must be arrays of equal length");
  }
  for (std::size_t d = 0; d < inputs.size(); ++d) {
    std::vector<Spin> row;
    for (std::size_t i = 0; i < inputs[d].size(); ++i) {
      row.push_back(spin_from(inputs[d][i], "dataset.inputs[" + std::to_string(d) + "]"));
    }
    b.data.add(std::move(row), spin_from(labels[d], "dataset.labels[" + std::to_string(d) + "]"));
  }
  if (j.contains("architecture")) b.architecture = BnnArchitecture::parse(j.at("architecture").get<std::string>());
  if (j.contains("options")) {
    BuildOptions o;
    o.penalty = j.at("options").value("penalty", o.penalty);
    o.fold_constant_inputs = j.at("options").value("fold_constant_inputs", o.fold_constant_inputs);
    b.options = o;
  }
  if (j.contains("qubo")) b.qubo = qubo_from_json(j.at("qubo"));
  return b;
} catch (const json::exception& e) {
  throw ParseError(std::string("instance: ") + e.what());
}

json sample_set_to_json(const SampleSet& s, std::size_t num_vars, const json& meta) {
  json samples = json::array();
  for (const Sample& x : s.samples) {
    samples.push_back({{"bits", pack_bits_hex(x.bits)}, {"energy", x.energy}, {"restart", x.restart}});
  }
  return {{"schema", "qbnn.samples/1"},
          {"num_vars", num_vars},
          {"wall_time_ms", s.wall_time_ms},
          {"meta", meta},
          {"samples", std::move(samples)}};
}

SampleSet sample_set_from_json(const json& j, std::size_t expected_num_vars) try {
  if (!j.is_object() || j.value("schema", "") != "qbnn.samples/1") throw ParseError("not a qbnn.samples/1 file");
  const std::size_t n = j.at("num_vars").get<std::size_t>();
  if (n != expected_num_vars) {
    throw DimensionError("sample set has " + std::to_string(n) + " variables, expected " +
                         std::to_string(expected_num_vars));
  }
  SampleSet s;
  s.wall_time_ms = j.value("wall_time_ms", 0.0);
  for (const json& x : j.at("samples")) {
    s.samples.push_back({unpack_bits_hex(x.at("bits").get<std::string>(), n), x.at("energy").get<std::int64_t>(),
                         x.value("restart", std::size_t{0})});
  }
  return s;
} catch (const json::exception& e) {
  throw ParseError(std::string("samples: ") + e.what());
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace qbnn
