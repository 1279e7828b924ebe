#include "qbnn/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "qbnn/error.hpp"
#include "qbnn/penalties.hpp"
#include "qbnn/rng.hpp"

namespace qbnn {

SparseBinaryDataset parse_sparse(std::string_view text, std::optional<std::size_t> dimension) {
  SparseBinaryDataset ds;
  std::size_t max_index = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);

    std::vector<std::string_view> tok;
    for (std::size_t p = 0; p < line.size();) {
      while (p < line.size() && (line[p] == ' ' || line[p] == '\t' || line[p] == '\r')) ++p;
      const std::size_t s = p;
      while (p < line.size() && line[p] != ' ' && line[p] != '\t' && line[p] != '\r') ++p;
      if (p > s) tok.push_back(line.substr(s, p - s));
    }
    if (tok.empty()) continue;

    SparseBinaryDataset::Row row;
    if (tok[0] == "+1" || tok[0] == "1") {
      row.label = 1;
    } else if (tok[0] == "-1") {
      row.label = -1;
    } else {
      throw ParseError("label '" + std::string(tok[0]) + "' is not +1 or -1", line_no);
    }
    for (std::size_t t = 1; t < tok.size(); ++t) {
      const auto colon = tok[t].find(':');
      if (colon == std::string_view::npos) throw ParseError("token '" + std::string(tok[t]) + "' is not idx:val", line_no);
      const std::string_view idx_s = tok[t].substr(0, colon);
      const std::string_view val_s = tok[t].substr(colon + 1);
      std::uint32_t idx = 0;
      const auto [ptr, ec] = std::from_chars(idx_s.data(), idx_s.data() + idx_s.size(), idx);
      if (idx_s.empty() || ec != std::errc{} || ptr != idx_s.data() + idx_s.size() || idx == 0) {
        throw ParseError("bad attribute index in '" + std::string(tok[t]) + "' (1-based)", line_no);
      }
      if (val_s != "1" && val_s != "1.0" && val_s != "1.") {
        throw ParseError("attribute value in '" + std::string(tok[t]) + "' must be 1", line_no);
      }
      row.active.push_back(idx - 1);
      max_index = std::max<std::size_t>(max_index, idx);
    }
    std::sort(row.active.begin(), row.active.end());
    row.active.erase(std::unique(row.active.begin(), row.active.end()), row.active.end());
    ds.rows.push_back(std::move(row));
  }
  if (dimension) {
    if (*dimension < max_index) {
      throw ParseError("attribute index " + std::to_string(max_index) + " exceeds declared dimension " +
                       std::to_string(*dimension));
    }
    ds.dimension = *dimension;
  } else {
    ds.dimension = max_index;
  }
  return ds;
}

SparseBinaryDataset load_sparse(const std::string& path, std::optional<std::size_t> dimension) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_sparse(ss.str(), dimension);
}

std::string serialize_sparse(const SparseBinaryDataset& ds) {
  std::ostringstream os;
  for (const auto& row : ds.rows) {
    os << (row.label > 0 ? "+1" : "-1");
    for (const auto a : row.active) os << ' ' << (a + 1) << ":1";
    os << '\n';
  }
  return os.str();
}

LabeledDataset to_spins(const SparseBinaryDataset& ds, std::span<const std::uint32_t> subset,
                        std::span<const std::size_t> rows) {
  if (!is_valid_fan_in(subset.size())) throw UnsupportedFanInError(subset.size());
  for (const auto a : subset) {
    if (a >= ds.dimension) throw DimensionError("attribute " + std::to_string(a) + " outside dimension");
  }
  LabeledDataset out;
  auto project = [&](const SparseBinaryDataset::Row& row) {
    std::vector<Spin> input;
    input.reserve(subset.size());
    for (const auto a : subset) {
      input.push_back(std::binary_search(row.active.begin(), row.active.end(), a) ? Spin{1} : Spin{-1});
    }
    out.add(std::move(input), row.label);
  };
  if (rows.empty()) {
    for (const auto& row : ds.rows) project(row);
  } else {
    for (const std::size_t r : rows) project(ds.rows.at(r));
  }
  return out;
}

std::size_t count_label_conflicts(const LabeledDataset& ds) {
  std::map<std::vector<Spin>, int> seen;  // bit 0: saw +1, bit 1: saw -1
  for (std::size_t d = 0; d < ds.size(); ++d) seen[ds.inputs[d]] |= ds.labels[d] > 0 ? 1 : 2;
  return static_cast<std::size_t>(std::count_if(seen.begin(), seen.end(), [](const auto& kv) { return kv.second == 3; }));
}

namespace {

template <class T>
std::vector<T> choose(Rng& rng, std::size_t population, std::size_t k) {
  std::vector<T> pool(population);
  std::iota(pool.begin(), pool.end(), T{0});
  // Partial Fisher-Yates: the first k slots are the sample.
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(population - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace

std::vector<SampledInstance> sample_instances(const SparseBinaryDataset& ds, std::size_t k_attrs, std::size_t points,
                                              std::size_t count, std::uint64_t seed) {
  if (!is_valid_fan_in(k_attrs)) throw UnsupportedFanInError(k_attrs);
  if (k_attrs > ds.dimension) {
    throw CapacityError("cannot pick " + std::to_string(k_attrs) + " of " + std::to_string(ds.dimension) +
                        " attributes");
  }
  if (points == 0 || points > ds.rows.size()) {
    throw CapacityError("cannot pick " + std::to_string(points) + " of " + std::to_string(ds.rows.size()) + " rows");
  }
  std::vector<SampledInstance> out;
  for (std::size_t n = 0; n < count; ++n) {
    Rng rng(derive_seed(seed, n));
    SampledInstance inst;
    inst.id = "inst" + std::to_string(n);
    inst.attributes = choose<std::uint32_t>(rng, ds.dimension, k_attrs);
    inst.rows = choose<std::size_t>(rng, ds.rows.size(), points);
    inst.data = to_spins(ds, inst.attributes, inst.rows);
    inst.conflicts = count_label_conflicts(inst.data);
    out.push_back(std::move(inst));
  }
  return out;
}

SparseBinaryDataset synthetic_adult(std::uint64_t seed, std::size_t rows) {
  // Group sizes sum to 123, mimicking one-hot encoded categorical columns.
  static constexpr std::size_t groups[] = {5, 7, 16, 16, 7, 14, 6, 5, 2, 3, 3, 3, 5, 31};
  Rng rng(derive_seed(seed, 0xadu));
  SparseBinaryDataset ds;
  ds.dimension = 123;

  std::vector<double> attr_weight(ds.dimension);
  for (auto& w : attr_weight) w = rng.uniform01() * 2.0 - 1.0;
  // Skewed category popularity so some attributes are common.
  std::vector<double> popularity(ds.dimension);
  for (auto& p : popularity) p = 0.05 + rng.uniform01() * rng.uniform01();

  for (std::size_t r = 0; r < rows; ++r) {
    SparseBinaryDataset::Row row;
    std::size_t base = 0;
    double score = 0.0;
    for (const std::size_t g : groups) {
      double total = 0.0;
      for (std::size_t k = 0; k < g; ++k) total += popularity[base + k];
      double u = rng.uniform01() * total;
      std::size_t pick = g - 1;
      for (std::size_t k = 0; k < g; ++k) {
        u -= popularity[base + k];
        if (u < 0.0) {
          pick = k;
          break;
        }
      }
      row.active.push_back(static_cast<std::uint32_t>(base + pick));
      score += attr_weight[base + pick];
      base += g;
    }
    score += (rng.uniform01() - 0.5) * 1.5;
    row.label = score > 1.0 ? Spin{1} : Spin{-1};
    ds.rows.push_back(std::move(row));
  }
  return ds;
}

}  // namespace qbnn
