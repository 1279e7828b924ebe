#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qbnn/bnn.hpp"

namespace qbnn {

/// Rows of active (0-based) attribute indices with spin labels.
struct SparseBinaryDataset {
  struct Row {
    std::vector<std::uint32_t> active;  // sorted, unique
    Spin label = 1;
    friend bool operator==(const Row&, const Row&) = default;
  };
  std::vector<Row> rows;
  std::size_t dimension = 0;
};

/// LIBSVM-style text: "<+1|-1> <idx>:1 ..." with 1-based indices. `dimension`
/// overrides the inferred max index when given.
SparseBinaryDataset parse_sparse(std::string_view text, std::optional<std::size_t> dimension = std::nullopt);
SparseBinaryDataset load_sparse(const std::string& path, std::optional<std::size_t> dimension = std::nullopt);
std::string serialize_sparse(const SparseBinaryDataset& ds);

/// Present attribute -> +1, absent -> -1, for the attributes in `subset` (in order).
LabeledDataset to_spins(const SparseBinaryDataset& ds, std::span<const std::uint32_t> subset,
                        std::span<const std::size_t> rows = {});

struct SampledInstance {
  std::string id;
  std::vector<std::uint32_t> attributes;
  std::vector<std::size_t> rows;
  LabeledDataset data;
  std::size_t conflicts = 0;  // distinct inputs carrying both labels
};

/// Per instance: k attributes then D rows, both uniform without replacement,
/// from Rng(derive_seed(seed, instance)).
std::vector<SampledInstance> sample_instances(const SparseBinaryDataset& ds, std::size_t k_attrs, std::size_t points,
                                              std::size_t count, std::uint64_t seed);

/// Number of distinct inputs that appear with both labels; each forces a loss of at least 1.
std::size_t count_label_conflicts(const LabeledDataset& ds);

/// Synthetic stand-in shaped like the UCI adult/a1a training split: 123 binary
/// attributes in 14 one-hot groups, 1605 rows, labels from a noisy planted rule.
SparseBinaryDataset synthetic_adult(std::uint64_t seed = 1, std::size_t rows = 1605);

}  // namespace qbnn
