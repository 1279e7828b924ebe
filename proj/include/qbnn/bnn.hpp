#pragma once

// Reference semantics of bias-free binary networks with spin weights and
// activations, sign nonlinearity and a single output neuron.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qbnn/qubo.hpp"
#include "qbnn/rng.hpp"

namespace qbnn {

using Spin = std::int8_t;

inline Bit spin_to_bit(Spin s) noexcept { return s > 0 ? 1 : 0; }
inline Spin bit_to_spin(Bit b) noexcept { return b ? Spin{1} : Spin{-1}; }

/// Layer sizes [n0, n1, ..., 1]; layer l maps n_l inputs onto n_{l+1} neurons.
/// Every fan-in must be 2^k - 1 so spin sums can never tie.
class BnnArchitecture {
 public:
  explicit BnnArchitecture(std::vector<std::size_t> layer_sizes);

  /// "3-3-1" style.
  static BnnArchitecture parse(std::string_view text);

  const std::vector<std::size_t>& layer_sizes() const noexcept { return sizes_; }
  std::size_t num_layers() const noexcept { return sizes_.size() - 1; }
  std::size_t fan_in(std::size_t layer) const { return sizes_.at(layer); }
  std::size_t width(std::size_t layer) const { return sizes_.at(layer + 1); }
  std::size_t input_size() const noexcept { return sizes_.front(); }
  std::size_t num_weights() const noexcept;
  std::size_t num_neurons() const noexcept;
  std::string to_string() const;

  friend bool operator==(const BnnArchitecture&, const BnnArchitecture&) = default;

 private:
  std::vector<std::size_t> sizes_;
};

struct SpinMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Spin> data;  // row-major

  SpinMatrix() = default;
  SpinMatrix(std::size_t r, std::size_t c, Spin fill = 1) : rows(r), cols(c), data(r * c, fill) {}

  Spin& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  Spin at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const Spin> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  friend bool operator==(const SpinMatrix&, const SpinMatrix&) = default;
};

/// Per-layer weight matrices; layer l has shape width(l) x fan_in(l).
struct WeightSet {
  std::vector<SpinMatrix> layers;

  static WeightSet filled(const BnnArchitecture& arch, Spin value);
  static WeightSet random(const BnnArchitecture& arch, Rng& rng);

  bool matches(const BnnArchitecture& arch) const noexcept;
  std::size_t num_weights() const noexcept;

  friend bool operator==(const WeightSet&, const WeightSet&) = default;
};

/// Weights flattened in (layer, row, column) order as bits q = (s + 1) / 2.
/// This is the order weight variables take in the variable registry.
std::vector<Bit> weights_to_bits(const WeightSet& w);
WeightSet weights_from_bits(const BnnArchitecture& arch, std::span<const Bit> bits);

struct LabeledDataset {
  std::vector<std::vector<Spin>> inputs;
  std::vector<Spin> labels;

  std::size_t size() const noexcept { return labels.size(); }
  bool empty() const noexcept { return labels.empty(); }
  void add(std::vector<Spin> input, Spin label);
  /// Throws DimensionError unless every row has `input_size` spins and labels are spins.
  void validate(std::size_t input_size) const;
};

/// x / |x|; throws TieError on 0.
Spin sign(std::int64_t x);

/// activations[0] = y^0, activations[l] = y^l, activations.back() = {y^L}.
struct ForwardTrace {
  std::vector<std::vector<Spin>> activations;
  Spin output() const { return activations.back().front(); }
};

ForwardTrace forward_trace(const WeightSet& w, std::span<const Spin> y0);
Spin forward(const WeightSet& w, std::span<const Spin> y0);

/// 0 when label == out, else 1; equals ((out - label) / 2)^2.
int loss01(Spin label, Spin out);

std::size_t dataset_loss(const WeightSet& w, const LabeledDataset& ds);

struct OracleOptions {
  std::size_t limit = 30;     // maximum number of weights
  unsigned threads = 1;
  bool stop_at_zero = false;  // stop at the first zero-loss pattern; num_optima is then a lower bound
};

struct OracleResult {
  std::size_t min_loss = 0;
  WeightSet argmin;               // lexicographically smallest optimal weight bit pattern
  std::uint64_t num_optima = 0;
  bool exhaustive = true;         // false when stop_at_zero cut the search short
};

/// Exact minimum of dataset_loss over all 2^num_weights weight settings.
OracleResult enumerate_optimal_weights(const BnnArchitecture& arch, const LabeledDataset& ds,
                                       const OracleOptions& opts = {});

/// dataset_loss(w) - min_loss; InternalError if negative.
std::size_t distance(const WeightSet& w, const LabeledDataset& ds, std::size_t min_loss);

}  // namespace qbnn
