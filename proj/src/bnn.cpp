#include "qbnn/bnn.hpp"

#include <charconv>

#include "qbnn/error.hpp"
#include "qbnn/penalties.hpp"

namespace qbnn {

BnnArchitecture::BnnArchitecture(std::vector<std::size_t> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw UsageError("architecture needs at least one layer");
  if (sizes_.back() != 1) throw UsageError("architecture must end in a single output neuron");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (!is_valid_fan_in(sizes_[l])) throw UnsupportedFanInError(sizes_[l]);
  }
}

BnnArchitecture BnnArchitecture::parse(std::string_view text) {
  std::vector<std::size_t> sizes;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t dash = std::min(text.find('-', pos), text.size());
    const std::string_view tok = text.substr(pos, dash - pos);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size() || v == 0) {
      throw UsageError("malformed architecture '" + std::string(text) + "' (expected e.g. 3-3-1)");
    }
    sizes.push_back(v);
    pos = dash + 1;
  }
  return BnnArchitecture(std::move(sizes));
}

std::size_t BnnArchitecture::num_weights() const noexcept {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) n += sizes_[l] * sizes_[l + 1];
  return n;
}

std::size_t BnnArchitecture::num_neurons() const noexcept {
  std::size_t n = 0;
  for (std::size_t l = 1; l < sizes_.size(); ++l) n += sizes_[l];
  return n;
}

std::string BnnArchitecture::to_string() const {
  std::string s;
  for (std::size_t l = 0; l < sizes_.size(); ++l) {
    if (l) s += '-';
    s += std::to_string(sizes_[l]);
  }
  return s;
}

WeightSet WeightSet::filled(const BnnArchitecture& arch, Spin value) {
  WeightSet w;
  for (std::size_t l = 0; l < arch.num_layers(); ++l) w.layers.emplace_back(arch.width(l), arch.fan_in(l), value);
  return w;
}

WeightSet WeightSet::random(const BnnArchitecture& arch, Rng& rng) {
  WeightSet w = filled(arch, 1);
  for (auto& m : w.layers) {
    for (auto& s : m.data) s = (rng.next() >> 63) ? Spin{1} : Spin{-1};
  }
  return w;
}

bool WeightSet::matches(const BnnArchitecture& arch) const noexcept {
  if (layers.size() != arch.num_layers()) return false;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].rows != arch.width(l) || layers[l].cols != arch.fan_in(l)) return false;
  }
  return true;
}

std::size_t WeightSet::num_weights() const noexcept {
  std::size_t n = 0;
  for (const auto& m : layers) n += m.data.size();
  return n;
}

std::vector<Bit> weights_to_bits(const WeightSet& w) {
  std::vector<Bit> bits;
  bits.reserve(w.num_weights());
  for (const auto& m : w.layers) {
    for (const Spin s : m.data) bits.push_back(spin_to_bit(s));
  }
  return bits;
}

WeightSet weights_from_bits(const BnnArchitecture& arch, std::span<const Bit> bits) {
  if (bits.size() != arch.num_weights()) {
    throw DimensionError("expected " + std::to_string(arch.num_weights()) + " weight bits, got " +
                         std::to_string(bits.size()));
  }
  WeightSet w = WeightSet::filled(arch, 1);
  std::size_t k = 0;
  for (auto& m : w.layers) {
    for (auto& s : m.data) s = bit_to_spin(bits[k++]);
  }
  return w;
}

void LabeledDataset::add(std::vector<Spin> input, Spin label) {
  inputs.push_back(std::move(input));
  labels.push_back(label);
}

void LabeledDataset::validate(std::size_t input_size) const {
  if (inputs.size() != labels.size()) throw DimensionError("dataset has mismatched input/label counts");
  for (std::size_t d = 0; d < inputs.size(); ++d) {
    if (inputs[d].size() != input_size) {
      throw DimensionError("datum " + std::to_string(d) + " has " + std::to_string(inputs[d].size()) +
                           " inputs, expected " + std::to_string(input_size));
    }
    for (const Spin s : inputs[d]) {
      if (s != 1 && s != -1) throw DimensionError("datum " + std::to_string(d) + " has a non-spin input");
    }
    if (labels[d] != 1 && labels[d] != -1) throw DimensionError("datum " + std::to_string(d) + " has a non-spin label");
  }
}

Spin sign(std::int64_t x) {
  if (x == 0) throw TieError("sign of zero pre-activation");
  return x > 0 ? Spin{1} : Spin{-1};
}

namespace {

void check_chain(const WeightSet& w, std::size_t input_size) {
  if (w.layers.empty()) throw DimensionError("weight set has no layers");
  std::size_t expect = input_size;
  for (std::size_t l = 0; l < w.layers.size(); ++l) {
    if (w.layers[l].cols != expect) {
      throw DimensionError("layer " + std::to_string(l) + " expects " + std::to_string(w.layers[l].cols) +
                           " inputs, got " + std::to_string(expect));
    }
    expect = w.layers[l].rows;
  }
  if (expect != 1) throw DimensionError("final layer must have one neuron");
}

}  // namespace

ForwardTrace forward_trace(const WeightSet& w, std::span<const Spin> y0) {
  check_chain(w, y0.size());
  ForwardTrace t;
  t.activations.emplace_back(y0.begin(), y0.end());
  for (const SpinMatrix& m : w.layers) {
    const std::vector<Spin>& y = t.activations.back();
    std::vector<Spin> next(m.rows);
    for (std::size_t j = 0; j < m.rows; ++j) {
      std::int64_t s = 0;
      for (std::size_t i = 0; i < m.cols; ++i) s += m.at(j, i) * y[i];
      next[j] = sign(s);
    }
    t.activations.push_back(std::move(next));
  }
  return t;
}

Spin forward(const WeightSet& w, std::span<const Spin> y0) { return forward_trace(w, y0).output(); }

int loss01(Spin label, Spin out) { return label == out ? 0 : 1; }

std::size_t dataset_loss(const WeightSet& w, const LabeledDataset& ds) {
  std::size_t loss = 0;
  for (std::size_t d = 0; d < ds.size(); ++d) loss += static_cast<std::size_t>(loss01(ds.labels[d], forward(w, ds.inputs[d])));
  return loss;
}

std::size_t distance(const WeightSet& w, const LabeledDataset& ds, std::size_t min_loss) {
  const std::size_t loss = dataset_loss(w, ds);
  if (loss < min_loss) {
    throw InternalError("loss " + std::to_string(loss) + " below reported optimum " + std::to_string(min_loss));
  }
  return loss - min_loss;
}

}  // namespace qbnn
