#include "qbnn/builder.hpp"

#include <sstream>

#include "qbnn/error.hpp"
#include "qbnn/penalties.hpp"

namespace qbnn {

namespace {

std::uint32_t u32(std::size_t v) { return static_cast<std::uint32_t>(v); }

}  // namespace

VarKey VarKey::weight(std::size_t l, std::size_t j, std::size_t i) { return {VarKind::Weight, 0, u32(l), u32(j), u32(i)}; }
VarKey VarKey::activation(std::size_t d, std::size_t l, std::size_t i) {
  return {VarKind::Activation, u32(d), u32(l), u32(i), 0};
}
VarKey VarKey::product(std::size_t d, std::size_t l, std::size_t i, std::size_t j) {
  return {VarKind::Product, u32(d), u32(l), u32(i), u32(j)};
}
VarKey VarKey::mul_ancilla(std::size_t d, std::size_t l, std::size_t i, std::size_t j) {
  return {VarKind::MulAncilla, u32(d), u32(l), u32(i), u32(j)};
}
VarKey VarKey::sum_ancilla(std::size_t d, std::size_t l, std::size_t j, std::size_t k) {
  return {VarKind::SumAncilla, u32(d), u32(l), u32(j), u32(k)};
}
VarKey VarKey::output(std::size_t d) { return {VarKind::Output, u32(d), 0, 0, 0}; }

std::string VarKey::name() const {
  auto idx = [](std::initializer_list<std::uint32_t> v) {
    std::string s;
    for (const auto x : v) s += "[" + std::to_string(x) + "]";
    return s;
  };
  switch (kind) {
    case VarKind::Weight: return "W" + idx({layer, a, b});
    case VarKind::Activation: return "y" + idx({datum, layer, a});
    case VarKind::Product: return "Z" + idx({datum, layer, a, b});
    case VarKind::MulAncilla: return "b" + idx({datum, layer, a, b});
    case VarKind::SumAncilla: return "a" + idx({datum, layer, a, b});
    case VarKind::Output: return "out" + idx({datum});
  }
  return "?";
}

VarRegistry::VarRegistry(const BnnArchitecture& arch, std::size_t num_data, bool fold)
    : arch_(arch), num_data_(num_data), fold_(fold) {
  const std::size_t L = arch.num_layers();
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t j = 0; j < arch.width(l); ++j) {
      for (std::size_t i = 0; i < arch.fan_in(l); ++i) add(VarKey::weight(l, j, i));
    }
  }
  const std::size_t first_product_layer = fold ? 1 : 0;
  for (std::size_t d = 0; d < num_data; ++d) {
    for (std::size_t l = 1; l < L; ++l) {
      for (std::size_t i = 0; i < arch.fan_in(l); ++i) add(VarKey::activation(d, l, i));
    }
    for (std::size_t l = first_product_layer; l < L; ++l) {
      for (std::size_t j = 0; j < arch.width(l); ++j) {
        for (std::size_t i = 0; i < arch.fan_in(l); ++i) add(VarKey::product(d, l, i, j));
      }
    }
    for (std::size_t l = first_product_layer; l < L; ++l) {
      for (std::size_t j = 0; j < arch.width(l); ++j) {
        for (std::size_t i = 0; i < arch.fan_in(l); ++i) add(VarKey::mul_ancilla(d, l, i, j));
      }
    }
    for (std::size_t l = 0; l < L; ++l) {
      const std::size_t n_anc = sum_ancilla_count(arch.fan_in(l));
      for (std::size_t j = 0; j < arch.width(l); ++j) {
        for (std::size_t k = 0; k < n_anc; ++k) add(VarKey::sum_ancilla(d, l, j, k));
      }
    }
    add(VarKey::output(d));
  }
}

void VarRegistry::add(const VarKey& key) {
  index_.emplace(key, keys_.size());
  keys_.push_back(key);
}

std::size_t VarRegistry::index(const VarKey& key) const {
  const auto it = index_.find(key);
  if (it == index_.end()) throw DimensionError("no variable " + key.name() + " in registry");
  return it->second;
}

std::vector<std::string> VarRegistry::names() const {
  std::vector<std::string> out;
  out.reserve(keys_.size());
  for (const VarKey& k : keys_) out.push_back(k.name());
  return out;
}

namespace {

/// Variable or constant holding neuron j's output of layer l - 1, i.e. y^l_i.
BitOperand layer_input(const VarRegistry& reg, const LabeledDataset& ds, std::size_t d, std::size_t l,
                       std::size_t i) {
  if (l == 0) return BitOperand::fixed(ds.inputs[d][i] > 0);
  return BitOperand::variable(reg.index(VarKey::activation(d, l, i)));
}

std::size_t neuron_output(const VarRegistry& reg, std::size_t d, std::size_t l, std::size_t j) {
  if (l + 1 == reg.architecture().num_layers()) return reg.index(VarKey::output(d));
  return reg.index(VarKey::activation(d, l + 1, j));
}

/// XNOR(W, y0) with y0 a known spin: q_W or 1 - q_W.
BitOperand folded_product(std::size_t weight_var, Spin y0) {
  return y0 > 0 ? BitOperand::variable(weight_var) : BitOperand::complement(weight_var);
}

}  // namespace

TrainingQubo build_training_qubo(const BnnArchitecture& arch, const LabeledDataset& ds, const BuildOptions& opts) {
  if (ds.empty()) throw UsageError("cannot build a training QUBO for an empty dataset");
  ds.validate(arch.input_size());
  if (opts.penalty < 1) throw UsageError("penalty must be >= 1");

  TrainingQubo out{Qubo{}, VarRegistry(arch, ds.size(), opts.fold_constant_inputs), {}};
  const VarRegistry& reg = out.registry;
  Qubo& q = out.qubo;
  q = Qubo(reg.size());
  const std::int64_t P = opts.penalty;
  if (P <= static_cast<std::int64_t>(ds.size())) {
    out.warnings.push_back("penalty " + std::to_string(P) + " <= dataset size " + std::to_string(ds.size()) +
                           ": the loss term may pay for a constraint violation");
  }

  const std::size_t L = arch.num_layers();
  for (std::size_t d = 0; d < ds.size(); ++d) {
    // (q_out - label)^2 = (1 - 2 label) q_out + label
    const std::int64_t label = spin_to_bit(ds.labels[d]);
    q.add_linear(reg.index(VarKey::output(d)), 1 - 2 * label);
    q.add_offset(label);

    for (std::size_t l = 0; l < L; ++l) {
      const std::size_t n_anc = sum_ancilla_count(arch.fan_in(l));
      for (std::size_t j = 0; j < arch.width(l); ++j) {
        std::vector<BitOperand> products;
        products.reserve(arch.fan_in(l));
        for (std::size_t i = 0; i < arch.fan_in(l); ++i) {
          const std::size_t w = reg.index(VarKey::weight(l, j, i));
          if (l == 0 && opts.fold_constant_inputs) {
            products.push_back(folded_product(w, ds.inputs[d][i]));
            continue;
          }
          const std::size_t z = reg.index(VarKey::product(d, l, i, j));
          const std::size_t b = reg.index(VarKey::mul_ancilla(d, l, i, j));
          add_xnor_penalty(q, BitOperand::variable(w), layer_input(reg, ds, d, l, i), z, b, P);
          products.push_back(BitOperand::variable(z));
        }
        std::vector<std::size_t> ancillas;
        for (std::size_t k = 0; k < n_anc; ++k) ancillas.push_back(reg.index(VarKey::sum_ancilla(d, l, j, k)));
        add_majority_penalty(q, products, ancillas, neuron_output(reg, d, l, j), P);
      }
    }
  }
  return out;
}

namespace {

void check_dataset(const VarRegistry& reg, const LabeledDataset& ds) {
  ds.validate(reg.architecture().input_size());
  if (ds.size() != reg.num_data()) {
    throw DimensionError("dataset has " + std::to_string(ds.size()) + " rows, registry was built for " +
                         std::to_string(reg.num_data()));
  }
}

}  // namespace

Assignment witness_assignment(const VarRegistry& reg, const LabeledDataset& ds, const WeightSet& w) {
  if (ds.empty()) throw UsageError("witness needs a nonempty dataset");
  check_dataset(reg, ds);
  const BnnArchitecture& arch = reg.architecture();
  if (!w.matches(arch)) throw DimensionError("weights do not match architecture " + arch.to_string());

  Assignment bits(reg.size(), 0);
  const std::size_t L = arch.num_layers();
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t j = 0; j < arch.width(l); ++j) {
      for (std::size_t i = 0; i < arch.fan_in(l); ++i) {
        bits[reg.index(VarKey::weight(l, j, i))] = spin_to_bit(w.layers[l].at(j, i));
      }
    }
  }
  for (std::size_t d = 0; d < ds.size(); ++d) {
    const ForwardTrace t = forward_trace(w, ds.inputs[d]);
    for (std::size_t l = 1; l < L; ++l) {
      for (std::size_t i = 0; i < arch.fan_in(l); ++i) {
        bits[reg.index(VarKey::activation(d, l, i))] = spin_to_bit(t.activations[l][i]);
      }
    }
    bits[reg.index(VarKey::output(d))] = spin_to_bit(t.output());
    for (std::size_t l = 0; l < L; ++l) {
      const std::size_t n_anc = sum_ancilla_count(arch.fan_in(l));
      for (std::size_t j = 0; j < arch.width(l); ++j) {
        std::size_t count = 0;
        for (std::size_t i = 0; i < arch.fan_in(l); ++i) {
          const Spin ws = w.layers[l].at(j, i);
          const Spin ys = t.activations[l][i];
          const Bit z = spin_to_bit(static_cast<Spin>(ws * ys));
          count += z;
          if (reg.contains(VarKey::product(d, l, i, j))) {
            bits[reg.index(VarKey::product(d, l, i, j))] = z;
            bits[reg.index(VarKey::mul_ancilla(d, l, i, j))] = spin_to_bit(ws) & spin_to_bit(ys);
          }
        }
        for (std::size_t k = 0; k < n_anc; ++k) {
          bits[reg.index(VarKey::sum_ancilla(d, l, j, k))] = static_cast<Bit>((count >> k) & 1u);
        }
      }
    }
  }
  return bits;
}

WeightSet decode_weights(std::span<const Bit> bits, const VarRegistry& reg) {
  if (bits.size() != reg.size()) {
    throw DimensionError("assignment has " + std::to_string(bits.size()) + " bits, registry has " +
                         std::to_string(reg.size()));
  }
  const BnnArchitecture& arch = reg.architecture();
  WeightSet w = WeightSet::filled(arch, 1);
  for (std::size_t l = 0; l < arch.num_layers(); ++l) {
    for (std::size_t j = 0; j < arch.width(l); ++j) {
      for (std::size_t i = 0; i < arch.fan_in(l); ++i) {
        w.layers[l].at(j, i) = bit_to_spin(bits[reg.index(VarKey::weight(l, j, i))]);
      }
    }
  }
  return w;
}

AuditReport audit(std::span<const Bit> bits, const VarRegistry& reg, const LabeledDataset& ds) {
  check_dataset(reg, ds);
  const WeightSet w = decode_weights(bits, reg);
  const BnnArchitecture& arch = reg.architecture();
  const std::size_t L = arch.num_layers();

  AuditReport r;
  for (std::size_t d = 0; d < ds.size(); ++d) {
    for (std::size_t l = 0; l < L; ++l) {
      const std::size_t n_anc = sum_ancilla_count(arch.fan_in(l));
      for (std::size_t j = 0; j < arch.width(l); ++j) {
        std::size_t count = 0;
        for (std::size_t i = 0; i < arch.fan_in(l); ++i) {
          const Bit wb = bits[reg.index(VarKey::weight(l, j, i))];
          const Bit yb = layer_input(reg, ds, d, l, i).value(bits);
          const Bit expect = wb == yb;
          if (!reg.contains(VarKey::product(d, l, i, j))) {
            count += expect;
            continue;
          }
          const Bit z = bits[reg.index(VarKey::product(d, l, i, j))];
          count += z;
          r.xnor_violations += (z != expect);
          r.mul_ancilla_mismatches += (bits[reg.index(VarKey::mul_ancilla(d, l, i, j))] != (wb & yb));
        }
        std::size_t encoded = static_cast<std::size_t>(bits[neuron_output(reg, d, l, j)]) << n_anc;
        for (std::size_t k = 0; k < n_anc; ++k) {
          encoded |= static_cast<std::size_t>(bits[reg.index(VarKey::sum_ancilla(d, l, j, k))]) << k;
        }
        r.majority_violations += (encoded != count);
      }
    }
    const int from_bits = loss01(ds.labels[d], bit_to_spin(bits[reg.index(VarKey::output(d))]));
    const int recomputed = loss01(ds.labels[d], forward(w, ds.inputs[d]));
    r.output_loss.push_back(from_bits);
    r.recomputed_loss.push_back(recomputed);
    r.output_loss_total += static_cast<std::size_t>(from_bits);
    r.recomputed_loss_total += static_cast<std::size_t>(recomputed);
    r.divergent = r.divergent || from_bits != recomputed;
  }
  return r;
}

nlohmann::json AuditReport::to_json() const {
  return {{"xnor_violations", xnor_violations},
          {"majority_violations", majority_violations},
          {"mul_ancilla_mismatches", mul_ancilla_mismatches},
          {"output_loss", output_loss},
          {"recomputed_loss", recomputed_loss},
          {"output_loss_total", output_loss_total},
          {"recomputed_loss_total", recomputed_loss_total},
          {"divergent", divergent}};
}

namespace {

std::string node_label(const std::vector<std::string>& names, std::size_t i) {
  return i < names.size() ? names[i] : "q" + std::to_string(i);
}

}  // namespace

std::string interaction_graph_dot(const Qubo& q, const std::vector<std::string>& names) {
  std::ostringstream os;
  os << "graph qubo {\n  node [shape=circle];\n";
  for (std::size_t i = 0; i < q.num_vars(); ++i) {
    os << "  n" << i << " [label=\"" << node_label(names, i) << "\", bias=" << q.linear(i) << "];\n";
  }
  for (std::size_t i = 0; i < q.num_vars(); ++i) {
    for (auto it = q.neighbors(i).upper_bound(i); it != q.neighbors(i).end(); ++it) {
      os << "  n" << i << " -- n" << it->first << " [weight=" << it->second
         << ", color=" << (it->second < 0 ? "blue" : "red") << "];\n";
    }
  }
  os << "}\n";
  return os.str();
}

nlohmann::json interaction_graph_json(const Qubo& q, const std::vector<std::string>& names) {
  nlohmann::json nodes = nlohmann::json::array();
  nlohmann::json edges = nlohmann::json::array();
  for (std::size_t i = 0; i < q.num_vars(); ++i) {
    nodes.push_back({{"id", i}, {"name", node_label(names, i)}, {"bias", q.linear(i)}});
    for (auto it = q.neighbors(i).upper_bound(i); it != q.neighbors(i).end(); ++it) {
      edges.push_back({{"u", i}, {"v", it->first}, {"weight", it->second}, {"sign", it->second < 0 ? -1 : 1}});
    }
  }
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}, {"offset", q.offset()}};
}

}  // namespace qbnn
