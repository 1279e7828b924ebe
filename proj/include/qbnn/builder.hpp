#pragma once

// Compiles a BNN training problem into a QUBO:
//
//   sum_d [ (q_out(d) - label_bit(d))^2 + sum XNOR gadgets + sum majority gadgets ]
//
// Weights are shared across data; every other variable is allocated per datum.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbnn/bnn.hpp"
#include "qbnn/qubo.hpp"

namespace qbnn {

enum class VarKind : std::uint8_t { Weight, Activation, Product, MulAncilla, SumAncilla, Output };

/// Typed name of one QUBO bit. Field meaning per kind:
///   Weight(l, j, i)         W^l_{ji}; no datum
///   Activation(d, l, i)     y^l_i for hidden layers 1 <= l < L
///   Product(d, l, i, j)     Z^{l+1}_{ij} = W^l_{ji} y^l_i
///   MulAncilla(d, l, i, j)  ancilla of that product's XNOR gadget
///   SumAncilla(d, l, j, k)  bit k of neuron j's popcount in layer l
///   Output(d)               y^L
struct VarKey {
  VarKind kind{};
  std::uint32_t datum = 0;
  std::uint32_t layer = 0;
  std::uint32_t a = 0;
  std::uint32_t b = 0;

  static VarKey weight(std::size_t l, std::size_t j, std::size_t i);
  static VarKey activation(std::size_t d, std::size_t l, std::size_t i);
  static VarKey product(std::size_t d, std::size_t l, std::size_t i, std::size_t j);
  static VarKey mul_ancilla(std::size_t d, std::size_t l, std::size_t i, std::size_t j);
  static VarKey sum_ancilla(std::size_t d, std::size_t l, std::size_t j, std::size_t k);
  static VarKey output(std::size_t d);

  std::string name() const;

  friend auto operator<=>(const VarKey&, const VarKey&) = default;
};

/// Dense bijection VarKey <-> [0, N) for one (architecture, dataset size, fold) layout.
/// Order: all weights, then one block per datum (activations, products, multiplication
/// ancillas, sum ancillas, output).
class VarRegistry {
 public:
  VarRegistry(const BnnArchitecture& arch, std::size_t num_data, bool fold_constant_inputs);

  std::size_t size() const noexcept { return keys_.size(); }
  const VarKey& key(std::size_t index) const { return keys_.at(index); }
  std::size_t index(const VarKey& key) const;
  bool contains(const VarKey& key) const { return index_.count(key) != 0; }
  std::vector<std::string> names() const;

  const BnnArchitecture& architecture() const noexcept { return arch_; }
  std::size_t num_data() const noexcept { return num_data_; }
  bool folded() const noexcept { return fold_; }

 private:
  void add(const VarKey& key);

  BnnArchitecture arch_;
  std::size_t num_data_;
  bool fold_;
  std::vector<VarKey> keys_;
  std::map<VarKey, std::size_t> index_;
};

struct BuildOptions {
  std::int64_t penalty = 50;
  bool fold_constant_inputs = false;
};

struct TrainingQubo {
  Qubo qubo;
  VarRegistry registry;
  std::vector<std::string> warnings;
};

TrainingQubo build_training_qubo(const BnnArchitecture& arch, const LabeledDataset& ds, const BuildOptions& opts = {});

/// Feasible assignment induced by `w`: zero penalty, energy = dataset_loss(w, ds).
Assignment witness_assignment(const VarRegistry& reg, const LabeledDataset& ds, const WeightSet& w);

WeightSet decode_weights(std::span<const Bit> bits, const VarRegistry& reg);

struct AuditReport {
  std::size_t xnor_violations = 0;       // Z != XNOR(W, y)
  std::size_t majority_violations = 0;   // popcount != binary value of (ancillas, out)
  std::size_t mul_ancilla_mismatches = 0;
  std::vector<int> output_loss;          // per datum, from the Output bits
  std::vector<int> recomputed_loss;      // per datum, decode + forward
  std::size_t output_loss_total = 0;
  std::size_t recomputed_loss_total = 0;
  bool divergent = false;                // output bits disagree with the forward pass

  bool feasible() const noexcept { return xnor_violations == 0 && majority_violations == 0; }
  nlohmann::json to_json() const;
};

AuditReport audit(std::span<const Bit> bits, const VarRegistry& reg, const LabeledDataset& ds);

/// Interaction graph: nodes are variables, edges nonzero quadratic terms.
std::string interaction_graph_dot(const Qubo& q, const std::vector<std::string>& names);
nlohmann::json interaction_graph_json(const Qubo& q, const std::vector<std::string>& names);

}  // namespace qbnn
