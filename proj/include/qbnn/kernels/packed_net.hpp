#pragma once

// Bit-packed evaluation of many weight settings against one dataset.
//
// Spins are packed as bits (+1 -> 1). A neuron with fan-in n fires when its
// weight row agrees with the input word on more than n / 2 positions:
//
//   fire = popcount(~(w ^ x) & mask) > n / 2
//
// Weight words for a batch are laid out neuron-major, lane-minor:
// weights[neuron * lanes + lane]. Every backend produces identical results; the
// scalar one is the reference.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qbnn/bnn.hpp"

namespace qbnn::kernels {

enum class Isa { Scalar, Avx2, Neon };

const char* isa_name(Isa isa) noexcept;

/// Backends usable on this machine, scalar first.
std::vector<Isa> available_isas();

/// Best available backend, unless QBNN_KERNEL=scalar|avx2|neon selects one.
Isa active_isa();

struct PackedNet {
  std::vector<std::uint32_t> fan_in;       // per layer
  std::vector<std::uint32_t> width;        // per layer
  std::vector<std::uint32_t> neuron_base;  // first global neuron index of each layer
  std::vector<std::uint64_t> mask;         // low fan_in bits set, per layer
  std::vector<std::uint64_t> inputs;       // packed y^0 per datum
  std::vector<std::uint8_t> labels;        // label bit per datum
  std::size_t num_neurons = 0;

  /// Fan-ins up to 63 fit one word.
  static bool supports(const BnnArchitecture& arch) noexcept;

  PackedNet(const BnnArchitecture& arch, const LabeledDataset& ds);
};

std::uint64_t pack_spins(std::span<const Spin> spins);

/// Packs one weight setting into lane `lane` of a batch buffer.
void pack_weights(const PackedNet& net, const WeightSet& w, std::span<std::uint64_t> batch, std::size_t lanes,
                  std::size_t lane);

/// losses[lane] = misclassification count of lane's weights over the dataset.
void batch_loss(const PackedNet& net, std::span<const std::uint64_t> weights, std::size_t lanes,
                std::span<std::uint32_t> losses, Isa isa);

inline void batch_loss(const PackedNet& net, std::span<const std::uint64_t> weights, std::size_t lanes,
                       std::span<std::uint32_t> losses) {
  batch_loss(net, weights, lanes, losses, active_isa());
}

namespace detail {
void batch_loss_scalar(const PackedNet& net, const std::uint64_t* weights, std::size_t lanes,
                       std::size_t lane_begin, std::size_t lane_end, std::uint32_t* losses);
#if defined(QBNN_HAVE_AVX2_KERNEL)
/// Lanes [0, lanes - lanes % 4); caller finishes the tail.
void batch_loss_avx2(const PackedNet& net, const std::uint64_t* weights, std::size_t lanes, std::uint32_t* losses);
#endif
#if defined(QBNN_HAVE_NEON_KERNEL)
/// Lanes [0, lanes - lanes % 2); caller finishes the tail.
void batch_loss_neon(const PackedNet& net, const std::uint64_t* weights, std::size_t lanes, std::uint32_t* losses);
#endif
}  // namespace detail

}  // namespace qbnn::kernels
