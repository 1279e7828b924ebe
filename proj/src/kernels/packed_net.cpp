#include "qbnn/kernels/packed_net.hpp"

#include <cstdlib>
#include <string_view>

#include "qbnn/error.hpp"

namespace qbnn::kernels {

const char* isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out{Isa::Scalar};
#if defined(QBNN_HAVE_AVX2_KERNEL)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt")) out.push_back(Isa::Avx2);
#endif
#if defined(QBNN_HAVE_NEON_KERNEL)
  out.push_back(Isa::Neon);
#endif
  return out;
}

namespace {

Isa select_isa() {
  const std::vector<Isa> isas = available_isas();
  if (const char* env = std::getenv("QBNN_KERNEL")) {
    const std::string_view want(env);
    for (const Isa isa : isas) {
      if (want == isa_name(isa)) return isa;
    }
  }
  return isas.back();
}

}  // namespace

Isa active_isa() {
  static const Isa isa = select_isa();
  return isa;
}

bool PackedNet::supports(const BnnArchitecture& arch) noexcept {
  for (std::size_t l = 0; l < arch.num_layers(); ++l) {
    if (arch.fan_in(l) > 63 || arch.width(l) > 63) return false;
  }
  return true;
}

std::uint64_t pack_spins(std::span<const Spin> spins) {
  std::uint64_t w = 0;
  for (std::size_t i = 0; i < spins.size(); ++i) w |= static_cast<std::uint64_t>(spins[i] > 0) << i;
  return w;
}

PackedNet::PackedNet(const BnnArchitecture& arch, const LabeledDataset& ds) {
  if (!supports(arch)) throw CapacityError("packed kernel supports fan-in and width up to 63");
  ds.validate(arch.input_size());
  for (std::size_t l = 0; l < arch.num_layers(); ++l) {
    fan_in.push_back(static_cast<std::uint32_t>(arch.fan_in(l)));
    width.push_back(static_cast<std::uint32_t>(arch.width(l)));
    neuron_base.push_back(static_cast<std::uint32_t>(num_neurons));
    mask.push_back((std::uint64_t{1} << arch.fan_in(l)) - 1);
    num_neurons += arch.width(l);
  }
  for (std::size_t d = 0; d < ds.size(); ++d) {
    inputs.push_back(pack_spins(ds.inputs[d]));
    labels.push_back(spin_to_bit(ds.labels[d]));
  }
}

void pack_weights(const PackedNet& net, const WeightSet& w, std::span<std::uint64_t> batch, std::size_t lanes,
                  std::size_t lane) {
  for (std::size_t l = 0; l < w.layers.size(); ++l) {
    for (std::size_t j = 0; j < w.layers[l].rows; ++j) {
      batch[(net.neuron_base[l] + j) * lanes + lane] = pack_spins(w.layers[l].row(j));
    }
  }
}

void batch_loss(const PackedNet& net, std::span<const std::uint64_t> weights, std::size_t lanes,
                std::span<std::uint32_t> losses, Isa isa) {
  if (weights.size() < net.num_neurons * lanes || losses.size() < lanes) {
    throw DimensionError("batch_loss: buffers too small for " + std::to_string(lanes) + " lanes");
  }
  std::size_t done = 0;
  switch (isa) {
#if defined(QBNN_HAVE_AVX2_KERNEL)
    case Isa::Avx2:
      detail::batch_loss_avx2(net, weights.data(), lanes, losses.data());
      done = lanes - lanes % 4;
      break;
#endif
#if defined(QBNN_HAVE_NEON_KERNEL)
    case Isa::Neon:
      detail::batch_loss_neon(net, weights.data(), lanes, losses.data());
      done = lanes - lanes % 2;
      break;
#endif
    default:
      break;
  }
  detail::batch_loss_scalar(net, weights.data(), lanes, done, lanes, losses.data());
}

}  // namespace qbnn::kernels
