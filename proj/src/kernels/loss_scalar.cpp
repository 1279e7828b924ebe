#include <bit>

#include "qbnn/kernels/packed_net.hpp"

namespace qbnn::kernels::detail {

void batch_loss_scalar(const PackedNet& net, const std::uint64_t* weights, std::size_t lanes,
                       std::size_t lane_begin, std::size_t lane_end, std::uint32_t* losses) {
  const std::size_t layers = net.fan_in.size();
  for (std::size_t lane = lane_begin; lane < lane_end; ++lane) {
    std::uint32_t loss = 0;
    for (std::size_t d = 0; d < net.inputs.size(); ++d) {
      std::uint64_t x = net.inputs[d];
      for (std::size_t l = 0; l < layers; ++l) {
        const std::uint64_t* row = weights + static_cast<std::size_t>(net.neuron_base[l]) * lanes + lane;
        const int half = static_cast<int>(net.fan_in[l] / 2);
        std::uint64_t next = 0;
        for (std::uint32_t j = 0; j < net.width[l]; ++j) {
          const int agree = std::popcount(~(row[j * lanes] ^ x) & net.mask[l]);
          next |= static_cast<std::uint64_t>(agree > half) << j;
        }
        x = next;
      }
      loss += static_cast<std::uint32_t>((x & 1u) != net.labels[d]);
    }
    losses[lane] = loss;
  }
}

}  // namespace qbnn::kernels::detail
