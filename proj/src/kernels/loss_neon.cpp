#include <arm_neon.h>

#include "qbnn/kernels/packed_net.hpp"

namespace qbnn::kernels::detail {

namespace {

inline uint64x2_t popcount_u64(uint64x2_t v) {
  return vpaddlq_u32(vpaddlq_u16(vpaddlq_u8(vcntq_u8(vreinterpretq_u8_u64(v)))));
}

}  // namespace

void batch_loss_neon(const PackedNet& net, const std::uint64_t* weights, std::size_t lanes, std::uint32_t* losses) {
  const std::size_t layers = net.fan_in.size();
  const std::size_t full = lanes - lanes % 2;
  const uint64x2_t one = vdupq_n_u64(1);

  for (std::size_t lane = 0; lane < full; lane += 2) {
    uint64x2_t loss = vdupq_n_u64(0);
    for (std::size_t d = 0; d < net.inputs.size(); ++d) {
      uint64x2_t x = vdupq_n_u64(net.inputs[d]);
      for (std::size_t l = 0; l < layers; ++l) {
        const std::uint64_t* row = weights + static_cast<std::size_t>(net.neuron_base[l]) * lanes + lane;
        const uint64x2_t mask = vdupq_n_u64(net.mask[l]);
        const uint64x2_t half = vdupq_n_u64(net.fan_in[l] / 2);
        uint64x2_t next = vdupq_n_u64(0);
        for (std::uint32_t j = 0; j < net.width[l]; ++j) {
          const uint64x2_t w = vld1q_u64(row + j * lanes);
          const uint64x2_t agree = vbicq_u64(mask, veorq_u64(w, x));
          const uint64x2_t fire = vcgtq_u64(popcount_u64(agree), half);
          next = vorrq_u64(next, vandq_u64(fire, vdupq_n_u64(std::uint64_t{1} << j)));
        }
        x = next;
      }
      loss = vaddq_u64(loss, veorq_u64(vandq_u64(x, one), vdupq_n_u64(net.labels[d])));
    }
    losses[lane] = static_cast<std::uint32_t>(vgetq_lane_u64(loss, 0));
    losses[lane + 1] = static_cast<std::uint32_t>(vgetq_lane_u64(loss, 1));
  }
}

}  // namespace qbnn::kernels::detail
