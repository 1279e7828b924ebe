#include <immintrin.h>

#include "qbnn/kernels/packed_net.hpp"

namespace qbnn::kernels::detail {

namespace {

// Nibble-table popcount, summed per 64-bit lane.
inline __m256i popcount_epi64(__m256i v) {
  const __m256i table = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4,
                                         0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
  const __m256i low = _mm256_set1_epi8(0x0f);
  const __m256i lo = _mm256_and_si256(v, low);
  const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low);
  const __m256i bytes = _mm256_add_epi8(_mm256_shuffle_epi8(table, lo), _mm256_shuffle_epi8(table, hi));
  return _mm256_sad_epu8(bytes, _mm256_setzero_si256());
}

}  // namespace

void batch_loss_avx2(const PackedNet& net, const std::uint64_t* weights, std::size_t lanes, std::uint32_t* losses) {
  const std::size_t layers = net.fan_in.size();
  const std::size_t full = lanes - lanes % 4;
  const __m256i one = _mm256_set1_epi64x(1);

  for (std::size_t lane = 0; lane < full; lane += 4) {
    __m256i loss = _mm256_setzero_si256();
    for (std::size_t d = 0; d < net.inputs.size(); ++d) {
      __m256i x = _mm256_set1_epi64x(static_cast<long long>(net.inputs[d]));
      for (std::size_t l = 0; l < layers; ++l) {
        const std::uint64_t* row = weights + static_cast<std::size_t>(net.neuron_base[l]) * lanes + lane;
        const __m256i mask = _mm256_set1_epi64x(static_cast<long long>(net.mask[l]));
        const __m256i half = _mm256_set1_epi64x(net.fan_in[l] / 2);
        __m256i next = _mm256_setzero_si256();
        for (std::uint32_t j = 0; j < net.width[l]; ++j) {
          const __m256i w = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(row + j * lanes));
          const __m256i agree = _mm256_andnot_si256(_mm256_xor_si256(w, x), mask);
          const __m256i fire = _mm256_cmpgt_epi64(popcount_epi64(agree), half);
          next = _mm256_or_si256(next, _mm256_and_si256(fire, _mm256_slli_epi64(one, static_cast<int>(j))));
        }
        x = next;
      }
      const __m256i label = _mm256_set1_epi64x(net.labels[d]);
      loss = _mm256_add_epi64(loss, _mm256_xor_si256(_mm256_and_si256(x, one), label));
    }
    alignas(32) std::uint64_t out[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(out), loss);
    for (int k = 0; k < 4; ++k) losses[lane + k] = static_cast<std::uint32_t>(out[k]);
  }
}

}  // namespace qbnn::kernels::detail
