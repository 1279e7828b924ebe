#include <algorithm>
#include <thread>

#include "qbnn/bnn.hpp"
#include "qbnn/error.hpp"
#include "qbnn/kernels/packed_net.hpp"

namespace qbnn {

namespace {

// Pattern counter c encodes weight k (in (layer, row, column) order) at bit
// (W - 1 - k), so ascending c is lexicographic order of the weight bit vector.

struct ChunkResult {
  std::size_t min_loss = SIZE_MAX;
  std::uint64_t argmin = 0;
  std::uint64_t count = 0;
  bool stopped = false;
};

struct WeightSlot {
  std::size_t neuron;
  std::uint64_t bit;
};

std::vector<WeightSlot> weight_slots(const BnnArchitecture& arch) {
  std::vector<WeightSlot> slots;
  std::size_t base = 0;
  for (std::size_t l = 0; l < arch.num_layers(); ++l) {
    for (std::size_t j = 0; j < arch.width(l); ++j) {
      for (std::size_t i = 0; i < arch.fan_in(l); ++i) slots.push_back({base + j, std::uint64_t{1} << i});
    }
    base += arch.width(l);
  }
  return slots;
}

void note(ChunkResult& r, std::size_t loss, std::uint64_t pattern) {
  if (loss < r.min_loss) {
    r.min_loss = loss;
    r.argmin = pattern;
    r.count = 1;
  } else if (loss == r.min_loss) {
    ++r.count;
  }
}

ChunkResult scan_packed(const kernels::PackedNet& net, const std::vector<WeightSlot>& slots, std::uint64_t begin,
                        std::uint64_t end, bool stop_at_zero) {
  const std::size_t total = slots.size();
  const unsigned low_bits = static_cast<unsigned>(std::min<std::size_t>(6, total));
  const std::size_t lanes = std::size_t{1} << low_bits;
  std::vector<std::uint64_t> base_words(net.num_neurons);
  std::vector<std::uint64_t> batch(net.num_neurons * lanes);
  std::vector<std::uint32_t> losses(lanes);
  const kernels::Isa isa = kernels::active_isa();

  ChunkResult r;
  for (std::uint64_t c = begin; c < end; c += lanes) {
    // Weights fixed across the batch come from the high counter bits.
    std::fill(base_words.begin(), base_words.end(), 0);
    for (std::size_t k = 0; k + low_bits < total; ++k) {
      if ((c >> (total - 1 - k)) & 1u) base_words[slots[k].neuron] |= slots[k].bit;
    }
    for (std::size_t n = 0; n < net.num_neurons; ++n) std::fill_n(batch.begin() + n * lanes, lanes, base_words[n]);
    for (std::size_t lane = 0; lane < lanes; ++lane) {
      for (unsigned b = 0; b < low_bits; ++b) {
        if ((lane >> b) & 1u) {
          const WeightSlot& s = slots[total - 1 - b];
          batch[s.neuron * lanes + lane] |= s.bit;
        }
      }
    }
    kernels::batch_loss(net, batch, lanes, losses, isa);
    for (std::size_t lane = 0; lane < lanes; ++lane) {
      note(r, losses[lane], c + lane);
      if (stop_at_zero && r.min_loss == 0) {
        r.stopped = true;
        return r;
      }
    }
  }
  return r;
}

ChunkResult scan_reference(const BnnArchitecture& arch, const LabeledDataset& ds, std::uint64_t begin,
                           std::uint64_t end, bool stop_at_zero) {
  const std::size_t total = arch.num_weights();
  std::vector<Bit> bits(total);
  ChunkResult r;
  for (std::uint64_t c = begin; c < end; ++c) {
    for (std::size_t k = 0; k < total; ++k) bits[k] = static_cast<Bit>((c >> (total - 1 - k)) & 1u);
    note(r, dataset_loss(weights_from_bits(arch, bits), ds), c);
    if (stop_at_zero && r.min_loss == 0) {
      r.stopped = true;
      return r;
    }
  }
  return r;
}

}  // namespace

OracleResult enumerate_optimal_weights(const BnnArchitecture& arch, const LabeledDataset& ds,
                                       const OracleOptions& opts) {
  if (ds.empty()) throw UsageError("weight oracle needs a nonempty dataset");
  ds.validate(arch.input_size());
  const std::size_t total = arch.num_weights();
  if (total > opts.limit || total > 62) {
    throw CapacityError("weight oracle: " + std::to_string(total) + " weights exceeds limit " +
                        std::to_string(std::min<std::size_t>(opts.limit, 62)));
  }
  const std::uint64_t patterns = std::uint64_t{1} << total;
  const bool packed = kernels::PackedNet::supports(arch);
  const std::uint64_t granule = std::uint64_t{1} << std::min<std::size_t>(6, total);

  const std::uint64_t max_threads = std::max<std::uint64_t>(1, patterns / (granule * 1024));
  const unsigned threads = static_cast<unsigned>(std::clamp<std::uint64_t>(opts.threads, 1, max_threads));
  std::vector<ChunkResult> parts(threads);

  auto run = [&](unsigned t) {
    // Chunk bounds stay multiples of the batch size.
    const std::uint64_t units = patterns / granule;
    const std::uint64_t begin = units * t / threads * granule;
    const std::uint64_t end = units * (t + 1) / threads * granule;
    if (packed) {
      const kernels::PackedNet net(arch, ds);
      parts[t] = scan_packed(net, weight_slots(arch), begin, end, opts.stop_at_zero);
    } else {
      parts[t] = scan_reference(arch, ds, begin, end, opts.stop_at_zero);
    }
  };
  if (threads == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(run, t);
  }

  ChunkResult best;
  for (const ChunkResult& p : parts) {
    best.stopped = best.stopped || p.stopped;
    if (p.min_loss < best.min_loss) {
      best.min_loss = p.min_loss;
      best.argmin = p.argmin;
      best.count = p.count;
    } else if (p.min_loss == best.min_loss) {
      best.count += p.count;
    }
  }

  std::vector<Bit> bits(total);
  for (std::size_t k = 0; k < total; ++k) bits[k] = static_cast<Bit>((best.argmin >> (total - 1 - k)) & 1u);
  return OracleResult{best.min_loss, weights_from_bits(arch, bits), best.count, !best.stopped};
}

}  // namespace qbnn
