#include "qbnn/solvers.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include "qbnn/error.hpp"
#include "qbnn/rng.hpp"

namespace qbnn {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

}  // namespace

void SampleSet::sort() {
  std::stable_sort(samples.begin(), samples.end(), [](const Sample& a, const Sample& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    return a.bits < b.bits;
  });
}

SampleSet solve_exhaustive(const Qubo& q, const ExhaustiveOptions& opts) {
  const std::size_t n = q.num_vars();
  if (n > opts.max_bits || n > 62) {
    throw CapacityError("exhaustive solver: " + std::to_string(n) + " variables exceeds limit " +
                        std::to_string(std::min<std::size_t>(opts.max_bits, 62)));
  }
  const auto start = Clock::now();
  const CompiledQubo<std::int64_t> cq(q);

  Assignment bits(n, 0);
  std::vector<std::int64_t> field(n, 0);
  std::int64_t e = cq.offset;
  // Variable v sits at key bit (n - 1 - v) so integer order is lexicographic order.
  std::uint64_t key = 0;
  std::int64_t best_e = e;
  std::uint64_t best_key = 0;

  for_each_gray_flip(n, [&](std::size_t v) {
    e += cq.apply_flip(bits, field, v);
    key ^= std::uint64_t{1} << (n - 1 - v);
    if (e < best_e || (e == best_e && key < best_key)) {
      best_e = e;
      best_key = key;
    }
  });

  Assignment best(n);
  for (std::size_t v = 0; v < n; ++v) best[v] = static_cast<Bit>((best_key >> (n - 1 - v)) & 1u);
  SampleSet out;
  out.samples.push_back({std::move(best), best_e, 0});
  out.wall_time_ms = elapsed_ms(start);
  return out;
}

double SaSchedule::start_temperature(const Qubo& q) const {
  if (t_start) return *t_start;
  double hottest = 0.0;
  for (std::size_t k = 0; k < q.num_vars(); ++k) {
    double s = std::abs(static_cast<double>(q.linear(k)));
    for (const auto& [m, c] : q.neighbors(k)) s += std::abs(static_cast<double>(c));
    hottest = std::max(hottest, s);
  }
  return std::max(hottest, t_end);
}

namespace {

Sample anneal_once(const CompiledQubo<std::int64_t>& cq, const std::vector<double>& temps, std::uint64_t seed,
                   std::size_t restart) {
  const std::size_t n = cq.size();
  Rng rng(derive_seed(seed, restart));
  Assignment bits(n);
  for (auto& b : bits) b = static_cast<Bit>(rng.next() >> 63);
  std::vector<std::int64_t> field = cq.fields(bits);
  std::int64_t e = cq.energy(bits);
  Sample best{bits, e, restart};

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  for (const double t : temps) {
    rng.shuffle(std::span<std::uint32_t>(order));
    for (const std::uint32_t k : order) {
      const std::int64_t delta = cq.delta(bits, field, k);
      if (delta > 0 && rng.uniform01() >= std::exp(-static_cast<double>(delta) / t)) continue;
      cq.apply_flip(bits, field, k);
      e += delta;
      if (e < best.energy) {
        best.energy = e;
        best.bits = bits;
      }
    }
  }
  return best;
}

}  // namespace

SampleSet solve_sa(const Qubo& q, const SaSchedule& s) {
  if (s.sweeps < 1) throw UsageError("SA needs at least one sweep");
  if (!(s.t_end > 0.0)) throw UsageError("SA end temperature must be positive");
  const double t0 = s.start_temperature(q);
  if (t0 < s.t_end) throw UsageError("SA start temperature below end temperature");

  const auto start = Clock::now();
  std::vector<double> temps(s.sweeps);
  for (std::size_t i = 0; i < s.sweeps; ++i) {
    const double frac = s.sweeps == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(s.sweeps - 1);
    temps[i] = t0 * std::pow(s.t_end / t0, frac);
  }

  const CompiledQubo<std::int64_t> cq(q);
  SampleSet out;
  out.samples.resize(s.restarts);
  const unsigned threads = std::max(1u, std::min<unsigned>(s.threads, static_cast<unsigned>(s.restarts)));
  auto worker = [&](unsigned t) {
    for (std::size_t r = t; r < s.restarts; r += threads) out.samples[r] = anneal_once(cq, temps, s.seed, r);
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
  }
  out.sort();
  out.wall_time_ms = elapsed_ms(start);
  return out;
}

Assignment polish(const Qubo& q, Assignment bits) {
  if (bits.size() != q.num_vars()) {
    throw DimensionError("assignment has " + std::to_string(bits.size()) + " bits, form has " +
                         std::to_string(q.num_vars()));
  }
  const CompiledQubo<std::int64_t> cq(q);
  std::vector<std::int64_t> field = cq.fields(bits);
  for (;;) {
    std::int64_t best = 0;
    std::size_t arg = bits.size();
    for (std::size_t k = 0; k < bits.size(); ++k) {
      const std::int64_t d = cq.delta(bits, field, k);
      if (d < best) {
        best = d;
        arg = k;
      }
    }
    if (arg == bits.size()) return bits;
    cq.apply_flip(bits, field, arg);
  }
}

std::string pack_bits_hex(std::span<const Bit> bits) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  for (std::size_t byte = 0; byte * 8 < bits.size(); ++byte) {
    unsigned v = 0;
    for (std::size_t b = 0; b < 8 && byte * 8 + b < bits.size(); ++b) v |= static_cast<unsigned>(bits[byte * 8 + b] & 1u) << b;
    out += digits[v >> 4];
    out += digits[v & 15];
  }
  return out;
}

Assignment unpack_bits_hex(std::string_view hex, std::size_t num_bits) {
  if (hex.size() != 2 * ((num_bits + 7) / 8)) {
    throw ParseError("hex bit string of length " + std::to_string(hex.size()) + " does not hold " +
                     std::to_string(num_bits) + " bits");
  }
  auto nibble = [](char c) -> unsigned {
    if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<unsigned>(c - 'A' + 10);
    throw ParseError(std::string("invalid hex digit '") + c + "'");
  };
  Assignment bits(num_bits);
  for (std::size_t byte = 0; 2 * byte < hex.size(); ++byte) {
    const unsigned v = nibble(hex[2 * byte]) << 4 | nibble(hex[2 * byte + 1]);
    for (std::size_t b = 0; b < 8; ++b) {
      const std::size_t i = byte * 8 + b;
      if (i < num_bits) {
        bits[i] = static_cast<Bit>((v >> b) & 1u);
      } else if ((v >> b) & 1u) {
        throw ParseError("hex bit string sets bit " + std::to_string(i) + " past the end");
      }
    }
  }
  return bits;
}

}  // namespace qbnn
