#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "qbnn/qubo.hpp"

namespace qbnn {

struct Sample {
  Assignment bits;
  std::int64_t energy = 0;
  std::size_t restart = 0;
};

/// Samples sorted by (energy, bits); the first is the best.
struct SampleSet {
  std::vector<Sample> samples;
  double wall_time_ms = 0.0;

  const Sample& best() const { return samples.at(0); }
  void sort();
};

/// Calls f(v) for each of the 2^n - 1 single-bit flips of the reflected Gray code;
/// starting from all zeros this visits every assignment exactly once.
template <class F>
void for_each_gray_flip(std::size_t n, F&& f) {
  const std::uint64_t steps = n == 0 ? 0 : (std::uint64_t{1} << n) - 1;
  for (std::uint64_t t = 1; t <= steps; ++t) f(static_cast<std::size_t>(std::countr_zero(t)));
}

struct ExhaustiveOptions {
  std::size_t max_bits = 28;
};

/// Global minimum by Gray-code enumeration with O(degree) incremental updates.
/// Returns a single sample: the lexicographically smallest minimiser.
SampleSet solve_exhaustive(const Qubo& q, const ExhaustiveOptions& opts = {});

struct SaSchedule {
  std::size_t sweeps = 1000;
  std::size_t restarts = 20;
  std::optional<double> t_start;  // default: max_k |Q_kk| + sum_m |Q_km|
  double t_end = 0.1;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  /// Resolved starting temperature for `q`.
  double start_temperature(const Qubo& q) const;
};

/// One sample per restart (the lowest-energy state that restart visited).
/// Restart r draws from Rng(derive_seed(seed, r)): uniform random start, then per
/// sweep a random permutation of single-bit Metropolis moves on a geometric
/// temperature ladder from t_start to t_end.
SampleSet solve_sa(const Qubo& q, const SaSchedule& schedule);

/// Steepest single-bit descent until no flip lowers the energy.
Assignment polish(const Qubo& q, Assignment bits);

/// Hex packing of bit vectors: bit i lives in byte i / 8 at position i % 8,
/// bytes written in order as two lowercase hex digits.
std::string pack_bits_hex(std::span<const Bit> bits);
Assignment unpack_bits_hex(std::string_view hex, std::size_t num_bits);

}  // namespace qbnn
