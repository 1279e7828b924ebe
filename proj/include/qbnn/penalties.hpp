#pragma once

// Quadratic penalty gadgets. Each gadget is a Qubo fragment whose minimum over
// its ancillas is 0 when the encoded constraint holds and at least P otherwise.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qbnn/qubo.hpp"

namespace qbnn {

/// A bit-valued operand that is either a variable, its complement, or a constant:
/// value = constant + sign * q_var.
struct BitOperand {
  std::optional<std::size_t> var;
  std::int64_t sign = 0;
  std::int64_t constant = 0;

  static BitOperand variable(std::size_t i) { return {i, 1, 0}; }
  static BitOperand complement(std::size_t i) { return {i, -1, 1}; }
  static BitOperand fixed(bool b) { return {std::nullopt, 0, b ? 1 : 0}; }

  bool is_constant() const noexcept { return !var.has_value(); }
  /// Value under `bits` (ignored for constants).
  Bit value(std::span<const Bit> bits) const { return static_cast<Bit>(constant + (var ? sign * bits[*var] : 0)); }
};

/// weight * a * b accumulated into `q` (q_i^2 = q_i when both refer to one variable).
void add_product(Qubo& q, const BitOperand& a, const BitOperand& b, std::int64_t weight);
void add_operand(Qubo& q, const BitOperand& a, std::int64_t weight);

struct XnorGadget {
  std::size_t in_a;
  std::size_t in_b;
  std::size_t out;
  std::size_t ancilla;
  std::int64_t penalty;
};

/// Penalises out != XNOR(in_a, in_b):
///   P (1 - q1 - q2 - q3 + 2 q1 q2 + 2 q2 q3 + 2 q1 q3 - 4 b q3) + 4P (3b + q1 q2 - 2 q1 b - 2 q2 b)
/// The second bracket is the Rosenberg term pinning b = q1 q2. The fragment spans
/// max(index) + 1 variables.
Qubo xnor_penalty(const XnorGadget& g);

/// Same polynomial with operands that may be constants or complements; `ancilla`
/// and `out` must be variables.
void add_xnor_penalty(Qubo& q, const BitOperand& in_a, const BitOperand& in_b, std::size_t out,
                      std::size_t ancilla, std::int64_t penalty);

struct MajorityGadget {
  std::vector<std::size_t> inputs;    // 2^n - 1 of them
  std::size_t out;                    // binary weight 2^(n-1)
  std::vector<std::size_t> ancillas;  // n - 1, binary weights 2^0 .. 2^(n-2)
  std::int64_t penalty;
};

bool is_valid_fan_in(std::size_t fan_in) noexcept;

/// n - 1 for fan-in 2^n - 1; throws UnsupportedFanInError otherwise.
std::size_t sum_ancilla_count(std::size_t fan_in);

/// P (sum_k in_k - sum_i 2^i a_i - 2^(n-1) out)^2
Qubo majority_penalty(const MajorityGadget& g);

void add_majority_penalty(Qubo& q, std::span<const BitOperand> inputs, std::span<const std::size_t> ancillas,
                          std::size_t out, std::int64_t penalty);

/// Dense upper-triangular view of a fragment restricted to `vars`, with full
/// (unhalved) off-diagonal coefficients. `entries` is row-major, size vars^2.
struct DenseForm {
  std::size_t size = 0;
  std::vector<std::int64_t> entries;
  std::int64_t offset = 0;

  std::int64_t at(std::size_t r, std::size_t c) const { return entries[r * size + c]; }
};

DenseForm matrix_form(const Qubo& fragment, std::span<const std::size_t> vars);

}  // namespace qbnn
