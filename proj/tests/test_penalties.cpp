#include <doctest.h>

#include <algorithm>
#include <bit>

#include "oracles.hpp"
#include "qbnn/penalties.hpp"

using namespace qbnn;

namespace {

Assignment bits_of(std::uint64_t x, std::size_t n) {
  Assignment a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = (x >> i) & 1u;
  return a;
}

}  // namespace

TEST_CASE("xnor gadget expands to the frozen coefficients") {
  for (const std::int64_t P : {1, 7, 50}) {
    const Qubo q = xnor_penalty({0, 1, 2, 3, P});  // q1, q2, q3, b
    CHECK(q.offset() == P);
    CHECK(q.linear(0) == -P);
    CHECK(q.linear(1) == -P);
    CHECK(q.linear(2) == -P);
    CHECK(q.linear(3) == 12 * P);
    CHECK(q.coefficient(0, 1) == 6 * P);
    CHECK(q.coefficient(0, 2) == 2 * P);
    CHECK(q.coefficient(1, 2) == 2 * P);
    CHECK(q.coefficient(2, 3) == -4 * P);
    CHECK(q.coefficient(0, 3) == -8 * P);
    CHECK(q.coefficient(1, 3) == -8 * P);
    CHECK(q.num_terms() == 10);
  }
}

TEST_CASE("xnor gadget minimum over the ancilla is P times the violation") {
  for (const std::int64_t P : {1, 3, 7, 50}) {
    const Qubo q = xnor_penalty({0, 1, 2, 3, P});
    for (int x = 0; x < 8; ++x) {
      const int q1 = x & 1, q2 = (x >> 1) & 1, q3 = (x >> 2) & 1;
      std::int64_t best = INT64_MAX;
      for (int b = 0; b < 2; ++b) {
        const Assignment a{Bit(q1), Bit(q2), Bit(q3), Bit(b)};
        const std::int64_t e = q.energy(a);
        CHECK(e >= 0);
        best = std::min(best, e);
      }
      CHECK(best == (q3 == oracle::xnor(q1, q2) ? 0 : P));
    }
  }
}

TEST_CASE("xnor gadget rejects aliased indices") {
  CHECK_THROWS_AS(xnor_penalty({0, 0, 1, 2, 5}), UsageError);
  CHECK_THROWS_AS(xnor_penalty({0, 1, 2, 2, 5}), UsageError);
}

TEST_CASE("xnor with constant and complemented operands matches substitution") {
  const std::int64_t P = 5;
  const Qubo full = xnor_penalty({0, 1, 2, 3, P});
  // Operand layout: var 0 = x, out = 1, ancilla = 2.
  const std::vector<BitOperand> ops = {BitOperand::fixed(false), BitOperand::fixed(true), BitOperand::variable(0),
                                       BitOperand::complement(0)};
  for (const auto& a : ops) {
    for (const auto& b : ops) {
      Qubo q(3);
      add_xnor_penalty(q, a, b, 1, 2, P);
      for (int x = 0; x < 8; ++x) {
        const Assignment bits = bits_of(x, 3);
        const Assignment sub{a.value(bits), b.value(bits), bits[1], bits[2]};
        REQUIRE(q.energy(bits) == full.energy(sub));
      }
    }
  }
}

TEST_CASE("majority fan-in 3 matrix over (a, out, in0, in1, in2)") {
  const std::int64_t P = 1;
  const Qubo q = majority_penalty({{2, 3, 4}, 1, {0}, P});
  const std::vector<std::size_t> vars{0, 1, 2, 3, 4};
  const DenseForm m = matrix_form(q, vars);
  const std::vector<std::int64_t> expected = {
      1, 4, -2, -2, -2,  //
      0, 4, -4, -4, -4,  //
      0, 0, 1,  2,  2,   //
      0, 0, 0,  1,  2,   //
      0, 0, 0,  0,  1,
  };
  CHECK(m.entries == expected);
  CHECK(m.offset == 0);
  CHECK_THROWS_AS(matrix_form(q, std::vector<std::size_t>{0, 1, 2}), DimensionError);
}

TEST_CASE("majority gadget is exact for fan-in 1, 3, 7") {
  for (const std::size_t fan_in : {1u, 3u, 7u}) {
    const std::size_t n_anc = sum_ancilla_count(fan_in);
    const std::int64_t P = 3;
    MajorityGadget g;
    for (std::size_t k = 0; k < fan_in; ++k) g.inputs.push_back(k);
    g.out = fan_in;
    for (std::size_t k = 0; k < n_anc; ++k) g.ancillas.push_back(fan_in + 1 + k);
    g.penalty = P;
    const Qubo q = majority_penalty(g);
    const std::size_t n = fan_in + 1 + n_anc;
    for (std::uint64_t in = 0; in < (std::uint64_t{1} << fan_in); ++in) {
      const int pop = std::popcount(in);
      const int want_out = 2 * pop > static_cast<int>(fan_in) ? 1 : 0;
      std::int64_t best[2] = {INT64_MAX, INT64_MAX};
      for (std::uint64_t rest = 0; rest < (std::uint64_t{1} << (1 + n_anc)); ++rest) {
        const Assignment a = bits_of(in | (rest << fan_in), n);
        const std::int64_t e = q.energy(a);
        REQUIRE(e >= 0);
        best[a[fan_in]] = std::min(best[a[fan_in]], e);
        // Binary encoding of the popcount is a zero.
        std::uint64_t code = a[fan_in] ? (std::uint64_t{1} << n_anc) : 0;
        for (std::size_t k = 0; k < n_anc; ++k) code += std::uint64_t{a[fan_in + 1 + k]} << k;
        if (code == static_cast<std::uint64_t>(pop)) REQUIRE(e == 0);
      }
      CHECK(best[want_out] == 0);
      CHECK(best[1 - want_out] >= P);
    }
  }
}

TEST_CASE("valid fan-ins are 2^n - 1") {
  for (std::size_t k : {1u, 3u, 7u, 15u, 31u}) CHECK(is_valid_fan_in(k));
  for (std::size_t k : {0u, 2u, 4u, 5u, 6u, 8u}) CHECK_FALSE(is_valid_fan_in(k));
  CHECK(sum_ancilla_count(1) == 0);
  CHECK(sum_ancilla_count(3) == 1);
  CHECK(sum_ancilla_count(7) == 2);
  CHECK_THROWS_AS(sum_ancilla_count(4), UnsupportedFanInError);
  CHECK_THROWS_AS(majority_penalty({{0, 1}, 2, {}, 1}), UnsupportedFanInError);
}

TEST_CASE("majority with constant inputs matches substitution") {
  const Qubo full = majority_penalty({{0, 1, 2}, 3, {4}, 2});
  // var 0 -> input via complement, constants for the others; out = 1, ancilla = 2
  const std::vector<BitOperand> inputs = {BitOperand::complement(0), BitOperand::fixed(true),
                                          BitOperand::fixed(false)};
  Qubo q(3);
  const std::vector<std::size_t> anc{2};
  add_majority_penalty(q, inputs, anc, 1, 2);
  for (int x = 0; x < 8; ++x) {
    const Assignment bits = bits_of(x, 3);
    const Assignment sub{inputs[0].value(bits), 1, 0, bits[1], bits[2]};
    CHECK(q.energy(bits) == full.energy(sub));
  }
}
