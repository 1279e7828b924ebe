#include "qbnn/penalties.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "qbnn/error.hpp"

namespace qbnn {

void add_operand(Qubo& q, const BitOperand& a, std::int64_t weight) {
  q.add_offset(weight * a.constant);
  if (a.var) q.add_linear(*a.var, weight * a.sign);
}

void add_product(Qubo& q, const BitOperand& a, const BitOperand& b, std::int64_t weight) {
  // (ca + sa x)(cb + sb y) = ca cb + ca sb y + cb sa x + sa sb x y
  q.add_offset(weight * a.constant * b.constant);
  if (b.var) q.add_linear(*b.var, weight * a.constant * b.sign);
  if (a.var) q.add_linear(*a.var, weight * b.constant * a.sign);
  if (a.var && b.var) q.add_term(*a.var, *b.var, weight * a.sign * b.sign);
}

namespace {

void require_distinct(std::vector<std::size_t> idx, const char* what) {
  std::sort(idx.begin(), idx.end());
  if (std::adjacent_find(idx.begin(), idx.end()) != idx.end()) {
    throw UsageError(std::string(what) + ": duplicate variable indices");
  }
}

void require_penalty(std::int64_t p) {
  if (p < 1) throw UsageError("penalty must be >= 1, got " + std::to_string(p));
}

std::size_t span_of(std::span<const std::size_t> idx) {
  std::size_t n = 0;
  for (const std::size_t i : idx) n = std::max(n, i + 1);
  return n;
}

}  // namespace

void add_xnor_penalty(Qubo& q, const BitOperand& q1, const BitOperand& q2, std::size_t out, std::size_t ancilla,
                      std::int64_t p) {
  require_penalty(p);
  const BitOperand q3 = BitOperand::variable(out);
  const BitOperand b = BitOperand::variable(ancilla);

  q.add_offset(p);
  add_operand(q, q1, -p);
  add_operand(q, q2, -p);
  add_operand(q, q3, -p);
  add_product(q, q1, q2, 2 * p);
  add_product(q, q2, q3, 2 * p);
  add_product(q, q1, q3, 2 * p);
  add_product(q, b, q3, -4 * p);

  const std::int64_t m = 4 * p;
  add_operand(q, b, 3 * m);
  add_product(q, q1, q2, m);
  add_product(q, q1, b, -2 * m);
  add_product(q, q2, b, -2 * m);
}

Qubo xnor_penalty(const XnorGadget& g) {
  require_distinct({g.in_a, g.in_b, g.out, g.ancilla}, "xnor gadget");
  const std::size_t idx[] = {g.in_a, g.in_b, g.out, g.ancilla};
  Qubo q(span_of(idx));
  add_xnor_penalty(q, BitOperand::variable(g.in_a), BitOperand::variable(g.in_b), g.out, g.ancilla, g.penalty);
  return q;
}

bool is_valid_fan_in(std::size_t fan_in) noexcept {
  return fan_in >= 1 && ((fan_in + 1) & fan_in) == 0;
}

std::size_t sum_ancilla_count(std::size_t fan_in) {
  if (!is_valid_fan_in(fan_in)) throw UnsupportedFanInError(fan_in);
  std::size_t n = 0;
  while ((std::size_t{1} << n) - 1 < fan_in) ++n;
  return n - 1;
}

void add_majority_penalty(Qubo& q, std::span<const BitOperand> inputs, std::span<const std::size_t> ancillas,
                          std::size_t out, std::int64_t p) {
  require_penalty(p);
  const std::size_t n_anc = sum_ancilla_count(inputs.size());
  if (ancillas.size() != n_anc) {
    throw UsageError("majority gadget with fan-in " + std::to_string(inputs.size()) + " needs " +
                     std::to_string(n_anc) + " ancillas, got " + std::to_string(ancillas.size()));
  }

  // Collect the affine expression L = c0 + sum_v a_v q_v, then add P L^2.
  std::int64_t c0 = 0;
  std::map<std::size_t, std::int64_t> coef;
  for (const BitOperand& in : inputs) {
    c0 += in.constant;
    if (in.var) coef[*in.var] += in.sign;
  }
  for (std::size_t i = 0; i < ancillas.size(); ++i) coef[ancillas[i]] -= std::int64_t{1} << i;
  coef[out] -= std::int64_t{1} << n_anc;

  q.add_offset(p * c0 * c0);
  for (auto it = coef.begin(); it != coef.end(); ++it) {
    const auto [u, a] = *it;
    if (a == 0) continue;
    q.add_linear(u, p * (a * a + 2 * c0 * a));
    for (auto jt = std::next(it); jt != coef.end(); ++jt) {
      if (jt->second != 0) q.add_term(u, jt->first, 2 * p * a * jt->second);
    }
  }
}

Qubo majority_penalty(const MajorityGadget& g) {
  std::vector<std::size_t> all = g.inputs;
  all.insert(all.end(), g.ancillas.begin(), g.ancillas.end());
  all.push_back(g.out);
  require_distinct(all, "majority gadget");
  Qubo q(span_of(all));
  std::vector<BitOperand> ops;
  ops.reserve(g.inputs.size());
  for (const std::size_t i : g.inputs) ops.push_back(BitOperand::variable(i));
  add_majority_penalty(q, ops, g.ancillas, g.out, g.penalty);
  return q;
}

DenseForm matrix_form(const Qubo& fragment, std::span<const std::size_t> vars) {
  std::map<std::size_t, std::size_t> slot;
  for (std::size_t k = 0; k < vars.size(); ++k) {
    if (!slot.emplace(vars[k], k).second) throw UsageError("matrix_form: variable listed twice");
  }
  DenseForm out{vars.size(), std::vector<std::int64_t>(vars.size() * vars.size(), 0), fragment.offset()};
  fragment.for_each_term([&](std::size_t i, std::size_t j, std::int64_t c) {
    const auto si = slot.find(i);
    const auto sj = slot.find(j);
    if (si == slot.end() || sj == slot.end()) {
      throw DimensionError("matrix_form: fragment references unlisted variable " +
                           std::to_string(si == slot.end() ? i : j));
    }
    const std::size_t r = std::min(si->second, sj->second);
    const std::size_t c2 = std::max(si->second, sj->second);
    out.entries[r * out.size + c2] += c;
  });
  return out;
}

}  // namespace qbnn
