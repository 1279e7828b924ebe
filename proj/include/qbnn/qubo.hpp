#pragma once

// Quadratic pseudo-boolean functions over bits:
//
//   E(q) = offset + sum_n Q_nn q_n + sum_{n<m} Q_nm q_n q_m
//
// Coefficients are stored with full weight on the upper triangle (no symmetric
// halving), diagonal entries hold the linear terms since q^2 = q.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qbnn/error.hpp"

namespace qbnn {

using Bit = std::uint8_t;
using Assignment = std::vector<Bit>;

template <class T>
concept QuboScalar = std::integral<T> || std::floating_point<T>;

template <QuboScalar Scalar>
struct QuboTerm {
  std::size_t i;
  std::size_t j;
  Scalar coeff;
  friend bool operator==(const QuboTerm&, const QuboTerm&) = default;
};

template <QuboScalar Scalar>
class BasicQubo {
 public:
  using scalar_type = Scalar;
  using Term = QuboTerm<Scalar>;

  explicit BasicQubo(std::size_t num_vars = 0, Scalar offset = Scalar{0})
      : offset_(offset), linear_(num_vars, Scalar{0}), rows_(num_vars) {}

  std::size_t num_vars() const noexcept { return linear_.size(); }
  Scalar offset() const noexcept { return offset_; }
  void set_offset(Scalar c) noexcept { offset_ = c; }
  void add_offset(Scalar c) noexcept { offset_ += c; }

  /// Appends `count` fresh variables and returns the index of the first.
  std::size_t add_variables(std::size_t count) {
    const std::size_t first = linear_.size();
    linear_.resize(first + count, Scalar{0});
    rows_.resize(first + count);
    return first;
  }

  /// Accumulates `coeff` onto the canonical pair (min(i,j), max(i,j)).
  /// Entries that cancel to zero are dropped.
  void add_term(std::size_t i, std::size_t j, Scalar coeff) {
    check_index(i);
    check_index(j);
    if (coeff == Scalar{0}) return;
    if (i == j) {
      linear_[i] += coeff;
      return;
    }
    accumulate(rows_[i], j, coeff);
    accumulate(rows_[j], i, coeff);
  }

  void add_linear(std::size_t i, Scalar coeff) { add_term(i, i, coeff); }

  Scalar coefficient(std::size_t i, std::size_t j) const {
    check_index(i);
    check_index(j);
    if (i == j) return linear_[i];
    const auto it = rows_[i].find(j);
    return it == rows_[i].end() ? Scalar{0} : it->second;
  }

  Scalar linear(std::size_t i) const { return coefficient(i, i); }

  /// Off-diagonal neighbours of `i` with their coefficients, ordered by index.
  const std::map<std::size_t, Scalar>& neighbors(std::size_t i) const {
    check_index(i);
    return rows_[i];
  }

  std::size_t degree(std::size_t i) const { return neighbors(i).size(); }

  std::size_t num_quadratic_terms() const noexcept {
    std::size_t n = 0;
    for (const auto& row : rows_) n += row.size();
    return n / 2;
  }

  std::size_t num_terms() const noexcept {
    std::size_t n = num_quadratic_terms();
    for (const Scalar c : linear_) n += (c != Scalar{0});
    return n;
  }

  /// Visits every stored term in lexicographic (i, j) order.
  template <class F>
  void for_each_term(F&& f) const {
    for (std::size_t i = 0; i < linear_.size(); ++i) {
      if (linear_[i] != Scalar{0}) f(i, i, linear_[i]);
      for (auto it = rows_[i].upper_bound(i); it != rows_[i].end(); ++it) f(i, it->first, it->second);
    }
  }

  std::vector<Term> terms() const {
    std::vector<Term> out;
    out.reserve(num_terms());
    for_each_term([&](std::size_t i, std::size_t j, Scalar c) { out.push_back({i, j, c}); });
    return out;
  }

  /// Adds `other` into this form; `other` may not have more variables.
  void add(const BasicQubo& other) {
    if (other.num_vars() > num_vars()) {
      throw DimensionError("cannot add a " + std::to_string(other.num_vars()) + "-variable form into a " +
                           std::to_string(num_vars()) + "-variable form");
    }
    offset_ += other.offset_;
    other.for_each_term([&](std::size_t i, std::size_t j, Scalar c) { add_term(i, j, c); });
  }

  Scalar max_abs_coefficient() const {
    Scalar m{0};
    for_each_term([&](std::size_t, std::size_t, Scalar c) { m = std::max(m, c < 0 ? -c : c); });
    return m;
  }

  Scalar energy(std::span<const Bit> bits) const {
    check_length(bits.size());
    Scalar e = offset_;
    for (std::size_t i = 0; i < linear_.size(); ++i) {
      if (!bits[i]) continue;
      e += linear_[i];
      for (auto it = rows_[i].upper_bound(i); it != rows_[i].end(); ++it) {
        if (bits[it->first]) e += it->second;
      }
    }
    return e;
  }

  /// energy(bits with k flipped) - energy(bits), in O(degree(k)).
  Scalar flip_delta(std::span<const Bit> bits, std::size_t k) const {
    check_length(bits.size());
    if (k >= linear_.size()) {
      throw DimensionError("flip index " + std::to_string(k) + " out of range for " +
                           std::to_string(linear_.size()) + " variables");
    }
    Scalar field = linear_[k];
    for (const auto& [m, c] : rows_[k]) {
      if (bits[m]) field += c;
    }
    return bits[k] ? -field : field;
  }

  friend bool operator==(const BasicQubo& a, const BasicQubo& b) {
    return a.offset_ == b.offset_ && a.linear_ == b.linear_ && a.rows_ == b.rows_;
  }

 private:
  static void accumulate(std::map<std::size_t, Scalar>& row, std::size_t key, Scalar coeff) {
    auto [it, inserted] = row.try_emplace(key, coeff);
    if (inserted) return;
    it->second += coeff;
    if (it->second == Scalar{0}) row.erase(it);
  }

  void check_index(std::size_t i) const {
    if (i >= linear_.size()) {
      throw DimensionError("variable index " + std::to_string(i) + " out of range for " +
                           std::to_string(linear_.size()) + " variables");
    }
  }

  void check_length(std::size_t n) const {
    if (n != linear_.size()) {
      throw DimensionError("assignment has " + std::to_string(n) + " bits, form has " +
                           std::to_string(linear_.size()) + " variables");
    }
  }

  Scalar offset_;
  std::vector<Scalar> linear_;
  std::vector<std::map<std::size_t, Scalar>> rows_;  // symmetric adjacency, i != j
};

using Qubo = BasicQubo<std::int64_t>;

template <QuboScalar Scalar>
Scalar energy(const BasicQubo<Scalar>& q, std::span<const Bit> bits) {
  return q.energy(bits);
}

template <QuboScalar Scalar>
Scalar flip_delta(const BasicQubo<Scalar>& q, std::span<const Bit> bits, std::size_t k) {
  return q.flip_delta(bits, k);
}

/// Read-only CSR snapshot of a Qubo for solver inner loops.
template <QuboScalar Scalar>
struct CompiledQubo {
  Scalar offset{};
  std::vector<Scalar> linear;
  std::vector<std::uint32_t> row_begin;  // size n + 1
  std::vector<std::uint32_t> cols;
  std::vector<Scalar> vals;

  explicit CompiledQubo(const BasicQubo<Scalar>& q) : offset(q.offset()), linear(q.num_vars()) {
    row_begin.reserve(q.num_vars() + 1);
    row_begin.push_back(0);
    for (std::size_t i = 0; i < q.num_vars(); ++i) {
      linear[i] = q.linear(i);
      for (const auto& [j, c] : q.neighbors(i)) {
        cols.push_back(static_cast<std::uint32_t>(j));
        vals.push_back(c);
      }
      row_begin.push_back(static_cast<std::uint32_t>(cols.size()));
    }
  }

  std::size_t size() const noexcept { return linear.size(); }

  /// Off-diagonal field sum_m Q_km q_m for every k.
  std::vector<Scalar> fields(std::span<const Bit> bits) const {
    std::vector<Scalar> f(size(), Scalar{0});
    for (std::size_t k = 0; k < size(); ++k) {
      Scalar s{0};
      for (std::uint32_t p = row_begin[k]; p < row_begin[k + 1]; ++p) {
        if (bits[cols[p]]) s += vals[p];
      }
      f[k] = s;
    }
    return f;
  }

  Scalar energy(std::span<const Bit> bits) const {
    Scalar e = offset;
    for (std::size_t k = 0; k < size(); ++k) {
      if (!bits[k]) continue;
      e += linear[k];
      for (std::uint32_t p = row_begin[k]; p < row_begin[k + 1]; ++p) {
        if (cols[p] > k && bits[cols[p]]) e += vals[p];
      }
    }
    return e;
  }

  /// Flips bit k, keeps `field` consistent, returns the energy change.
  Scalar apply_flip(std::span<Bit> bits, std::span<Scalar> field, std::size_t k) const {
    const Scalar delta = bits[k] ? -(linear[k] + field[k]) : (linear[k] + field[k]);
    bits[k] ^= 1;
    const bool on = bits[k] != 0;
    for (std::uint32_t p = row_begin[k]; p < row_begin[k + 1]; ++p) {
      field[cols[p]] += on ? vals[p] : -vals[p];
    }
    return delta;
  }

  Scalar delta(std::span<const Bit> bits, std::span<const Scalar> field, std::size_t k) const {
    return bits[k] ? -(linear[k] + field[k]) : (linear[k] + field[k]);
  }
};

}  // namespace qbnn
