#pragma once

// Test-side reference implementations. They share no code with the library:
// plain ints, dense matrices, direct loops.

#include <cstdint>
#include <limits>
#include <vector>

namespace oracle {

// Dense upper-triangular matrix, full coefficients off the diagonal.
struct Dense {
  std::size_t n = 0;
  std::int64_t offset = 0;
  std::vector<std::int64_t> m;  // n * n, only r <= c used

  explicit Dense(std::size_t n_ = 0) : n(n_), m(n_ * n_, 0) {}
  void add(std::size_t i, std::size_t j, std::int64_t c) {
    if (i > j) std::swap(i, j);
    m[i * n + j] += c;
  }
  std::int64_t energy(const std::vector<std::uint8_t>& q) const {
    std::int64_t e = offset;
    for (std::size_t r = 0; r < n; ++r) {
      if (!q[r]) continue;
      for (std::size_t c = r; c < n; ++c) e += q[c] ? m[r * n + c] : 0;
    }
    return e;
  }
  std::int64_t energy_of_index(std::uint64_t x) const {
    std::vector<std::uint8_t> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = (x >> i) & 1u;
    return energy(q);
  }
  std::int64_t brute_min() const {
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) best = std::min(best, energy_of_index(x));
    return best;
  }
};

inline int xnor(int a, int b) { return a == b ? 1 : 0; }

// weights[l][j][i] in {-1, +1}; sign of an odd sum.
using Net = std::vector<std::vector<std::vector<int>>>;

inline int forward(const Net& w, std::vector<int> y) {
  for (const auto& layer : w) {
    std::vector<int> next;
    for (const auto& row : layer) {
      int s = 0;
      for (std::size_t i = 0; i < row.size(); ++i) s += row[i] * y[i];
      next.push_back(s > 0 ? 1 : -1);
    }
    y = next;
  }
  return y[0];
}

inline int loss(const Net& w, const std::vector<std::vector<int>>& xs, const std::vector<int>& ys) {
  int l = 0;
  for (std::size_t d = 0; d < xs.size(); ++d) l += forward(w, xs[d]) != ys[d];
  return l;
}

// Weight pattern x: weight k (in layer, row, column order) is +1 when bit k is set.
inline Net net_from_index(const std::vector<std::size_t>& sizes, std::uint64_t x) {
  Net w;
  std::size_t k = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    w.emplace_back(sizes[l + 1], std::vector<int>(sizes[l]));
    for (auto& row : w.back()) {
      for (auto& v : row) v = ((x >> k++) & 1u) ? 1 : -1;
    }
  }
  return w;
}

struct MinLoss {
  int loss;
  std::uint64_t count;
};

inline MinLoss brute_min_loss(const std::vector<std::size_t>& sizes, const std::vector<std::vector<int>>& xs,
                              const std::vector<int>& ys) {
  std::size_t nw = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) nw += sizes[l] * sizes[l + 1];
  MinLoss best{std::numeric_limits<int>::max(), 0};
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << nw); ++x) {
    const int l = loss(net_from_index(sizes, x), xs, ys);
    if (l < best.loss) best = {l, 0};
    if (l == best.loss) ++best.count;
  }
  return best;
}

inline std::size_t log2_plus_one(std::size_t fan_in) {
  std::size_t n = 0;
  while ((std::size_t{1} << n) - 1 < fan_in) ++n;
  return n;
}

// Closed-form variable count of the training form.
inline std::size_t variable_count(const std::vector<std::size_t>& sizes, std::size_t D, bool fold) {
  std::size_t weights = 0, hidden = 0, products = 0, sum_anc = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    weights += sizes[l] * sizes[l + 1];
    if (l > 0) hidden += sizes[l];
    if (!(fold && l == 0)) products += sizes[l] * sizes[l + 1];
    sum_anc += sizes[l + 1] * (log2_plus_one(sizes[l]) - 1);
  }
  return weights + D * (hidden + 2 * products + sum_anc + 1);
}

}  // namespace oracle
