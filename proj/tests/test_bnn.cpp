#include <doctest.h>

#include "oracles.hpp"
#include "qbnn/bnn.hpp"
#include "qbnn/rng.hpp"

using namespace qbnn;

namespace {

LabeledDataset random_dataset(Rng& rng, std::size_t n0, std::size_t D) {
  LabeledDataset ds;
  for (std::size_t d = 0; d < D; ++d) {
    std::vector<Spin> x(n0);
    for (auto& s : x) s = rng.below(2) ? 1 : -1;
    ds.add(std::move(x), rng.below(2) ? 1 : -1);
  }
  return ds;
}

oracle::Net to_net(const WeightSet& w) {
  oracle::Net n;
  for (const auto& m : w.layers) {
    n.emplace_back();
    for (std::size_t r = 0; r < m.rows; ++r) {
      n.back().emplace_back();
      for (std::size_t c = 0; c < m.cols; ++c) n.back().back().push_back(m.at(r, c));
    }
  }
  return n;
}

std::vector<std::vector<int>> xs_of(const LabeledDataset& ds) {
  std::vector<std::vector<int>> xs;
  for (const auto& row : ds.inputs) xs.emplace_back(row.begin(), row.end());
  return xs;
}

std::vector<int> ys_of(const LabeledDataset& ds) { return {ds.labels.begin(), ds.labels.end()}; }

}  // namespace

TEST_CASE("architecture parsing and validation") {
  const auto a = BnnArchitecture::parse("3-3-1");
  CHECK(a.num_layers() == 2);
  CHECK(a.num_weights() == 12);
  CHECK(a.num_neurons() == 4);
  CHECK(a.to_string() == "3-3-1");
  CHECK(BnnArchitecture::parse("7-7-1").num_weights() == 56);
  CHECK_THROWS_AS(BnnArchitecture::parse("4-1"), UnsupportedFanInError);
  CHECK_THROWS_AS(BnnArchitecture::parse("3-2-1"), UnsupportedFanInError);
  CHECK_THROWS_AS(BnnArchitecture::parse("3-3-2"), UsageError);
  CHECK_THROWS_AS(BnnArchitecture::parse("3"), UsageError);
  CHECK_THROWS_AS(BnnArchitecture::parse("3-x-1"), UsageError);
  CHECK_THROWS_AS(BnnArchitecture::parse(""), UsageError);
}

TEST_CASE("sign") {
  CHECK(sign(3) == 1);
  CHECK(sign(-1) == -1);
  CHECK_THROWS_AS(sign(0), TieError);
}

TEST_CASE("forward on hand-evaluated nets") {
  const auto a1 = BnnArchitecture::parse("1-1");
  WeightSet w = WeightSet::filled(a1, 1);
  CHECK(forward(w, std::vector<Spin>{1}) == 1);

  const auto a3 = BnnArchitecture::parse("3-1");
  WeightSet w3 = WeightSet::filled(a3, 1);
  w3.layers[0].at(0, 2) = -1;
  CHECK(forward(w3, std::vector<Spin>{1, 1, 1}) == 1);
  CHECK(forward(w3, std::vector<Spin>{1, -1, 1}) == -1);
}

TEST_CASE("loss01 equals ((y - yhat) / 2)^2 on all spin pairs") {
  for (const Spin y : {Spin{1}, Spin{-1}}) {
    for (const Spin o : {Spin{1}, Spin{-1}}) {
      CHECK(loss01(y, o) == ((y - o) / 2) * ((y - o) / 2));
    }
  }
  CHECK(loss01(1, 1) == 0);
  CHECK(loss01(1, -1) == 1);
}

TEST_CASE("negating a single-layer net negates every output") {
  Rng rng(21);
  const auto a = BnnArchitecture::parse("7-1");
  for (int t = 0; t < 50; ++t) {
    WeightSet w = WeightSet::random(a, rng);
    WeightSet neg = w;
    for (auto& s : neg.layers[0].data) s = static_cast<Spin>(-s);
    const auto ds = random_dataset(rng, 7, 1);
    CHECK(forward(neg, ds.inputs[0]) == -forward(w, ds.inputs[0]));
  }
}

TEST_CASE("hidden-unit sign symmetry leaves the output unchanged") {
  Rng rng(22);
  const auto a = BnnArchitecture::parse("3-3-1");
  for (int t = 0; t < 100; ++t) {
    WeightSet w = WeightSet::random(a, rng);
    WeightSet g = w;
    const std::size_t j = rng.below(3);
    for (std::size_t i = 0; i < 3; ++i) g.layers[0].at(j, i) = static_cast<Spin>(-g.layers[0].at(j, i));
    g.layers[1].at(0, j) = static_cast<Spin>(-g.layers[1].at(0, j));
    const auto ds = random_dataset(rng, 3, 4);
    CHECK(dataset_loss(g, ds) == dataset_loss(w, ds));
  }
}

TEST_CASE("forward and dataset_loss agree with the reference loop") {
  Rng rng(23);
  for (const char* spec : {"1-1", "3-1", "3-3-1", "7-3-1", "3-1-3-1", "7-7-1"}) {
    const auto a = BnnArchitecture::parse(spec);
    for (int t = 0; t < 30; ++t) {
      const WeightSet w = WeightSet::random(a, rng);
      const auto ds = random_dataset(rng, a.input_size(), 8);
      REQUIRE(static_cast<int>(dataset_loss(w, ds)) == oracle::loss(to_net(w), xs_of(ds), ys_of(ds)));
      const auto tr = forward_trace(w, ds.inputs[0]);
      REQUIRE(tr.activations.size() == a.num_layers() + 1);
      REQUIRE(tr.output() == forward(w, ds.inputs[0]));
    }
  }
}

TEST_CASE("weight bits round trip in layer, row, column order") {
  Rng rng(24);
  const auto a = BnnArchitecture::parse("3-3-1");
  const WeightSet w = WeightSet::random(a, rng);
  const auto bits = weights_to_bits(w);
  REQUIRE(bits.size() == 12);
  CHECK(bits[0] == spin_to_bit(w.layers[0].at(0, 0)));
  CHECK(bits[5] == spin_to_bit(w.layers[0].at(1, 2)));
  CHECK(bits[9] == spin_to_bit(w.layers[1].at(0, 0)));
  CHECK(weights_from_bits(a, bits) == w);
  CHECK_THROWS_AS(weights_from_bits(a, std::vector<Bit>(11)), DimensionError);
  const auto zeros = weights_from_bits(a, std::vector<Bit>(12, 0));
  CHECK(zeros == WeightSet::filled(a, -1));
}

TEST_CASE("dataset validation") {
  LabeledDataset ds;
  ds.add({1, -1, 1}, 1);
  CHECK_NOTHROW(ds.validate(3));
  CHECK_THROWS_AS(ds.validate(2), DimensionError);
  ds.inputs[0][1] = 0;
  CHECK_THROWS_AS(ds.validate(3), DimensionError);
}

TEST_CASE("weight oracle matches brute force enumeration") {
  Rng rng(25);
  for (const char* spec : {"1-1", "3-1", "1-1-1", "1-3-1", "3-1-3-1", "3-3-1"}) {
    const auto a = BnnArchitecture::parse(spec);
    for (int t = 0; t < 4; ++t) {
      const auto ds = random_dataset(rng, a.input_size(), 1 + rng.below(8));
      const auto ref = oracle::brute_min_loss(a.layer_sizes(), xs_of(ds), ys_of(ds));
      const OracleResult r = enumerate_optimal_weights(a, ds);
      REQUIRE(static_cast<int>(r.min_loss) == ref.loss);
      REQUIRE(r.num_optima == ref.count);
      REQUIRE(dataset_loss(r.argmin, ds) == r.min_loss);
      REQUIRE(r.exhaustive);
      // argmin is the smallest optimal pattern in (layer, row, column) order, weight 0 most significant
      const auto bits = weights_to_bits(r.argmin);
      for (std::uint64_t x = 0;; ++x) {
        std::vector<Bit> b(bits.size());
        for (std::size_t k = 0; k < b.size(); ++k) b[k] = (x >> (b.size() - 1 - k)) & 1u;
        if (dataset_loss(weights_from_bits(a, b), ds) == r.min_loss) {
          REQUIRE(b == bits);
          break;
        }
      }
    }
  }
}

TEST_CASE("oracle is independent of thread count") {
  Rng rng(26);
  const auto a = BnnArchitecture::parse("3-3-1");
  const auto ds = random_dataset(rng, 3, 6);
  const OracleResult one = enumerate_optimal_weights(a, ds, {30, 1, false});
  const OracleResult four = enumerate_optimal_weights(a, ds, {30, 4, false});
  CHECK(one.min_loss == four.min_loss);
  CHECK(one.num_optima == four.num_optima);
  CHECK(one.argmin == four.argmin);
}

TEST_CASE("oracle basics") {
  Rng rng(27);
  for (const char* spec : {"1-1", "3-1", "3-3-1", "7-1"}) {
    const auto a = BnnArchitecture::parse(spec);
    CHECK(enumerate_optimal_weights(a, random_dataset(rng, a.input_size(), 1)).min_loss == 0);
  }
  LabeledDataset conflict;
  conflict.add({1, -1, 1}, 1);
  conflict.add({1, -1, 1}, -1);
  CHECK(enumerate_optimal_weights(BnnArchitecture::parse("3-3-1"), conflict).min_loss >= 1);
  CHECK_THROWS_AS(enumerate_optimal_weights(BnnArchitecture::parse("7-7-1"), random_dataset(rng, 7, 2)), CapacityError);
  CHECK_THROWS_AS(enumerate_optimal_weights(BnnArchitecture::parse("3-1"), LabeledDataset{}), UsageError);

  const auto stop = enumerate_optimal_weights(BnnArchitecture::parse("3-3-1"), random_dataset(rng, 3, 1),
                                              {30, 1, true});
  CHECK(stop.min_loss == 0);
  CHECK_FALSE(stop.exhaustive);
}

TEST_CASE("distance is zero exactly on the optimal set") {
  Rng rng(28);
  const auto a = BnnArchitecture::parse("3-1");
  const auto ds = random_dataset(rng, 3, 8);
  const OracleResult r = enumerate_optimal_weights(a, ds);
  CHECK(distance(r.argmin, ds, r.min_loss) == 0);
  std::uint64_t zeros = 0;
  for (std::uint64_t x = 0; x < 8; ++x) {
    std::vector<Bit> b{Bit(x & 1), Bit((x >> 1) & 1), Bit((x >> 2) & 1)};
    const WeightSet w = weights_from_bits(a, b);
    const std::size_t d = distance(w, ds, r.min_loss);
    CHECK(d == dataset_loss(w, ds) - r.min_loss);
    zeros += d == 0;
  }
  CHECK(zeros == r.num_optima);
  CHECK_THROWS_AS(distance(r.argmin, ds, r.min_loss + 1), InternalError);
}
