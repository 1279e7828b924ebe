#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "qbnn/builder.hpp"
#include "qbnn/embedding.hpp"
#include "qbnn/rng.hpp"
#include "qbnn/solvers.hpp"

using namespace qbnn;

namespace {

Qubo random_qubo(Rng& rng, std::size_t n, double density) {
  Qubo q(n, 3);
  for (std::size_t i = 0; i < n; ++i) {
    q.add_linear(i, static_cast<std::int64_t>(rng.below(41)) - 20);
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.uniform01() < density) q.add_term(i, j, static_cast<std::int64_t>(rng.below(41)) - 20);
    }
  }
  return q;
}

LogicalGraph complete_logical(std::size_t n) {
  Qubo q(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) q.add_term(i, j, 1);
  }
  return interaction_graph(q);
}

}  // namespace

TEST_CASE("small topologies") {
  CHECK(complete_graph(4).num_edges() == 6);
  CHECK(grid_graph(2, 2).num_edges() == 4);
  const HardwareGraph cell = chimera_graph(1, 4);
  CHECK(cell.num_nodes() == 8);
  CHECK(cell.num_edges() == 16);
  CHECK(parse_topology("").num_nodes() == 0);
  CHECK(parse_topology("0 1\n1 0\n").num_edges() == 1);
}

TEST_CASE("topology generators") {
  const HardwareGraph k = complete_graph(5);
  CHECK(k.num_nodes() == 5);
  CHECK(k.num_edges() == 10);
  const HardwareGraph g = grid_graph(3, 2);
  CHECK(g.num_edges() == 7);
  CHECK(g.has_edge(0, 1));
  CHECK(g.has_edge(1, 4));
  CHECK_FALSE(g.has_edge(2, 3));

  const HardwareGraph c = chimera_graph(16, 4);
  CHECK(c.num_nodes() == 2048);
  // 256 cells x 16 internal couplers + 2 x 16 x 15 x 4 inter-cell couplers
  CHECK(c.num_edges() == 256 * 16 + 2 * 16 * 15 * 4);
  for (Node x = 0; x < c.num_nodes(); ++x) REQUIRE(c.neighbors(x).size() <= 6);
  CHECK(c.has_edge(0, 4));
  CHECK(c.has_edge(0, 16 * 8));  // side 0 couples to the next row
  CHECK(c.has_edge(4, 12));      // side 1 couples to the next column
  CHECK_FALSE(c.has_edge(0, 1));

  CHECK(make_topology("chimera:2,3").num_nodes() == 24);
  CHECK(make_topology("grid:4x5") == grid_graph(4, 5));
  CHECK(make_topology("complete:6") == complete_graph(6));
  CHECK_THROWS_AS(make_topology("grid:4"), UsageError);
  CHECK_THROWS_AS(make_topology("chimera:x"), UsageError);
  CHECK_THROWS_AS(make_topology("/nonexistent/topology.txt"), IoError);
}

TEST_CASE("topology text round trip and errors") {
  const HardwareGraph c = chimera_graph(3, 2);
  CHECK(parse_topology(serialize_topology(c)) == c);
  const HardwareGraph isolated = parse_topology("# two edges and a spare node\nnodes 5\n0 1\n1 2  # trailing\n");
  CHECK(isolated.num_nodes() == 5);
  CHECK(isolated.num_edges() == 2);
  try {
    parse_topology("0 1\n1 x\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_topology("3 3\n"), ParseError);
  CHECK_THROWS_AS(parse_topology("1 2 3\n"), ParseError);
  CHECK_THROWS_AS(parse_topology("nodes\n"), ParseError);
}

TEST_CASE("complete hardware gives singleton chains") {
  for (std::size_t n : {1, 2, 5, 8}) {
    const LogicalGraph lg = complete_logical(n);
    const ChainEmbedding e = find_embedding(lg, complete_graph(n));
    CHECK_FALSE(verify_embedding(lg, complete_graph(n), e));
    CHECK(e.max_chain_length() == 1);
  }
}

TEST_CASE("small cliques") {
  const ChainEmbedding k3 = find_embedding(complete_logical(3), complete_graph(3));
  CHECK(k3.total_nodes() == 3);
  const HardwareGraph two_cells = chimera_graph(2, 4);
  const ChainEmbedding k5 = find_embedding(complete_logical(5), two_cells);
  CHECK_FALSE(verify_embedding(complete_logical(5), two_cells, k5));
  CHECK(k5.total_nodes() >= 5);
  CHECK_THROWS_AS(find_embedding(complete_logical(5), grid_graph(2, 2)), EmbeddingNotFound);
}

TEST_CASE("impossible minors fail cleanly") {
  EmbedOptions o;
  o.retries = 2;
  o.rounds = 10;
  try {
    find_embedding(complete_logical(4), grid_graph(2, 2), o);
    FAIL("K4 is not a minor of a 4-cycle");
  } catch (const EmbeddingNotFound& e) {
    CHECK(e.largest_partial() < 4);
  }
  CHECK_THROWS_AS(find_embedding(complete_logical(6), complete_graph(5), o), EmbeddingNotFound);
  CHECK(find_embedding(LogicalGraph{}, grid_graph(2, 2)).chains.empty());
}

TEST_CASE("cliques into chimera need chains") {
  const HardwareGraph hw = chimera_graph(4);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const LogicalGraph lg = complete_logical(8);
    EmbedOptions o;
    o.seed = seed;
    const ChainEmbedding e = find_embedding(lg, hw, o);
    CHECK_FALSE(verify_embedding(lg, hw, e));
    CHECK(e.max_chain_length() >= 2);  // chimera has no K8 subgraph
  }
}

TEST_CASE("verify_embedding catches each defect") {
  const HardwareGraph hw = grid_graph(3, 1);  // path 0 - 1 - 2
  Qubo q(2);
  q.add_term(0, 1, 1);
  const LogicalGraph lg = interaction_graph(q);
  CHECK_FALSE(verify_embedding(lg, hw, ChainEmbedding{{{0, 1}, {2}}}));
  CHECK(verify_embedding(lg, hw, ChainEmbedding{{{0}}}));              // wrong chain count
  CHECK(verify_embedding(lg, hw, ChainEmbedding{{{0}, {}}}));          // empty chain
  CHECK(verify_embedding(lg, hw, ChainEmbedding{{{0, 1}, {1}}}));      // shared node
  CHECK(verify_embedding(lg, hw, ChainEmbedding{{{0, 2}, {1}}}));      // disconnected
  CHECK(verify_embedding(lg, hw, ChainEmbedding{{{0}, {2}}}));         // no coupler
  CHECK(verify_embedding(lg, hw, ChainEmbedding{{{0}, {7}}}));         // missing node
}

TEST_CASE("chain penalty on a two-node chain") {
  const HardwareGraph hw = grid_graph(2, 1);
  Qubo q(1);
  q.add_linear(0, 5);
  const EmbeddedQubo eq = embed_qubo(q, ChainEmbedding{{{0, 1}}}, hw, 40);
  REQUIRE(eq.nodes == std::vector<Node>{0, 1});
  // 5 split as 3 + 2; S (p + q - 2 p q) with S = 40
  CHECK(eq.qubo.energy(Assignment{0, 0}) == 0);
  CHECK(eq.qubo.energy(Assignment{1, 1}) == 5);
  CHECK(eq.qubo.energy(Assignment{1, 0}) == 40 + 3);
  CHECK(eq.qubo.energy(Assignment{0, 1}) == 40 + 2);
}

TEST_CASE("chain-consistent energies equal logical energies") {
  Rng rng(61);
  const HardwareGraph hw = chimera_graph(6);
  for (int t = 0; t < 8; ++t) {
    const Qubo q = random_qubo(rng, 6 + rng.below(10), 0.4);
    const LogicalGraph lg = interaction_graph(q);
    EmbedOptions o;
    o.seed = rng.next();
    const ChainEmbedding emb = find_embedding(lg, hw, o);
    REQUIRE_FALSE(verify_embedding(lg, hw, emb));
    const std::int64_t S = default_chain_strength(q).value;
    const EmbeddedQubo eq = embed_qubo(q, emb, hw, S);
    CHECK(eq.nodes.size() == emb.total_nodes());
    for (int s = 0; s < 50; ++s) {
      Assignment a(q.num_vars());
      for (auto& b : a) b = static_cast<Bit>(rng.below(2));
      const Assignment phys = eq.embed_assignment(a);
      REQUIRE(eq.qubo.energy(phys) == q.energy(a));
      const Unembedded u = unembed(phys, eq);
      REQUIRE(u.bits == a);
      REQUIRE(u.chain_break_fraction == 0.0);
    }
    // The embedded ground state, unembedded, is a logical ground state.
    if (eq.nodes.size() <= 22) {
      const SampleSet phys = solve_exhaustive(eq.qubo);
      CHECK(phys.best().energy == solve_exhaustive(q).best().energy);
      CHECK(q.energy(unembed(phys.best().bits, eq).bits) == phys.best().energy);
    }
  }
}

TEST_CASE("a training QUBO embeds into chimera with its witness energy intact") {
  Rng rng(62);
  LabeledDataset ds;
  for (int d = 0; d < 2; ++d) ds.add({static_cast<std::int8_t>(rng.below(2) ? 1 : -1), -1, 1}, 1);
  const auto arch = BnnArchitecture::parse("3-1");
  const TrainingQubo tq = build_training_qubo(arch, ds);
  const HardwareGraph hw = chimera_graph(8);
  const ChainEmbedding emb = find_embedding(interaction_graph(tq.qubo), hw);
  const EmbeddedQubo eq = embed_qubo(tq.qubo, emb, hw, default_chain_strength(tq.qubo).value);
  for (int t = 0; t < 20; ++t) {
    const WeightSet w = WeightSet::random(arch, rng);
    const Assignment a = witness_assignment(tq.registry, ds, w);
    CHECK(eq.qubo.energy(eq.embed_assignment(a)) == static_cast<std::int64_t>(dataset_loss(w, ds)));
  }
}

TEST_CASE("singleton chains reproduce the logical form") {
  Rng rng(64);
  const Qubo q = random_qubo(rng, 6, 0.5);
  const ChainEmbedding emb{{{5}, {4}, {3}, {2}, {1}, {0}}};
  const EmbeddedQubo eq = embed_qubo(q, emb, complete_graph(6), 99);
  // Compact indices follow the logical order; nodes carry the relabeling.
  CHECK(eq.qubo == q);
  CHECK(eq.nodes == std::vector<Node>{5, 4, 3, 2, 1, 0});
}

TEST_CASE("breaking one chain edge costs exactly S and grows with S") {
  // Logical form with no linear terms, so the broken node carries no coefficient share.
  const HardwareGraph hw = grid_graph(4, 1);
  Qubo q(2);
  q.add_term(0, 1, 6);
  const ChainEmbedding emb{{{0, 1, 2}, {3}}};
  std::int64_t last = 0;
  for (const std::int64_t S : {1, 5, 12, 40}) {
    const EmbeddedQubo eq = embed_qubo(q, emb, hw, S);
    const Assignment consistent{0, 0, 0, 1};
    Assignment broken = consistent;
    broken[0] = 1;  // leaf of the path 0 - 1 - 2
    CHECK(eq.qubo.energy(broken) - eq.qubo.energy(consistent) == S);
    CHECK(eq.qubo.energy(broken) > last);
    last = eq.qubo.energy(broken);
  }
}

TEST_CASE("unembed takes the majority and breaks ties to 0") {
  const HardwareGraph hw = grid_graph(5, 1);
  Qubo q(2);
  q.add_term(0, 1, 1);
  const EmbeddedQubo eq = embed_qubo(q, ChainEmbedding{{{0, 1, 2}, {3, 4}}}, hw, 2);
  Unembedded u = unembed(Assignment{1, 1, 0, 1, 0}, eq);
  CHECK(u.bits == Assignment{1, 0});
  CHECK(u.chain_break_fraction == 1.0);
  u = unembed(Assignment{0, 0, 1, 1, 1}, eq);
  CHECK(u.bits == Assignment{0, 1});
  CHECK(u.chain_break_fraction == 0.5);
  CHECK_THROWS_AS(unembed(Assignment{0, 1}, eq), DimensionError);
  CHECK_THROWS_AS(eq.embed_assignment(Assignment{0}), DimensionError);
}

TEST_CASE("coupler split is exact") {
  // Two chains joined by three couplers share a coefficient of 7 as 3 + 2 + 2.
  const HardwareGraph hw = complete_graph(4);
  Qubo q(2);
  q.add_term(0, 1, 7);
  const EmbeddedQubo eq = embed_qubo(q, ChainEmbedding{{{0}, {1, 2, 3}}}, hw, 14);
  std::multiset<std::int64_t> shares;
  for (std::size_t k = 1; k < 4; ++k) shares.insert(eq.qubo.coefficient(0, k));
  CHECK(shares == std::multiset<std::int64_t>{2, 2, 3});
  CHECK(eq.qubo.energy(Assignment{1, 1, 1, 1}) == 7);
}

TEST_CASE("chain strength and invalid embeddings") {
  Qubo q(2);
  q.add_term(0, 1, -9);
  q.add_linear(0, 4);
  CHECK(default_chain_strength(q).value == 18);
  CHECK_FALSE(default_chain_strength(q).warning);
  CHECK(default_chain_strength(Qubo(3)).warning);
  CHECK_THROWS_AS(embed_qubo(q, ChainEmbedding{{{0}, {2}}}, grid_graph(3, 1), 18), UsageError);
}

TEST_CASE("embedding JSON round trip") {
  const ChainEmbedding e{{{4, 1}, {0}, {2, 3, 7}}};
  const ChainEmbedding back = embedding_from_json(embedding_to_json(e));
  CHECK(back.chains[0] == std::vector<Node>{1, 4});
  CHECK(back.chains[2] == std::vector<Node>{2, 3, 7});
  CHECK_THROWS_AS(embedding_from_json(nlohmann::json::array()), ParseError);
  CHECK(embedding_to_json(e).at("2") == nlohmann::json{2, 3, 7});
  CHECK_THROWS_AS(embedding_from_json(nlohmann::json::parse(R"({"x": [1]})")), ParseError);
  CHECK_THROWS_AS(embedding_from_json(nlohmann::json::parse(R"({"3": [1]})")), ParseError);
  CHECK_THROWS_AS(embedding_from_json(nlohmann::json::parse(R"({"0": [-1]})")), ParseError);
  CHECK_THROWS_AS(embedding_from_json(nlohmann::json::parse(R"({"0": 4})")), ParseError);
}

TEST_CASE("find_embedding is deterministic per seed") {
  Rng rng(63);
  const Qubo q = random_qubo(rng, 20, 0.3);
  const LogicalGraph lg = interaction_graph(q);
  const HardwareGraph hw = chimera_graph(6);
  EmbedOptions o;
  o.seed = 17;
  CHECK(find_embedding(lg, hw, o).chains == find_embedding(lg, hw, o).chains);
}
