#pragma once

// Minor embedding of a logical QUBO interaction graph into a hardware graph:
// each logical variable becomes a connected chain of physical nodes, chains are
// bound by equality penalties S (p + q - 2 p q) along a spanning tree.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qbnn/qubo.hpp"

namespace qbnn {

using Node = std::uint32_t;
using Edge = std::pair<Node, Node>;

/// Simple undirected graph without self-loops.
class HardwareGraph {
 public:
  explicit HardwareGraph(std::size_t num_nodes = 0) : adj_(num_nodes) {}

  std::size_t num_nodes() const noexcept { return adj_.size(); }
  std::size_t num_edges() const noexcept { return num_edges_; }
  void add_edge(Node u, Node v);
  bool has_edge(Node u, Node v) const;
  const std::vector<Node>& neighbors(Node u) const { return adj_.at(u); }
  /// Edges with u < v in lexicographic order.
  std::vector<Edge> edges() const;

  friend bool operator==(const HardwareGraph&, const HardwareGraph&) = default;

 private:
  std::vector<std::vector<Node>> adj_;  // sorted
  std::size_t num_edges_ = 0;
};

HardwareGraph complete_graph(std::size_t n);
/// w x h 4-neighbour lattice.
HardwareGraph grid_graph(std::size_t w, std::size_t h);
/// m x m cells of K_{t,t}; cell (r, c) side u index k is node ((r m + c) 2 + u) t + k.
/// Side 0 couples vertically to the same k in the next row, side 1 horizontally.
HardwareGraph chimera_graph(std::size_t m, std::size_t t = 4);

/// Edge-list text: optional "nodes N" line, then "u v" per line, '#' comments.
HardwareGraph parse_topology(std::string_view text);
std::string serialize_topology(const HardwareGraph& g);

/// "complete:N", "grid:WxH", "chimera:M" or "chimera:M,T"; anything else is read as an edge-list file.
HardwareGraph make_topology(const std::string& spec);

struct LogicalGraph {
  std::vector<std::vector<Node>> adj;  // sorted
  std::size_t size() const noexcept { return adj.size(); }
  std::size_t num_edges() const noexcept;
};

LogicalGraph interaction_graph(const Qubo& q);

struct ChainEmbedding {
  std::vector<std::vector<Node>> chains;  // logical variable -> sorted physical nodes

  std::size_t total_nodes() const noexcept;
  std::size_t max_chain_length() const noexcept;
};

struct EmbedOptions {
  std::uint64_t seed = 0;
  std::size_t retries = 4;
  std::size_t rounds = 100;  // rip-up passes per attempt
  double alpha = 8.0;        // price factor per extra chain on a node
  double history_factor = 2.0;
  std::size_t stall_rounds = 5;  // rounds without less overlap before a local restart; 0 disables
};

/// Each round reroutes every chain: root and paths minimise node-weighted distance
/// to the neighbours' chains, where a node already used by k other chains costs
/// (1 + h) alpha^k, h accumulating that node's past overuse. The first round visits variables with the
/// most already-visited neighbours first, later rounds a seeded shuffle. When the
/// total overlap has not shrunk for stall_rounds rounds, every chain on a shared node
/// and its logical neighbours are torn up and placed again. Attempts
/// use derive_seed(seed, attempt). Throws EmbeddingNotFound when all attempts fail.
ChainEmbedding find_embedding(const LogicalGraph& logical, const HardwareGraph& hw, const EmbedOptions& opts = {});

/// Independent validity check; returns a description of the first problem found.
std::optional<std::string> verify_embedding(const LogicalGraph& logical, const HardwareGraph& hw,
                                            const ChainEmbedding& emb);

/// BFS spanning tree of each chain's induced subgraph.
std::vector<std::vector<Edge>> chain_trees(const ChainEmbedding& emb, const HardwareGraph& hw);

struct EmbeddedQubo {
  Qubo qubo;                       // over compact physical indices
  std::vector<Node> nodes;         // compact index -> hardware node
  std::vector<std::size_t> owner;  // compact index -> logical variable
  std::int64_t chain_strength = 0;
  ChainEmbedding embedding;

  /// Duplicates each logical bit across its chain.
  Assignment embed_assignment(std::span<const Bit> logical) const;
};

/// Linear coefficients split across chain nodes, quadratic ones across every coupler
/// joining the two chains (integer split, remainder to the first entries); plus the
/// chain equality penalties. Chain-consistent energies equal logical energies exactly.
EmbeddedQubo embed_qubo(const Qubo& q, const ChainEmbedding& emb, const HardwareGraph& hw,
                        std::int64_t chain_strength);

struct Unembedded {
  Assignment bits;
  double chain_break_fraction = 0.0;
};

/// Majority vote per chain, ties resolve to 0.
Unembedded unembed(std::span<const Bit> physical, const EmbeddedQubo& eq);

struct ChainStrength {
  std::int64_t value = 0;
  std::optional<std::string> warning;
};

/// 2 x the largest absolute coefficient.
ChainStrength default_chain_strength(const Qubo& q);

/// {"<logical var>": [physical nodes], ...}
nlohmann::json embedding_to_json(const ChainEmbedding& emb);
ChainEmbedding embedding_from_json(const nlohmann::json& j);

}  // namespace qbnn
