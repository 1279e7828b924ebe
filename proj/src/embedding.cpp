#include <algorithm>
#include <deque>
#include <queue>
#include <tuple>
#include <limits>
#include <numeric>

#include "qbnn/embedding.hpp"
#include "qbnn/error.hpp"
#include "qbnn/rng.hpp"

namespace qbnn {

std::size_t LogicalGraph::num_edges() const noexcept {
  std::size_t n = 0;
  for (const auto& row : adj) n += row.size();
  return n / 2;
}

LogicalGraph interaction_graph(const Qubo& q) {
  LogicalGraph g;
  g.adj.resize(q.num_vars());
  for (std::size_t i = 0; i < q.num_vars(); ++i) {
    for (const auto& [j, c] : q.neighbors(i)) g.adj[i].push_back(static_cast<Node>(j));
  }
  return g;
}

std::size_t ChainEmbedding::total_nodes() const noexcept {
  std::size_t n = 0;
  for (const auto& c : chains) n += c.size();
  return n;
}

std::size_t ChainEmbedding::max_chain_length() const noexcept {
  std::size_t n = 0;
  for (const auto& c : chains) n = std::max(n, c.size());
  return n;
}

namespace {

constexpr std::size_t kFree = std::numeric_limits<std::size_t>::max();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr Node kNoNode = std::numeric_limits<Node>::max();
constexpr std::uint32_t kMaxExponent = 8;

// Rip-up and reroute in the style of negotiated-congestion routing: chains may
// share hardware nodes, sharing is priced by present congestion (alpha^usage)
// and by accumulated history, and every chain is rerouted each round.
class Router {
 public:
  Router(const LogicalGraph& logical, const HardwareGraph& hw, const EmbedOptions& opts, std::uint64_t seed)
      : logical_(logical), hw_(hw), opts_(opts), rng_(seed), usage_(hw.num_nodes(), 0),
        history_(hw.num_nodes(), 0.0), weight_(hw.num_nodes(), 1.0), chains_(logical.size()),
        tiebreak_(hw.num_nodes()) {
    for (auto& t : tiebreak_) t = rng_.next();
  }

  /// Returns the number of chains that share no node; equals logical size on success.
  std::size_t run() {
    const std::size_t n = logical_.size();
    std::vector<std::size_t> order = greedy_order();
    std::size_t best_clean = 0;
    std::size_t best_over = std::numeric_limits<std::size_t>::max();
    std::size_t stale = 0;
    set_alpha(opts_.alpha);
    for (std::size_t round = 0; round < opts_.rounds; ++round) {
      for (const std::size_t v : order) route(v);
      const std::size_t clean = clean_chains();
      best_clean = std::max(best_clean, clean);
      std::size_t over = 0;
      for (const auto u : usage_) over += u > 1 ? u - 1 : 0;
      if (clean == n) {
        // Overlaps priced out: shorten chains while a strictly smaller free route exists.
        std::fill(history_.begin(), history_.end(), 0.0);
        set_alpha(1e12);
        // Equal-length moves are accepted too so chains can drift out of each other's way.
        for (std::size_t pass = 0, idle = 0; pass < 64 && idle < 4; ++pass) {
          std::size_t before = 0, after = 0;
          for (const auto& c : chains_) before += c.size();
          rng_.shuffle(std::span<std::size_t>(order));
          for (const std::size_t v : order) reroute_if_not_longer(v);
          for (const auto& c : chains_) after += c.size();
          idle = after < before ? 0 : idle + 1;
        }
        return n;
      }
      for (std::size_t x = 0; x < usage_.size(); ++x) {
        if (usage_[x] > 1) history_[x] += opts_.history_factor * static_cast<double>(usage_[x] - 1);
      }
      order.resize(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      rng_.shuffle(std::span<std::size_t>(order));
      if (over < best_over) {
        stale = 0;
      } else if (++stale >= opts_.stall_rounds && opts_.stall_rounds > 0) {
        stale = 0;
        kick();
      }
      best_over = std::min(best_over, over);
    }
    return best_clean;
  }

  ChainEmbedding result() && {
    ChainEmbedding e{std::move(chains_)};
    for (auto& c : e.chains) std::sort(c.begin(), c.end());
    return e;
  }

 private:
  // Most already-ordered neighbours first, then degree.
  std::vector<std::size_t> greedy_order() {
    const std::size_t n = logical_.size();
    std::vector<std::uint64_t> tb(n);
    for (auto& t : tb) t = rng_.next();
    std::vector<std::size_t> seen(n, 0), order;
    std::vector<bool> done(n, false);
    auto key = [&](std::size_t v) { return std::tuple(seen[v], logical_.adj[v].size(), ~tb[v]); };
    for (std::size_t step = 0; step < n; ++step) {
      std::size_t pick = n;
      for (std::size_t v = 0; v < n; ++v) {
        if (!done[v] && (pick == n || key(v) > key(pick))) pick = v;
      }
      done[pick] = true;
      order.push_back(pick);
      for (const Node u : logical_.adj[pick]) ++seen[u];
    }
    return order;
  }

  // Stuck: tear up every chain on an overused node plus its logical neighbours,
  // then place them again from scratch, most constrained first.
  void kick() {
    const std::size_t n = logical_.size();
    std::vector<char> torn(n, 0);
    for (std::size_t v = 0; v < n; ++v) {
      for (const Node x : chains_[v]) {
        if (usage_[x] > 1) {
          torn[v] = 1;
          break;
        }
      }
    }
    std::vector<char> wide = torn;
    for (std::size_t v = 0; v < n; ++v) {
      if (!torn[v]) continue;
      for (const Node u : logical_.adj[v]) wide[u] = 1;
    }
    std::vector<std::size_t> left;
    for (std::size_t v = 0; v < n; ++v) {
      if (wide[v]) {
        release(v);
        left.push_back(v);
      }
    }
    while (!left.empty()) {
      std::size_t pick = 0, most = 0;
      for (std::size_t k = 0; k < left.size(); ++k) {
        std::size_t placed = 0;
        for (const Node u : logical_.adj[left[k]]) placed += !chains_[u].empty();
        if (k == 0 || placed > most) {
          pick = k;
          most = placed;
        }
      }
      const std::size_t v = left[pick];
      left.erase(left.begin() + static_cast<std::ptrdiff_t>(pick));
      assign(v, best_chain(v));
    }
  }

  void set_alpha(double alpha) {
    pow_[0] = 1.0;
    for (std::uint32_t k = 1; k <= kMaxExponent; ++k) pow_[k] = pow_[k - 1] * alpha;
    for (Node x = 0; x < weight_.size(); ++x) refresh(x);
  }

  void refresh(Node x) { weight_[x] = (1.0 + history_[x]) * pow_[std::min(usage_[x], kMaxExponent)]; }

  // Node-weighted shortest paths from chain u: entering x costs weight_[x]. A
  // source node that u shares with other chains starts at its congestion price.
  void dijkstra(std::size_t u, std::vector<double>& dist, std::vector<Node>& parent) const {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(parent.begin(), parent.end(), kNoNode);
    using Item = std::pair<double, Node>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (const Node p : chains_[u]) {
      const double d0 = usage_[p] > 1 ? pow_[std::min(usage_[p] - 1, kMaxExponent)] : 0.0;
      dist[p] = d0;
      parent[p] = p;
      heap.push({d0, p});
    }
    while (!heap.empty()) {
      const auto [d, x] = heap.top();
      heap.pop();
      if (d > dist[x]) continue;
      for (const Node y : hw_.neighbors(x)) {
        const double nd = d + weight_[y];
        if (nd < dist[y]) {
          dist[y] = nd;
          parent[y] = x;
          heap.push({nd, y});
        }
      }
    }
  }

  std::vector<Node> best_chain(std::size_t v) {
    const std::size_t n_hw = hw_.num_nodes();
    std::vector<std::size_t> anchors;
    for (const Node u : logical_.adj[v]) {
      if (!chains_[u].empty()) anchors.push_back(u);
    }
    if (anchors.empty()) {
      Node best = 0;
      for (Node x = 1; x < n_hw; ++x) {
        if (std::pair(weight_[x], tiebreak_[x]) < std::pair(weight_[best], tiebreak_[best])) best = x;
      }
      return {best};
    }
    if (dist_.size() < anchors.size()) {
      dist_.resize(anchors.size(), std::vector<double>(n_hw));
      parent_.resize(anchors.size(), std::vector<Node>(n_hw));
    }
    for (std::size_t a = 0; a < anchors.size(); ++a) dijkstra(anchors[a], dist_[a], parent_[a]);

    double best_cost = kInf;
    Node root = 0;
    for (Node x = 0; x < n_hw; ++x) {
      // The root's own weight is paid once, not once per anchor.
      double cost = weight_[x];
      for (std::size_t a = 0; a < anchors.size() && cost < kInf; ++a) {
        cost += parent_[a][x] == x ? kInf : dist_[a][x] - weight_[x];
      }
      if (cost < best_cost || (cost == best_cost && tiebreak_[x] < tiebreak_[root])) {
        best_cost = cost;
        root = x;
      }
    }
    if (best_cost >= kInf) return {};

    for (std::size_t a = 0; a < anchors.size(); ++a) {
      if (mark_.size() <= a) mark_.emplace_back(n_hw, 0);
      for (const Node p : chains_[anchors[a]]) mark_[a][p] = 1;
    }
    // Steiner tree from the root: nearest anchors first, each joined by the cheapest
    // path out of the chain built so far.
    std::vector<std::size_t> by_dist(anchors.size());
    std::iota(by_dist.begin(), by_dist.end(), std::size_t{0});
    std::sort(by_dist.begin(), by_dist.end(), [&](std::size_t x, std::size_t y) {
      return std::pair(dist_[x][root], x) < std::pair(dist_[y][root], y);
    });
    std::vector<Node> chain{root};
    for (const std::size_t a : by_dist) {
      if (!touches(chain, mark_[a])) connect(chain, anchors[a], mark_[a]);
    }
    trim(chain, anchors.size());
    for (std::size_t a = 0; a < anchors.size(); ++a) {
      for (const Node p : chains_[anchors[a]]) mark_[a][p] = 0;
    }
    return chain;
  }

  bool touches(const std::vector<Node>& chain, const std::vector<char>& target) const {
    for (const Node x : chain) {
      for (const Node y : hw_.neighbors(x)) {
        if (target[y]) return true;
      }
    }
    return false;
  }

  // Cheapest path from any chain node into chain u; appends its interior.
  void connect(std::vector<Node>& chain, std::size_t u, const std::vector<char>& target) {
    auto& dist = dist_.front();
    auto& parent = parent_.front();
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(parent.begin(), parent.end(), kNoNode);
    using Item = std::pair<double, Node>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (const Node p : chain) {
      dist[p] = 0.0;
      parent[p] = p;
      heap.push({0.0, p});
    }
    while (!heap.empty()) {
      const auto [d, x] = heap.top();
      heap.pop();
      if (d > dist[x]) continue;
      if (target[x] && parent[x] != x) {
        for (Node y = parent[x]; parent[y] != y; y = parent[y]) chain.push_back(y);
        return;
      }
      for (const Node y : hw_.neighbors(x)) {
        const double step = target[y] ? (usage_[y] > 1 ? pow_[std::min(usage_[y] - 1, kMaxExponent)] : 0.0) : weight_[y];
        if (d + step < dist[y]) {
          dist[y] = d + step;
          parent[y] = x;
          heap.push({d + step, y});
        }
      }
    }
    throw InternalError("embedding: anchor chain " + std::to_string(u) + " unreachable");
  }

  // Drops leaves that are not the last contact with some anchor.
  void trim(std::vector<Node>& chain, std::size_t num_anchors) const {
    auto inside = [&](Node y) { return std::find(chain.begin(), chain.end(), y) != chain.end(); };
    bool changed = true;
    while (changed && chain.size() > 1) {
      changed = false;
      std::vector<std::size_t> contacts(num_anchors, 0);
      std::vector<std::vector<char>> hits(chain.size(), std::vector<char>(num_anchors, 0));
      for (std::size_t k = 0; k < chain.size(); ++k) {
        for (const Node y : hw_.neighbors(chain[k])) {
          for (std::size_t a = 0; a < num_anchors; ++a) hits[k][a] |= mark_[a][y];
        }
        for (std::size_t a = 0; a < num_anchors; ++a) contacts[a] += hits[k][a];
      }
      for (std::size_t k = 0; k < chain.size(); ++k) {
        std::size_t links = 0;
        for (const Node y : hw_.neighbors(chain[k])) links += inside(y);
        if (links > 1) continue;
        bool needed = false;
        for (std::size_t a = 0; a < num_anchors; ++a) needed |= hits[k][a] && contacts[a] == 1;
        if (needed) continue;
        chain.erase(chain.begin() + static_cast<std::ptrdiff_t>(k));
        changed = true;
        break;
      }
    }
  }

  void release(std::size_t v) {
    for (const Node x : chains_[v]) {
      --usage_[x];
      refresh(x);
    }
    chains_[v].clear();
  }

  void assign(std::size_t v, std::vector<Node> chain) {
    for (const Node x : chain) {
      ++usage_[x];
      refresh(x);
    }
    chains_[v] = std::move(chain);
  }

  void route(std::size_t v) {
    std::vector<Node> old = chains_[v];
    release(v);
    std::vector<Node> chain = best_chain(v);
    assign(v, chain.empty() ? std::move(old) : std::move(chain));
  }

  void reroute_if_not_longer(std::size_t v) {
    std::vector<Node> old = chains_[v];
    release(v);
    std::vector<Node> chain = best_chain(v);
    const bool ok = !chain.empty() && chain.size() <= old.size() &&
                    std::all_of(chain.begin(), chain.end(), [&](Node x) { return usage_[x] == 0; });
    assign(v, ok ? std::move(chain) : std::move(old));
  }

  std::size_t clean_chains() const {
    std::size_t clean = 0;
    for (const auto& c : chains_) {
      clean += !c.empty() && std::all_of(c.begin(), c.end(), [&](Node x) { return usage_[x] == 1; });
    }
    return clean;
  }

  const LogicalGraph& logical_;
  const HardwareGraph& hw_;
  const EmbedOptions& opts_;
  Rng rng_;
  std::vector<std::uint32_t> usage_;
  std::vector<double> history_;  // accumulated overuse
  std::vector<double> weight_;
  std::vector<std::vector<Node>> chains_;
  std::vector<std::uint64_t> tiebreak_;
  double pow_[kMaxExponent + 1] = {1.0};
  std::vector<std::vector<double>> dist_;
  std::vector<std::vector<Node>> parent_;
  std::vector<std::vector<char>> mark_;  // per anchor slot: node belongs to that chain
};

}  // namespace

ChainEmbedding find_embedding(const LogicalGraph& logical, const HardwareGraph& hw, const EmbedOptions& opts) {
  if (logical.size() == 0) return {};
  if (hw.num_nodes() == 0) throw EmbeddingNotFound("hardware graph is empty", 0);
  std::size_t largest = 0;
  if (logical.size() <= hw.num_nodes()) {
    for (std::size_t attempt = 0; attempt < std::max<std::size_t>(1, opts.retries); ++attempt) {
      Router router(logical, hw, opts, derive_seed(opts.seed, attempt));
      const std::size_t placed = router.run();
      largest = std::max(largest, placed);
      if (placed == logical.size()) {
        ChainEmbedding emb = std::move(router).result();
        if (!verify_embedding(logical, hw, emb)) return emb;
      }
    }
  }
  throw EmbeddingNotFound("no embedding of " + std::to_string(logical.size()) + " variables into " +
                              std::to_string(hw.num_nodes()) + " nodes (best attempt left " +
                              std::to_string(largest) + " chains unshared)",
                          largest);
}

std::optional<std::string> verify_embedding(const LogicalGraph& logical, const HardwareGraph& hw,
                                            const ChainEmbedding& emb) {
  if (emb.chains.size() != logical.size()) {
    return "embedding has " + std::to_string(emb.chains.size()) + " chains for " + std::to_string(logical.size()) +
           " variables";
  }
  std::vector<long> owner(hw.num_nodes(), -1);
  for (std::size_t v = 0; v < emb.chains.size(); ++v) {
    const auto& chain = emb.chains[v];
    if (chain.empty()) return "chain " + std::to_string(v) + " is empty";
    for (const Node p : chain) {
      if (p >= hw.num_nodes()) return "chain " + std::to_string(v) + " uses missing node " + std::to_string(p);
      if (owner[p] != -1) return "node " + std::to_string(p) + " shared by chains " + std::to_string(owner[p]) +
                                 " and " + std::to_string(v);
      owner[p] = static_cast<long>(v);
    }
    // Connectivity by flood fill restricted to this chain.
    std::vector<Node> stack{chain.front()};
    std::vector<Node> seen{chain.front()};
    while (!stack.empty()) {
      const Node x = stack.back();
      stack.pop_back();
      for (const Node y : hw.neighbors(x)) {
        if (owner[y] == static_cast<long>(v) && std::find(seen.begin(), seen.end(), y) == seen.end()) {
          seen.push_back(y);
          stack.push_back(y);
        }
      }
    }
    if (seen.size() != chain.size()) return "chain " + std::to_string(v) + " is disconnected";
  }
  for (std::size_t u = 0; u < logical.size(); ++u) {
    for (const Node v : logical.adj[u]) {
      if (v <= u) continue;
      bool coupled = false;
      for (const Node p : emb.chains[u]) {
        for (const Node q : hw.neighbors(p)) {
          if (owner[q] == static_cast<long>(v)) coupled = true;
        }
      }
      if (!coupled) return "no coupler between chains " + std::to_string(u) + " and " + std::to_string(v);
    }
  }
  return std::nullopt;
}

std::vector<std::vector<Edge>> chain_trees(const ChainEmbedding& emb, const HardwareGraph& hw) {
  std::vector<std::vector<Edge>> trees(emb.chains.size());
  for (std::size_t v = 0; v < emb.chains.size(); ++v) {
    const auto& chain = emb.chains[v];
    if (chain.empty()) continue;
    std::vector<Node> seen{chain.front()};
    std::deque<Node> queue{chain.front()};
    while (!queue.empty()) {
      const Node x = queue.front();
      queue.pop_front();
      for (const Node y : hw.neighbors(x)) {
        if (std::binary_search(chain.begin(), chain.end(), y) &&
            std::find(seen.begin(), seen.end(), y) == seen.end()) {
          seen.push_back(y);
          queue.push_back(y);
          trees[v].emplace_back(std::min(x, y), std::max(x, y));
        }
      }
    }
  }
  return trees;
}

namespace {

/// Splits c into k integer parts summing to c, as equal as possible.
std::vector<std::int64_t> split_evenly(std::int64_t c, std::size_t k) {
  const auto parts = static_cast<std::int64_t>(k);
  const std::int64_t base = c / parts;
  std::int64_t rem = c - base * parts;
  std::vector<std::int64_t> out(k, base);
  for (std::size_t i = 0; rem != 0; ++i) {
    out[i] += rem > 0 ? 1 : -1;
    rem += rem > 0 ? -1 : 1;
  }
  return out;
}

}  // namespace

EmbeddedQubo embed_qubo(const Qubo& q, const ChainEmbedding& emb, const HardwareGraph& hw, std::int64_t S) {
  if (const auto problem = verify_embedding(interaction_graph(q), hw, emb)) {
    throw UsageError("invalid embedding: " + *problem);
  }
  EmbeddedQubo out;
  out.embedding = emb;
  out.chain_strength = S;
  std::vector<std::size_t> compact(hw.num_nodes(), kFree);
  for (std::size_t v = 0; v < emb.chains.size(); ++v) {
    for (const Node p : emb.chains[v]) {
      compact[p] = out.nodes.size();
      out.nodes.push_back(p);
      out.owner.push_back(v);
    }
  }
  out.qubo = Qubo(out.nodes.size(), q.offset());

  for (std::size_t v = 0; v < emb.chains.size(); ++v) {
    const auto& chain = emb.chains[v];
    const auto parts = split_evenly(q.linear(v), chain.size());
    for (std::size_t k = 0; k < chain.size(); ++k) out.qubo.add_linear(compact[chain[k]], parts[k]);

    for (auto it = q.neighbors(v).upper_bound(v); it != q.neighbors(v).end(); ++it) {
      const auto& other = emb.chains[it->first];
      std::vector<Edge> couplers;
      for (const Node p : chain) {
        for (const Node r : hw.neighbors(p)) {
          if (std::binary_search(other.begin(), other.end(), r)) couplers.emplace_back(p, r);
        }
      }
      const auto shares = split_evenly(it->second, couplers.size());
      for (std::size_t k = 0; k < couplers.size(); ++k) {
        out.qubo.add_term(compact[couplers[k].first], compact[couplers[k].second], shares[k]);
      }
    }
  }

  const auto trees = chain_trees(emb, hw);
  for (const auto& tree : trees) {
    for (const auto& [p, r] : tree) {
      out.qubo.add_linear(compact[p], S);
      out.qubo.add_linear(compact[r], S);
      out.qubo.add_term(compact[p], compact[r], -2 * S);
    }
  }
  return out;
}

Assignment EmbeddedQubo::embed_assignment(std::span<const Bit> logical) const {
  if (logical.size() != embedding.chains.size()) {
    throw DimensionError("logical assignment has " + std::to_string(logical.size()) + " bits for " +
                         std::to_string(embedding.chains.size()) + " chains");
  }
  Assignment out(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) out[k] = logical[owner[k]];
  return out;
}

Unembedded unembed(std::span<const Bit> physical, const EmbeddedQubo& eq) {
  if (physical.size() != eq.nodes.size()) {
    throw DimensionError("physical sample has " + std::to_string(physical.size()) + " bits, embedding uses " +
                         std::to_string(eq.nodes.size()));
  }
  const std::size_t n = eq.embedding.chains.size();
  std::vector<std::size_t> ones(n, 0), len(n, 0);
  for (std::size_t k = 0; k < physical.size(); ++k) {
    ones[eq.owner[k]] += physical[k];
    ++len[eq.owner[k]];
  }
  Unembedded out;
  out.bits.resize(n);
  std::size_t broken = 0;
  for (std::size_t v = 0; v < n; ++v) {
    out.bits[v] = static_cast<Bit>(2 * ones[v] > len[v]);
    broken += (ones[v] != 0 && ones[v] != len[v]);
  }
  out.chain_break_fraction = n ? static_cast<double>(broken) / static_cast<double>(n) : 0.0;
  return out;
}

ChainStrength default_chain_strength(const Qubo& q) {
  ChainStrength s{2 * q.max_abs_coefficient(), std::nullopt};
  if (s.value == 0) s.warning = "all coefficients are zero; chain strength is 0 and chains are unbound";
  return s;
}

nlohmann::json embedding_to_json(const ChainEmbedding& emb) {
  nlohmann::json chains = nlohmann::json::object();
  for (std::size_t v = 0; v < emb.chains.size(); ++v) chains[std::to_string(v)] = emb.chains[v];
  return chains;
}

ChainEmbedding embedding_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("embedding: expected {\"<variable>\": [nodes], ...}");
  const auto& chains = j;
  ChainEmbedding emb;
  emb.chains.resize(chains.size());
  for (const auto& [key, nodes] : chains.items()) {
    std::size_t v = 0;
    try {
      std::size_t used = 0;
      v = std::stoul(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw ParseError("embedding: chain key '" + key + "' is not a variable index");
    }
    if (v >= emb.chains.size()) throw ParseError("embedding: chain keys must be 0..N-1");
    if (!nodes.is_array()) throw ParseError("embedding: chain " + key + " is not an array");
    for (const auto& p : nodes) {
      if (!p.is_number_unsigned()) throw ParseError("embedding: chain " + key + " has a non-node entry");
      emb.chains[v].push_back(p.get<Node>());
    }
    std::sort(emb.chains[v].begin(), emb.chains[v].end());
  }
  return emb;
}

}  // namespace qbnn
