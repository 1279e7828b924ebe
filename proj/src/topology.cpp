#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "qbnn/embedding.hpp"
#include "qbnn/error.hpp"

namespace qbnn {

void HardwareGraph::add_edge(Node u, Node v) {
  if (u == v) throw UsageError("self-loop on node " + std::to_string(u));
  if (u >= adj_.size() || v >= adj_.size()) {
    throw DimensionError("edge (" + std::to_string(u) + ", " + std::to_string(v) + ") outside " +
                         std::to_string(adj_.size()) + " nodes");
  }
  auto insert = [](std::vector<Node>& row, Node x) {
    const auto it = std::lower_bound(row.begin(), row.end(), x);
    if (it != row.end() && *it == x) return false;
    row.insert(it, x);
    return true;
  };
  if (insert(adj_[u], v)) {
    insert(adj_[v], u);
    ++num_edges_;
  }
}

bool HardwareGraph::has_edge(Node u, Node v) const {
  if (u >= adj_.size() || v >= adj_.size()) return false;
  return std::binary_search(adj_[u].begin(), adj_[u].end(), v);
}

std::vector<Edge> HardwareGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges_);
  for (Node u = 0; u < adj_.size(); ++u) {
    for (const Node v : adj_[u]) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

HardwareGraph complete_graph(std::size_t n) {
  if (n == 0) throw UsageError("complete graph needs at least one node");
  HardwareGraph g(n);
  for (Node u = 0; u < n; ++u) {
    for (Node v = u + 1; v < n; ++v) g.add_edge(u, v);
  }
  return g;
}

HardwareGraph grid_graph(std::size_t w, std::size_t h) {
  if (w == 0 || h == 0) throw UsageError("grid dimensions must be positive");
  HardwareGraph g(w * h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const Node u = static_cast<Node>(y * w + x);
      if (x + 1 < w) g.add_edge(u, u + 1);
      if (y + 1 < h) g.add_edge(u, static_cast<Node>(u + w));
    }
  }
  return g;
}

HardwareGraph chimera_graph(std::size_t m, std::size_t t) {
  if (m == 0 || t == 0) throw UsageError("chimera dimensions must be positive");
  HardwareGraph g(m * m * 2 * t);
  auto node = [&](std::size_t r, std::size_t c, std::size_t u, std::size_t k) {
    return static_cast<Node>(((r * m + c) * 2 + u) * t + k);
  };
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      for (std::size_t a = 0; a < t; ++a) {
        for (std::size_t b = 0; b < t; ++b) g.add_edge(node(r, c, 0, a), node(r, c, 1, b));
        if (r + 1 < m) g.add_edge(node(r, c, 0, a), node(r + 1, c, 0, a));
        if (c + 1 < m) g.add_edge(node(r, c, 1, a), node(r, c + 1, 1, a));
      }
    }
  }
  return g;
}

namespace {

std::uint64_t parse_uint(std::string_view s, std::size_t line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError("'" + std::string(s) + "' is not a node index", line);
  }
  if (v > UINT32_MAX) throw ParseError("node index too large", line);
  return v;
}

}  // namespace

HardwareGraph parse_topology(std::string_view text) {
  std::vector<Edge> edges;
  std::size_t n = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (const auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
    std::istringstream fields{std::string(line)};
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok[0] == "nodes") {
      if (tok.size() != 2) throw ParseError("expected 'nodes N'", line_no);
      n = std::max<std::size_t>(n, parse_uint(tok[1], line_no));
      continue;
    }
    if (tok.size() != 2) throw ParseError("expected 'u v'", line_no);
    const Node u = static_cast<Node>(parse_uint(tok[0], line_no));
    const Node v = static_cast<Node>(parse_uint(tok[1], line_no));
    if (u == v) throw ParseError("self-loop on node " + std::to_string(u), line_no);
    edges.emplace_back(u, v);
    n = std::max<std::size_t>(n, std::max(u, v) + std::size_t{1});
  }
  HardwareGraph g(n);
  for (const auto& [u, v] : edges) g.add_edge(u, v);
  return g;
}

std::string serialize_topology(const HardwareGraph& g) {
  std::ostringstream os;
  os << "nodes " << g.num_nodes() << '\n';
  for (const auto& [u, v] : g.edges()) os << u << ' ' << v << '\n';
  return os.str();
}

HardwareGraph make_topology(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon != std::string::npos) {
    const std::string kind = spec.substr(0, colon);
    const std::string args = spec.substr(colon + 1);
    auto num = [&](std::string_view s) {
      std::size_t v = 0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw UsageError("malformed topology '" + spec + "'");
      }
      return v;
    };
    if (kind == "complete") return complete_graph(num(args));
    if (kind == "grid") {
      const auto x = args.find('x');
      if (x == std::string::npos) throw UsageError("grid topology needs WxH");
      return grid_graph(num(std::string_view(args).substr(0, x)), num(std::string_view(args).substr(x + 1)));
    }
    if (kind == "chimera") {
      const auto comma = args.find(',');
      if (comma == std::string::npos) return chimera_graph(num(args));
      return chimera_graph(num(std::string_view(args).substr(0, comma)), num(std::string_view(args).substr(comma + 1)));
    }
  }
  std::ifstream in(spec);
  if (!in) throw IoError("cannot open topology file '" + spec + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_topology(ss.str());
}

}  // namespace qbnn
