#include "corrnet/filtergraph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>

#include "corrnet/error.hpp"
#include "corrnet/io.hpp"
#include "corrnet/kernels.hpp"

namespace corrnet {

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

GraphEdge make_edge(const CorrelationMatrix& c, const NodePair& p, std::size_t rank) {
  return GraphEdge{p.first, p.second, c(p.first, p.second), rank};
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

std::string to_string(GraphKind kind) { return kind == GraphKind::mst ? "mst" : "pmfg"; }

GraphKind graph_kind_from_string(const std::string& text) {
  if (text == "mst") return GraphKind::mst;
  if (text == "pmfg") return GraphKind::pmfg;
  throw ParseError("unknown graph kind '" + text + "'", 0);
}

std::vector<NodePair> FilteredGraph::pairs() const {
  std::vector<NodePair> out;
  out.reserve(edges.size());
  for (const auto& e : edges) out.emplace_back(e.i, e.j);
  return out;
}

std::vector<NodePair> rank_pairs(const CorrelationMatrix& c) {
  const std::size_t n = c.size();
  std::vector<NodePair> pairs;
  pairs.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!std::isfinite(c(i, j))) throw DomainError("non-finite matrix entry between " + c.tickers[i] + " and " + c.tickers[j]);
      pairs.emplace_back(i, j);
    }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [&](const NodePair& a, const NodePair& b) { return c(a.first, a.second) > c(b.first, b.second); });
  return pairs;
}

FilteredGraph build_mst(const CorrelationMatrix& c) {
  const std::size_t n = c.size();
  if (n < 2) throw PreconditionError("MST needs at least 2 nodes");
  const auto ranked = rank_pairs(c);
  FilteredGraph g{c.tickers, {}, GraphKind::mst, c.kind, 0, {}};
  UnionFind uf(n);
  for (std::size_t r = 0; r < ranked.size() && g.edges.size() + 1 < n; ++r)
    if (uf.unite(ranked[r].first, ranked[r].second)) g.edges.push_back(make_edge(c, ranked[r], r));
  return g;
}

FilteredGraph build_pmfg(const CorrelationMatrix& c, Execution exec) {
  const std::size_t n = c.size();
  if (n < 3) throw PreconditionError("PMFG needs at least 3 nodes");
  if (c.kind == MatrixKind::sector_mode)
    throw PreconditionError("PMFG on the signed sector mode is undefined; use its absolute or clipped variant");
  const auto ranked = rank_pairs(c);
  const std::size_t target = 3 * n - 6;
  const auto screen = exec == Execution::parallel ? kernels::omp::planar_screen(n, ranked, target)
                                                  : kernels::serial::planar_screen(n, ranked, target);
  if (screen.accepted.size() != target) throw Error("PMFG stopped short of 3N-6 edges");
  FilteredGraph g{c.tickers, {}, GraphKind::pmfg, c.kind, 0, screen.rejected};
  for (auto r : screen.accepted) g.edges.push_back(make_edge(c, ranked[r], r));

  const auto pairs = g.pairs();
  const std::set<NodePair> kept(pairs.begin(), pairs.end());
  for (const auto& e : build_mst(c).edges)
    if (!kept.contains({e.i, e.j})) throw Error("MST edge missing from PMFG: internal invariant broken");
  return g;
}

std::string market_tag(const std::string& node) {
  auto pos = node.find(':');
  return pos == std::string::npos ? std::string{} : node.substr(0, pos);
}

void write_edge_list(std::ostream& out, const FilteredGraph& g) {
  out << "# kind: " << to_string(g.kind) << "\n";
  out << "# source: " << to_string(g.source) << "\n";
  out << "# genus: " << g.genus << "\n";
  out << "# nodes: ";
  for (std::size_t v = 0; v < g.nodes.size(); ++v) out << (v ? "," : "") << g.nodes[v];
  out << "\n";
  out << "source,target,weight,rank\n";
  for (const auto& e : g.edges)
    out << g.nodes[e.i] << "," << g.nodes[e.j] << "," << format_number(e.weight) << "," << e.rank << "\n";
}

FilteredGraph read_edge_list(std::istream& in) {
  LineReader reader(in);
  std::string line;
  if (!reader.next(line)) throw ParseError("empty edge list", 0);
  FilteredGraph g;
  bool have_nodes = false;
  for (const auto& c : reader.comments()) {
    auto colon = c.find(':');
    if (colon == std::string::npos) continue;
    auto key = split_fields(c.substr(0, colon), ',')[0];
    auto value = split_fields(c.substr(colon + 1), ',');
    if (key == "kind") g.kind = graph_kind_from_string(value[0]);
    else if (key == "source") g.source = matrix_kind_from_string(value[0]);
    else if (key == "genus") g.genus = static_cast<int>(parse_number(value[0]));
    else if (key == "nodes") {
      g.nodes = value;
      have_nodes = true;
    }
  }
  if (!have_nodes) throw ParseError("edge list lacks a '# nodes:' header", reader.line_number());
  auto header = split_fields(line, ',');
  if (header.size() != 4 || header[0] != "source")
    throw ParseError("expected header source,target,weight,rank", reader.line_number());
  auto index_of = [&](const std::string& t) {
    auto it = std::find(g.nodes.begin(), g.nodes.end(), t);
    if (it == g.nodes.end()) throw ParseError("unknown node '" + t + "'", reader.line_number());
    return static_cast<std::size_t>(it - g.nodes.begin());
  };
  while (reader.next(line)) {
    auto f = split_fields(line, ',');
    if (f.size() != 4) throw ParseError("edge row needs 4 fields", reader.line_number());
    auto i = index_of(f[0]);
    auto j = index_of(f[1]);
    if (i > j) std::swap(i, j);
    g.edges.push_back(GraphEdge{i, j, parse_number(f[2], reader.line_number()),
                                static_cast<std::size_t>(parse_number(f[3], reader.line_number()))});
  }
  return g;
}

void write_graphml(std::ostream& out, const FilteredGraph& g) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
      << "  <key id=\"ticker\" for=\"node\" attr.name=\"ticker\" attr.type=\"string\"/>\n"
      << "  <key id=\"market\" for=\"node\" attr.name=\"market\" attr.type=\"string\"/>\n"
      << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
      << "  <key id=\"rank\" for=\"edge\" attr.name=\"rank\" attr.type=\"int\"/>\n"
      << "  <graph id=\"" << to_string(g.kind) << "\" edgedefault=\"undirected\">\n";
  for (std::size_t v = 0; v < g.nodes.size(); ++v) {
    out << "    <node id=\"n" << v << "\"><data key=\"ticker\">" << xml_escape(g.nodes[v])
        << "</data><data key=\"market\">" << xml_escape(market_tag(g.nodes[v])) << "</data></node>\n";
  }
  for (const auto& e : g.edges) {
    out << "    <edge source=\"n" << e.i << "\" target=\"n" << e.j << "\"><data key=\"weight\">"
        << format_number(e.weight) << "</data><data key=\"rank\">" << e.rank << "</data></edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
}

void write_dot(std::ostream& out, const FilteredGraph& g) {
  out << "graph " << to_string(g.kind) << " {\n";
  for (const auto& v : g.nodes) out << "  " << dot_quote(v) << " [market=" << dot_quote(market_tag(v)) << "];\n";
  for (const auto& e : g.edges)
    out << "  " << dot_quote(g.nodes[e.i]) << " -- " << dot_quote(g.nodes[e.j]) << " [weight=" << format_number(e.weight)
        << ", rank=" << e.rank << "];\n";
  out << "}\n";
}

}  // namespace corrnet
