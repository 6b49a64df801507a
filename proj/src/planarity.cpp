#include "corrnet/planarity.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "corrnet/error.hpp"

namespace corrnet {

namespace {

// Left-right planarity test after Brandes' formulation: DFS orientation with
// lowpoints and nesting depths, then conflict-pair testing of return edges,
// then (optionally) the embedding pass resolving left/right sides.
class LeftRight {
 public:
  LeftRight(std::size_t n, std::span<const NodePair> edges, const NodePair* extra) : n_(static_cast<int>(n)) {
    adj_.resize(n);
    std::unordered_set<std::size_t> seen;
    seen.reserve(edges.size() * 2 + 2);
    auto add = [&](NodePair p) {
      auto [u, v] = p;
      if (u == v) return;
      if (u >= n || v >= n) throw PreconditionError("edge endpoint out of range");
      if (u > v) std::swap(u, v);
      if (!seen.insert(u * n + v).second) return;
      const int id = static_cast<int>(ends_.size());
      ends_.push_back({static_cast<int>(u), static_cast<int>(v)});
      adj_[u].push_back({static_cast<int>(v), id});
      adj_[v].push_back({static_cast<int>(u), id});
    };
    for (const auto& e : edges) add(e);
    if (extra) add(*extra);
  }

  bool run(bool build_embedding) {
    const int m = static_cast<int>(ends_.size());
    if (n_ > 2 && m > 3 * n_ - 6) return false;

    height_.assign(n_, -1);
    parent_edge_.assign(n_, -1);
    src_.assign(m, -1);
    dst_.assign(m, -1);
    lowpt_.assign(m, 0);
    lowpt2_.assign(m, 0);
    nesting_.assign(m, 0);
    out_.assign(n_, {});
    for (int v = 0; v < n_; ++v) {
      if (height_[v] == -1) {
        height_[v] = 0;
        roots_.push_back(v);
        orient(v);
      }
    }

    ref_.assign(m, -1);
    side_.assign(m, 1);
    lowpt_edge_.assign(m, -1);
    stack_bottom_.assign(m, -1);
    sort_out_edges();
    for (int r : roots_)
      if (!test(r)) return false;
    if (build_embedding) embed();
    return true;
  }

  Embedding embedding() const {
    Embedding emb;
    emb.rotation.resize(static_cast<std::size_t>(n_));
    for (int v = 0; v < n_; ++v) {
      if (first_[v] < 0) continue;
      int w = first_[v];
      do {
        emb.rotation[v].push_back(static_cast<std::size_t>(w));
        w = half_.at(key(v, w)).cw;
      } while (w != first_[v]);
    }
    return emb;
  }

 private:
  struct Interval {
    int low = -1;
    int high = -1;
    bool empty() const { return low < 0 && high < 0; }
  };
  struct ConflictPair {
    Interval left, right;
    long id = 0;
  };
  struct HalfEdge {
    int cw = -1;
    int ccw = -1;
  };

  void orient(int v) {
    const int e = parent_edge_[v];
    for (auto [w, id] : adj_[v]) {
      if (src_[id] != -1) continue;
      src_[id] = v;
      dst_[id] = w;
      out_[v].push_back(id);
      lowpt_[id] = height_[v];
      lowpt2_[id] = height_[v];
      if (height_[w] == -1) {
        parent_edge_[w] = id;
        height_[w] = height_[v] + 1;
        orient(w);
      } else {
        lowpt_[id] = height_[w];
      }
      nesting_[id] = 2 * lowpt_[id];
      if (lowpt2_[id] < height_[v]) nesting_[id] += 1;  // chordal
      if (e != -1) {
        if (lowpt_[id] < lowpt_[e]) {
          lowpt2_[e] = std::min(lowpt_[e], lowpt2_[id]);
          lowpt_[e] = lowpt_[id];
        } else if (lowpt_[id] > lowpt_[e]) {
          lowpt2_[e] = std::min(lowpt2_[e], lowpt_[id]);
        } else {
          lowpt2_[e] = std::min(lowpt2_[e], lowpt2_[id]);
        }
      }
    }
  }

  void sort_out_edges() {
    for (auto& list : out_)
      std::stable_sort(list.begin(), list.end(), [&](int a, int b) { return nesting_[a] < nesting_[b]; });
  }

  long top_id() const { return stack_.empty() ? -1 : stack_.back().id; }

  bool conflicting(const Interval& i, int b) const { return !i.empty() && i.high >= 0 && lowpt_[i.high] > lowpt_[b]; }

  int lowest(const ConflictPair& p) const {
    if (p.left.empty()) return lowpt_[p.right.low];
    if (p.right.empty()) return lowpt_[p.left.low];
    return std::min(lowpt_[p.left.low], lowpt_[p.right.low]);
  }

  void set_ref(int e, int target) {
    if (e >= 0) ref_[e] = target;
  }

  bool test(int v) {
    const int e = parent_edge_[v];
    const auto& ordered = out_[v];
    for (std::size_t k = 0; k < ordered.size(); ++k) {
      const int ei = ordered[k];
      const int w = dst_[ei];
      stack_bottom_[ei] = top_id();
      if (ei == parent_edge_[w]) {
        if (!test(w)) return false;
      } else {
        lowpt_edge_[ei] = ei;
        stack_.push_back(ConflictPair{Interval{}, Interval{ei, ei}, next_id_++});
      }
      if (lowpt_[ei] < height_[v]) {
        if (k == 0) {
          if (e >= 0) lowpt_edge_[e] = lowpt_edge_[ei];
        } else if (!add_constraints(ei, e)) {
          return false;
        }
      }
    }
    if (e != -1) remove_back_edges(e);
    return true;
  }

  bool add_constraints(int ei, int e) {
    ConflictPair p;
    p.id = next_id_++;
    do {
      if (stack_.empty()) break;
      ConflictPair q = stack_.back();
      stack_.pop_back();
      if (!q.left.empty()) std::swap(q.left, q.right);
      if (!q.left.empty()) return false;
      if (lowpt_[q.right.low] > lowpt_[e]) {
        if (p.right.empty())
          p.right = q.right;
        else
          set_ref(p.right.low, q.right.high);
        p.right.low = q.right.low;
      } else {
        set_ref(q.right.low, lowpt_edge_[e]);
      }
    } while (top_id() != stack_bottom_[ei]);

    while (!stack_.empty() && (conflicting(stack_.back().left, ei) || conflicting(stack_.back().right, ei))) {
      ConflictPair q = stack_.back();
      stack_.pop_back();
      if (conflicting(q.right, ei)) std::swap(q.left, q.right);
      if (conflicting(q.right, ei)) return false;
      set_ref(p.right.low, q.right.high);
      if (q.right.low >= 0) p.right.low = q.right.low;
      if (p.left.empty())
        p.left = q.left;
      else
        set_ref(p.left.low, q.left.high);
      p.left.low = q.left.low;
    }
    if (!(p.left.empty() && p.right.empty())) stack_.push_back(p);
    return true;
  }

  void remove_back_edges(int e) {
    const int u = src_[e];
    while (!stack_.empty() && lowest(stack_.back()) == height_[u]) {
      const ConflictPair p = stack_.back();
      stack_.pop_back();
      if (p.left.low >= 0) side_[p.left.low] = -1;
    }
    if (!stack_.empty()) {
      ConflictPair p = stack_.back();
      stack_.pop_back();
      while (p.left.high >= 0 && dst_[p.left.high] == u) p.left.high = ref_[p.left.high];
      if (p.left.high < 0 && p.left.low >= 0) {
        ref_[p.left.low] = p.right.low;
        side_[p.left.low] = -1;
        p.left.low = -1;
      }
      while (p.right.high >= 0 && dst_[p.right.high] == u) p.right.high = ref_[p.right.high];
      if (p.right.high < 0 && p.right.low >= 0) {
        ref_[p.right.low] = p.left.low;
        side_[p.right.low] = -1;
        p.right.low = -1;
      }
      stack_.push_back(p);
    }
    if (lowpt_[e] < height_[u] && !stack_.empty()) {
      const int hl = stack_.back().left.high;
      const int hr = stack_.back().right.high;
      if (hl >= 0 && (hr < 0 || lowpt_[hl] > lowpt_[hr]))
        ref_[e] = hl;
      else
        ref_[e] = hr;
    }
  }

  int sign(int e) {
    std::vector<int> chain;
    int x = e;
    while (ref_[x] >= 0) {
      chain.push_back(x);
      x = ref_[x];
    }
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      side_[*it] *= side_[ref_[*it]];
      ref_[*it] = -1;
    }
    return side_[e];
  }

  static long key(int v, int w) { return static_cast<long>(v) * (1L << 32) + w; }

  void add_cw(int start, int end, int reference) {
    if (reference < 0) {
      half_[key(start, end)] = HalfEdge{end, end};
      first_[start] = end;
      return;
    }
    const int cw_ref = half_.at(key(start, reference)).cw;
    half_[key(start, reference)].cw = end;
    half_[key(start, end)] = HalfEdge{cw_ref, reference};
    half_.at(key(start, cw_ref)).ccw = end;
  }

  void add_ccw(int start, int end, int reference) {
    if (reference < 0) {
      add_cw(start, end, -1);
      return;
    }
    const int ccw_ref = half_.at(key(start, reference)).ccw;
    add_cw(start, end, ccw_ref);
    if (reference == first_[start]) first_[start] = end;
  }

  void add_first(int start, int end) { add_ccw(start, end, first_[start]); }

  void embed() {
    for (int e = 0; e < static_cast<int>(ends_.size()); ++e) nesting_[e] = sign(e) * nesting_[e];
    sort_out_edges();
    first_.assign(n_, -1);
    half_.reserve(ends_.size() * 2);
    for (int v = 0; v < n_; ++v) {
      int prev = -1;
      for (int e : out_[v]) {
        add_cw(v, dst_[e], prev);
        prev = dst_[e];
      }
    }
    left_ref_.assign(n_, -1);
    right_ref_.assign(n_, -1);
    for (int r : roots_) embed_dfs(r);
  }

  void embed_dfs(int v) {
    for (int e : out_[v]) {
      const int w = dst_[e];
      if (e == parent_edge_[w]) {
        add_first(w, v);
        left_ref_[v] = w;
        right_ref_[v] = w;
        embed_dfs(w);
      } else if (side_[e] == 1) {
        add_cw(w, v, right_ref_[w]);
      } else {
        add_ccw(w, v, left_ref_[w]);
        left_ref_[w] = v;
      }
    }
  }

  int n_;
  std::vector<std::vector<std::pair<int, int>>> adj_;
  std::vector<std::pair<int, int>> ends_;
  std::vector<int> roots_;
  std::vector<int> height_, parent_edge_, src_, dst_, lowpt_, lowpt2_, nesting_;
  std::vector<std::vector<int>> out_;
  std::vector<int> ref_, side_, lowpt_edge_;
  std::vector<long> stack_bottom_;
  std::vector<ConflictPair> stack_;
  long next_id_ = 0;
  std::vector<int> first_, left_ref_, right_ref_;
  std::unordered_map<long, HalfEdge> half_;
};

}  // namespace

PlanarityResult is_planar(std::size_t n_nodes, std::span<const NodePair> edges, bool want_obstruction) {
  PlanarityResult result;
  LeftRight lr(n_nodes, edges, nullptr);
  result.planar = lr.run(true);
  if (result.planar)
    result.embedding = lr.embedding();
  else if (want_obstruction)
    result.obstruction = kuratowski_obstruction(n_nodes, edges);
  return result;
}

bool planar(std::size_t n_nodes, std::span<const NodePair> edges) {
  LeftRight lr(n_nodes, edges, nullptr);
  return lr.run(false);
}

bool planar_with(std::size_t n_nodes, std::span<const NodePair> edges, NodePair extra) {
  LeftRight lr(n_nodes, edges, &extra);
  return lr.run(false);
}

std::vector<NodePair> kuratowski_obstruction(std::size_t n_nodes, std::span<const NodePair> edges) {
  std::vector<NodePair> kept(edges.begin(), edges.end());
  if (planar(n_nodes, kept)) return {};
  for (std::size_t k = 0; k < kept.size();) {
    std::vector<NodePair> trial;
    trial.reserve(kept.size() - 1);
    for (std::size_t j = 0; j < kept.size(); ++j)
      if (j != k) trial.push_back(kept[j]);
    if (!planar(n_nodes, trial))
      kept = std::move(trial);
    else
      ++k;
  }
  return kept;
}

bool verify_embedding(std::size_t n_nodes, std::span<const NodePair> edges, const Embedding& embedding) {
  if (embedding.rotation.size() != n_nodes) return false;
  // Rotation lists must match the (deduplicated) neighbourhoods exactly.
  std::vector<std::vector<std::size_t>> nbrs(n_nodes);
  std::unordered_set<std::size_t> seen;
  std::size_t m = 0;
  for (auto [u, v] : edges) {
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    if (!seen.insert(u * n_nodes + v).second) continue;
    nbrs[u].push_back(v);
    nbrs[v].push_back(u);
    ++m;
  }
  std::vector<std::unordered_map<std::size_t, std::size_t>> pos(n_nodes);
  for (std::size_t v = 0; v < n_nodes; ++v) {
    auto a = nbrs[v];
    auto b = embedding.rotation[v];
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) return false;
    for (std::size_t k = 0; k < embedding.rotation[v].size(); ++k) pos[v][embedding.rotation[v][k]] = k;
  }

  // Components via union-find.
  std::vector<std::size_t> parent(n_nodes);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t v = 0; v < n_nodes; ++v)
    for (auto w : nbrs[v]) parent[find(v)] = find(w);
  std::size_t components = 0;
  for (std::size_t v = 0; v < n_nodes; ++v) components += find(v) == v;

  // Trace faces: half-edge (v, w) is followed by (w, ccw_w(v)).
  std::unordered_set<std::size_t> visited;
  std::size_t faces = 0;
  for (std::size_t v = 0; v < n_nodes; ++v) {
    if (embedding.rotation[v].empty()) {
      ++faces;  // isolated node: one face of its own sphere
      continue;
    }
    for (auto w : embedding.rotation[v]) {
      if (visited.count(v * n_nodes + w)) continue;
      ++faces;
      std::size_t a = v, b = w;
      while (visited.insert(a * n_nodes + b).second) {
        const auto& rot = embedding.rotation[b];
        const std::size_t k = pos[b].at(a);
        const std::size_t next = rot[(k + rot.size() - 1) % rot.size()];
        a = b;
        b = next;
      }
    }
  }
  const long chi = static_cast<long>(n_nodes) - static_cast<long>(m) + static_cast<long>(faces);
  return chi == 2 * static_cast<long>(components);
}

}  // namespace corrnet
