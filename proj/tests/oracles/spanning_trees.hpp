#pragma once

// Exhaustive spanning-tree enumeration on complete graphs.

#include <cstddef>
#include <functional>
#include <numeric>
#include <utility>
#include <vector>

namespace oracle {

using Edge = std::pair<std::size_t, std::size_t>;

inline std::vector<Edge> complete_edges(std::size_t n) {
  std::vector<Edge> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return e;
}

inline bool is_spanning_tree(std::size_t n, const std::vector<Edge>& edges) {
  if (edges.size() + 1 != n) return false;
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  for (auto [a, b] : edges) {
    auto ra = find(a), rb = find(b);
    if (ra == rb) return false;
    parent[ra] = rb;
  }
  return true;
}

/// Calls `visit` with every spanning tree of K_n (n - 1 edge subsets that
/// are acyclic). Returns the number of trees visited.
inline std::size_t for_each_spanning_tree(std::size_t n, const std::function<void(const std::vector<Edge>&)>& visit) {
  const auto all = complete_edges(n);
  std::vector<Edge> pick;
  std::size_t count = 0;
  std::function<void(std::size_t)> rec = [&](std::size_t from) {
    if (pick.size() + 1 == n) {
      if (is_spanning_tree(n, pick)) {
        ++count;
        visit(pick);
      }
      return;
    }
    for (std::size_t k = from; k < all.size(); ++k) {
      pick.push_back(all[k]);
      rec(k + 1);
      pick.pop_back();
    }
  };
  rec(0);
  return count;
}

}  // namespace oracle
