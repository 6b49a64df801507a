#include "corrnet/community.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <queue>
#include <random>
#include <stack>

#include "corrnet/error.hpp"
#include "corrnet/io.hpp"
#include "corrnet/rmt.hpp"

namespace corrnet {

namespace {

double plogp(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

// Flow network at one aggregation level. Flows are already divided by 2W.
struct Level {
  std::vector<double> visit;
  std::vector<double> out;
  std::vector<std::vector<std::pair<std::size_t, double>>> adj;
  std::size_t size() const { return visit.size(); }
};

Level base_level(const FilteredGraph& g) {
  const std::size_t n = g.n_nodes();
  Level lv;
  lv.visit.assign(n, 0.0);
  lv.out.assign(n, 0.0);
  lv.adj.resize(n);
  double total = 0.0;
  for (const auto& e : g.edges) {
    if (e.i >= n || e.j >= n || e.i == e.j) throw PreconditionError("graph edge with invalid endpoints");
    total += std::abs(e.weight);
  }
  if (n > 1 && !(total > 0.0)) throw PreconditionError("graph has no edge flow");
  std::map<std::pair<std::size_t, std::size_t>, double> merged;
  for (const auto& e : g.edges) merged[{std::min(e.i, e.j), std::max(e.i, e.j)}] += std::abs(e.weight);
  for (const auto& [key, w] : merged) {
    if (w == 0.0) continue;
    const double f = w / (2.0 * total);
    lv.adj[key.first].emplace_back(key.second, f);
    lv.adj[key.second].emplace_back(key.first, f);
    lv.out[key.first] += f;
    lv.out[key.second] += f;
  }
  lv.visit = lv.out;

  std::vector<char> seen(n, 0);
  std::vector<std::size_t> todo{0};
  std::size_t reached = 0;
  if (n > 0) seen[0] = 1;
  while (!todo.empty() && n > 0) {
    auto v = todo.back();
    todo.pop_back();
    ++reached;
    for (auto [u, f] : lv.adj[v])
      if (!seen[u]) {
        seen[u] = 1;
        todo.push_back(u);
      }
  }
  if (reached != n) throw PreconditionError("graph is disconnected; the map equation needs a connected graph");
  return lv;
}

double codelength(const Level& lv, const std::vector<std::size_t>& module) {
  const std::size_t n = lv.size();
  std::vector<double> exit(n, 0.0), flow(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    flow[module[v]] += lv.visit[v];
    for (auto [u, f] : lv.adj[v])
      if (module[u] != module[v]) exit[module[v]] += f;
  }
  double q = 0.0, sum_exit = 0.0, sum_total = 0.0, sum_nodes = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    q += exit[m];
    sum_exit += plogp(exit[m]);
    if (flow[m] > 0.0 || exit[m] > 0.0) sum_total += plogp(exit[m] + flow[m]);
  }
  for (double p : lv.visit) sum_nodes += plogp(p);
  return plogp(q) - 2.0 * sum_exit - sum_nodes + sum_total;
}

void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

// Moves single nodes of `lv` between modules while the codelength drops by
// more than `tol`. Returns whether any node moved.
bool local_moves(const Level& lv, std::vector<std::size_t>& module, std::mt19937_64& rng, const CommunityOptions& opt) {
  const std::size_t n = lv.size();
  std::vector<double> exit(n, 0.0), flow(n, 0.0);
  std::vector<std::size_t> members(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    flow[module[v]] += lv.visit[v];
    ++members[module[v]];
    for (auto [u, f] : lv.adj[v])
      if (module[u] != module[v]) exit[module[v]] += f;
  }
  double total_exit = 0.0;
  for (double x : exit) total_exit += x;
  std::vector<std::size_t> empty;
  for (std::size_t m = n; m-- > 0;)
    if (members[m] == 0) empty.push_back(m);

  std::vector<std::size_t> order(n);
  for (std::size_t v = 0; v < n; ++v) order[v] = v;
  std::vector<double> link(n, 0.0);
  std::vector<std::size_t> touched;
  bool moved_any = false;

  for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    shuffle(order, rng);
    bool moved = false;
    for (std::size_t v : order) {
      const std::size_t a = module[v];
      touched.clear();
      for (auto [u, f] : lv.adj[v]) {
        const std::size_t m = module[u];
        if (link[m] == 0.0) touched.push_back(m);
        link[m] += f;
      }
      std::sort(touched.begin(), touched.end());
      const double ev = lv.out[v];
      const double pv = lv.visit[v];
      const double qa = exit[a], pa = flow[a];
      const double qa_new = std::max(0.0, qa - ev + 2.0 * link[a]);
      const double pa_new = pa - pv;

      auto delta_to = [&](std::size_t b) {
        const double qb = exit[b], pb = flow[b];
        const double qb_new = std::max(0.0, qb + ev - 2.0 * link[b]);
        const double pb_new = pb + pv;
        const double q_new = std::max(0.0, total_exit - qa - qb + qa_new + qb_new);
        return plogp(q_new) - plogp(total_exit) - 2.0 * (plogp(qa_new) + plogp(qb_new) - plogp(qa) - plogp(qb)) +
               plogp(qa_new + pa_new) + plogp(qb_new + pb_new) - plogp(qa + pa) - plogp(qb + pb);
      };

      double best = -opt.tolerance;
      std::size_t target = a;
      for (std::size_t b : touched) {
        if (b == a) continue;
        const double d = delta_to(b);
        if (d < best) {
          best = d;
          target = b;
        }
      }
      if (members[a] > 1 && !empty.empty()) {
        const double d = delta_to(empty.back());
        if (d < best) {
          best = d;
          target = empty.back();
        }
      }
      if (target != a) {
        const std::size_t b = target;
        const double qb_new = std::max(0.0, exit[b] + ev - 2.0 * link[b]);
        total_exit = std::max(0.0, total_exit - exit[a] - exit[b] + qa_new + qb_new);
        exit[a] = qa_new;
        exit[b] = qb_new;
        flow[a] = pa_new;
        flow[b] += pv;
        if (members[b] == 0) empty.pop_back();
        --members[a];
        ++members[b];
        if (members[a] == 0) {
          exit[a] = 0.0;
          flow[a] = 0.0;
          empty.push_back(a);
        }
        module[v] = b;
        moved = moved_any = true;
      }
      for (std::size_t m : touched) link[m] = 0.0;
    }
    if (!moved) break;
  }
  return moved_any;
}

std::vector<std::size_t> canonical(const std::vector<std::size_t>& labels) {
  std::map<std::size_t, std::size_t> remap;
  std::vector<std::size_t> out(labels.size());
  for (std::size_t v = 0; v < labels.size(); ++v) {
    auto [it, fresh] = remap.try_emplace(labels[v], remap.size());
    out[v] = it->second;
  }
  return out;
}

// Collapses modules of `lv` (canonical labels) into super-nodes.
Level aggregate(const Level& lv, const std::vector<std::size_t>& module, std::size_t k) {
  Level up;
  up.visit.assign(k, 0.0);
  up.out.assign(k, 0.0);
  up.adj.resize(k);
  std::vector<std::map<std::size_t, double>> links(k);
  for (std::size_t v = 0; v < lv.size(); ++v) {
    up.visit[module[v]] += lv.visit[v];
    for (auto [u, f] : lv.adj[v])
      if (module[u] != module[v]) links[module[v]][module[u]] += f;
  }
  for (std::size_t m = 0; m < k; ++m)
    for (auto [u, f] : links[m]) {
      up.adj[m].emplace_back(u, f);
      up.out[m] += f;
    }
  return up;
}

}  // namespace

Partition Partition::from_membership(const std::vector<std::size_t>& labels) {
  Partition p;
  p.membership = canonical(labels);
  return p;
}

Partition Partition::from_groups(std::size_t n, const std::vector<std::vector<std::size_t>>& groups) {
  constexpr auto unset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> labels(n, unset);
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (auto v : groups[g]) {
      if (v >= n) throw PreconditionError("group member out of range");
      if (labels[v] != unset) throw PreconditionError("groups overlap");
      labels[v] = g;
    }
  for (auto l : labels)
    if (l == unset) throw PreconditionError("groups do not cover every node");
  return from_membership(labels);
}

Partition Partition::singletons(std::size_t n) {
  std::vector<std::size_t> labels(n);
  for (std::size_t v = 0; v < n; ++v) labels[v] = v;
  return from_membership(labels);
}

Partition Partition::all_in_one(std::size_t n) { return from_membership(std::vector<std::size_t>(n, 0)); }

std::size_t Partition::n_groups() const {
  std::size_t k = 0;
  for (auto l : membership) k = std::max(k, l + 1);
  return k;
}

std::vector<std::vector<std::size_t>> Partition::groups() const {
  std::vector<std::vector<std::size_t>> out(n_groups());
  for (std::size_t v = 0; v < membership.size(); ++v) out[membership[v]].push_back(v);
  return out;
}

double map_equation(const FilteredGraph& graph, const Partition& partition) {
  if (partition.n_nodes() != graph.n_nodes()) throw PreconditionError("partition size differs from graph");
  if (graph.n_nodes() <= 1) return 0.0;
  const auto lv = base_level(graph);
  return codelength(lv, canonical(partition.membership));
}

double visit_entropy(const FilteredGraph& graph) {
  if (graph.n_nodes() <= 1) return 0.0;
  const auto lv = base_level(graph);
  double h = 0.0;
  for (double p : lv.visit) h -= plogp(p);
  return h;
}

Partition detect_communities(const FilteredGraph& graph, const CommunityOptions& options) {
  const std::size_t n = graph.n_nodes();
  if (n <= 1) {
    auto p = Partition::singletons(n);
    p.codelength = 0.0;
    return p;
  }
  const Level base = base_level(graph);
  std::mt19937_64 rng(options.seed);

  std::vector<std::size_t> current(n);
  for (std::size_t v = 0; v < n; ++v) current[v] = v;
  double best = codelength(base, current);

  for (int outer = 0; outer < options.max_outer; ++outer) {
    std::vector<std::size_t> trial = canonical(current);
    // Coarse phase: move whole modules as super-nodes, level by level.
    while (true) {
      std::size_t k = 0;
      for (auto l : trial) k = std::max(k, l + 1);
      const Level lv = aggregate(base, trial, k);
      std::vector<std::size_t> mods(k);
      for (std::size_t m = 0; m < k; ++m) mods[m] = m;
      if (!local_moves(lv, mods, rng, options)) break;
      for (auto& l : trial) l = mods[l];
      trial = canonical(trial);
    }
    // Fine phase: single original nodes.
    local_moves(base, trial, rng, options);
    trial = canonical(trial);
    const double l = codelength(base, trial);
    const bool improved = best - l > options.tolerance;
    if (l < best) {
      best = l;
      current = trial;
    }
    if (!improved) break;
  }

  Partition result = Partition::from_membership(current);
  result.codelength = best;
  for (auto candidate : {Partition::singletons(n), Partition::all_in_one(n)}) {
    const double l = codelength(base, candidate.membership);
    if (l < result.codelength) {
      result = candidate;
      result.codelength = l;
    }
  }
  return result;
}

std::vector<ClusterPair> candidate_splits(const Partition& partition, const CorrelationMatrix& c_sec) {
  if (c_sec.kind != MatrixKind::sector_mode)
    throw PreconditionError("cluster pairs need the signed sector-mode matrix");
  if (partition.n_nodes() != c_sec.size()) throw PreconditionError("partition size differs from matrix");
  std::vector<ClusterPair> out;
  const auto groups = partition.groups();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& members = groups[g];
    if (members.size() < 2) continue;
    Matrix sub(members.size(), members.size());
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = 0; b < members.size(); ++b) sub(a, b) = c_sec(members[a], members[b]);
    const auto eig = jacobi_eigen(sub);
    ClusterPair cp;
    cp.community = g;
    for (std::size_t a = 0; a < members.size(); ++a)
      (eig.vectors(0, a) > 0.0 ? cp.side_a : cp.side_b).push_back(members[a]);
    if (!cp.side_a.empty() && !cp.side_b.empty()) {
      double s = 0.0;
      for (auto i : cp.side_a)
        for (auto j : cp.side_b) s += c_sec(i, j);
      cp.inter_mean = s / static_cast<double>(cp.side_a.size() * cp.side_b.size());
    }
    out.push_back(std::move(cp));
  }
  return out;
}

std::vector<ClusterPair> detect_cluster_pairs(const Partition& partition, const CorrelationMatrix& c_sec,
                                              std::size_t min_size) {
  std::vector<ClusterPair> out;
  for (auto& cp : candidate_splits(partition, c_sec))
    if (cp.side_a.size() >= min_size && cp.side_b.size() >= min_size && cp.inter_mean < 0.0)
      out.push_back(std::move(cp));
  return out;
}

std::vector<CommunityLink> community_links(const FilteredGraph& graph, const Partition& partition,
                                           std::size_t min_edges) {
  if (partition.n_nodes() != graph.n_nodes()) throw PreconditionError("partition size differs from graph");
  std::map<std::pair<std::size_t, std::size_t>, CommunityLink> acc;
  for (const auto& e : graph.edges) {
    auto a = partition.membership[e.i];
    auto b = partition.membership[e.j];
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    auto& link = acc[{a, b}];
    link.a = a;
    link.b = b;
    ++link.edges;
    link.weight += e.weight;
  }
  std::vector<CommunityLink> out;
  for (const auto& [key, link] : acc)
    if (link.edges >= std::max<std::size_t>(min_edges, 1)) out.push_back(link);
  return out;
}

std::vector<double> community_betweenness(std::size_t n_groups, const std::vector<CommunityLink>& links) {
  std::vector<std::vector<std::size_t>> adj(n_groups);
  for (const auto& l : links) {
    adj[l.a].push_back(l.b);
    adj[l.b].push_back(l.a);
  }
  std::vector<double> cb(n_groups, 0.0);
  for (std::size_t s = 0; s < n_groups; ++s) {
    std::vector<std::vector<std::size_t>> pred(n_groups);
    std::vector<double> sigma(n_groups, 0.0), delta(n_groups, 0.0);
    std::vector<long> dist(n_groups, -1);
    std::vector<std::size_t> order;
    std::queue<std::size_t> q;
    sigma[s] = 1.0;
    dist[s] = 0;
    q.push(s);
    while (!q.empty()) {
      auto v = q.front();
      q.pop();
      order.push_back(v);
      for (auto w : adj[v]) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          q.push(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          pred[w].push_back(v);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      auto w = *it;
      for (auto v : pred[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) cb[w] += delta[w];
    }
  }
  for (double& x : cb) x /= 2.0;
  return cb;
}

std::size_t hub_community(std::size_t n_groups, const std::vector<CommunityLink>& links) {
  if (n_groups == 0) throw PreconditionError("no communities");
  const auto cb = community_betweenness(n_groups, links);
  return static_cast<std::size_t>(std::max_element(cb.begin(), cb.end()) - cb.begin());
}

namespace {

double choose2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

double rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  if (a.size() != b.size()) throw PreconditionError("partitions differ in size");
  const std::size_t n = a.size();
  if (n < 2) return 1.0;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) agree += ((a[i] == a[j]) == (b[i] == b[j])) ? 1 : 0;
  return static_cast<double>(agree) / choose2(static_cast<double>(n));
}

double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  if (a.size() != b.size()) throw PreconditionError("partitions differ in size");
  const auto ca = canonical(a);
  const auto cb = canonical(b);
  if (ca == cb) return 1.0;
  std::map<std::pair<std::size_t, std::size_t>, double> table;
  std::map<std::size_t, double> rows, cols;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    table[{ca[i], cb[i]}] += 1.0;
    rows[ca[i]] += 1.0;
    cols[cb[i]] += 1.0;
  }
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [k, v] : table) index += choose2(v);
  for (const auto& [k, v] : rows) sum_a += choose2(v);
  for (const auto& [k, v] : cols) sum_b += choose2(v);
  const double total = choose2(static_cast<double>(ca.size()));
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 0.0;
  return (index - expected) / (max_index - expected);
}

void write_partition(std::ostream& out, const std::vector<std::string>& tickers, const Partition& partition,
                     const std::vector<ClusterPair>& pairs) {
  if (tickers.size() != partition.n_nodes()) throw PreconditionError("ticker count differs from partition");
  std::vector<std::string> side(tickers.size());
  for (const auto& cp : pairs) {
    for (auto i : cp.side_a) side[i] = "a";
    for (auto i : cp.side_b) side[i] = "b";
  }
  if (!std::isnan(partition.codelength)) out << "# codelength: " << format_number(partition.codelength) << "\n";
  out << "ticker,community_id,side\n";
  for (std::size_t i = 0; i < tickers.size(); ++i)
    out << tickers[i] << "," << partition.membership[i] << "," << side[i] << "\n";
}

Partition read_partition(std::istream& in, const std::vector<std::string>& tickers) {
  LineReader reader(in);
  std::string line;
  if (!reader.next(line)) throw ParseError("empty partition file", 0);
  constexpr auto unset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> labels(tickers.size(), unset);
  while (reader.next(line)) {
    auto f = split_fields(line, ',');
    if (f.size() < 2) throw ParseError("partition row needs ticker and community_id", reader.line_number());
    auto it = std::find(tickers.begin(), tickers.end(), f[0]);
    if (it == tickers.end()) throw ParseError("unknown ticker '" + f[0] + "'", reader.line_number());
    auto& slot = labels[static_cast<std::size_t>(it - tickers.begin())];
    if (slot != unset) throw ConflictError("ticker '" + f[0] + "' listed twice");
    slot = static_cast<std::size_t>(parse_number(f[1], reader.line_number()));
  }
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == unset) throw ParseError("ticker '" + tickers[i] + "' missing from partition", 0);
  auto p = Partition::from_membership(labels);
  for (const auto& c : reader.comments()) {
    auto colon = c.find(':');
    if (colon != std::string::npos && split_fields(c.substr(0, colon), ',')[0] == "codelength")
      p.codelength = parse_number(split_fields(c.substr(colon + 1), ',')[0]);
  }
  return p;
}

}  // namespace corrnet
