#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"

#include "corrnet/community.hpp"
#include "corrnet/error.hpp"
#include "corrnet/filtergraph.hpp"
#include "corrnet/rmt.hpp"
#include "corrnet/synth.hpp"
#include "corrnet/timeseries.hpp"
#include "partitions.hpp"
#include "support.hpp"

using namespace corrnet;

namespace {

FilteredGraph graph_of(std::size_t n, const std::vector<oracle::WEdge>& edges) {
  FilteredGraph g;
  g.nodes = support::tickers(n);
  g.kind = GraphKind::pmfg;
  std::size_t rank = 0;
  for (const auto& e : edges) g.edges.push_back({std::min(e.a, e.b), std::max(e.a, e.b), e.w, rank++});
  return g;
}

std::vector<oracle::WEdge> clique(std::size_t from, std::size_t size, double w = 1.0) {
  std::vector<oracle::WEdge> e;
  for (std::size_t i = from; i < from + size; ++i)
    for (std::size_t j = i + 1; j < from + size; ++j) e.push_back({i, j, w});
  return e;
}

std::vector<oracle::WEdge> two_cliques(std::size_t k) {
  auto e = clique(0, k);
  auto f = clique(k, k);
  e.insert(e.end(), f.begin(), f.end());
  e.push_back({k - 1, k, 1.0});
  return e;
}

double h2(const std::vector<double>& p) {
  double s = 0;
  for (double x : p) s -= x * std::log2(x);
  return s;
}

}  // namespace

TEST_CASE("partition constructors are canonical") {
  auto p = Partition::from_membership({5, 5, 2, 7, 2});
  CHECK(p.membership == std::vector<std::size_t>{0, 0, 1, 2, 1});
  CHECK(p.n_groups() == 3);
  CHECK(p.groups() == std::vector<std::vector<std::size_t>>{{0, 1}, {2, 4}, {3}});
  auto q = Partition::from_groups(5, {{3}, {4, 2}, {0, 1}});
  CHECK(q.membership == p.membership);
  CHECK_THROWS_AS(Partition::from_groups(3, {{0}, {0, 1, 2}}), PreconditionError);
  CHECK_THROWS_AS(Partition::from_groups(3, {{0, 1}}), PreconditionError);
  CHECK(Partition::singletons(3).n_groups() == 3);
  CHECK(Partition::all_in_one(3).n_groups() == 1);
}

TEST_CASE("map equation of two triangles and a bridge") {
  std::vector<oracle::WEdge> e{{0, 1, 1}, {0, 2, 1}, {1, 2, 1}, {3, 4, 1}, {3, 5, 1}, {4, 5, 1}, {2, 3, 1}};
  auto g = graph_of(6, e);
  auto p = Partition::from_membership({0, 0, 0, 1, 1, 1});
  // Total strength 14; each module exits with 1/14 and holds 7/14 of the visits.
  const double expect = (2.0 / 14) * 1.0 + 2 * (8.0 / 14) * h2({1.0 / 8, 2.0 / 8, 2.0 / 8, 3.0 / 8});
  CHECK(map_equation(g, p) == doctest::Approx(expect).epsilon(1e-13));
  CHECK(map_equation(g, p) == doctest::Approx(oracle::codelength(6, e, p.membership)).epsilon(1e-13));
}

TEST_CASE("all in one module costs the visit entropy") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  auto e = two_cliques(4);
  for (auto& x : e) x.w = u(rng);
  auto g = graph_of(8, e);
  const double all = map_equation(g, Partition::all_in_one(8));
  CHECK(all == doctest::Approx(visit_entropy(g)).epsilon(1e-14));
  double total = 0;
  std::vector<double> s(8, 0);
  for (auto& x : e) s[x.a] += x.w, s[x.b] += x.w, total += 2 * x.w;
  for (auto& x : s) x /= total;
  CHECK(all == doctest::Approx(h2(s)).epsilon(1e-13));
  // Modules can code below the visit entropy, but no partition beats the
  // entropy rate of the walk, sum_i p_i H(w_ij / s_i).
  double rate = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    std::vector<double> row;
    for (auto& x : e)
      if (x.a == i || x.b == i) row.push_back(x.w / (s[i] * total));
    rate += s[i] * h2(row);
  }
  bool below_entropy = false;
  oracle::for_each_partition(8, [&](const std::vector<std::size_t>& labels) {
    const double l = map_equation(g, Partition::from_membership(labels));
    CHECK(l >= rate - 1e-12);
    below_entropy = below_entropy || l < all;
  });
  CHECK(below_entropy);
}

TEST_CASE("single node costs nothing; disconnected graphs are refused") {
  FilteredGraph one;
  one.nodes = {"A"};
  CHECK(map_equation(one, Partition::all_in_one(1)) == 0.0);
  auto g = graph_of(6, {{0, 1, 1}, {1, 2, 1}, {3, 4, 1}, {4, 5, 1}});
  CHECK_THROWS_AS(map_equation(g, Partition::all_in_one(6)), PreconditionError);
  CHECK_THROWS_AS(detect_communities(g), PreconditionError);
}

TEST_CASE("map equation agrees with the reference evaluation on random partitions") {
  std::mt19937_64 rng(72);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto e = clique(0, 7);
  for (auto& x : e) x.w = u(rng);
  auto g = graph_of(7, e);
  oracle::for_each_partition(7, [&](const std::vector<std::size_t>& labels) {
    CHECK(std::abs(map_equation(g, Partition::from_membership(labels)) - oracle::codelength(7, e, labels)) < 1e-12);
  });
}

TEST_CASE("two 4-cliques joined by one edge: exhaustive optimum") {
  auto e = two_cliques(4);
  auto best = oracle::minimum_codelength(8, e);
  CHECK(best.visited == 4140);
  CHECK(best.labels == std::vector<std::size_t>{0, 0, 0, 0, 1, 1, 1, 1});
  auto p = detect_communities(graph_of(8, e));
  CHECK(p.membership == best.labels);
  CHECK(p.codelength == doctest::Approx(best.codelength).epsilon(1e-12));
}

TEST_CASE("bridged cliques up to ten nodes match the exhaustive optimum") {
  std::mt19937_64 rng(73);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  for (std::size_t k : {3, 4, 5}) {
    auto e = two_cliques(k);
    for (auto& x : e) x.w = u(rng);
    auto best = oracle::minimum_codelength(2 * k, e);
    for (std::uint64_t seed : {1, 2, 42}) {
      auto p = detect_communities(graph_of(2 * k, e), {seed});
      CHECK(p.codelength == doctest::Approx(best.codelength).epsilon(1e-10));
    }
  }
}

TEST_CASE("K6 is one community") {
  auto p = detect_communities(graph_of(6, clique(0, 6)));
  CHECK(p.n_groups() == 1);
}

TEST_CASE("result is deterministic and never worse than the trivial partitions") {
  std::mt19937_64 rng(74);
  for (int trial = 0; trial < 5; ++trial) {
    auto c = support::random_symmetric(40, rng, 0.0, 1.0);
    auto g = build_pmfg(c);
    auto a = detect_communities(g, {7});
    auto b = detect_communities(g, {7});
    CHECK(a.membership == b.membership);
    CHECK(a.codelength == b.codelength);
    CHECK(a.codelength == doctest::Approx(map_equation(g, a)).epsilon(1e-12));
    const double bound = std::min(map_equation(g, Partition::singletons(40)), map_equation(g, Partition::all_in_one(40)));
    CHECK(a.codelength <= bound + 1e-9);
  }
}

TEST_CASE("planted sectors are recovered from the PMFG") {
  SynthSpec spec;
  spec.n_stocks = 80;
  spec.n_obs = 2000;
  spec.n_sectors = 4;
  spec.market_beta = 0.5;
  spec.sector_beta = 0.6;
  spec.seed = 75;
  auto m = generate(spec);
  auto r = compute_returns(m.prices);
  auto p = detect_communities(build_pmfg(correlation_matrix(r.panel)));
  CHECK(adjusted_rand_index(p.membership, m.sectors) >= 0.9);
}

TEST_CASE("adjusted Rand index") {
  CHECK(adjusted_rand_index({0, 0, 1, 1}, {5, 5, 3, 3}) == 1.0);
  CHECK(adjusted_rand_index({0, 0, 0}, {0, 0, 0}) == 1.0);
  CHECK(adjusted_rand_index({0, 1, 2}, {0, 1, 2}) == 1.0);
  // a = {0,0,1,1}, b = {0,0,0,1}: sum C(n_ij,2) = 1, rows 2, cols 3, pairs 6.
  const double expect = (1.0 - 2.0 * 3.0 / 6.0) / (0.5 * (2.0 + 3.0) - 2.0 * 3.0 / 6.0);
  CHECK(adjusted_rand_index({0, 0, 1, 1}, {0, 0, 0, 1}) == doctest::Approx(expect));
  CHECK(rand_index({0, 0, 1, 1}, {0, 0, 0, 1}) == doctest::Approx(3.0 / 6.0));
  CHECK_THROWS(adjusted_rand_index({0, 1}, {0}));
}

TEST_CASE("cluster pairs split anti-correlated blocks") {
  // Block A = {0,1,2}, block B = {3,4,5}; within +0.3, across -0.2.
  std::vector<std::vector<double>> rows(7, std::vector<double>(7, 0.0));
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) rows[i][j] = (i < 3) == (j < 3) ? 0.3 : -0.2;
  for (std::size_t i = 0; i < 7; ++i) rows[i][i] = 0.5;
  rows[6][0] = rows[0][6] = 0.1;
  auto sec = support::matrix_of(rows, MatrixKind::sector_mode);
  auto part = Partition::from_membership({0, 0, 0, 0, 0, 0, 1});
  auto pairs = detect_cluster_pairs(part, sec, 3);
  REQUIRE(pairs.size() == 1);
  std::set<std::vector<std::size_t>> sides{pairs[0].side_a, pairs[0].side_b};
  CHECK(sides == std::set<std::vector<std::size_t>>{{0, 1, 2}, {3, 4, 5}});
  CHECK(pairs[0].inter_mean == doctest::Approx(-0.2));
  CHECK(pairs[0].community == 0);
  CHECK(detect_cluster_pairs(part, sec, 4).empty());
  // The gate only filters candidates.
  auto candidates = candidate_splits(part, sec);
  REQUIRE(!candidates.empty());
  CHECK(candidates[0].side_a == pairs[0].side_a);
  CHECK(candidates[0].side_b == pairs[0].side_b);
}

TEST_CASE("one-signed communities and small communities give no pair") {
  std::mt19937_64 rng(76);
  auto pos = support::random_symmetric(8, rng, 0.1, 0.4, MatrixKind::sector_mode);
  CHECK(detect_cluster_pairs(Partition::all_in_one(8), pos).empty());
  auto small = support::random_symmetric(5, rng, -0.4, 0.4, MatrixKind::sector_mode);
  CHECK(detect_cluster_pairs(Partition::all_in_one(5), small, 3).empty());
}

TEST_CASE("cluster pairs in a planted anti-correlated sector pair") {
  SynthSpec spec;
  spec.n_stocks = 40;
  spec.n_obs = 3000;
  spec.n_sectors = 4;
  spec.market_beta = 0.7;
  spec.sector_beta = 0.6;
  spec.anti_pairs = {{0, 1}};
  spec.seed = 13;
  auto m = generate(spec);
  auto r = compute_returns(m.prices);
  auto es = eigendecompose(correlation_matrix(r.panel), r.panel.n_obs());
  auto sec = mode_matrix(es, default_mode_spec(es, mp_bounds(40, r.panel.n_obs())), Mode::sector);
  // Community = the shared factor group (sectors 0 and 1).
  std::vector<std::size_t> labels(40);
  for (std::size_t i = 0; i < 40; ++i) labels[i] = m.factor_groups[i];
  auto pairs = detect_cluster_pairs(Partition::from_membership(labels), sec);
  bool found = false;
  for (const auto& p : pairs) {
    std::set<std::size_t> a, b;
    for (auto i : p.side_a) a.insert(m.sectors[i]);
    for (auto i : p.side_b) b.insert(m.sectors[i]);
    if (a.size() == 1 && b.size() == 1 && *a.begin() != *b.begin() && p.side_a.size() == 10 && p.side_b.size() == 10)
      found = true;
    CHECK(p.inter_mean < 0);
  }
  CHECK(found);
}

TEST_CASE("community links and betweenness") {
  // Three cliques in a path: 0 - 1 - 2.
  auto e = clique(0, 3);
  auto f = clique(3, 3);
  auto h = clique(6, 3);
  e.insert(e.end(), f.begin(), f.end());
  e.insert(e.end(), h.begin(), h.end());
  e.push_back({2, 3, 0.5});
  e.push_back({1, 4, 0.25});
  e.push_back({5, 6, 0.5});
  auto g = graph_of(9, e);
  auto p = Partition::from_membership({0, 0, 0, 1, 1, 1, 2, 2, 2});
  auto links = community_links(g, p);
  REQUIRE(links.size() == 2);
  CHECK(links[0].a == 0);
  CHECK(links[0].b == 1);
  CHECK(links[0].edges == 2);
  CHECK(links[0].weight == doctest::Approx(0.75));
  CHECK(links[1].edges == 1);
  CHECK(community_links(g, p, 2).size() == 1);
  auto bc = community_betweenness(3, links);
  CHECK(bc[1] > bc[0]);
  CHECK(bc[0] == bc[2]);
  CHECK(hub_community(3, links) == 1);
  CHECK(hub_community(3, {}) == 0);
}

TEST_CASE("partition file round-trip") {
  auto tickers = support::tickers(6);
  auto p = Partition::from_membership({0, 0, 1, 1, 1, 2});
  ClusterPair cp{1, {2}, {3, 4}, -0.1};
  std::ostringstream out;
  write_partition(out, tickers, p, {cp});
  CHECK(out.str().find("T102,1,a") != std::string::npos);
  CHECK(out.str().find("T104,1,b") != std::string::npos);
  std::istringstream in(out.str());
  auto back = read_partition(in, tickers);
  CHECK(back.membership == p.membership);
}
