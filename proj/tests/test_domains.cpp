#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"

#include "corrnet/domains.hpp"
#include "corrnet/error.hpp"
#include "domain_oracle.hpp"
#include "support.hpp"

using namespace corrnet;

namespace {

using DomainSets = std::set<std::vector<std::size_t>>;

DomainSets as_set(const SignDomainSet& ds) { return {ds.domains.begin(), ds.domains.end()}; }

CorrelationMatrix blocks(const std::vector<std::size_t>& sizes, double within, double across) {
  std::size_t n = 0;
  std::vector<std::size_t> block;
  for (std::size_t b = 0; b < sizes.size(); ++b)
    for (std::size_t k = 0; k < sizes[b]; ++k, ++n) block.push_back(b);
  std::vector<std::vector<double>> rows(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) rows[i][j] = i == j ? 1.0 : block[i] == block[j] ? within : across;
  return support::matrix_of(rows, MatrixKind::sector_mode);
}

CorrelationMatrix checkerboard(std::size_t n) {
  std::vector<std::vector<double>> rows(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) rows[i][j] = i == j ? 1.0 : ((i + j) % 2 == 1 ? 0.5 : -0.5);
  return support::matrix_of(rows, MatrixKind::sector_mode);
}

}  // namespace

TEST_CASE("all-positive matrix is one positive domain") {
  std::mt19937_64 rng(81);
  auto c = support::random_symmetric(10, rng, 0.05, 0.9);
  auto ds = extract_domains(c, Sign::positive);
  REQUIRE(ds.domains.size() == 1);
  CHECK(ds.domains[0].size() == 10);
  auto neg = extract_domains(c, Sign::negative);
  CHECK(neg.domains.empty());
  CHECK(neg.unassigned.size() == 10);
}

TEST_CASE("planted blocks are recovered") {
  auto c = blocks({4, 6}, 0.4, -0.3);
  auto pos = extract_domains(c, Sign::positive);
  CHECK(as_set(pos) == DomainSets{{0, 1, 2, 3}, {4, 5, 6, 7, 8, 9}});
  auto exact = oracle::exact_domains(c, Sign::positive, false);
  REQUIRE(exact.optima.size() == 1);
  CHECK(oracle::comembership_agreement(oracle::labels_of(pos, 10), exact.optima[0]) == 1.0);
  // Across the blocks only pairs are negative cliques.
  auto neg = extract_domains(c, Sign::negative);
  for (const auto& d : neg.domains) CHECK(d.size() <= 2);
  CHECK(satisfies_sign_invariant(c, neg));
}

TEST_CASE("checkerboard has no positive triangle") {
  for (std::size_t n : {4, 7, 10}) {
    auto c = checkerboard(n);
    auto ds = extract_domains(c, Sign::positive);
    CHECK(satisfies_sign_invariant(c, ds));
    for (const auto& d : ds.domains) CHECK(d.size() <= 2);
    CHECK(ds.unassigned.empty());
  }
}

TEST_CASE("zero correlation keeps stocks apart for both signs") {
  auto c = support::matrix_of({{1, 0.5, 0.0}, {0.5, 1, 0.4}, {0.0, 0.4, 1}}, MatrixKind::sector_mode);
  auto ds = extract_domains(c, Sign::positive);
  CHECK(satisfies_sign_invariant(c, ds));
  for (const auto& d : ds.domains) CHECK(!(std::count(d.begin(), d.end(), 0) && std::count(d.begin(), d.end(), 2)));
  auto neg = extract_domains(c, Sign::negative);
  CHECK(neg.domains.empty());
  CHECK(neg.unassigned.size() == 3);
}

TEST_CASE("transitively positive matrices have no negative triangle") {
  // Rank-one C_ij = v_i v_j: sign(C_ij C_jk C_ik) = +1, so three mutually
  // negative pairs are impossible.
  std::mt19937_64 rng(82);
  std::normal_distribution<double> g(0, 1);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> v(12);
    for (auto& x : v) x = g(rng);
    std::vector<std::vector<double>> rows(12, std::vector<double>(12));
    for (std::size_t i = 0; i < 12; ++i)
      for (std::size_t j = 0; j < 12; ++j) rows[i][j] = v[i] * v[j];
    auto c = support::matrix_of(rows, MatrixKind::sector_mode);
    auto neg = extract_domains(c, Sign::negative);
    for (const auto& d : neg.domains) CHECK(d.size() <= 2);
    auto pos = extract_domains(c, Sign::positive);
    CHECK(pos.domains.size() <= 2);
  }
}

TEST_CASE("sign invariant, disjointness and coverage on random sign matrices") {
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 30; ++trial) {
    auto c = support::random_sign(20, rng);
    for (auto sign : {Sign::positive, Sign::negative}) {
      auto ds = extract_domains(c, sign);
      CHECK(ds.sign == sign);
      CHECK(satisfies_sign_invariant(c, ds));
      std::vector<int> seen(20, 0);
      for (const auto& d : ds.domains) {
        CHECK(!d.empty());
        CHECK(std::is_sorted(d.begin(), d.end()));
        for (auto i : d) ++seen[i];
      }
      for (auto i : ds.unassigned) ++seen[i];
      for (int s : seen) CHECK(s == 1);
      // Unassigned means no same-sign partner at all.
      for (auto i : ds.unassigned)
        for (std::size_t j = 0; j < 20; ++j) CHECK((j == i || !has_sign(c(i, j), sign)));
    }
  }
}

TEST_CASE("greedy never beats the exact optimum and finds it on easy inputs") {
  std::mt19937_64 rng(84);
  for (int trial = 0; trial < 20; ++trial) {
    auto c = support::random_symmetric(8, rng);
    auto ds = extract_domains(c, Sign::positive);
    auto exact = oracle::exact_domains(c, Sign::positive, false);
    std::size_t pairs = 0;
    for (const auto& d : ds.domains) pairs += d.size() * (d.size() - 1) / 2;
    CHECK(static_cast<double>(pairs) <= exact.best + 1e-12);
    // The same stocks are left without partners.
    auto labels = oracle::labels_of(ds, 8);
    for (std::size_t i = 0; i < 8; ++i) CHECK((labels[i] < 0) == (exact.optima[0][i] < 0));
  }
  auto easy = blocks({3, 3, 2}, 0.6, -0.1);
  auto exact = oracle::exact_domains(easy, Sign::positive, false);
  CHECK(oracle::comembership_agreement(oracle::labels_of(extract_domains(easy, Sign::positive), 8), exact.optima[0]) ==
        1.0);
}

TEST_CASE("extraction is permutation-equivariant") {
  std::mt19937_64 rng(85);
  for (int trial = 0; trial < 10; ++trial) {
    auto c = support::random_symmetric(15, rng);
    auto ds = extract_domains(c, Sign::positive);
    auto order = reorder_for_display(c, ds);
    auto again = extract_domains(permute(c, order), Sign::positive);
    DomainSets mapped;
    for (const auto& d : again.domains) {
      std::vector<std::size_t> m;
      for (auto k : d) m.push_back(order[k]);
      std::sort(m.begin(), m.end());
      mapped.insert(m);
    }
    CHECK(mapped == as_set(ds));
  }
}

TEST_CASE("size histogram") {
  SignDomainSet ds;
  ds.domains = {{0, 1, 2}, {3, 4, 5}, {6, 7, 8, 9}};
  auto h = domain_size_histogram(ds);
  CHECK(h.count == 3);
  CHECK(h.max == 4);
  CHECK(h.mean == doctest::Approx(10.0 / 3));
  REQUIRE(h.frequency.size() == 2);
  CHECK(h.frequency[0] == std::pair<std::size_t, double>{3, 2.0 / 3});
  CHECK(h.frequency[1].first == 4);
  auto empty = domain_size_histogram(SignDomainSet{});
  CHECK(empty.count == 0);
  CHECK(empty.frequency.empty());
}

TEST_CASE("domain graph links pairs above the grand mean") {
  // Three domains; 0 and 1 are coupled at -0.05, the rest at -0.4.
  std::vector<std::vector<double>> rows(9, std::vector<double>(9));
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 9; ++j) {
      const auto a = i / 3, b = j / 3;
      rows[i][j] = i == j ? 1.0 : a == b ? 0.5 : (a + b == 1 ? -0.05 : -0.4);
    }
  auto c = support::matrix_of(rows, MatrixKind::sector_mode);
  auto ds = extract_domains(c, Sign::positive);
  REQUIRE(ds.domains.size() == 3);
  auto g = build_domain_graph(c, ds);
  CHECK(g.pair_means.size() == 3);
  CHECK(g.grand_mean == doctest::Approx((-0.05 - 0.4 - 0.4) / 3));
  REQUIRE(g.links.size() == 1);
  const auto [p, q] = g.links[0];
  std::set<std::size_t> linked_members;
  for (auto i : g.domains[p]) linked_members.insert(i / 3);
  for (auto i : g.domains[q]) linked_members.insert(i / 3);
  CHECK(linked_members == std::set<std::size_t>{0, 1});
  // Shifting every cross entry shifts every pair mean: links unchanged.
  auto shifted = c;
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 9; ++j)
      if (i / 3 != j / 3) shifted.values(i, j) += 0.3;
  CHECK(build_domain_graph(shifted, ds).links == g.links);
}

TEST_CASE("domain graph edge cases") {
  auto two = blocks({3, 3}, 0.5, -0.2);
  auto ds = extract_domains(two, Sign::positive);
  REQUIRE(ds.domains.size() == 2);
  CHECK(build_domain_graph(two, ds).links.empty());
  auto equal = blocks({2, 2, 2}, 0.5, -0.2);
  CHECK(build_domain_graph(equal, extract_domains(equal, Sign::positive)).links.empty());
  auto one = blocks({4}, 0.5, -0.2);
  CHECK_THROWS_AS(build_domain_graph(one, extract_domains(one, Sign::positive)), PreconditionError);
}

TEST_CASE("display order is contiguous and block-diagonal") {
  SignDomainSet ds;
  ds.domains = {{0, 2}, {1}};
  auto c = support::matrix_of({{1, -0.1, 0.3}, {-0.1, 1, -0.2}, {0.3, -0.2, 1}}, MatrixKind::sector_mode);
  CHECK(reorder_for_display(c, ds) == std::vector<std::size_t>{0, 2, 1});
  std::mt19937_64 rng(86);
  auto r = support::random_sign(16, rng);
  auto pos = extract_domains(r, Sign::positive);
  auto order = reorder_for_display(r, pos);
  auto p = permute(r, order);
  std::size_t start = 0;
  std::vector<std::vector<std::size_t>> by_size = pos.domains;
  std::stable_sort(by_size.begin(), by_size.end(), [](auto& a, auto& b) { return a.size() > b.size(); });
  for (const auto& d : by_size) {
    for (std::size_t a = start; a < start + d.size(); ++a)
      for (std::size_t b = start; b < start + d.size(); ++b)
        if (a != b) CHECK(p(a, b) > 0);
    start += d.size();
  }
  std::vector<std::size_t> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 16; ++i) CHECK(sorted[i] == i);
}

TEST_CASE("exports") {
  auto c = blocks({3, 3}, 0.5, -0.2);
  auto pos = extract_domains(c, Sign::positive);
  auto neg = extract_domains(c, Sign::negative);
  std::ostringstream d, t, dot, gml;
  write_domains(d, c.tickers, {pos, neg});
  CHECK(d.str().find("positive") != std::string::npos);
  write_sign_triples(t, c, pos);
  CHECK(t.str().find('#') != std::string::npos);
  auto three = blocks({2, 2, 2}, 0.5, -0.2);
  auto g = build_domain_graph(three, extract_domains(three, Sign::positive));
  write_domain_graph_dot(dot, three.tickers, g);
  write_domain_graph_graphml(gml, three.tickers, g);
  CHECK(dot.str().find("graph") != std::string::npos);
  CHECK(gml.str().find("<graphml") != std::string::npos);
  CHECK(to_string(Sign::negative) == "negative");
}
