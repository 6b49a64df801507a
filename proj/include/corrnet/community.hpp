#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "corrnet/correlation.hpp"
#include "corrnet/filtergraph.hpp"

namespace corrnet {

/// Disjoint groups covering nodes 0..n-1. Labels are canonical: group ids
/// appear in order of their first member.
struct Partition {
  std::vector<std::size_t> membership;
  /// Map-equation codelength in bits (NaN when not computed).
  double codelength = std::numeric_limits<double>::quiet_NaN();

  static Partition from_membership(const std::vector<std::size_t>& labels);
  static Partition from_groups(std::size_t n, const std::vector<std::vector<std::size_t>>& groups);
  static Partition singletons(std::size_t n);
  static Partition all_in_one(std::size_t n);

  std::size_t n_nodes() const noexcept { return membership.size(); }
  std::size_t n_groups() const;
  /// Members of each group in ascending node order.
  std::vector<std::vector<std::size_t>> groups() const;
};

/// Two-level map equation of an undirected weighted random walk, in bits.
/// Edge flow uses |weight|; visit rates are strength fractions. Throws
/// PreconditionError for graphs that are disconnected under positive flow.
double map_equation(const FilteredGraph& graph, const Partition& partition);

/// Entropy (bits) of the node visit rates, which is the all-in-one codelength.
/// Modular partitions can go below it; the entropy rate of the walk cannot.
double visit_entropy(const FilteredGraph& graph);

struct CommunityOptions {
  std::uint64_t seed = 42;
  /// Improvements at or below this many bits end the search.
  double tolerance = 1e-12;
  int max_sweeps = 200;
  int max_outer = 50;
};

/// Greedy map-equation minimization: seeded local moves, aggregation into
/// super-nodes, then single-node refinement, repeated until no gain. The
/// result is never worse than the singleton or all-in-one partition.
Partition detect_communities(const FilteredGraph& graph, const CommunityOptions& options = {});

struct ClusterPair {
  std::size_t community = 0;
  std::vector<std::size_t> side_a;
  std::vector<std::size_t> side_b;
  /// Mean C_sec over side_a x side_b (NaN if a side is empty).
  double inter_mean = std::numeric_limits<double>::quiet_NaN();
};

/// Sign split of every community with at least two members by the dominant
/// eigenvector of its C_sec block: positive components to side_a. No gate.
std::vector<ClusterPair> candidate_splits(const Partition& partition, const CorrelationMatrix& c_sec);

/// candidate_splits filtered to both sides >= min_size and inter_mean < 0.
std::vector<ClusterPair> detect_cluster_pairs(const Partition& partition, const CorrelationMatrix& c_sec,
                                              std::size_t min_size = 3);

struct CommunityLink {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t edges = 0;
  double weight = 0.0;
};

/// Community-level graph: one link per community pair joined by at least
/// `min_edges` graph edges. Links are sorted by (a, b) with a < b.
std::vector<CommunityLink> community_links(const FilteredGraph& graph, const Partition& partition,
                                           std::size_t min_edges = 1);

/// Brandes betweenness of the unweighted community-level graph.
std::vector<double> community_betweenness(std::size_t n_groups, const std::vector<CommunityLink>& links);

/// Community with the largest betweenness (lowest id on ties).
std::size_t hub_community(std::size_t n_groups, const std::vector<CommunityLink>& links);

double rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b);

/// Adjusted Rand index; 1 for identical partitions, including trivial ones.
double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b);

/// Rows (ticker, community_id, side); side is "a"/"b" for cluster-pair
/// members and empty otherwise.
void write_partition(std::ostream& out, const std::vector<std::string>& tickers, const Partition& partition,
                     const std::vector<ClusterPair>& pairs = {});
Partition read_partition(std::istream& in, const std::vector<std::string>& tickers);

}  // namespace corrnet
