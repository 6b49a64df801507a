#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "corrnet/correlation.hpp"

namespace corrnet {

enum class Sign { positive, negative };

std::string to_string(Sign sign);

/// True iff v is strictly of the given sign (zero matches neither).
inline bool has_sign(double v, Sign sign) { return sign == Sign::positive ? v > 0.0 : v < 0.0; }

struct SignDomainSet {
  Sign sign = Sign::positive;
  /// Disjoint domains in creation order, members ascending. Size-1 domains
  /// are stocks that have same-sign partners but fit no existing domain.
  std::vector<std::vector<std::size_t>> domains;
  /// Stocks without a single same-sign partner.
  std::vector<std::size_t> unassigned;
};

/// Greedy same-sign partition: stocks in descending same-sign strength join
/// the compatible domain with the largest mean |C| to its members, otherwise
/// seed a new one.
SignDomainSet extract_domains(const CorrelationMatrix& c, Sign sign);

/// True iff every pair inside every domain has the set's sign.
bool satisfies_sign_invariant(const CorrelationMatrix& c, const SignDomainSet& ds);

struct DomainSizeStats {
  std::size_t count = 0;
  std::size_t max = 0;
  double mean = 0.0;
  /// (size, fraction of domains with that size), ascending by size.
  std::vector<std::pair<std::size_t, double>> frequency;
};

DomainSizeStats domain_size_histogram(const SignDomainSet& ds);

struct DomainPairMean {
  std::size_t a = 0;
  std::size_t b = 0;
  double mean = 0.0;
};

struct DomainGraph {
  std::vector<std::vector<std::size_t>> domains;
  std::vector<DomainPairMean> pair_means;
  double grand_mean = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> links;
};

/// Links domain pairs whose mean inter-domain C_sec exceeds the mean over all
/// pairs by more than `tol`. Needs at least two domains.
DomainGraph build_domain_graph(const CorrelationMatrix& c_sec, const SignDomainSet& ds, double tol = 1e-12);

/// Domains contiguous by descending size (ties: smallest member first),
/// members ascending, unassigned stocks last.
std::vector<std::size_t> reorder_for_display(const CorrelationMatrix& c, const SignDomainSet& ds);

/// Rows (ticker, domain_id, sign); unassigned stocks get domain_id "-".
void write_domains(std::ostream& out, const std::vector<std::string>& tickers, const std::vector<SignDomainSet>& sets);

/// Sign pattern of the permuted matrix as (row, col, sign) triples with the
/// domain boundary indices in a header comment.
void write_sign_triples(std::ostream& out, const CorrelationMatrix& c, const SignDomainSet& ds);

void write_domain_graph_dot(std::ostream& out, const std::vector<std::string>& tickers, const DomainGraph& g);
void write_domain_graph_graphml(std::ostream& out, const std::vector<std::string>& tickers, const DomainGraph& g);

}  // namespace corrnet
