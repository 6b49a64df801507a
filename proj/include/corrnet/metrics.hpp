#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "corrnet/community.hpp"
#include "corrnet/correlation.hpp"
#include "corrnet/rmt.hpp"

namespace corrnet {

using Groups = std::vector<std::vector<std::size_t>>;
using GroupLinks = std::vector<std::pair<std::size_t, std::size_t>>;

/// Sum and count of a set of matrix entries; the mean is absent when empty.
struct PairMean {
  double sum = 0.0;
  std::size_t pairs = 0;
  std::optional<double> mean() const {
    if (pairs == 0) return std::nullopt;
    return sum / static_cast<double>(pairs);
  }
};

/// Mean C_ij over unordered pairs inside a group, pooled over groups. Groups
/// may overlap: a pair counts once per group containing both ends.
PairMean intra_mean(const CorrelationMatrix& c, const Groups& groups);

/// Mean C_ij over pairs (i in p, j in q, i != j) for every unordered group
/// pair p < q. For a partition this is each cross-group pair exactly once.
PairMean inter_mean(const CorrelationMatrix& c, const Groups& groups);

struct LinkedSplit {
  PairMean linked;
  PairMean unlinked;
};

/// Cross-group pairs split by whether their groups are linked.
LinkedSplit linked_unlinked_means(const CorrelationMatrix& c, const Groups& groups, const GroupLinks& links);

using SidePair = std::pair<std::vector<std::size_t>, std::vector<std::size_t>>;

/// Mean C_ij over side_a x side_b, pooled over every split with two
/// non-empty sides.
PairMean pm_mean(const CorrelationMatrix& c, const std::vector<SidePair>& splits);
std::vector<SidePair> sides_of(const std::vector<SubsectorSplit>& splits);
std::vector<SidePair> sides_of(const std::vector<ClusterPair>& pairs);

struct SectorMetrics {
  std::string method;
  MatrixKind matrix = MatrixKind::full;
  double c_bar = 0.0;
  PairMean c_in;
  PairMean c_be;
  std::optional<LinkedSplit> c_li_de;
  std::optional<PairMean> c_pm;
};

/// All statistics for one (matrix, grouping) combination. `links` absent means
/// no interaction graph exists for this grouping; `splits` absent skips c_pm.
/// Cells without any pair (no group of two, a single group) stay absent.
SectorMetrics sector_metrics(const std::string& method, const CorrelationMatrix& c, const Groups& groups,
                             const std::optional<GroupLinks>& links, const std::optional<std::vector<SidePair>>& splits);

struct TableReport {
  /// Rows over the full matrix (PMFG, MST, RMT groupings).
  std::vector<SectorMetrics> full;
  /// Rows over the sector mode, signed then absolute.
  std::vector<SectorMetrics> sector;
};

/// Aligned plain text: full-matrix rows at 2 decimals, sector-mode rows
/// multiplied by 100 at 1 decimal. Absent cells print as "-".
void write_report_text(std::ostream& out, const TableReport& report);

/// Key-value form with full precision and the pair counts.
void write_report_json(std::ostream& out, const TableReport& report);

}  // namespace corrnet
