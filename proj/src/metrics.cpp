#include "corrnet/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <set>

#include "json.hpp"

#include "corrnet/error.hpp"
#include "corrnet/io.hpp"

namespace corrnet {

namespace {

void check_members(const CorrelationMatrix& c, const Groups& groups) {
  for (const auto& g : groups)
    for (auto i : g)
      if (i >= c.size()) throw PreconditionError("group member outside the matrix");
}

void add_cross(const CorrelationMatrix& c, const std::vector<std::size_t>& p, const std::vector<std::size_t>& q,
               PairMean& acc) {
  for (auto i : p)
    for (auto j : q)
      if (i != j) {
        acc.sum += c(i, j);
        ++acc.pairs;
      }
}

nlohmann::json to_json(const PairMean& m) {
  nlohmann::json j;
  j["pairs"] = m.pairs;
  if (auto v = m.mean()) j["mean"] = *v;
  else j["mean"] = nullptr;
  return j;
}

}  // namespace

PairMean intra_mean(const CorrelationMatrix& c, const Groups& groups) {
  check_members(c, groups);
  PairMean acc;
  for (const auto& g : groups)
    for (std::size_t a = 0; a < g.size(); ++a)
      for (std::size_t b = a + 1; b < g.size(); ++b) {
        acc.sum += c(g[a], g[b]);
        ++acc.pairs;
      }
  if (acc.pairs == 0) throw PreconditionError("no group has two members");
  return acc;
}

PairMean inter_mean(const CorrelationMatrix& c, const Groups& groups) {
  check_members(c, groups);
  if (groups.size() < 2) throw PreconditionError("between-group mean needs at least 2 groups");
  PairMean acc;
  for (std::size_t p = 0; p < groups.size(); ++p)
    for (std::size_t q = p + 1; q < groups.size(); ++q) add_cross(c, groups[p], groups[q], acc);
  return acc;
}

LinkedSplit linked_unlinked_means(const CorrelationMatrix& c, const Groups& groups, const GroupLinks& links) {
  check_members(c, groups);
  std::set<std::pair<std::size_t, std::size_t>> linked;
  for (auto [a, b] : links) {
    if (a >= groups.size() || b >= groups.size() || a == b) throw PreconditionError("link between invalid groups");
    linked.insert({std::min(a, b), std::max(a, b)});
  }
  LinkedSplit out;
  for (std::size_t p = 0; p < groups.size(); ++p)
    for (std::size_t q = p + 1; q < groups.size(); ++q)
      add_cross(c, groups[p], groups[q], linked.contains({p, q}) ? out.linked : out.unlinked);
  return out;
}

PairMean pm_mean(const CorrelationMatrix& c, const std::vector<SidePair>& splits) {
  PairMean acc;
  for (const auto& [a, b] : splits) {
    if (a.empty() || b.empty()) continue;
    add_cross(c, a, b, acc);
  }
  return acc;
}

std::vector<SidePair> sides_of(const std::vector<SubsectorSplit>& splits) {
  std::vector<SidePair> out;
  for (const auto& s : splits) out.emplace_back(s.positive, s.negative);
  return out;
}

std::vector<SidePair> sides_of(const std::vector<ClusterPair>& pairs) {
  std::vector<SidePair> out;
  for (const auto& p : pairs) out.emplace_back(p.side_a, p.side_b);
  return out;
}

SectorMetrics sector_metrics(const std::string& method, const CorrelationMatrix& c, const Groups& groups,
                             const std::optional<GroupLinks>& links, const std::optional<std::vector<SidePair>>& splits) {
  SectorMetrics m;
  m.method = method;
  m.matrix = c.kind;
  m.c_bar = mean_offdiag(c);
  const bool has_pair = std::any_of(groups.begin(), groups.end(), [](const auto& g) { return g.size() >= 2; });
  if (has_pair) m.c_in = intra_mean(c, groups);
  if (groups.size() >= 2) m.c_be = inter_mean(c, groups);
  if (links) m.c_li_de = linked_unlinked_means(c, groups, *links);
  if (splits) m.c_pm = pm_mean(c, *splits);
  return m;
}

namespace {

std::string cell(const std::optional<double>& v, double scale, int decimals) {
  return v ? format_fixed(*v * scale, decimals) : "-";
}

void write_rows(std::ostream& out, const std::vector<SectorMetrics>& rows, double scale, int decimals) {
  out << std::left << std::setw(10) << "method" << std::setw(20) << "matrix";
  for (const char* h : {"c_bar", "c_in", "c_be", "c_li", "c_de", "c_pm"}) out << std::right << std::setw(9) << h;
  out << "\n";
  for (const auto& r : rows) {
    out << std::left << std::setw(10) << r.method << std::setw(20) << to_string(r.matrix) << std::right;
    out << std::setw(9) << cell(r.c_bar, scale, decimals);
    out << std::setw(9) << cell(r.c_in.mean(), scale, decimals);
    out << std::setw(9) << cell(r.c_be.mean(), scale, decimals);
    out << std::setw(9) << cell(r.c_li_de ? r.c_li_de->linked.mean() : std::nullopt, scale, decimals);
    out << std::setw(9) << cell(r.c_li_de ? r.c_li_de->unlinked.mean() : std::nullopt, scale, decimals);
    out << std::setw(9) << cell(r.c_pm ? r.c_pm->mean() : std::nullopt, scale, decimals);
    out << "\n";
  }
}

nlohmann::json rows_json(const std::vector<SectorMetrics>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j;
    j["method"] = r.method;
    j["matrix"] = std::string(to_string(r.matrix));
    j["c_bar"] = r.c_bar;
    j["c_in"] = to_json(r.c_in);
    j["c_be"] = to_json(r.c_be);
    j["c_li"] = r.c_li_de ? to_json(r.c_li_de->linked) : nlohmann::json(nullptr);
    j["c_de"] = r.c_li_de ? to_json(r.c_li_de->unlinked) : nlohmann::json(nullptr);
    j["c_pm"] = r.c_pm ? to_json(*r.c_pm) : nlohmann::json(nullptr);
    arr.push_back(j);
  }
  return arr;
}

}  // namespace

void write_report_text(std::ostream& out, const TableReport& report) {
  out << "Average correlations, full matrix\n";
  write_rows(out, report.full, 1.0, 2);
  out << "\nAverage correlations, sector mode (x 10^2)\n";
  write_rows(out, report.sector, 100.0, 1);
}

void write_report_json(std::ostream& out, const TableReport& report) {
  nlohmann::json j;
  j["full"] = rows_json(report.full);
  j["sector"] = rows_json(report.sector);
  j["sector_scale"] = 100;
  out << j.dump(2) << "\n";
}

}  // namespace corrnet
