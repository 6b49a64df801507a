#include "corrnet/domains.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>

#include "corrnet/error.hpp"
#include "corrnet/io.hpp"

namespace corrnet {

std::string to_string(Sign sign) { return sign == Sign::positive ? "positive" : "negative"; }

SignDomainSet extract_domains(const CorrelationMatrix& c, Sign sign) {
  const std::size_t n = c.size();
  SignDomainSet ds;
  ds.sign = sign;

  std::vector<double> strength(n, 0.0);
  std::vector<char> has_partner(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && has_sign(c(i, j), sign)) {
        strength[i] += std::abs(c(i, j));
        has_partner[i] = 1;
      }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return strength[a] > strength[b]; });

  for (std::size_t i : order) {
    if (!has_partner[i]) {
      ds.unassigned.push_back(i);
      continue;
    }
    std::size_t best = ds.domains.size();
    double best_score = -1.0;
    for (std::size_t d = 0; d < ds.domains.size(); ++d) {
      double sum = 0.0;
      bool ok = true;
      for (auto j : ds.domains[d]) {
        if (!has_sign(c(i, j), sign)) {
          ok = false;
          break;
        }
        sum += std::abs(c(i, j));
      }
      if (!ok) continue;
      const double score = sum / static_cast<double>(ds.domains[d].size());
      if (score > best_score) {
        best_score = score;
        best = d;
      }
    }
    if (best == ds.domains.size()) ds.domains.emplace_back();
    ds.domains[best].push_back(i);
  }
  for (auto& d : ds.domains) std::sort(d.begin(), d.end());
  std::sort(ds.unassigned.begin(), ds.unassigned.end());
  return ds;
}

bool satisfies_sign_invariant(const CorrelationMatrix& c, const SignDomainSet& ds) {
  for (const auto& d : ds.domains)
    for (std::size_t a = 0; a < d.size(); ++a)
      for (std::size_t b = a + 1; b < d.size(); ++b)
        if (!has_sign(c(d[a], d[b]), ds.sign)) return false;
  return true;
}

DomainSizeStats domain_size_histogram(const SignDomainSet& ds) {
  DomainSizeStats s;
  s.count = ds.domains.size();
  if (s.count == 0) return s;
  std::map<std::size_t, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& d : ds.domains) {
    ++counts[d.size()];
    total += d.size();
    s.max = std::max(s.max, d.size());
  }
  s.mean = static_cast<double>(total) / static_cast<double>(s.count);
  for (const auto& [size, k] : counts)
    s.frequency.emplace_back(size, static_cast<double>(k) / static_cast<double>(s.count));
  return s;
}

DomainGraph build_domain_graph(const CorrelationMatrix& c_sec, const SignDomainSet& ds, double tol) {
  if (ds.domains.size() < 2) throw PreconditionError("domain graph needs at least 2 domains");
  DomainGraph g;
  g.domains = ds.domains;
  double total = 0.0;
  for (std::size_t p = 0; p < g.domains.size(); ++p)
    for (std::size_t q = p + 1; q < g.domains.size(); ++q) {
      double s = 0.0;
      for (auto i : g.domains[p])
        for (auto j : g.domains[q]) s += c_sec(i, j);
      const double mean = s / static_cast<double>(g.domains[p].size() * g.domains[q].size());
      g.pair_means.push_back({p, q, mean});
      total += mean;
    }
  g.grand_mean = total / static_cast<double>(g.pair_means.size());
  for (const auto& pm : g.pair_means)
    if (pm.mean > g.grand_mean + tol) g.links.emplace_back(pm.a, pm.b);
  return g;
}

std::vector<std::size_t> reorder_for_display(const CorrelationMatrix& c, const SignDomainSet& ds) {
  auto domains = ds.domains;
  for (auto& d : domains) std::sort(d.begin(), d.end());
  std::stable_sort(domains.begin(), domains.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.front() < b.front();
  });
  std::vector<std::size_t> perm;
  std::vector<char> placed(c.size(), 0);
  for (const auto& d : domains)
    for (auto i : d) {
      perm.push_back(i);
      placed[i] = 1;
    }
  for (std::size_t i = 0; i < c.size(); ++i)
    if (!placed[i]) perm.push_back(i);
  return perm;
}

void write_domains(std::ostream& out, const std::vector<std::string>& tickers, const std::vector<SignDomainSet>& sets) {
  out << "ticker,domain_id,sign\n";
  for (const auto& ds : sets) {
    std::vector<std::string> id(tickers.size(), "-");
    for (std::size_t d = 0; d < ds.domains.size(); ++d)
      for (auto i : ds.domains[d]) id[i] = std::to_string(d);
    for (std::size_t i = 0; i < tickers.size(); ++i) out << tickers[i] << "," << id[i] << "," << to_string(ds.sign) << "\n";
  }
}

void write_sign_triples(std::ostream& out, const CorrelationMatrix& c, const SignDomainSet& ds) {
  const auto perm = reorder_for_display(c, ds);
  std::vector<std::size_t> sizes;
  for (const auto& d : ds.domains) sizes.push_back(d.size());
  std::sort(sizes.rbegin(), sizes.rend());
  out << "# order: ";
  for (std::size_t a = 0; a < perm.size(); ++a) out << (a ? "," : "") << c.tickers[perm[a]];
  out << "\n# boundaries: ";
  std::size_t at = 0;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    at += sizes[k];
    out << (k ? "," : "") << at;
  }
  out << "\nrow,col,sign\n";
  for (std::size_t a = 0; a < perm.size(); ++a)
    for (std::size_t b = 0; b < perm.size(); ++b) {
      if (a == b) continue;
      const double v = c(perm[a], perm[b]);
      out << a << "," << b << "," << (v > 0.0 ? 1 : (v < 0.0 ? -1 : 0)) << "\n";
    }
}

namespace {

std::string domain_label(const std::vector<std::string>& tickers, const std::vector<std::size_t>& d) {
  std::string s;
  for (std::size_t k = 0; k < d.size(); ++k) s += (k ? " " : "") + tickers[d[k]];
  return s;
}

}  // namespace

void write_domain_graph_dot(std::ostream& out, const std::vector<std::string>& tickers, const DomainGraph& g) {
  out << "graph domains {\n";
  out << "  // grand_mean=" << format_number(g.grand_mean) << "\n";
  for (std::size_t d = 0; d < g.domains.size(); ++d)
    out << "  d" << d << " [size=" << g.domains[d].size() << ", members=\"" << domain_label(tickers, g.domains[d])
        << "\"];\n";
  std::map<std::pair<std::size_t, std::size_t>, double> mean;
  for (const auto& pm : g.pair_means) mean[{pm.a, pm.b}] = pm.mean;
  for (const auto& [a, b] : g.links) out << "  d" << a << " -- d" << b << " [mean=" << format_number(mean[{a, b}]) << "];\n";
  out << "}\n";
}

void write_domain_graph_graphml(std::ostream& out, const std::vector<std::string>& tickers, const DomainGraph& g) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
      << "  <key id=\"size\" for=\"node\" attr.name=\"size\" attr.type=\"int\"/>\n"
      << "  <key id=\"members\" for=\"node\" attr.name=\"members\" attr.type=\"string\"/>\n"
      << "  <key id=\"mean\" for=\"edge\" attr.name=\"mean\" attr.type=\"double\"/>\n"
      << "  <graph id=\"domains\" edgedefault=\"undirected\">\n";
  for (std::size_t d = 0; d < g.domains.size(); ++d)
    out << "    <node id=\"d" << d << "\"><data key=\"size\">" << g.domains[d].size() << "</data><data key=\"members\">"
        << domain_label(tickers, g.domains[d]) << "</data></node>\n";
  std::map<std::pair<std::size_t, std::size_t>, double> mean;
  for (const auto& pm : g.pair_means) mean[{pm.a, pm.b}] = pm.mean;
  for (const auto& [a, b] : g.links)
    out << "    <edge source=\"d" << a << "\" target=\"d" << b << "\"><data key=\"mean\">" << format_number(mean[{a, b}])
        << "</data></edge>\n";
  out << "  </graph>\n</graphml>\n";
}

}  // namespace corrnet
