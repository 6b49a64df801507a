#include "corrnet/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "corrnet/digest.hpp"
#include "corrnet/io.hpp"

namespace corrnet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string stem_of(MatrixKind kind) {
  switch (kind) {
    case MatrixKind::full: return "full";
    case MatrixKind::market_mode: return "market";
    case MatrixKind::sector_mode: return "sector";
    case MatrixKind::random_mode: return "random";
    case MatrixKind::residual_mode: return "residual";
    case MatrixKind::abs_sector_mode: return "abs_sector";
    case MatrixKind::clipped_sector_mode: return "clipped_sector";
  }
  return "unknown";
}

MatrixKind kind_from_selector(const std::string& text) {
  static const std::map<std::string, MatrixKind> names{
      {"full", MatrixKind::full},           {"market", MatrixKind::market_mode},
      {"sector", MatrixKind::sector_mode},  {"random", MatrixKind::random_mode},
      {"residual", MatrixKind::residual_mode}, {"abs-sector", MatrixKind::abs_sector_mode},
      {"abs_sector", MatrixKind::abs_sector_mode}, {"clipped-sector", MatrixKind::clipped_sector_mode},
      {"clipped_sector", MatrixKind::clipped_sector_mode}};
  auto it = names.find(text);
  if (it == names.end()) throw ParseError("unknown matrix selector '" + text + "'", 0);
  return it->second;
}

template <typename Writer>
void emit(const fs::path& path, Writer&& writer) {
  std::ostringstream ss;
  writer(ss);
  write_file(path, ss.str());
}

json range_json(const std::optional<IndexRange>& r) {
  if (!r) return nullptr;
  return json::array({r->first, r->last});
}

std::optional<IndexRange> range_from(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  const auto& a = j[key];
  if (!a.is_array() || a.size() != 2) throw ParseError(std::string(key) + " must be [first, last]", 0);
  return IndexRange{a[0].get<std::size_t>(), a[1].get<std::size_t>()};
}

json synth_json(const SynthSpec& s) {
  json j;
  j["n_stocks"] = s.n_stocks;
  j["n_obs"] = s.n_obs;
  j["n_sectors"] = s.n_sectors;
  j["market_beta"] = s.market_beta;
  j["sector_beta"] = s.sector_beta;
  j["sector_betas"] = s.sector_betas;
  j["anti_pairs"] = json::array();
  for (auto [p, q] : s.anti_pairs) j["anti_pairs"].push_back(json::array({p, q}));
  j["noise_sigma"] = s.noise_sigma;
  j["daily_vol"] = s.daily_vol;
  j["seed"] = s.seed;
  j["start"] = s.start.iso();
  return j;
}

SynthSpec synth_from(const json& j) {
  SynthSpec s;
  s.n_stocks = j.value("n_stocks", s.n_stocks);
  s.n_obs = j.value("n_obs", s.n_obs);
  s.n_sectors = j.value("n_sectors", s.n_sectors);
  s.market_beta = j.value("market_beta", s.market_beta);
  s.sector_beta = j.value("sector_beta", s.sector_beta);
  s.sector_betas = j.value("sector_betas", s.sector_betas);
  if (j.contains("anti_pairs"))
    for (const auto& p : j["anti_pairs"]) s.anti_pairs.emplace_back(p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>());
  s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
  s.daily_vol = j.value("daily_vol", s.daily_vol);
  s.seed = j.value("seed", s.seed);
  if (j.contains("start")) s.start = Date::parse(j["start"].get<std::string>());
  return s;
}

}  // namespace

std::string GraphSelection::name() const { return stem_of(matrix) + "_" + to_string(graph); }

GraphSelection GraphSelection::parse(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos) throw ParseError("graph selection must read matrix:graph, got '" + text + "'", 0);
  return GraphSelection{kind_from_selector(text.substr(0, colon)), graph_kind_from_string(text.substr(colon + 1))};
}

PipelineConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what(), 0);
  }
  if (!j.is_object()) throw ParseError("config must be a JSON object", 0);
  static const std::set<std::string> known{"inputs", "tags", "layout", "delimiter", "dt", "windows", "sector_range",
                                           "random_range", "random_start", "weighted", "graphs", "community_seed",
                                           "clip_floor", "min_pair_size", "subsector_threshold", "link_min_edges",
                                           "histogram_bins", "synth", "compare_graph", "output"};
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw ParseError("unknown config key '" + key + "'", 0);

  PipelineConfig c;
  try {
    if (j.contains("inputs"))
      for (const auto& p : j["inputs"]) c.inputs.emplace_back(p.get<std::string>());
    c.tags = j.value("tags", c.tags);
    if (j.contains("layout")) {
      auto l = j["layout"].get<std::string>();
      if (l == "wide") c.layout = Layout::wide;
      else if (l == "long") c.layout = Layout::long_format;
      else throw ParseError("layout must be wide or long", 0);
    }
    if (j.contains("delimiter")) {
      auto d = j["delimiter"].get<std::string>();
      if (d.size() != 1) throw ParseError("delimiter must be one character", 0);
      c.delimiter = d[0];
    }
    c.dt = j.value("dt", c.dt);
    if (j.contains("windows")) {
      const auto& w = j["windows"];
      if (w.is_number_unsigned()) {
        c.windows = WindowSpec::equal(w.get<std::size_t>());
      } else if (w.is_object() && w.contains("calendar")) {
        c.windows = WindowSpec::calendar(w["calendar"].get<std::size_t>());
      } else if (w.is_array()) {
        std::vector<DateRange> ranges;
        for (const auto& r : w)
          ranges.push_back({Date::parse(r.at(0).get<std::string>()), Date::parse(r.at(1).get<std::string>())});
        c.windows = WindowSpec::ranges(std::move(ranges));
      } else {
        throw ParseError("windows must be a count, {\"calendar\": k} or a list of [start, end) pairs", 0);
      }
    }
    c.sector_range = range_from(j, "sector_range");
    c.random_range = range_from(j, "random_range");
    if (j.contains("random_start") && !j["random_start"].is_null()) c.random_start = j["random_start"].get<std::size_t>();
    c.weighted = j.value("weighted", c.weighted);
    if (j.contains("graphs"))
      for (const auto& g : j["graphs"]) c.graphs.push_back(GraphSelection::parse(g.get<std::string>()));
    c.community_seed = j.value("community_seed", c.community_seed);
    c.clip_floor = j.value("clip_floor", c.clip_floor);
    c.min_pair_size = j.value("min_pair_size", c.min_pair_size);
    if (j.contains("subsector_threshold") && !j["subsector_threshold"].is_null())
      c.subsector_threshold = j["subsector_threshold"].get<double>();
    c.link_min_edges = j.value("link_min_edges", c.link_min_edges);
    c.histogram_bins = j.value("histogram_bins", c.histogram_bins);
    if (j.contains("synth")) {
      const auto& s = j["synth"];
      if (s.is_array())
        for (const auto& r : s) c.synth.push_back(synth_from(r));
      else
        c.synth.push_back(synth_from(s));
    }
    c.compare_graph = j.value("compare_graph", c.compare_graph);
    if (j.contains("output")) c.output = j["output"].get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("config value has the wrong type: ") + e.what(), 0);
  }
  return c;
}

std::string config_to_json(const PipelineConfig& c) {
  json j;
  j["inputs"] = json::array();
  for (const auto& p : c.inputs) j["inputs"].push_back(p.string());
  j["tags"] = c.tags;
  j["layout"] = c.layout == Layout::wide ? "wide" : "long";
  j["delimiter"] = std::string(1, c.delimiter);
  j["dt"] = c.dt;
  if (const auto* k = std::get_if<std::size_t>(&c.windows.value)) {
    j["windows"] = *k;
  } else if (const auto* cal = std::get_if<CalendarSplit>(&c.windows.value)) {
    j["windows"] = {{"calendar", cal->k}};
  } else {
    j["windows"] = json::array();
    for (const auto& r : std::get<std::vector<DateRange>>(c.windows.value))
      j["windows"].push_back(json::array({r.start.iso(), r.end.iso()}));
  }
  j["sector_range"] = range_json(c.sector_range);
  j["random_range"] = range_json(c.random_range);
  j["random_start"] = c.random_start ? json(*c.random_start) : json(nullptr);
  j["weighted"] = c.weighted;
  j["graphs"] = json::array();
  for (const auto& g : c.graphs) j["graphs"].push_back(stem_of(g.matrix) + ":" + to_string(g.graph));
  j["community_seed"] = c.community_seed;
  j["clip_floor"] = c.clip_floor;
  j["min_pair_size"] = c.min_pair_size;
  j["subsector_threshold"] = c.subsector_threshold ? json(*c.subsector_threshold) : json(nullptr);
  j["link_min_edges"] = c.link_min_edges;
  j["histogram_bins"] = c.histogram_bins;
  j["synth"] = json::array();
  for (const auto& s : c.synth) j["synth"].push_back(synth_json(s));
  j["compare_graph"] = c.compare_graph;
  j["output"] = c.output.string();
  return j.dump(2);
}

void validate(const PipelineConfig& c) {
  if (c.synth.empty()) {
    if (c.inputs.empty() || c.inputs.size() > 2) throw PreconditionError("give one or two input files, or a synth spec");
    for (const auto& p : c.inputs)
      if (!fs::exists(p)) throw PreconditionError("input does not exist: " + p.string());
    if (c.inputs.size() == 2 && (c.tags.size() < 2 || c.tags[0].empty() || c.tags[1].empty() || c.tags[0] == c.tags[1]))
      throw PreconditionError("combining two markets needs two distinct non-empty tags");
  } else {
    if (!c.inputs.empty()) throw PreconditionError("config gives both input files and a synth spec");
    for (const auto& s : c.synth) validate(s);
  }
  if (c.dt < 1) throw PreconditionError("dt must be at least 1");
  if (c.histogram_bins < 1) throw PreconditionError("histogram_bins must be positive");
  if (c.clip_floor < 0) throw PreconditionError("clip_floor must be non-negative");
  if (c.subsector_threshold && *c.subsector_threshold < 0) throw PreconditionError("subsector_threshold must be non-negative");
  if (c.min_pair_size < 1) throw PreconditionError("min_pair_size must be positive");
  if (const auto* k = std::get_if<std::size_t>(&c.windows.value); k && *k < 1)
    throw PreconditionError("window count must be positive");
  if (const auto* cal = std::get_if<CalendarSplit>(&c.windows.value); cal && cal->k < 1)
    throw PreconditionError("window count must be positive");
  for (const auto& g : c.graphs)
    if (g.matrix == MatrixKind::sector_mode)
      throw PreconditionError("graphs on the signed sector mode are undefined; select abs-sector or clipped-sector");
  if (c.output.empty()) throw PreconditionError("no output directory given");
}

PricePanel ingest(const PipelineConfig& c, std::size_t* fills) {
  PricePanel panel = in_stage("ingest", [&] {
    if (c.synth.size() == 1) return generate(c.synth.front()).prices;
    if (c.synth.size() > 1) return generate_piecewise(c.synth).market.prices;
    auto a = load_prices(c.inputs[0], c.layout, c.delimiter);
    if (c.inputs.size() == 1) return a;
    auto b = load_prices(c.inputs[1], c.layout, c.delimiter);
    return combine_universes(a, b, c.tags[0], c.tags[1]);
  });
  return in_stage("fill", [&] {
    auto filled = fill_missing(panel, LeadingGaps::keep);
    if (fills) *fills = filled.fills;
    return filled.panel;
  });
}

ReturnsResult window_returns(const PricePanel& prices, const PipelineConfig& c) {
  return in_stage("returns", [&] {
    if (prices.n_dates() < 3)
      throw PreconditionError("window " + prices.dates.front().iso() + " has fewer than 3 dates");
    auto r = compute_returns(prices, c.dt);
    if (r.panel.n_tickers() < 2) throw PreconditionError("fewer than 2 usable tickers in window");
    if (r.panel.n_obs() < r.panel.n_tickers())
      warn("window starting " + prices.dates.front().iso() + " has T = " + std::to_string(r.panel.n_obs()) +
           " < N = " + std::to_string(r.panel.n_tickers()));
    return r;
  });
}

ModeSpec resolve_modes(const EigenSystem& es, const MPBounds& bounds, const PipelineConfig& c) {
  return in_stage("modes", [&] {
    const std::size_t n = es.size();
    ModeSpec s;
    if (c.sector_range) {
      s.sector = *c.sector_range;
      s.random = {c.random_start.value_or(s.sector.last + 1), n - 1};
    } else {
      s = default_mode_spec(es, bounds, c.random_start);
    }
    if (c.random_range) s.random = *c.random_range;
    validate(s, n);
    return s;
  });
}

std::map<std::string, CorrelationMatrix> build_mode_matrices(const EigenSystem& es, const ModeSpec& spec,
                                                             const PipelineConfig& c) {
  return in_stage("modes", [&] {
    std::map<std::string, CorrelationMatrix> out;
    out.emplace("market", mode_matrix(es, spec, Mode::market, c.weighted));
    out.emplace("sector", mode_matrix(es, spec, Mode::sector, c.weighted));
    out.emplace("random", mode_matrix(es, spec, Mode::random, c.weighted));
    if (!spec.residual(es.size()).empty()) out.emplace("residual", mode_matrix(es, spec, Mode::residual, c.weighted));
    out.emplace("abs_sector", abs_matrix(out.at("sector")));
    out.emplace("clipped_sector", zero_negative(out.at("sector"), c.clip_floor));
    return out;
  });
}

namespace {

std::vector<GraphSelection> graph_plan(const PipelineConfig& c) {
  std::vector<GraphSelection> plan{{MatrixKind::full, GraphKind::mst},
                                   {MatrixKind::full, GraphKind::pmfg},
                                   {MatrixKind::abs_sector_mode, GraphKind::pmfg}};
  for (const auto& g : c.graphs)
    if (std::find(plan.begin(), plan.end(), g) == plan.end()) plan.push_back(g);
  return plan;
}

const CorrelationMatrix& matrix_for(const WindowAnalysis& w, MatrixKind kind) {
  if (kind == MatrixKind::full) return w.full;
  auto it = w.mode_matrices.find(stem_of(kind));
  if (it == w.mode_matrices.end()) throw PreconditionError("mode matrix '" + stem_of(kind) + "' is not available");
  return it->second;
}

bool sector_derived(MatrixKind kind) {
  return kind == MatrixKind::abs_sector_mode || kind == MatrixKind::clipped_sector_mode;
}

GroupLinks link_pairs(const std::vector<CommunityLink>& links) {
  GroupLinks out;
  for (const auto& l : links) out.emplace_back(l.a, l.b);
  return out;
}

}  // namespace

std::vector<SubsectorSplit> split_sector_modes(const EigenSystem& es, const ModeSpec& spec, const PipelineConfig& c) {
  return in_stage("modes", [&] {
    std::vector<SubsectorSplit> out;
    for (std::size_t a = spec.sector.first; a <= spec.sector.last; ++a)
      out.push_back(subsector_split(es, a, c.subsector_threshold));
    return out;
  });
}

FilteredGraph build_graph(const GraphSelection& sel, const CorrelationMatrix& m) {
  return in_stage(to_string(sel.graph), [&] {
    if (m.kind != sel.matrix)
      throw PreconditionError("graph " + sel.name() + " given a " + std::string(to_string(m.kind)) + " matrix");
    return sel.graph == GraphKind::mst ? build_mst(m) : build_pmfg(m);
  });
}

CommunityResult analyze_graph(const FilteredGraph& g, const CorrelationMatrix* c_sec, const PipelineConfig& c) {
  return in_stage("communities", [&] {
    CommunityOptions opt;
    opt.seed = c.community_seed;
    CommunityResult r;
    r.partition = detect_communities(g, opt);
    r.links = community_links(g, r.partition, c.link_min_edges);
    if (c_sec) r.cluster_pairs = detect_cluster_pairs(r.partition, *c_sec, c.min_pair_size);
    return r;
  });
}

DomainResult analyze_domains(const CorrelationMatrix& c_sec) {
  return in_stage("domains", [&] {
    DomainResult r;
    r.positive = extract_domains(c_sec, Sign::positive);
    r.negative = extract_domains(c_sec, Sign::negative);
    if (r.positive.domains.size() >= 2) r.graph = build_domain_graph(c_sec, r.positive);
    else r.notes.push_back("fewer than 2 positive domains; no domain graph");
    return r;
  });
}

TableReport build_report(const WindowAnalysis& w, const PipelineConfig&) {
  return in_stage("metrics", [&] {
    auto need = [&](const std::string& name) -> const Partition& {
      auto it = w.partitions.find(name);
      if (it == w.partitions.end()) throw PreconditionError("no partition for graph " + name);
      return it->second;
    };
    TableReport r;
    r.full.push_back(
        sector_metrics("PMFG", w.full, need("full_pmfg").groups(), link_pairs(w.links.at("full_pmfg")), std::nullopt));
    r.full.push_back(
        sector_metrics("MST", w.full, need("full_mst").groups(), link_pairs(w.links.at("full_mst")), std::nullopt));
    Groups rmt;
    for (const auto& s : w.subsectors) {
      if (!s.positive.empty()) rmt.push_back(s.positive);
      if (!s.negative.empty()) rmt.push_back(s.negative);
    }
    if (!rmt.empty()) r.full.push_back(sector_metrics("RMT", w.full, rmt, std::nullopt, sides_of(w.subsectors)));

    const auto groups = need("abs_sector_pmfg").groups();
    const auto links = link_pairs(w.links.at("abs_sector_pmfg"));
    const auto splits = sides_of(w.cluster_pairs.at("abs_sector_pmfg"));
    r.sector.push_back(sector_metrics("PMFG", w.mode_matrices.at("sector"), groups, links, splits));
    r.sector.push_back(sector_metrics("PMFG", w.mode_matrices.at("abs_sector"), groups, links, splits));
    return r;
  });
}

WindowAnalysis analyze_window(const PricePanel& prices, const PipelineConfig& c) {
  WindowAnalysis w;
  w.prices = prices;
  w.returns = window_returns(prices, c);
  for (const auto& t : w.returns.dropped) w.notes.push_back("dropped ticker " + t);
  w.full = in_stage("correlate", [&] { return correlation_matrix(w.returns.panel); });
  in_stage("spectrum", [&] {
    w.eigen = eigendecompose(w.full, w.returns.panel.n_obs());
    w.bounds = mp_bounds(w.full.size(), w.returns.panel.n_obs());
  });
  w.modes = resolve_modes(w.eigen, w.bounds, c);
  w.mode_matrices = build_mode_matrices(w.eigen, w.modes, c);
  w.subsectors = split_sector_modes(w.eigen, w.modes, c);

  const auto& c_sec = w.mode_matrices.at("sector");
  for (const auto& sel : graph_plan(c)) {
    const auto name = sel.name();
    auto g = build_graph(sel, matrix_for(w, sel.matrix));
    auto r = analyze_graph(g, sector_derived(sel.matrix) ? &c_sec : nullptr, c);
    w.graphs.emplace(name, std::move(g));
    w.partitions.emplace(name, std::move(r.partition));
    w.links.emplace(name, std::move(r.links));
    w.cluster_pairs.emplace(name, std::move(r.cluster_pairs));
  }

  auto d = analyze_domains(c_sec);
  w.positive_domains = std::move(d.positive);
  w.negative_domains = std::move(d.negative);
  w.domain_graph = std::move(d.graph);
  w.notes.insert(w.notes.end(), d.notes.begin(), d.notes.end());
  w.report = build_report(w, c);
  return w;
}

namespace {

json pair_summary(const std::vector<std::string>& tickers, const ClusterPair& cp) {
  json j;
  j["community"] = cp.community;
  j["side_a"] = json::array();
  j["side_b"] = json::array();
  for (auto i : cp.side_a) j["side_a"].push_back(tickers[i]);
  for (auto i : cp.side_b) j["side_b"].push_back(tickers[i]);
  j["inter_mean"] = cp.inter_mean;
  return j;
}

void write_sizes(std::ostream& out, const Partition& p) {
  out << "community_id,size\n";
  const auto groups = p.groups();
  for (std::size_t g = 0; g < groups.size(); ++g) out << g << "," << groups[g].size() << "\n";
}

void write_domain_sizes(std::ostream& out, const std::vector<const SignDomainSet*>& sets) {
  for (const auto* ds : sets) {
    const auto st = domain_size_histogram(*ds);
    out << "# " << to_string(ds->sign) << ": count " << st.count << ", max " << st.max << ", mean "
        << format_number(st.mean) << "\n";
  }
  out << "sign,size,frequency\n";
  for (const auto* ds : sets)
    for (const auto& [size, f] : domain_size_histogram(*ds).frequency)
      out << to_string(ds->sign) << "," << size << "," << format_number(f) << "\n";
}

}  // namespace

void write_prices_stage(const fs::path& dir, const PricePanel& prices) {
  emit(dir / "prices.csv", [&](std::ostream& o) { write_prices_wide(o, prices); });
}

void write_returns_stage(const fs::path& dir, const ReturnsResult& r) {
  emit(dir / "returns" / "returns.csv", [&](std::ostream& o) { write_returns(o, r.panel); });
  emit(dir / "returns" / "raw_returns.csv", [&](std::ostream& o) { write_returns(o, r.panel, true); });
  emit(dir / "returns" / "stats.csv", [&](std::ostream& o) { write_return_stats(o, r.panel); });
}

void write_matrix_stage(const fs::path& dir, const std::string& stem, const CorrelationMatrix& c, int bins) {
  emit(dir / "correlation" / (stem + ".csv"), [&](std::ostream& o) { write_matrix(o, c); });
  emit(dir / "correlation" / "histograms" / (stem + ".csv"),
       [&](std::ostream& o) { write_histogram(o, element_histogram(c, bins)); });
}

void write_spectrum_stage(const fs::path& dir, const EigenSystem& es, const MPBounds& bounds) {
  emit(dir / "spectrum" / "eigenvalues.csv", [&](std::ostream& o) { write_eigenvalues(o, es, bounds); });
  emit(dir / "spectrum" / "eigenvectors.csv", [&](std::ostream& o) { write_eigenvectors(o, es); });
  if (bounds.q >= 1.0)
    emit(dir / "spectrum" / "mp_density.csv", [&](std::ostream& o) { write_mp_density(o, bounds.q); });
}

void write_modes_stage(const fs::path& dir, const EigenSystem& es, const MPBounds& bounds, const ModeSpec& spec,
                       const std::vector<SubsectorSplit>& subsectors,
                       const std::map<std::string, CorrelationMatrix>& matrices, const PipelineConfig& c) {
  emit(dir / "spectrum" / "subsectors.csv", [&](std::ostream& o) { write_subsectors(o, es.tickers, subsectors); });
  emit(dir / "spectrum" / "mode_spec.json", [&](std::ostream& o) {
    json j;
    j["market"] = spec.market;
    j["sector"] = json::array({spec.sector.first, spec.sector.last});
    j["random"] = json::array({spec.random.first, spec.random.last});
    j["residual"] = spec.residual(es.size());
    j["weighted"] = c.weighted;
    j["lambda_min"] = bounds.lambda_min;
    j["lambda_max"] = bounds.lambda_max;
    j["Q"] = bounds.q;
    o << j.dump(2) << "\n";
  });
  for (const auto& [stem, m] : matrices) write_matrix_stage(dir, stem, m, c.histogram_bins);
}

void write_graph_stage(const fs::path& dir, const std::string& name, const FilteredGraph& g) {
  emit(dir / "graphs" / (name + ".edges.csv"), [&](std::ostream& o) { write_edge_list(o, g); });
  emit(dir / "graphs" / (name + ".graphml"), [&](std::ostream& o) { write_graphml(o, g); });
  emit(dir / "graphs" / (name + ".dot"), [&](std::ostream& o) { write_dot(o, g); });
}

void write_communities_stage(const fs::path& dir, const std::string& name, const std::vector<std::string>& tickers,
                             const CommunityResult& r) {
  emit(dir / "communities" / (name + ".csv"),
       [&](std::ostream& o) { write_partition(o, tickers, r.partition, r.cluster_pairs); });
  emit(dir / "communities" / (name + ".links.csv"), [&](std::ostream& o) { write_links(o, r.links); });
  emit(dir / "communities" / (name + ".sizes.csv"), [&](std::ostream& o) { write_sizes(o, r.partition); });
}

void write_domains_stage(const fs::path& dir, const std::vector<std::string>& tickers, const CorrelationMatrix& c_sec,
                         const DomainResult& d) {
  emit(dir / "domains" / "domains.csv", [&](std::ostream& o) { write_domains(o, tickers, {d.positive, d.negative}); });
  emit(dir / "domains" / "positive_display.csv", [&](std::ostream& o) { write_sign_triples(o, c_sec, d.positive); });
  emit(dir / "domains" / "negative_display.csv", [&](std::ostream& o) { write_sign_triples(o, c_sec, d.negative); });
  emit(dir / "domains" / "sizes.csv", [&](std::ostream& o) { write_domain_sizes(o, {&d.positive, &d.negative}); });
  if (!d.graph) return;
  const auto& g = *d.graph;
  emit(dir / "domains" / "domain_graph.dot", [&](std::ostream& o) { write_domain_graph_dot(o, tickers, g); });
  emit(dir / "domains" / "domain_graph.graphml", [&](std::ostream& o) { write_domain_graph_graphml(o, tickers, g); });
  emit(dir / "domains" / "domain_pairs.csv", [&](std::ostream& o) {
    o << "# grand_mean: " << format_number(g.grand_mean) << "\ndomain_a,domain_b,mean,linked\n";
    std::set<std::pair<std::size_t, std::size_t>> linked(g.links.begin(), g.links.end());
    for (const auto& pm : g.pair_means)
      o << pm.a << "," << pm.b << "," << format_number(pm.mean) << "," << (linked.contains({pm.a, pm.b}) ? 1 : 0)
        << "\n";
  });
}

void write_report_stage(const fs::path& dir, const TableReport& report) {
  emit(dir / "metrics" / "report.json", [&](std::ostream& o) { write_report_json(o, report); });
  emit(dir / "metrics" / "report.txt", [&](std::ostream& o) { write_report_text(o, report); });
}

void write_window(const WindowAnalysis& w, const fs::path& dir, const PipelineConfig& c) {
  in_stage("write", [&] {
    const auto& tickers = w.full.tickers;
    write_prices_stage(dir, w.prices);
    write_returns_stage(dir, w.returns);
    write_matrix_stage(dir, "full", w.full, c.histogram_bins);
    write_spectrum_stage(dir, w.eigen, w.bounds);
    write_modes_stage(dir, w.eigen, w.bounds, w.modes, w.subsectors, w.mode_matrices, c);
    for (const auto& [name, g] : w.graphs) {
      write_graph_stage(dir, name, g);
      write_communities_stage(dir, name, tickers,
                              CommunityResult{w.partitions.at(name), w.links.at(name), w.cluster_pairs.at(name)});
    }
    write_domains_stage(dir, tickers, w.mode_matrices.at("sector"),
                        DomainResult{w.positive_domains, w.negative_domains, w.domain_graph, {}});
    write_report_stage(dir, w.report);

    emit(dir / "summary.json", [&](std::ostream& o) {
      json j;
      j["first_date"] = w.prices.dates.front().iso();
      j["last_date"] = w.prices.dates.back().iso();
      j["n_tickers"] = w.returns.panel.n_tickers();
      j["n_obs"] = w.returns.panel.n_obs();
      j["dropped"] = w.returns.dropped;
      j["notes"] = w.notes;
      j["graphs"] = json::object();
      for (const auto& [name, p] : w.partitions) {
        json g;
        g["codelength"] = p.codelength;
        g["communities"] = p.n_groups();
        g["cluster_pairs"] = json::array();
        for (const auto& cp : w.cluster_pairs.at(name)) g["cluster_pairs"].push_back(pair_summary(tickers, cp));
        j["graphs"][name] = g;
      }
      j["domains"] = {{"positive", w.positive_domains.domains.size()}, {"negative", w.negative_domains.domains.size()}};
      o << j.dump(2) << "\n";
    });
  });
}

std::map<std::string, std::string> digest_tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto rel = fs::relative(entry.path(), dir).generic_string();
    if (rel == "manifest.json") continue;
    out[rel] = sha256_file(entry.path());
  }
  return out;
}

PipelineResult run_pipeline(const PipelineConfig& c) {
  in_stage("config", [&] { validate(c); });
  in_stage("output", [&] {
    if (fs::exists(c.output)) {
      if (!fs::is_directory(c.output)) throw PreconditionError("output path is not a directory");
      if (!fs::is_empty(c.output)) {
        if (!fs::exists(c.output / "manifest.json"))
          throw PreconditionError("output directory is not empty and holds no previous run: " + c.output.string());
        fs::remove_all(c.output);
      }
    }
    fs::create_directories(c.output);
  });

  std::size_t fills = 0;
  const PricePanel panel = ingest(c, &fills);
  const auto windows = in_stage("windows", [&] { return split_windows(panel, c.windows); });

  PipelineResult result;
  result.output = c.output;
  if (windows.size() == 1) {
    write_window(analyze_window(windows.front(), c), c.output, c);
    result.window_dirs.push_back(c.output);
  } else {
    for (std::size_t k = 0; k < windows.size(); ++k)
      result.window_dirs.push_back(c.output / ("window_" + std::to_string(k + 1)));
    std::vector<std::exception_ptr> errors(windows.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(windows.size()); ++k) {
      try {
        write_window(analyze_window(windows[k], c), result.window_dirs[k], c);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
    for (std::size_t k = 0; k < errors.size(); ++k) {
      if (!errors[k]) continue;
      try {
        std::rethrow_exception(errors[k]);
      } catch (const std::exception& e) {
        throw StageError("window " + std::to_string(k + 1), e.what());
      }
    }
    in_stage("write", [&] {
      emit(c.output / "prices.csv", [&](std::ostream& o) { write_prices_wide(o, panel); });
      emit(c.output / "windows.csv", [&](std::ostream& o) {
        o << "window,first_date,last_date,n_dates\n";
        for (std::size_t k = 0; k < windows.size(); ++k)
          o << k + 1 << "," << windows[k].dates.front().iso() << "," << windows[k].dates.back().iso() << ","
            << windows[k].n_dates() << "\n";
      });
    });
    emit(c.output / "comparison.json", [&](std::ostream& o) {
      try {
        write_comparison(o, compare_windows(result.window_dirs, c.compare_graph));
      } catch (const Error& e) {
        json j;
        j["error"] = e.what();
        o << j.dump(2) << "\n";
      }
    });
  }

  in_stage("manifest", [&] {
    result.digests = digest_tree(c.output);
    json m;
    m["config"] = json::parse(config_to_json(c));
    m["seeds"]["community"] = c.community_seed;
    m["seeds"]["synth"] = json::array();
    for (const auto& s : c.synth) m["seeds"]["synth"].push_back(s.seed);
    m["filled_cells"] = fills;
    m["files"] = result.digests;
    write_file(c.output / "manifest.json", m.dump(2) + "\n");
  });
  return result;
}

void write_links(std::ostream& out, const std::vector<CommunityLink>& links) {
  out << "a,b,edges,weight\n";
  for (const auto& l : links) out << l.a << "," << l.b << "," << l.edges << "," << format_number(l.weight) << "\n";
}

std::vector<CommunityLink> read_links(std::istream& in) {
  LineReader reader(in);
  std::string line;
  if (!reader.next(line)) throw ParseError("empty links file", 0);
  std::vector<CommunityLink> out;
  while (reader.next(line)) {
    auto f = split_fields(line, ',');
    if (f.size() != 4) throw ParseError("link row needs 4 fields", reader.line_number());
    const auto n = reader.line_number();
    out.push_back({static_cast<std::size_t>(parse_number(f[0], n)), static_cast<std::size_t>(parse_number(f[1], n)),
                   static_cast<std::size_t>(parse_number(f[2], n)), parse_number(f[3], n)});
  }
  return out;
}

namespace {

std::vector<std::string> partition_tickers(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw PreconditionError("missing partition file " + file.string());
  LineReader reader(in);
  std::string line;
  std::vector<std::string> out;
  if (!reader.next(line)) throw ParseError("empty partition file " + file.string(), 0);
  while (reader.next(line)) out.push_back(split_fields(line, ',')[0]);
  return out;
}

}  // namespace

std::vector<WindowStructure> compare_windows(const std::vector<fs::path>& dirs, const std::string& graph) {
  return in_stage("compare", [&] {
    if (dirs.size() < 2) throw PreconditionError("comparison needs at least 2 window directories");
    std::vector<WindowStructure> out;
    std::vector<std::string> universe;
    std::vector<std::size_t> previous;
    for (std::size_t k = 0; k < dirs.size(); ++k) {
      const auto part_file = dirs[k] / "communities" / (graph + ".csv");
      auto tickers = partition_tickers(part_file);
      auto sorted = tickers;
      std::sort(sorted.begin(), sorted.end());
      if (k == 0) universe = sorted;
      else if (sorted != universe)
        throw PreconditionError("universe mismatch between " + dirs.front().string() + " and " + dirs[k].string());
      std::ifstream pin(part_file);
      auto p = read_partition(pin, tickers);
      // Align labels to the ticker order of the first window.
      std::vector<std::size_t> aligned(universe.size());
      for (std::size_t i = 0; i < tickers.size(); ++i) {
        auto pos = std::lower_bound(universe.begin(), universe.end(), tickers[i]) - universe.begin();
        aligned[static_cast<std::size_t>(pos)] = p.membership[i];
      }
      std::ifstream lin(dirs[k] / "communities" / (graph + ".links.csv"));
      if (!lin) throw PreconditionError("missing links file in " + dirs[k].string());
      const auto links = read_links(lin);

      WindowStructure ws;
      ws.name = dirs[k].filename().string();
      ws.n_communities = p.n_groups();
      for (const auto& g : p.groups()) ws.sizes.push_back(g.size());
      std::sort(ws.sizes.rbegin(), ws.sizes.rend());
      ws.hub = hub_community(ws.n_communities, links);
      if (k > 0) ws.agreement = adjusted_rand_index(previous, aligned);
      previous = aligned;
      out.push_back(std::move(ws));
    }
    return out;
  });
}

void write_comparison(std::ostream& out, const std::vector<WindowStructure>& windows) {
  json arr = json::array();
  for (const auto& w : windows) {
    json j;
    j["window"] = w.name;
    j["communities"] = w.n_communities;
    j["sizes"] = w.sizes;
    j["hub"] = w.hub;
    j["agreement_with_previous"] = w.agreement ? json(*w.agreement) : json(nullptr);
    arr.push_back(j);
  }
  out << json{{"windows", arr}}.dump(2) << "\n";
}

}  // namespace corrnet

namespace corrnet {

namespace {

std::map<std::string, std::size_t> index_of(const std::vector<std::string>& tickers) {
  std::map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < tickers.size(); ++i) out.emplace(tickers[i], i);
  return out;
}

std::size_t lookup(const std::map<std::string, std::size_t>& idx, const std::string& ticker, std::size_t line) {
  auto it = idx.find(ticker);
  if (it == idx.end()) throw ParseError("unknown ticker '" + ticker + "'", line);
  return it->second;
}

std::vector<SubsectorSplit> read_subsectors(std::istream& in, const std::vector<std::string>& tickers) {
  const auto idx = index_of(tickers);
  LineReader reader(in);
  std::string line;
  if (!reader.next(line)) throw ParseError("empty subsector file", 0);
  std::vector<SubsectorSplit> out;
  while (reader.next(line)) {
    const auto n = reader.line_number();
    auto f = split_fields(line, ',');
    if (f.size() != 3 || (f[2] != "+" && f[2] != "-")) throw ParseError("subsector row needs alpha,ticker,+/-", n);
    const auto alpha = static_cast<std::size_t>(parse_number(f[0], n));
    if (out.empty() || out.back().alpha != alpha) {
      out.emplace_back();
      out.back().alpha = alpha;
      out.back().threshold = 1.0 / std::sqrt(static_cast<double>(tickers.size()));
    }
    (f[2] == "+" ? out.back().positive : out.back().negative).push_back(lookup(idx, f[1], n));
  }
  return out;
}

std::vector<ClusterPair> read_cluster_pairs(std::istream& in, const std::vector<std::string>& tickers,
                                            const Partition& p, const CorrelationMatrix* c_sec) {
  const auto idx = index_of(tickers);
  LineReader reader(in);
  std::string line;
  reader.next(line);
  std::map<std::size_t, ClusterPair> pairs;
  while (reader.next(line)) {
    auto f = split_fields(line, ',');
    if (f.size() < 3 || f[2].empty()) continue;
    const auto i = lookup(idx, f[0], reader.line_number());
    auto& cp = pairs[p.membership[i]];
    cp.community = p.membership[i];
    if (f[2] == "a") cp.side_a.push_back(i);
    else if (f[2] == "b") cp.side_b.push_back(i);
    else throw ParseError("side must be a, b or empty", reader.line_number());
  }
  std::vector<ClusterPair> out;
  for (auto& [g, cp] : pairs) {
    for (auto* side : {&cp.side_a, &cp.side_b}) std::sort(side->begin(), side->end());
    if (c_sec && !cp.side_a.empty() && !cp.side_b.empty()) {
      double s = 0.0;
      for (auto i : cp.side_a)
        for (auto j : cp.side_b) s += (*c_sec)(i, j);
      cp.inter_mean = s / static_cast<double>(cp.side_a.size() * cp.side_b.size());
    }
    out.push_back(std::move(cp));
  }
  return out;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open " + path.string());
  return in;
}

}  // namespace

WindowAnalysis load_window(const fs::path& dir) {
  return in_stage("load", [&] {
    if (!fs::is_directory(dir)) throw PreconditionError("not a directory: " + dir.string());
    WindowAnalysis w;
    if (fs::exists(dir / "prices.csv")) w.prices = load_prices(dir / "prices.csv", Layout::wide);
    if (fs::exists(dir / "returns" / "returns.csv")) {
      auto in = open_input(dir / "returns" / "returns.csv");
      w.returns.panel = read_returns(in);
    }
    const auto corr = dir / "correlation";
    if (!fs::exists(corr / "full.csv")) throw PreconditionError("missing correlation/full.csv in " + dir.string());
    for (const auto& entry : fs::directory_iterator(corr)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
      auto in = open_input(entry.path());
      auto m = read_matrix(in);
      const auto stem = entry.path().stem().string();
      if (stem == "full") w.full = std::move(m);
      else w.mode_matrices.emplace(stem, std::move(m));
    }
    const auto& tickers = w.full.tickers;
    if (fs::exists(dir / "spectrum" / "subsectors.csv")) {
      auto in = open_input(dir / "spectrum" / "subsectors.csv");
      w.subsectors = read_subsectors(in, tickers);
    }
    const CorrelationMatrix* c_sec = nullptr;
    if (auto it = w.mode_matrices.find("sector"); it != w.mode_matrices.end()) c_sec = &it->second;
    if (fs::is_directory(dir / "communities")) {
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(dir / "communities")) files.push_back(entry.path());
      std::sort(files.begin(), files.end());
      for (const auto& path : files) {
        const auto file = path.filename().string();
        if (!ends_with(file, ".csv") || ends_with(file, ".links.csv") || ends_with(file, ".sizes.csv")) continue;
        const auto name = file.substr(0, file.size() - 4);
        auto in = open_input(path);
        auto p = read_partition(in, tickers);
        auto again = open_input(path);
        w.cluster_pairs.emplace(name, read_cluster_pairs(again, tickers, p, c_sec));
        auto links = open_input(dir / "communities" / (name + ".links.csv"));
        w.links.emplace(name, read_links(links));
        w.partitions.emplace(name, std::move(p));
      }
    }
    return w;
  });
}

}  // namespace corrnet
