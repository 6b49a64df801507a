// corrnet: stage commands over a window directory, plus the full pipeline.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "corrnet/io.hpp"
#include "corrnet/pipeline.hpp"

namespace fs = std::filesystem;
using namespace corrnet;

namespace {

IndexRange parse_range(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos) throw ParseError("range must read first:last, got '" + text + "'", 0);
  return IndexRange{static_cast<std::size_t>(parse_number(text.substr(0, colon))),
                    static_cast<std::size_t>(parse_number(text.substr(colon + 1)))};
}

DateRange parse_date_range(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos) throw ParseError("date range must read start:end, got '" + text + "'", 0);
  return DateRange{Date::parse(text.substr(0, colon)), Date::parse(text.substr(colon + 1))};
}

Layout parse_layout(const std::string& text) {
  if (text == "wide") return Layout::wide;
  if (text == "long") return Layout::long_format;
  throw ParseError("layout must be wide or long", 0);
}

template <typename T>
T read_from(const fs::path& path, T (*reader)(std::istream&)) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open " + path.string());
  return reader(in);
}

CorrelationMatrix load_matrix(const fs::path& dir, const std::string& stem) {
  return read_from(dir / "correlation" / (stem + ".csv"), &read_matrix);
}

std::size_t load_n_obs(const fs::path& dir) {
  return read_from(dir / "returns" / "returns.csv", &read_returns).n_obs();
}

// Options shared by several stage commands; they land in a PipelineConfig.
struct Shared {
  PipelineConfig config;
  std::string sector;
  std::string random;
  bool unweighted = false;
  double subsector = -1.0;

  void add_returns(CLI::App* app) { app->add_option("--dt", config.dt, "return horizon in days"); }
  void add_bins(CLI::App* app) { app->add_option("--bins", config.histogram_bins, "histogram bins"); }
  void add_modes(CLI::App* app) {
    app->add_option("--sector", sector, "sector mode range first:last");
    app->add_option("--random", random, "random mode range first:last");
    app->add_option("--random-start", config.random_start, "first random mode index");
    app->add_flag("--unweighted", unweighted, "drop the eigenvalue weights");
    app->add_option("--clip-floor", config.clip_floor, "floor for the clipped sector matrix");
    app->add_option("--subsector-threshold", subsector, "eigenvector component threshold");
  }
  void add_communities(CLI::App* app) {
    app->add_option("--seed", config.community_seed, "community search seed");
    app->add_option("--min-pair-size", config.min_pair_size, "minimum cluster-pair side");
    app->add_option("--link-min-edges", config.link_min_edges, "edges needed to link two communities");
  }
  // Applies the string-valued options to `config`.
  void finish() {
    if (!sector.empty()) config.sector_range = parse_range(sector);
    if (!random.empty()) config.random_range = parse_range(random);
    if (unweighted) config.weighted = false;
    if (subsector >= 0) config.subsector_threshold = subsector;
  }
};

struct SpectrumState {
  CorrelationMatrix full;
  EigenSystem es;
  MPBounds bounds;
};

SpectrumState load_spectrum(const fs::path& dir) {
  SpectrumState s;
  s.full = load_matrix(dir, "full");
  const auto t = load_n_obs(dir);
  s.es = eigendecompose(s.full, t);
  s.bounds = mp_bounds(s.full.size(), t);
  return s;
}

void print_report(const TableReport& r) { write_report_text(std::cout, r); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Correlation structure of stock markets: spectra, filtered graphs, communities, sign domains"};
  app.require_subcommand(1);
  Shared sh;
  fs::path dir;

  auto* synth = app.add_subcommand("synth", "generate a factor-model market");
  SynthSpec spec;
  std::vector<std::string> anti;
  fs::path synth_out;
  synth->add_option("--stocks", spec.n_stocks);
  synth->add_option("--obs", spec.n_obs, "number of returns");
  synth->add_option("--sectors", spec.n_sectors);
  synth->add_option("--market-beta", spec.market_beta);
  synth->add_option("--sector-beta", spec.sector_beta);
  synth->add_option("--sector-betas", spec.sector_betas, "one loading per sector");
  synth->add_option("--anti", anti, "anti-correlated sector pair p:q");
  synth->add_option("--noise", spec.noise_sigma);
  synth->add_option("--daily-vol", spec.daily_vol);
  synth->add_option("--seed", spec.seed);
  synth->add_option("--out", synth_out, "directory for prices.csv and labels.csv")->required();

  auto* ingest_cmd = app.add_subcommand("ingest", "load, combine and gap-fill prices into <dir>/prices.csv");
  std::vector<fs::path> inputs;
  std::vector<std::string> tags;
  std::string layout = "wide";
  std::string delimiter = ",";
  ingest_cmd->add_option("--input", inputs, "one or two price files")->required();
  ingest_cmd->add_option("--tag", tags, "market tags when combining two files");
  ingest_cmd->add_option("--layout", layout, "wide or long");
  ingest_cmd->add_option("--delimiter", delimiter);
  ingest_cmd->add_option("--dir", dir)->required();

  auto* returns_cmd = app.add_subcommand("returns", "normalized log returns from <dir>/prices.csv");
  returns_cmd->add_option("--dir", dir)->required();
  sh.add_returns(returns_cmd);

  auto* correlate_cmd = app.add_subcommand("correlate", "full correlation matrix and its histogram");
  correlate_cmd->add_option("--dir", dir)->required();
  sh.add_bins(correlate_cmd);

  auto* spectrum_cmd = app.add_subcommand("spectrum", "eigenvalues, eigenvectors and MP density");
  spectrum_cmd->add_option("--dir", dir)->required();

  auto* modes_cmd = app.add_subcommand("modes", "market, sector, random and residual mode matrices");
  modes_cmd->add_option("--dir", dir)->required();
  sh.add_modes(modes_cmd);
  sh.add_bins(modes_cmd);

  std::string matrix = "full";
  bool serial = false;
  auto* mst_cmd = app.add_subcommand("mst", "maximum spanning tree of a matrix");
  mst_cmd->add_option("--dir", dir)->required();
  mst_cmd->add_option("--matrix", matrix, "full, abs-sector, clipped-sector, market, random, residual");
  auto* pmfg_cmd = app.add_subcommand("pmfg", "planar maximally filtered graph of a matrix");
  pmfg_cmd->add_option("--dir", dir)->required();
  pmfg_cmd->add_option("--matrix", matrix, "full, abs-sector, clipped-sector, market, random, residual");
  pmfg_cmd->add_flag("--serial", serial, "use the sequential planarity screen");

  std::string graph_name;
  auto* communities_cmd = app.add_subcommand("communities", "map-equation communities of a graph");
  communities_cmd->add_option("--dir", dir)->required();
  communities_cmd->add_option("--graph", graph_name, "graph name, e.g. abs_sector_pmfg")->required();
  sh.add_communities(communities_cmd);

  auto* domains_cmd = app.add_subcommand("domains", "sign domains of the sector mode");
  domains_cmd->add_option("--dir", dir)->required();

  auto* metrics_cmd = app.add_subcommand("metrics", "sector metrics tables of a window directory");
  metrics_cmd->add_option("--dir", dir)->required();

  auto* windows_cmd = app.add_subcommand("windows", "split a price file into windows");
  fs::path prices_in;
  std::size_t count = 0;
  std::vector<std::string> ranges;
  windows_cmd->add_option("--prices", prices_in)->required();
  auto* count_opt = windows_cmd->add_option("--count", count, "number of equal windows");
  auto* range_opt = windows_cmd->add_option("--range", ranges, "window start:end (end exclusive)");
  bool calendar = false;
  windows_cmd->add_flag("--calendar", calendar, "equal calendar length instead of equal date count");
  count_opt->excludes(range_opt);
  windows_cmd->add_option("--out", dir)->required();

  auto* compare_cmd = app.add_subcommand("compare", "structural change between window directories");
  std::vector<fs::path> dirs;
  std::string compare_graph = "abs_sector_pmfg";
  fs::path compare_out;
  compare_cmd->add_option("--dirs", dirs)->required();
  compare_cmd->add_option("--graph", compare_graph);
  compare_cmd->add_option("--out", compare_out, "output file (default stdout)");

  auto* run_cmd = app.add_subcommand("run", "full pipeline; flags override the config file");
  fs::path config_file;
  std::vector<std::string> graph_sel;
  std::size_t n_windows = 0;
  std::uint64_t synth_seed = 0;
  run_cmd->add_option("--config", config_file, "JSON config");
  run_cmd->add_option("--input", inputs);
  run_cmd->add_option("--tag", tags);
  auto* layout_opt = run_cmd->add_option("--layout", layout);
  auto* delim_opt = run_cmd->add_option("--delimiter", delimiter);
  auto* dt_opt = run_cmd->add_option("--dt", sh.config.dt);
  auto* windows_opt = run_cmd->add_option("--windows", n_windows, "number of equal windows");
  run_cmd->add_option("--window-range", ranges, "window start:end (end exclusive)")->excludes(windows_opt);
  bool run_calendar = false;
  run_cmd->add_flag("--calendar", run_calendar, "windows of equal calendar length");
  run_cmd->add_option("--graph", graph_sel, "extra graph matrix:kind, e.g. market:pmfg");
  auto* synth_seed_opt = run_cmd->add_option("--synth-seed", synth_seed, "use a default synthetic market");
  run_cmd->add_option("--compare-graph", compare_graph);
  run_cmd->add_option("--output", dir);
  auto* bins_opt = run_cmd->add_option("--bins", sh.config.histogram_bins);
  sh.add_modes(run_cmd);
  sh.add_communities(run_cmd);

  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    in_stage(command, [&] {
      if (command == "synth") {
        for (const auto& a : anti) {
          auto r = parse_range(a);
          spec.anti_pairs.emplace_back(r.first, r.last);
        }
        const auto m = generate(spec);
        std::ostringstream prices, labels;
        write_prices_wide(prices, m.prices);
        write_labels(labels, m);
        write_file(synth_out / "prices.csv", prices.str());
        write_file(synth_out / "labels.csv", labels.str());
      } else if (command == "ingest") {
        PipelineConfig c;
        c.inputs = inputs;
        if (!tags.empty()) c.tags = tags;
        c.layout = parse_layout(layout);
        if (delimiter.size() != 1) throw PreconditionError("delimiter must be one character");
        c.delimiter = delimiter[0];
        std::size_t fills = 0;
        write_prices_stage(dir, ingest(c, &fills));
        std::cerr << "filled " << fills << " missing cells\n";
      } else if (command == "returns") {
        const auto prices = load_prices(dir / "prices.csv", Layout::wide);
        write_returns_stage(dir, window_returns(prices, sh.config));
      } else if (command == "correlate") {
        const auto panel = read_from(dir / "returns" / "returns.csv", &read_returns);
        write_matrix_stage(dir, "full", correlation_matrix(panel), sh.config.histogram_bins);
      } else if (command == "spectrum") {
        const auto s = load_spectrum(dir);
        write_spectrum_stage(dir, s.es, s.bounds);
      } else if (command == "modes") {
        sh.finish();
        const auto s = load_spectrum(dir);
        const auto spec_m = resolve_modes(s.es, s.bounds, sh.config);
        write_modes_stage(dir, s.es, s.bounds, spec_m, split_sector_modes(s.es, spec_m, sh.config),
                          build_mode_matrices(s.es, spec_m, sh.config), sh.config);
      } else if (command == "mst" || command == "pmfg") {
        const auto sel = GraphSelection::parse(matrix + ":" + command);
        const auto c = load_matrix(dir, sel.name().substr(0, sel.name().rfind('_')));
        const auto g = command == "pmfg" ? in_stage("pmfg", [&] {
          if (c.kind != sel.matrix) throw PreconditionError("matrix file holds a different kind");
          return build_pmfg(c, serial ? Execution::serial : Execution::parallel);
        })
                                         : build_graph(sel, c);
        write_graph_stage(dir, sel.name(), g);
      } else if (command == "communities") {
        const auto g = read_from(dir / "graphs" / (graph_name + ".edges.csv"), &read_edge_list);
        std::optional<CorrelationMatrix> c_sec;
        if (g.source == MatrixKind::abs_sector_mode || g.source == MatrixKind::clipped_sector_mode)
          c_sec = load_matrix(dir, "sector");
        write_communities_stage(dir, graph_name, g.nodes, analyze_graph(g, c_sec ? &*c_sec : nullptr, sh.config));
      } else if (command == "domains") {
        const auto c_sec = load_matrix(dir, "sector");
        write_domains_stage(dir, c_sec.tickers, c_sec, analyze_domains(c_sec));
      } else if (command == "metrics") {
        const auto report = build_report(load_window(dir), sh.config);
        write_report_stage(dir, report);
        print_report(report);
      } else if (command == "windows") {
        const auto prices = load_prices(prices_in, Layout::wide);
        WindowSpec ws;
        if (!ranges.empty()) {
          std::vector<DateRange> r;
          for (const auto& t : ranges) r.push_back(parse_date_range(t));
          ws = WindowSpec::ranges(std::move(r));
        } else if (count > 0) {
          ws = calendar ? WindowSpec::calendar(count) : WindowSpec::equal(count);
        }
        const auto parts = split_windows(prices, ws);
        std::ostringstream table;
        table << "window,first_date,last_date,n_dates\n";
        for (std::size_t k = 0; k < parts.size(); ++k) {
          write_prices_stage(dir / ("window_" + std::to_string(k + 1)), parts[k]);
          table << k + 1 << "," << parts[k].dates.front().iso() << "," << parts[k].dates.back().iso() << ","
                << parts[k].n_dates() << "\n";
        }
        write_file(dir / "windows.csv", table.str());
      } else if (command == "compare") {
        std::ostringstream out;
        write_comparison(out, compare_windows(dirs, compare_graph));
        if (compare_out.empty()) std::cout << out.str();
        else write_file(compare_out, out.str());
      } else if (command == "run") {
        PipelineConfig c = config_file.empty() ? PipelineConfig{} : config_from_json(read_file(config_file));
        // Flags given on the command line win over the file.
        if (!inputs.empty()) c.inputs = inputs;
        if (!tags.empty()) c.tags = tags;
        if (layout_opt->count()) c.layout = parse_layout(layout);
        if (delim_opt->count()) {
          if (delimiter.size() != 1) throw PreconditionError("delimiter must be one character");
          c.delimiter = delimiter[0];
        }
        if (dt_opt->count()) c.dt = sh.config.dt;
        if (bins_opt->count()) c.histogram_bins = sh.config.histogram_bins;
        if (n_windows > 0) c.windows = run_calendar ? WindowSpec::calendar(n_windows) : WindowSpec::equal(n_windows);
        if (!ranges.empty()) {
          std::vector<DateRange> r;
          for (const auto& t : ranges) r.push_back(parse_date_range(t));
          c.windows = WindowSpec::ranges(std::move(r));
        }
        for (const auto& g : graph_sel) c.graphs.push_back(GraphSelection::parse(g));
        if (synth_seed_opt->count()) {
          SynthSpec s;
          s.seed = synth_seed;
          c.synth = {s};
        }
        sh.finish();
        if (sh.config.sector_range) c.sector_range = sh.config.sector_range;
        if (sh.config.random_range) c.random_range = sh.config.random_range;
        if (sh.config.random_start) c.random_start = sh.config.random_start;
        if (!sh.config.weighted) c.weighted = false;
        if (run_cmd->get_option("--clip-floor")->count()) c.clip_floor = sh.config.clip_floor;
        if (sh.config.subsector_threshold) c.subsector_threshold = sh.config.subsector_threshold;
        if (run_cmd->get_option("--seed")->count()) c.community_seed = sh.config.community_seed;
        if (run_cmd->get_option("--min-pair-size")->count()) c.min_pair_size = sh.config.min_pair_size;
        if (run_cmd->get_option("--link-min-edges")->count()) c.link_min_edges = sh.config.link_min_edges;
        if (run_cmd->get_option("--compare-graph")->count()) c.compare_graph = compare_graph;
        if (!dir.empty()) c.output = dir;
        const auto result = run_pipeline(c);
        std::cerr << "wrote " << result.digests.size() << " files to " << result.output.string() << "\n";
      }
    });
  } catch (const std::exception& e) {
    std::cerr << "corrnet: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
