#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "corrnet/community.hpp"
#include "corrnet/correlation.hpp"
#include "corrnet/domains.hpp"
#include "corrnet/error.hpp"
#include "corrnet/filtergraph.hpp"
#include "corrnet/metrics.hpp"
#include "corrnet/rmt.hpp"
#include "corrnet/synth.hpp"
#include "corrnet/timeseries.hpp"

namespace corrnet {

/// Error tagged with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& cause)
      : Error("stage '" + stage + "': " + cause), stage_(stage) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Runs `fn`, rethrowing any library error as a StageError for `stage`.
template <typename Fn>
auto in_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

/// A (matrix, filter) combination, e.g. abs-sector + pmfg.
struct GraphSelection {
  MatrixKind matrix = MatrixKind::full;
  GraphKind graph = GraphKind::pmfg;

  /// File stem such as "abs_sector_pmfg".
  std::string name() const;
  static GraphSelection parse(const std::string& text);
  friend bool operator==(const GraphSelection&, const GraphSelection&) = default;
};

struct PipelineConfig {
  /// One price file, or two to be combined as separate markets.
  std::vector<std::filesystem::path> inputs;
  std::vector<std::string> tags{"A", "B"};
  Layout layout = Layout::wide;
  char delimiter = ',';
  int dt = 1;
  WindowSpec windows;
  std::optional<IndexRange> sector_range;
  std::optional<IndexRange> random_range;
  std::optional<std::size_t> random_start;
  bool weighted = true;
  /// Graphs built in addition to full MST/PMFG and the abs/clipped sector PMFGs.
  std::vector<GraphSelection> graphs;
  std::uint64_t community_seed = 42;
  double clip_floor = 0.0;
  std::size_t min_pair_size = 3;
  std::optional<double> subsector_threshold;
  std::size_t link_min_edges = 1;
  int histogram_bins = 50;
  /// Synthetic input instead of files: one spec, or several regimes in order.
  std::vector<SynthSpec> synth;
  std::string compare_graph = "abs_sector_pmfg";
  std::filesystem::path output;
};

PipelineConfig config_from_json(const std::string& text);
std::string config_to_json(const PipelineConfig& config);

/// Checks paths, ranges and option values; throws PreconditionError.
void validate(const PipelineConfig& config);

/// Everything computed for one window, kept in memory.
struct WindowAnalysis {
  PricePanel prices;
  ReturnsResult returns;
  CorrelationMatrix full;
  EigenSystem eigen;
  MPBounds bounds;
  ModeSpec modes;
  /// Keyed by file stem: market, sector, random, residual, abs_sector, clipped_sector.
  std::map<std::string, CorrelationMatrix> mode_matrices;
  std::vector<SubsectorSplit> subsectors;
  std::map<std::string, FilteredGraph> graphs;
  std::map<std::string, Partition> partitions;
  std::map<std::string, std::vector<CommunityLink>> links;
  std::map<std::string, std::vector<ClusterPair>> cluster_pairs;
  SignDomainSet positive_domains;
  SignDomainSet negative_domains;
  std::optional<DomainGraph> domain_graph;
  TableReport report;
  std::vector<std::string> notes;
};

/// Input panel after loading (or generating), combining and gap filling.
/// `fills` receives the number of repaired cells.
PricePanel ingest(const PipelineConfig& config, std::size_t* fills = nullptr);

/// Returns for one window; fewer than 3 dates is an error.
ReturnsResult window_returns(const PricePanel& prices, const PipelineConfig& config);

/// Spectrum and mode specification honouring the config overrides.
ModeSpec resolve_modes(const EigenSystem& es, const MPBounds& bounds, const PipelineConfig& config);

/// The standard mode matrices for a spectrum.
std::map<std::string, CorrelationMatrix> build_mode_matrices(const EigenSystem& es, const ModeSpec& spec,
                                                             const PipelineConfig& config);

/// Sign split of every sector eigenvector.
std::vector<SubsectorSplit> split_sector_modes(const EigenSystem& es, const ModeSpec& spec, const PipelineConfig& config);

/// Graph for one selection; sector-derived selections are built from the
/// matching mode matrix.
FilteredGraph build_graph(const GraphSelection& selection, const CorrelationMatrix& c);

struct CommunityResult {
  Partition partition;
  std::vector<CommunityLink> links;
  std::vector<ClusterPair> cluster_pairs;
};

/// Communities, community links, and (when `c_sec` is given) cluster pairs.
CommunityResult analyze_graph(const FilteredGraph& graph, const CorrelationMatrix* c_sec, const PipelineConfig& config);

struct DomainResult {
  SignDomainSet positive;
  SignDomainSet negative;
  std::optional<DomainGraph> graph;
  std::vector<std::string> notes;
};
DomainResult analyze_domains(const CorrelationMatrix& c_sec);

/// Metrics tables from already computed pieces.
TableReport build_report(const WindowAnalysis& w, const PipelineConfig& config);

WindowAnalysis analyze_window(const PricePanel& prices, const PipelineConfig& config);

/// Writes every artifact of one window below `dir`.
void write_window(const WindowAnalysis& w, const std::filesystem::path& dir, const PipelineConfig& config);

/// Stage writers shared by run_pipeline and the stage commands. Each writes
/// below a window directory at its fixed relative path.
void write_prices_stage(const std::filesystem::path& dir, const PricePanel& prices);
void write_returns_stage(const std::filesystem::path& dir, const ReturnsResult& returns);
/// correlation/<stem>.csv and correlation/histograms/<stem>.csv.
void write_matrix_stage(const std::filesystem::path& dir, const std::string& stem, const CorrelationMatrix& c,
                        int histogram_bins);
void write_spectrum_stage(const std::filesystem::path& dir, const EigenSystem& es, const MPBounds& bounds);
void write_modes_stage(const std::filesystem::path& dir, const EigenSystem& es, const MPBounds& bounds,
                       const ModeSpec& spec, const std::vector<SubsectorSplit>& subsectors,
                       const std::map<std::string, CorrelationMatrix>& matrices, const PipelineConfig& config);
void write_graph_stage(const std::filesystem::path& dir, const std::string& name, const FilteredGraph& graph);
void write_communities_stage(const std::filesystem::path& dir, const std::string& name,
                             const std::vector<std::string>& tickers, const CommunityResult& result);
void write_domains_stage(const std::filesystem::path& dir, const std::vector<std::string>& tickers,
                         const CorrelationMatrix& c_sec, const DomainResult& domains);
void write_report_stage(const std::filesystem::path& dir, const TableReport& report);

/// Reads back what the stage writers left in `dir`: prices, returns,
/// matrices, subsectors, and each partition with its links and cluster pairs.
/// Pieces whose files are absent stay empty.
WindowAnalysis load_window(const std::filesystem::path& dir);

struct PipelineResult {
  std::filesystem::path output;
  std::vector<std::filesystem::path> window_dirs;
  /// Relative path -> SHA-256 of every file except the manifest.
  std::map<std::string, std::string> digests;
};

/// Full run. One window writes into the output directory itself; k windows
/// go to window_1 .. window_k and are compared afterwards. The manifest
/// records config, seeds and file digests, and no timestamps.
PipelineResult run_pipeline(const PipelineConfig& config);

/// SHA-256 of every regular file below `dir` except manifest.json.
std::map<std::string, std::string> digest_tree(const std::filesystem::path& dir);

struct WindowStructure {
  std::string name;
  std::size_t n_communities = 0;
  /// Community sizes, descending.
  std::vector<std::size_t> sizes;
  std::size_t hub = 0;
  /// Adjusted Rand index against the previous window.
  std::optional<double> agreement;
};

/// Structural summary of consecutive window directories, read from
/// communities/<graph>.csv and its links file.
std::vector<WindowStructure> compare_windows(const std::vector<std::filesystem::path>& dirs,
                                             const std::string& graph = "abs_sector_pmfg");

void write_comparison(std::ostream& out, const std::vector<WindowStructure>& windows);

/// Rows (a, b, edges, weight) of a community-level graph.
void write_links(std::ostream& out, const std::vector<CommunityLink>& links);
std::vector<CommunityLink> read_links(std::istream& in);

}  // namespace corrnet
