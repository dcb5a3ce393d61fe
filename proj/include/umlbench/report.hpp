#pragma once

// Tabular, Markdown and SVG emission of an analysed corpus.
//
// Layout under the reports directory:
//   <table>.csv (or .json)   one file per selected table
//   bootstrap.csv            written with the stats table
//   charts/<name>.svg
//   summary.md
//
// Every model-level table lists models by descending total method count.
// Output bytes depend only on the Analysis and the ReportSpec.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "umlbench/consensus.hpp"
#include "umlbench/error.hpp"
#include "umlbench/metrics.hpp"
#include "umlbench/stats.hpp"

namespace umlbench::report {

class EmptySelection : public Error {
 public:
  using Error::Error;
};

enum class Table { MqSummary, SrMetrics, AcBreakdown, SfDetail, ScContingency, Tmc, Cmc, Spc, Stats };

inline constexpr std::array<Table, 9> kTables = {Table::MqSummary, Table::SrMetrics,     Table::AcBreakdown,
                                                 Table::SfDetail,  Table::ScContingency, Table::Tmc,
                                                 Table::Cmc,       Table::Spc,           Table::Stats};

std::string_view table_name(Table t);
/// Throws ConfigError for unknown names.
Table table_from_name(std::string_view name);

/// Decimal places used when no override is given. Percentage columns use 2.
int default_rounding(Table t);

enum class Format { Csv, Json };

struct ReportSpec {
  std::vector<Table> tables{kTables.begin(), kTables.end()};
  std::map<Table, int> rounding;
  bool charts = true;
  Format format = Format::Csv;

  int decimals(Table t) const;
  /// Places for percentage columns: the override when set, otherwise 2.
  int percent_decimals(Table t) const;
};

/// One row of the statistics table.
struct StatRow {
  std::string family;
  stats::StatResult result;
};

/// Percentile bootstrap interval of a mean for one (metric, model, seed).
struct BootstrapRow {
  std::string metric;
  std::string model;
  std::uint64_t seed = 0;
  double mean = 0.0;
  stats::Interval ci;
};

/// Per-model samples of one quantity, in model display order.
struct Series {
  std::string name;
  std::string title;
  std::string unit;
  std::vector<std::pair<std::string, std::vector<double>>> groups;
};

struct Analysis {
  /// Ordered by descending total MQ.
  std::vector<metrics::ModelSummary> models;
  consensus::ConsensusReport consensus;
  std::vector<StatRow> stats;
  std::vector<BootstrapRow> bootstrap;
  /// Keyed by Series::name; charted in this order.
  std::vector<Series> series;

  const Series* find_series(std::string_view name) const;
};

/// Header plus rows of already formatted cells; "NA" marks undefined values.
struct Grid {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

Grid table_grid(const Analysis& analysis, Table t, int decimals, int percent_decimals);
Grid bootstrap_grid(const Analysis& analysis, int decimals);

/// RFC 4180 quoting, LF line endings, trailing newline.
std::string to_csv(const Grid& grid);
/// Array of objects; numeric cells become numbers, "NA" becomes null.
nlohmann::ordered_json to_json(const Grid& grid);

/// Fixed-point with `decimals` places, "NA" for non-finite, never "-0".
std::string format_fixed(double v, int decimals);
/// Fixed-point unless 0 < p < 1e-4, then 4-digit scientific.
std::string format_p(double p, int decimals);

/// Writes one file per selected table into `dir`. Throws EmptySelection.
void emit_tables(const Analysis& analysis, const ReportSpec& spec, const std::filesystem::path& dir);

/// Bars at the group means with ±SEM (thick) and ±1.96 SEM (thin) whiskers.
std::string bar_chart_svg(const Series& series);
/// Boxes at the type-7 quartiles, median line, whiskers to min and max.
std::string box_plot_svg(const Series& series);

/// `<series>_bar.svg` and `<series>_box.svg` for every series; no-op when
/// charts are disabled.
void emit_charts(const Analysis& analysis, const ReportSpec& spec, const std::filesystem::path& dir);

std::string summary_markdown(const Analysis& analysis, const ReportSpec& spec);

/// Tables, charts/ and summary.md under `dir`.
void emit_report(const Analysis& analysis, const ReportSpec& spec, const std::filesystem::path& dir);

}  // namespace umlbench::report
