#pragma once

// Evaluation pipeline: scan -> validate -> metrics -> consensus -> stats ->
// report. Each stage persists its output under the output directory:
//
//   parsed/index.json, parsed/<Model>_run<N>.json
//   validation.json
//   metrics/frame.csv
//   consensus.json
//   stats.json
//   reports/...
//
// Later stages reload parsed/ when no corpus directory is given.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "umlbench/consensus.hpp"
#include "umlbench/corpus.hpp"
#include "umlbench/metrics.hpp"
#include "umlbench/report.hpp"

namespace umlbench::pipeline {

struct RunConfig {
  std::filesystem::path corpus_dir;
  std::filesystem::path baseline_path;
  std::filesystem::path output_dir;
  std::optional<std::size_t> top_k;
  std::vector<std::uint64_t> seeds{17, 42, 123};
  unsigned workers = 1;
  std::optional<std::string> external_validator;
  report::ReportSpec report;
};

/// Throws ConfigError for an empty seed list, k = 0 or an empty output path.
void check_config(const RunConfig& config);

/// Scans `corpus_dir` when set (baseline required), otherwise reads
/// `output_dir/parsed`. Throws ConfigError for missing paths.
corpus::CorpusIndex load_index(const RunConfig& config);

/// Per-model samples used by the tests and charts: mq, params, lexdiv,
/// sf_global, tmc, cmc.
std::vector<report::Series> build_series(const corpus::CorpusIndex& index, const metrics::MetricFrame& frame,
                                         const std::vector<metrics::ModelSummary>& ordered,
                                         const consensus::ConsensusReport& consensus);

/// The test battery, grouped into families (MQ, SR, AC, SF, SC, TMC, CMC,
/// SPC). Omnibus p-values are Holm-adjusted within their family; Dunn pairs
/// carry the adjustment over the pairs of their omnibus test. A test that is
/// undefined on the data yields a row of NaNs.
std::vector<report::StatRow> run_statistics(const std::vector<report::Series>& series,
                                            const metrics::MetricFrame& frame,
                                            const std::vector<metrics::ModelSummary>& ordered,
                                            const consensus::ConsensusReport& consensus);

/// Bootstrap intervals of the mq, tmc and cmc per-model means and of the
/// mean placement consistency, for every seed.
std::vector<report::BootstrapRow> run_bootstrap(const std::vector<report::Series>& series,
                                                const consensus::ConsensusReport& consensus,
                                                const std::vector<std::uint64_t>& seeds, unsigned workers);

/// Consensus over the index; an empty report (k = 0) when the corpus has no
/// method names.
consensus::ConsensusReport consensus_or_empty(const corpus::CorpusIndex& index, std::optional<std::size_t> k);

report::Analysis analyze(const corpus::CorpusIndex& index, const RunConfig& config);

nlohmann::ordered_json validation_json(const corpus::CorpusIndex& index);
nlohmann::ordered_json consensus_json(const consensus::ConsensusReport& report);
nlohmann::ordered_json stats_json(const report::Analysis& analysis);

// Stage runners; each writes its artifact and returns the loaded index.
corpus::CorpusIndex stage_parse(const RunConfig& config);
void stage_validate(const RunConfig& config);
void stage_metrics(const RunConfig& config);
void stage_consensus(const RunConfig& config);
void stage_stats(const RunConfig& config);
void stage_report(const RunConfig& config);

/// All stages in order.
report::Analysis run_pipeline(const RunConfig& config);

}  // namespace umlbench::pipeline
