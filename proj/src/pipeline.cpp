#include "umlbench/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "umlbench/descriptive.hpp"
#include "umlbench/stats.hpp"

namespace umlbench::pipeline {

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using report::Series;
using report::StatRow;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void write_text(const fs::path& p, const std::string& text) {
  std::error_code ec;
  fs::create_directories(p.parent_path(), ec);
  if (ec) throw IoError("cannot create " + p.parent_path().string() + ": " + ec.message());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("write failed: " + p.string());
}

void write_json(const fs::path& p, const ordered_json& j) { write_text(p, j.dump(2) + "\n"); }

template <typename F>
StatRow attempt(const std::string& family, const std::string& test, const std::string& label, F&& f) {
  StatRow row{family, {}};
  try {
    row.result = f();
  } catch (const Error&) {
    row.result = {};
    row.result.test_name = test;
    row.result.statistic = kNaN;
    row.result.p_raw = kNaN;
  }
  row.result.label = label;
  return row;
}

struct Groups {
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;
};

Groups nonempty(const Series& s) {
  Groups g;
  for (const auto& [model, xs] : s.groups) {
    if (xs.empty()) continue;
    g.names.push_back(model);
    g.values.push_back(xs);
  }
  return g;
}

void kruskal_family(std::vector<StatRow>& out, const std::string& family, const std::string& label, const Series* s,
                    bool posthoc) {
  const Groups g = s ? nonempty(*s) : Groups{};
  out.push_back(attempt(family, "kruskal_wallis", label, [&] { return stats::kruskal_wallis(g.values); }));
  if (!posthoc || !std::isfinite(out.back().result.p_raw)) return;
  for (auto& pr : stats::dunn_posthoc(g.values)) {
    pr.result.label = label + ": " + g.names[pr.i] + " vs " + g.names[pr.j];
    out.push_back({family, std::move(pr.result)});
  }
}

StatRow chi2_row(const std::string& family, const std::string& label, const stats::CountTable& table) {
  return attempt(family, "chi2_independence", label,
                 [&] { return stats::chi2_independence(stats::drop_empty_margins(table)); });
}

void holm_by_family(std::vector<StatRow>& rows) {
  std::map<std::string, std::vector<std::size_t>> families;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].result.test_name != "dunn" && std::isfinite(rows[i].result.p_raw)) families[rows[i].family].push_back(i);
  }
  for (const auto& [family, idx] : families) {
    std::vector<double> ps;
    for (auto i : idx) ps.push_back(rows[i].result.p_raw);
    const auto adj = stats::holm_adjust(ps);
    for (std::size_t k = 0; k < idx.size(); ++k) rows[idx[k]].result.p_adjusted = adj[k];
  }
}

Series series_of(std::string name, std::string title, std::string unit,
                 const std::vector<metrics::ModelSummary>& ordered) {
  Series s{std::move(name), std::move(title), std::move(unit), {}};
  for (const auto& m : ordered) s.groups.emplace_back(m.model, std::vector<double>{});
  return s;
}

std::vector<double>& slot(Series& s, const std::string& model) {
  for (auto& [m, xs] : s.groups) {
    if (m == model) return xs;
  }
  s.groups.emplace_back(model, std::vector<double>{});
  return s.groups.back().second;
}

const char* const kSfLabels[] = {"Pkg", "Enum", "Ev", "Cls", "Attr", "Rel"};

bool has_parsed(const fs::path& out) { return fs::exists(out / "parsed" / "index.json"); }

}  // namespace

void check_config(const RunConfig& c) {
  if (c.seeds.empty()) throw ConfigError("at least one seed is required");
  if (c.top_k && *c.top_k == 0) throw ConfigError("--top-k must be at least 1");
  if (c.output_dir.empty()) throw ConfigError("an output directory is required");
  for (report::Table t : c.report.tables) (void)c.report.decimals(t);
}

corpus::CorpusIndex load_index(const RunConfig& c) {
  check_config(c);
  if (c.corpus_dir.empty()) {
    if (!has_parsed(c.output_dir)) {
      throw ConfigError("no --corpus given and no parsed intermediates under " + (c.output_dir / "parsed").string());
    }
    return corpus::read_parsed(c.output_dir / "parsed");
  }
  if (!fs::is_directory(c.corpus_dir)) throw ConfigError("corpus directory not found: " + c.corpus_dir.string());
  if (c.baseline_path.empty()) throw ConfigError("--baseline is required with --corpus");
  if (!fs::is_regular_file(c.baseline_path)) throw ConfigError("baseline not found: " + c.baseline_path.string());
  corpus::ScanOptions opts;
  opts.workers = c.workers;
  opts.external_validator = c.external_validator;
  return corpus::scan_corpus(c.corpus_dir, c.baseline_path, opts);
}

std::vector<Series> build_series(const corpus::CorpusIndex& index, const metrics::MetricFrame& frame,
                                 const std::vector<metrics::ModelSummary>& ordered,
                                 const consensus::ConsensusReport& cons) {
  auto mq = series_of("mq", "Methods per diagram", "methods", ordered);
  auto params = series_of("params", "Parameters per method", "parameters", ordered);
  auto lexdiv = series_of("lexdiv", "Lexical diversity per diagram", "normalized edit distance", ordered);
  auto sf = series_of("sf_global", "Structural fidelity per diagram", "percent", ordered);
  auto tmc = series_of("tmc", "Normalized core coverage per diagram", "percent", ordered);
  auto cmc = series_of("cmc", "Raw core coverage per diagram", "percent", ordered);
  for (const auto& row : frame.rows) {
    if (!row.parsed) continue;
    slot(mq, row.model).push_back(static_cast<double>(row.mq));
    if (std::isfinite(row.sr.lexdiv)) slot(lexdiv, row.model).push_back(row.sr.lexdiv);
    if (std::isfinite(row.sf.global)) slot(sf, row.model).push_back(row.sf.global);
  }
  for (const auto& e : index.entries) {
    if (!e.diagram) continue;
    auto& xs = slot(params, e.model_name);
    for (const auto& m : metrics::all_methods(*e.diagram)) xs.push_back(static_cast<double>(m.parameters.size()));
  }
  for (const auto& r : cons.runs) {
    slot(tmc, r.model).push_back(r.tmc_pct);
    slot(cmc, r.model).push_back(r.cmc_pct);
  }
  return {mq, params, lexdiv, sf, tmc, cmc};
}

std::vector<StatRow> run_statistics(const std::vector<Series>& series, const metrics::MetricFrame& frame,
                                    const std::vector<metrics::ModelSummary>& ordered,
                                    const consensus::ConsensusReport& cons) {
  auto find = [&](const std::string& name) -> const Series* {
    for (const auto& s : series) {
      if (s.name == name) return &s;
    }
    return nullptr;
  };
  std::vector<StatRow> rows;
  kruskal_family(rows, "MQ", "methods per diagram", find("mq"), true);

  kruskal_family(rows, "SR", "parameters per method", find("params"), true);
  kruskal_family(rows, "SR", "lexical diversity per diagram", find("lexdiv"), false);
  stats::CountTable vis, rtc;
  for (const auto& m : ordered) {
    vis.emplace_back(m.visibility_counts.begin(), m.visibility_counts.end());
    const double n = static_cast<double>(m.mq_total);
    const double typed = std::isfinite(m.pooled_sr.rtc_pct) ? std::round(m.pooled_sr.rtc_pct * n / 100.0) : 0.0;
    rtc.push_back({typed, n - typed});
  }
  rows.push_back(chi2_row("SR", "visibility", vis));
  rows.push_back(chi2_row("SR", "return type", rtc));

  stats::CountTable ac;
  for (const auto& m : ordered) {
    ac.push_back({static_cast<double>(m.ac.full), static_cast<double>(m.ac.uc_only),
                  static_cast<double>(m.ac.action_only), static_cast<double>(m.ac.none)});
  }
  rows.push_back(chi2_row("AC", "annotation category", ac));

  // Per-element fidelity substitutes for a model x element ANOVA.
  for (std::size_t k = 0; k <= metrics::kElements.size(); ++k) {
    const bool global = k == metrics::kElements.size();
    Series s = series_of("sf", "", "", ordered);
    for (const auto& row : frame.rows) {
      if (!row.parsed) continue;
      const double v = global ? row.sf.global : row.sf.per_category[k];
      if (std::isfinite(v)) slot(s, row.model).push_back(v);
    }
    kruskal_family(rows, "SF", global ? "Glob" : kSfLabels[k], &s, false);
  }

  stats::CountTable sc;
  for (const auto& m : ordered) sc.push_back({static_cast<double>(m.sc_correct), static_cast<double>(m.sc_errored)});
  rows.push_back(chi2_row("SC", "compiled vs errored", sc));

  kruskal_family(rows, "TMC", "normalized core coverage per diagram", find("tmc"), false);
  kruskal_family(rows, "CMC", "raw core coverage per diagram", find("cmc"), false);

  std::vector<double> spc;
  for (const auto& p : cons.placements) spc.push_back(p.consistency_pct);
  rows.push_back(attempt("SPC", "wilcoxon_signed_rank", "placement consistency vs 100",
                         [&]() -> stats::StatResult { return stats::wilcoxon_signed_rank(spc, 100.0); }));

  holm_by_family(rows);
  return rows;
}

std::vector<report::BootstrapRow> run_bootstrap(const std::vector<Series>& series,
                                                const consensus::ConsensusReport& cons,
                                                const std::vector<std::uint64_t>& seeds, unsigned workers) {
  std::vector<report::BootstrapRow> out;
  for (const auto seed : seeds) {
    for (const auto& s : series) {
      if (s.name != "mq" && s.name != "tmc" && s.name != "cmc") continue;
      for (const auto& [model, xs] : s.groups) {
        if (xs.empty()) continue;
        out.push_back({s.name, model, seed, stats::mean(xs), stats::bootstrap_ci(xs, seed, 1000, workers)});
      }
    }
    std::vector<double> spc;
    for (const auto& p : cons.placements) spc.push_back(p.consistency_pct);
    if (!spc.empty()) out.push_back({"spc", "all", seed, stats::mean(spc), stats::bootstrap_ci(spc, seed, 1000, workers)});
  }
  return out;
}

consensus::ConsensusReport consensus_or_empty(const corpus::CorpusIndex& index, std::optional<std::size_t> k) {
  try {
    return consensus::analyze(index, k);
  } catch (const consensus::ZeroDiagrams&) {
  } catch (const consensus::InsufficientNames&) {
  }
  consensus::ConsensusReport empty;
  empty.spc_mean = kNaN;
  empty.top_set_overlap = kNaN;
  return empty;
}

report::Analysis analyze(const corpus::CorpusIndex& index, const RunConfig& config) {
  report::Analysis a;
  const auto frame = metrics::compute_frame(index);
  a.models = metrics::order_by_mq(metrics::summarize_models(index, frame));
  a.consensus = consensus_or_empty(index, config.top_k);
  a.series = build_series(index, frame, a.models, a.consensus);
  a.stats = run_statistics(a.series, frame, a.models, a.consensus);
  a.bootstrap = run_bootstrap(a.series, a.consensus, config.seeds, config.workers);
  return a;
}

ordered_json validation_json(const corpus::CorpusIndex& index) {
  ordered_json entries = ordered_json::array();
  std::size_t valid = 0;
  for (const auto& e : index.entries) {
    ordered_json issues = ordered_json::array();
    for (const auto& i : e.validation.issues) {
      issues.push_back({{"line", i.line},
                        {"kind", std::string(puml::issue_kind_name(i.kind))},
                        {"severity", i.severity == puml::Severity::Error ? "error" : "warning"},
                        {"message", i.message}});
    }
    valid += e.validation.is_valid;
    entries.push_back({{"model", e.model_name}, {"run", e.run_index}, {"valid", e.validation.is_valid},
                       {"issues", std::move(issues)}});
  }
  ordered_json models = ordered_json::array();
  for (const auto& r : metrics::syntactic_correctness(index)) {
    models.push_back({{"model", r.model}, {"correct", r.correct}, {"errored", r.errored}});
  }
  return {{"diagrams", index.entries.size()}, {"valid", valid}, {"models", std::move(models)},
          {"entries", std::move(entries)}};
}

ordered_json consensus_json(const consensus::ConsensusReport& r) {
  auto core = [](const consensus::ConsensusSet& c) {
    ordered_json names = ordered_json::array();
    for (std::size_t i = 0; i < c.names.size(); ++i) names.push_back({{"name", c.names[i]}, {"count", c.counts[i]}});
    return ordered_json{{"k", c.k}, {"boundary_tie", c.boundary_tie}, {"names", std::move(names)}};
  };
  ordered_json runs = ordered_json::array();
  for (const auto& x : r.runs) runs.push_back({{"model", x.model}, {"run", x.run}, {"tmc_pct", x.tmc_pct}, {"cmc_pct", x.cmc_pct}});
  ordered_json models = ordered_json::array();
  for (const auto& m : r.models) {
    models.push_back({{"model", m.model}, {"tmc_mean", m.tmc_mean}, {"cmc_mean", m.cmc_mean},
                      {"class_match_pct", m.class_match_pct}});
  }
  ordered_json placements = ordered_json::array();
  for (const auto& p : r.placements) {
    placements.push_back({{"method", p.method}, {"display_name", p.display_name}, {"dominant_class", p.dominant_class},
                          {"dominant_tie", p.dominant_tie}, {"models_generating", p.models_generating},
                          {"models_matching", p.models_matching}, {"consistency_pct", p.consistency_pct}});
  }
  ordered_json agreement = ordered_json::object();
  for (const auto& [name, n] : r.agreement) agreement[name] = n;
  return {{"k", r.k},
          {"total_methods", r.total_methods},
          {"total_diagrams", r.total_diagrams},
          {"tmc_core", core(r.tmc_core)},
          {"cmc_core", core(r.cmc_core)},
          {"model_names", r.model_names},
          {"runs", std::move(runs)},
          {"models", std::move(models)},
          {"jaccard", r.jaccard},
          {"presence", r.presence},
          {"agreement", std::move(agreement)},
          {"placements", std::move(placements)},
          {"spc_mean", r.spc_mean},
          {"top_set_overlap", r.top_set_overlap}};
}

ordered_json stats_json(const report::Analysis& a) {
  auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
  ordered_json tests = ordered_json::array();
  for (const auto& row : a.stats) {
    const auto& r = row.result;
    tests.push_back({{"family", row.family},
                     {"test", r.test_name},
                     {"label", r.label},
                     {"statistic", r.statistic},
                     {"df", opt(r.df)},
                     {"p_raw", r.p_raw},
                     {"p_holm", opt(r.p_adjusted)},
                     {"effect_name", r.effect ? ordered_json(r.effect->name) : ordered_json(nullptr)},
                     {"effect_value", r.effect ? ordered_json(r.effect->value) : ordered_json(nullptr)},
                     {"magnitude", r.effect && r.effect->magnitude
                                       ? ordered_json(std::string(stats::magnitude_name(*r.effect->magnitude)))
                                       : ordered_json(nullptr)}});
  }
  ordered_json boot = ordered_json::array();
  for (const auto& b : a.bootstrap) {
    boot.push_back({{"metric", b.metric}, {"model", b.model}, {"seed", b.seed}, {"mean", b.mean},
                    {"ci_low", b.ci.low}, {"ci_high", b.ci.high}});
  }
  return {{"tests", std::move(tests)}, {"bootstrap", std::move(boot)}};
}

corpus::CorpusIndex stage_parse(const RunConfig& config) {
  auto index = load_index(config);
  if (!config.corpus_dir.empty()) corpus::write_parsed(index, config.output_dir / "parsed");
  return index;
}

void stage_validate(const RunConfig& config) {
  write_json(config.output_dir / "validation.json", validation_json(stage_parse(config)));
}

void stage_metrics(const RunConfig& config) {
  const auto frame = metrics::compute_frame(stage_parse(config));
  std::ostringstream csv;
  frame.write_csv(csv);
  write_text(config.output_dir / "metrics" / "frame.csv", csv.str());
}

void stage_consensus(const RunConfig& config) {
  write_json(config.output_dir / "consensus.json", consensus_json(consensus_or_empty(stage_parse(config), config.top_k)));
}

void stage_stats(const RunConfig& config) {
  write_json(config.output_dir / "stats.json", stats_json(analyze(stage_parse(config), config)));
}

void stage_report(const RunConfig& config) {
  report::emit_report(analyze(stage_parse(config), config), config.report, config.output_dir / "reports");
}

report::Analysis run_pipeline(const RunConfig& config) {
  if (config.report.tables.empty()) throw report::EmptySelection("no tables selected");
  const auto index = stage_parse(config);
  write_json(config.output_dir / "validation.json", validation_json(index));
  const auto frame = metrics::compute_frame(index);
  std::ostringstream csv;
  frame.write_csv(csv);
  write_text(config.output_dir / "metrics" / "frame.csv", csv.str());
  auto a = analyze(index, config);
  write_json(config.output_dir / "consensus.json", consensus_json(a.consensus));
  write_json(config.output_dir / "stats.json", stats_json(a));
  const auto reports = config.output_dir / "reports";
  std::error_code ec;
  fs::remove_all(reports, ec);
  report::emit_report(a, config.report, reports);
  return a;
}

}  // namespace umlbench::pipeline
