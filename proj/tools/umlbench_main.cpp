// umlbench: evaluation pipeline and LLM session runner.
//
// Exit codes: 0 success, 1 other failure, 2 configuration, 3 I/O,
// 4 baseline cannot be used.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "umlbench/corpus.hpp"
#include "umlbench/gateway.hpp"
#include "umlbench/pipeline.hpp"
#include "umlbench/report.hpp"

namespace fs = std::filesystem;
using namespace umlbench;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kIo = 3, kBaseline = 4 };

struct Options {
  std::string corpus, baseline, out = "out", format = "csv", external;
  std::optional<std::size_t> top_k;
  std::vector<std::uint64_t> seeds;
  unsigned workers = 1;
  std::vector<std::string> tables;
  bool no_charts = false;
};

struct LlmOptions {
  std::string providers, instruction, use_cases, baseline, corpus, archive, mode;
  int runs = 10;
  int first_run = 1;
};

void add_pipeline_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--corpus", o.corpus, "Directory of <Model>_run<N>.puml files");
  cmd->add_option("--baseline", o.baseline, "Methodless baseline diagram");
  cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
  cmd->add_option("--top-k", o.top_k, "Consensus set size (default: ceil(methods / diagrams))")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seeds, "Bootstrap seed; repeatable (default 17 42 123)");
  cmd->add_option("--workers", o.workers, "Parallel parse and bootstrap workers")->capture_default_str();
  cmd->add_option("--external-validator", o.external, "Compiler command with a {file} placeholder");
  cmd->add_option("--format", o.format, "Table format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  cmd->add_option("--table", o.tables, "Restrict the report to these tables; repeatable");
  cmd->add_flag("--no-charts", o.no_charts, "Skip SVG charts");
}

pipeline::RunConfig to_config(const Options& o) {
  pipeline::RunConfig c;
  c.corpus_dir = o.corpus;
  c.baseline_path = o.baseline;
  c.output_dir = o.out;
  c.top_k = o.top_k;
  if (!o.seeds.empty()) c.seeds = o.seeds;
  c.workers = o.workers;
  if (!o.external.empty()) c.external_validator = o.external;
  if (!o.tables.empty()) {
    c.report.tables.clear();
    for (const auto& t : o.tables) c.report.tables.push_back(report::table_from_name(t));
  }
  c.report.charts = !o.no_charts;
  c.report.format = o.format == "json" ? report::Format::Json : report::Format::Csv;
  return c;
}

std::string read_text(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("--") + what + " is required");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(std::string(what) + " file not found: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_llm(const LlmOptions& o) {
  const auto seq = gateway::assemble_session(read_text(o.instruction, "instruction"), read_text(o.baseline, "baseline"),
                                             read_text(o.use_cases, "use-cases"));
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text(o.providers, "providers"));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("providers file is not valid JSON: ") + e.what());
  }
  const auto& list = doc.is_object() && doc.contains("providers") ? doc["providers"] : doc;
  if (!list.is_array() || list.empty()) throw ConfigError("providers file must hold a non-empty array");
  if (o.runs < 1 || o.first_run < 1) throw ConfigError("--runs and --first-run must be at least 1");
  for (const auto& p : list) {
    auto cfg = gateway::provider_from_json(p);
    if (!o.mode.empty()) cfg.mode = gateway::mode_from_string(o.mode);
    if (!o.archive.empty()) cfg.archive_dir = o.archive;
    for (int r = o.first_run; r < o.first_run + o.runs; ++r) {
      const auto ex = gateway::run_session(cfg, seq, r, o.corpus);
      std::cout << cfg.name << " run " << r << ": " << ex.diagram.size() << " bytes";
      if (ex.multiple) std::cout << " (several diagrams in response, kept the first)";
      std::cout << '\n';
    }
  }
  return kOk;
}

void print_summary(const report::Analysis& a, const fs::path& out) {
  std::size_t methods = 0, diagrams = 0;
  for (const auto& m : a.models) {
    methods += m.mq_total;
    diagrams += m.runs;
  }
  std::cout << a.models.size() << " models, " << diagrams << " diagrams, " << methods << " methods, k = "
            << a.consensus.k << "\nreport written to " << (out / "reports").string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark toolkit for LLM-generated UML class diagram methods"};
  app.require_subcommand(1);
  Options o;
  LlmOptions llm;

  struct Stage {
    const char* name;
    const char* help;
  };
  const Stage stages[] = {{"parse", "Parse the corpus into parsed/*.json"},
                          {"validate", "Syntax-check every diagram into validation.json"},
                          {"metrics", "Per-diagram metric frame into metrics/frame.csv"},
                          {"consensus", "Cross-model naming consensus into consensus.json"},
                          {"stats", "Statistical tests and bootstrap intervals into stats.json"},
                          {"report", "CSV tables, charts and summary.md under reports/"},
                          {"all", "Every stage in order"}};
  std::map<std::string, CLI::App*> cmds;
  for (const auto& s : stages) {
    cmds[s.name] = app.add_subcommand(s.name, s.help);
    add_pipeline_options(cmds[s.name], o);
  }
  auto* llm_cmd = app.add_subcommand("run-llm", "Run the three-prompt session against configured providers");
  llm_cmd->add_option("--providers", llm.providers, "JSON file with an array of provider objects")->required();
  llm_cmd->add_option("--instruction", llm.instruction, "Instruction prompt file")->required();
  llm_cmd->add_option("--baseline", llm.baseline, "Methodless baseline diagram")->required();
  llm_cmd->add_option("--use-cases", llm.use_cases, "Use-case prompt file")->required();
  llm_cmd->add_option("--corpus", llm.corpus, "Directory receiving <Model>_run<N>.puml");
  llm_cmd->add_option("--archive", llm.archive, "Archive directory (overrides the providers file)");
  llm_cmd->add_option("--mode", llm.mode, "live, record or replay (overrides the providers file)")
      ->check(CLI::IsMember({"live", "record", "replay"}));
  llm_cmd->add_option("--runs", llm.runs, "Sessions per provider")->capture_default_str();
  llm_cmd->add_option("--first-run", llm.first_run, "Index of the first run")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*llm_cmd) return run_llm(llm);
    const auto config = to_config(o);
    if (*cmds["parse"]) {
      const auto index = pipeline::stage_parse(config);
      std::cout << index.entries.size() << " diagrams, " << index.skipped.size() << " skipped\n";
    } else if (*cmds["validate"]) {
      pipeline::stage_validate(config);
    } else if (*cmds["metrics"]) {
      pipeline::stage_metrics(config);
    } else if (*cmds["consensus"]) {
      pipeline::stage_consensus(config);
    } else if (*cmds["stats"]) {
      pipeline::stage_stats(config);
    } else if (*cmds["report"]) {
      pipeline::stage_report(config);
    } else if (*cmds["all"]) {
      print_summary(pipeline::run_pipeline(config), config.output_dir);
    }
    return kOk;
  } catch (const corpus::BaselineInvalid& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBaseline;
  } catch (const gateway::BaselineHasMethods& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBaseline;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const report::EmptySelection& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const gateway::AuthError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const gateway::ReplayMiss& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const gateway::TransportError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}
