#pragma once

// Corpus discovery and persistence. Diagrams are named `<Model>_run<N>.puml`;
// every matching file under a directory becomes one entry, parsed and
// validated independently.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "umlbench/error.hpp"
#include "umlbench/puml.hpp"

namespace umlbench::corpus {

class NamingError : public Error {
 public:
  using Error::Error;
};

class BaselineInvalid : public Error {
 public:
  using Error::Error;
};

class NoDiagram : public Error {
 public:
  using Error::Error;
};

struct CorpusEntry {
  std::string model_name;
  int run_index = 0;
  std::string source_path;
  /// Present iff the internal parser found no error-severity issue.
  std::optional<puml::Diagram> diagram;
  puml::ValidationReport validation;
};

struct CorpusIndex {
  /// Sorted by (model_name, run_index); the pair is unique.
  std::vector<CorpusEntry> entries;
  /// Methodless reference model.
  puml::Diagram baseline;
  /// `.puml` files whose names do not follow the run naming pattern.
  std::vector<std::string> skipped;

  /// Distinct model names in entry order.
  std::vector<std::string> models() const;
};

struct ScanOptions {
  /// Parallel parse workers; 0 means hardware concurrency.
  unsigned workers = 1;
  /// Optional compiler command, `{file}` is replaced with the quoted path.
  /// A non-zero exit status marks the entry invalid.
  std::optional<std::string> external_validator;
};

/// Splits `Model_runN[.ext]` into (Model, N). The match on "run" is
/// case-insensitive and the model is everything before the last `_run`.
std::pair<std::string, int> parse_filename(std::string_view name);

/// Parses and checks the baseline; throws BaselineInvalid if it declares any
/// method or does not parse.
puml::Diagram load_baseline(const std::filesystem::path& baseline);

CorpusIndex scan_corpus(const std::filesystem::path& directory, const std::filesystem::path& baseline,
                        const ScanOptions& options = {});

/// Builds a single entry from source text (no file system access).
CorpusEntry make_entry(std::string model_name, int run_index, std::string source_path, std::string_view text);

/// Runs `command_template` against `file`; returns the exit status.
int run_external_validator(const std::string& command_template, const std::filesystem::path& file);

nlohmann::ordered_json diagram_to_json(const puml::Diagram& diagram);
puml::Diagram diagram_from_json(const nlohmann::ordered_json& doc);

/// Throws NoDiagram when the entry did not parse.
nlohmann::ordered_json export_parsed(const CorpusEntry& entry);

/// Writes `<Model>_run<N>.json` for every parsed entry plus `index.json`
/// summarizing all entries, including unparsed ones.
void write_parsed(const CorpusIndex& index, const std::filesystem::path& out_dir);

/// Inverse of write_parsed.
CorpusIndex read_parsed(const std::filesystem::path& out_dir);

}  // namespace umlbench::corpus
