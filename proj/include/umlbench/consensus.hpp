#pragma once

// Cross-model lexical agreement: top-method consensus (TMC), core-method
// consensus (CMC) and structural placement consistency (SPC).
//
// Names are counted once per (diagram, class, name). TMC and all agreement /
// placement figures use normalized names; CMC coverage and the pairwise model
// Jaccard use raw names.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "umlbench/corpus.hpp"
#include "umlbench/error.hpp"
#include "umlbench/puml.hpp"

namespace umlbench::consensus {

class ZeroDiagrams : public Error {
 public:
  using Error::Error;
};
class InsufficientNames : public Error {
 public:
  using Error::Error;
};
class BothEmpty : public Error {
 public:
  using Error::Error;
};
class UnknownName : public Error {
 public:
  using Error::Error;
};
class NoCoreMethodsGenerated : public Error {
 public:
  using Error::Error;
};

/// Lowercase ASCII letters and digits only. Throws EmptyInputError when
/// nothing remains.
std::string normalize_name(std::string_view raw);

/// ceil(total_methods / total_diagrams).
std::size_t compute_k(std::size_t total_methods, std::size_t total_diagrams);

struct FrequencyEntry {
  std::size_t count = 0;
  /// Raw spelling -> occurrences; keys are the raw variants.
  std::map<std::string, std::size_t> raw_variants;
  std::map<std::string, std::size_t> class_counts;

  /// Most frequent raw spelling, lexicographically smallest on ties.
  std::string display_name() const;
};

enum class KeyMode { Normalized, Raw };

class FrequencyTable {
 public:
  explicit FrequencyTable(KeyMode mode = KeyMode::Normalized) : mode_(mode) {}

  void add(const puml::Diagram& diagram);
  /// Associative merge; both tables must use the same key mode.
  void merge(const FrequencyTable& other);

  KeyMode mode() const { return mode_; }
  std::string key_of(std::string_view raw) const;
  const std::map<std::string, FrequencyEntry>& entries() const { return entries_; }
  const FrequencyEntry* find(const std::string& key) const;

 private:
  KeyMode mode_;
  std::map<std::string, FrequencyEntry> entries_;
};

struct ConsensusSet {
  std::size_t k = 0;
  /// Ordered by (-count, name).
  std::vector<std::string> names;
  std::vector<std::size_t> counts;
  /// True when the entry just outside the cut has the same count as the
  /// last one inside it.
  bool boundary_tie = false;
};

ConsensusSet top_k(const FrequencyTable& table, std::size_t k);

struct Coverage {
  std::vector<double> per_run;
  double mean = 0.0;
};

/// Per run 100 |run ∩ benchmark| / k, plus the mean over runs.
Coverage coverage(const std::vector<std::set<std::string>>& model_runs, const ConsensusSet& benchmark);

/// |A ∩ B| / |A ∪ B|. Throws BothEmpty.
double pairwise_model_jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

/// For each core name, how many models' pooled name sets contain it.
std::map<std::string, std::size_t> agreement_counts(const ConsensusSet& core,
                                                    const std::map<std::string, std::set<std::string>>& per_model);

struct Dominant {
  std::string cls;
  bool tie = false;
};

/// Class with the highest count for `name`; ties go to the lexicographically
/// smallest class and set the flag.
Dominant dominant_class(const FrequencyTable& table, const std::string& name);

/// Per-method class assignments of one model: name -> class -> count.
using Assignments = std::map<std::string, std::map<std::string, std::size_t>>;

/// The model's own modal class for `name` (lexicographic tie-break), if the
/// model generated it.
std::optional<std::string> modal_class(const Assignments& model, const std::string& name);

/// Percent of the model's generated core methods whose modal class equals
/// the dominant class. Throws NoCoreMethodsGenerated.
double class_match_rate(const Assignments& model, const ConsensusSet& core,
                        const std::map<std::string, Dominant>& dominants);

struct PlacementRecord {
  std::string method;
  std::string display_name;
  std::string dominant_class;
  bool dominant_tie = false;
  std::size_t models_generating = 0;
  std::size_t models_matching = 0;
  double consistency_pct = 0.0;
};

struct RunCoverage {
  std::string model;
  int run = 0;
  double tmc_pct = 0.0;
  double cmc_pct = 0.0;
};

struct ModelConsensus {
  std::string model;
  double tmc_mean = 0.0;
  double cmc_mean = 0.0;
  /// Percent of generated core methods placed in their dominant class;
  /// NaN when the model generated none.
  double class_match_pct = 0.0;
};

struct ConsensusReport {
  std::size_t k = 0;
  std::size_t total_methods = 0;
  std::size_t total_diagrams = 0;
  ConsensusSet tmc_core;
  ConsensusSet cmc_core;
  std::vector<RunCoverage> runs;
  std::vector<ModelConsensus> models;
  /// Model order for the matrices below.
  std::vector<std::string> model_names;
  std::vector<std::vector<double>> jaccard;
  /// presence[i][m]: model m generated tmc_core.names[i].
  std::vector<std::vector<bool>> presence;
  std::map<std::string, std::size_t> agreement;
  std::vector<PlacementRecord> placements;
  /// Mean of placements' consistency_pct over methods generated by at least
  /// one model.
  double spc_mean = 0.0;
  /// |∩ S_m| / |∪ S_m| of the models' own normalized top-k sets.
  double top_set_overlap = 0.0;
};

/// Runs the full analysis over the parsed entries of `index`. `k_override`
/// replaces the computed k.
ConsensusReport analyze(const corpus::CorpusIndex& index, std::optional<std::size_t> k_override = std::nullopt);

}  // namespace umlbench::consensus
