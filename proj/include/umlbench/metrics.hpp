#pragma once

// Per-diagram and per-model quality metrics: method quantity (MQ), signature
// richness (SR), annotation completeness (AC), structural fidelity (SF) and
// syntactic correctness (SC).
//
// Percentages are on a 0-100 scale. Quantities that are undefined for a
// diagram (for example redundancy of an empty method list) are NaN.

#include <array>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "umlbench/corpus.hpp"
#include "umlbench/puml.hpp"

namespace umlbench::metrics {

class TooFewNames : public Error {
 public:
  using Error::Error;
};

// ---- MQ ----------------------------------------------------------------

std::size_t method_quantity(const puml::Diagram& diagram);

/// (class name, method count) in declaration order; sums to method_quantity.
std::vector<std::pair<std::string, std::size_t>> methods_per_class(const puml::Diagram& diagram);

/// All methods of a diagram in class then source order.
std::vector<puml::MethodRecord> all_methods(const puml::Diagram& diagram);

// ---- SR ----------------------------------------------------------------

/// M / U over raw, case-sensitive names. Throws EmptyInputError.
double name_redundancy(const std::vector<std::string>& names);

/// Percent of methods with a return type other than "void" (any case).
double return_type_completeness(const std::vector<puml::MethodRecord>& methods);

/// Edit distance over Unicode code points.
std::size_t levenshtein(std::string_view a, std::string_view b);

/// Mean normalized edit distance over unordered pairs of distinct names.
/// Duplicates in the input are collapsed first. Throws TooFewNames when fewer
/// than two distinct names remain.
double levenshtein_diversity(const std::vector<std::string>& unique_names);

struct ParamStats {
  double mean = 0.0;
  double iqr = 0.0;
};

/// Mean and type-7 IQR of per-method parameter counts.
ParamStats param_stats(const std::vector<puml::MethodRecord>& methods);

/// `^[a-z][A-Za-z0-9]*$`.
bool is_camel_case(std::string_view name);

double naming_convention_rate(const std::vector<std::string>& names);

/// Order of the visibility columns everywhere: + - # ~ none.
inline constexpr std::array<puml::Visibility, 5> kVisibilityOrder = {
    puml::Visibility::Public, puml::Visibility::Private, puml::Visibility::Protected, puml::Visibility::Package,
    puml::Visibility::None};

struct SRRow {
  std::array<double, 5> visibility_pct{};
  double camelcase_pct = 0.0;
  double mean_params = 0.0;
  double param_iqr = 0.0;
  double rtc_pct = 0.0;
  double redundancy = 0.0;
  double lexdiv = 0.0;
};

/// All SR components for one method list. Throws EmptyInputError when empty;
/// lexdiv is NaN when fewer than two distinct names exist.
SRRow signature_richness(const std::vector<puml::MethodRecord>& methods);

std::array<std::size_t, 5> visibility_counts(const std::vector<puml::MethodRecord>& methods);

// ---- AC ----------------------------------------------------------------

enum class Annotation { Full, UcOnly, ActionOnly, None };

Annotation classify_annotation(const puml::MethodRecord& method);

struct ACRow {
  std::size_t full = 0;
  std::size_t uc_only = 0;
  std::size_t action_only = 0;
  std::size_t none = 0;

  std::size_t total() const { return full + uc_only + action_only + none; }
  ACRow& operator+=(const ACRow& o);
  bool operator==(const ACRow&) const = default;
};

ACRow annotation_completeness(const std::vector<puml::MethodRecord>& methods);

// ---- SF ----------------------------------------------------------------

enum class Element { Package, Enum, EnumValue, Class, Attribute, Relationship };
inline constexpr std::array<Element, 6> kElements = {Element::Package, Element::Enum,      Element::EnumValue,
                                                     Element::Class,   Element::Attribute, Element::Relationship};
std::string_view element_name(Element e);

/// Canonical comparison keys of one element category. Methods never
/// contribute.
std::vector<std::string> element_keys(const puml::Diagram& diagram, Element category);

/// 100 |A ∩ B| / |A ∪ B| over distinct keys; 100 when both are empty.
double jaccard_percent(const std::vector<std::string>& a, const std::vector<std::string>& b);

struct SFRow {
  std::array<double, 6> per_category{};
  double global = 0.0;
};

SFRow structural_fidelity(const puml::Diagram& augmented, const puml::Diagram& baseline);

// ---- SC ----------------------------------------------------------------

struct SCRow {
  std::string model;
  std::size_t correct = 0;
  std::size_t errored = 0;

  double rate() const;
};

/// One row per model in index order.
std::vector<SCRow> syntactic_correctness(const corpus::CorpusIndex& index);

// ---- Frames ------------------------------------------------------------

/// One row per corpus entry; content metrics are NaN when the entry did not
/// parse.
struct MetricRow {
  std::string model;
  int run = 0;
  bool parsed = false;
  bool valid = false;
  std::size_t mq = 0;
  SRRow sr;
  ACRow ac;
  SFRow sf;
};

struct MetricFrame {
  std::vector<MetricRow> rows;

  /// Fixed columns, 4 decimal places, NA for undefined values.
  void write_csv(std::ostream& out) const;
  static const std::vector<std::string>& columns();
};

MetricFrame compute_frame(const corpus::CorpusIndex& index);

/// Per-model aggregates over parsed entries. Pooled figures treat all the
/// model's methods as one list.
struct ModelSummary {
  std::string model;
  std::size_t runs = 0;
  std::size_t parsed_runs = 0;
  std::size_t mq_total = 0;
  std::vector<double> mq_per_run;
  double mq_mean = 0.0;
  double mq_sd = 0.0;
  double mq_sem = 0.0;
  std::array<std::size_t, 5> visibility_counts{};
  SRRow pooled_sr;
  /// Mean over runs of per-run lexdiv (runs with fewer than two names skipped).
  double lexdiv_run_mean = 0.0;
  ACRow ac;
  std::array<double, 6> sf_mean{};
  double sf_global_mean = 0.0;
  std::size_t sc_correct = 0;
  std::size_t sc_errored = 0;
  /// Mean methods per baseline-relevant class name over parsed runs.
  std::map<std::string, double> mean_methods_per_class;
};

std::vector<ModelSummary> summarize_models(const corpus::CorpusIndex& index, const MetricFrame& frame);

/// Models sorted by descending total MQ, ties by name.
std::vector<ModelSummary> order_by_mq(std::vector<ModelSummary> summaries);

}  // namespace umlbench::metrics
