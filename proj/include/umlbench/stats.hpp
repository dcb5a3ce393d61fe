#pragma once

// Nonparametric tests, effect sizes, multiplicity correction and seeded
// bootstrap. All p-values are two-sided. Ties receive mid-ranks.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "umlbench/descriptive.hpp"
#include "umlbench/error.hpp"

namespace umlbench::stats {

class DegenerateInput : public Error {
 public:
  using Error::Error;
};
class DegenerateMargins : public Error {
 public:
  using Error::Error;
};
class OutOfRange : public Error {
 public:
  using Error::Error;
};
class InvalidDf : public Error {
 public:
  using Error::Error;
};
class AllZeroDifferences : public Error {
 public:
  using Error::Error;
};

enum class Magnitude { Negligible, Small, Medium, Large };
std::string_view magnitude_name(Magnitude m);

struct EffectThresholds {
  double small;
  double medium;
  double large;

  /// Classifies |value|; values below `small` are negligible.
  Magnitude classify(double value) const;
};

inline constexpr EffectThresholds kCliffsThresholds{0.147, 0.33, 0.474};
inline constexpr EffectThresholds kCramersVThresholds{0.1, 0.3, 0.5};

struct EffectSize {
  std::string name;
  double value = 0.0;
  std::optional<Magnitude> magnitude;
};

struct StatResult {
  std::string test_name;
  /// Free-form subject, e.g. "Claude vs Mistral".
  std::string label;
  double statistic = 0.0;
  std::optional<double> df;
  double p_raw = 1.0;
  std::optional<double> p_adjusted;
  std::optional<EffectSize> effect;
};

// ---- distribution tails ---------------------------------------------

/// P(X > x) for X ~ chi-squared(df). Throws InvalidDf for df < 1.
double chi2_survival(double x, int df);

/// P(Z > z) for a standard normal Z.
double normal_survival(double z);

// ---- ranks ----------------------------------------------------------

/// 1-based mid-ranks of `values` in input order.
std::vector<double> midranks(std::span<const double> values);

/// Σ (t³ - t) over tie groups.
double tie_sum(std::span<const double> values);

// ---- tests ----------------------------------------------------------

/// H is divided by 1 - Σ(t³ - t)/(N³ - N); p from chi-squared with k - 1 df.
/// Effect size is epsilon-squared, H / (N - 1). Throws DegenerateInput for
/// fewer than two groups, an empty group, or all values identical.
StatResult kruskal_wallis(const std::vector<std::vector<double>>& groups);

struct PairwiseResult {
  std::size_t i = 0;
  std::size_t j = 0;
  StatResult result;
};

/// All unordered pairs i < j. Z = (mean rank i - mean rank j) / SE with the
/// tie-corrected pooled rank variance; Holm adjustment over the pairs. The
/// effect size is Cliff's delta of group i over group j.
std::vector<PairwiseResult> dunn_posthoc(const std::vector<std::vector<double>>& groups);

/// Holm step-down adjustment, returned in input order. Throws OutOfRange for
/// values outside [0, 1].
std::vector<double> holm_adjust(std::span<const double> p_values);

using CountTable = std::vector<std::vector<double>>;

/// Removes rows and columns whose totals are zero.
CountTable drop_empty_margins(const CountTable& table);

/// Pearson chi-squared test of independence with Cramér's V. Throws
/// DegenerateMargins when a row or column total is zero or the table has
/// fewer than two rows or columns.
StatResult chi2_independence(const CountTable& table);

/// sqrt(chi2 / (n (k - 1))) with k = min(rows, cols).
double cramers_v(double chi2, double n, std::size_t rows, std::size_t cols);

struct WilcoxonResult : StatResult {
  double w_plus = 0.0;
  double w_minus = 0.0;
  std::size_t n_used = 0;
  bool exact = false;
};

/// One-sample signed-rank test of `values - mu0`. Zero differences are
/// dropped. Statistic W = min(W+, W-). Exact null distribution (ties
/// included) for n <= exact_limit, normal approximation with tie and
/// continuity corrections otherwise.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> values, double mu0, std::size_t exact_limit = 25);

struct CliffsDelta {
  double delta = 0.0;
  Magnitude magnitude = Magnitude::Negligible;
};

/// (#(x > y) - #(x < y)) / (nx ny). Positive when x tends to exceed y.
CliffsDelta cliffs_delta(std::span<const double> x, std::span<const double> y);

/// 2U / (nx ny) - 1 with U the count of x over y pairs, ties counting 1/2.
/// Positive when x tends to exceed y.
double rank_biserial(std::span<const double> x, std::span<const double> y);

// ---- bootstrap ------------------------------------------------------

/// Counter-based generator: output k of stream s is splitmix64 finalization
/// applied to seed, stream and k. Identical on every platform.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next();
  /// Uniform integer in [0, bound) by Lemire's multiply-and-reject method.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Percentile (2.5, 97.5) interval of resampled means. Resample b draws
/// from stream b of `seed`, so the result does not depend on `workers`.
Interval bootstrap_ci(std::span<const double> values, std::uint64_t seed, std::size_t n_resamples = 1000,
                      unsigned workers = 1);

}  // namespace umlbench::stats
