#include "umlbench/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include <boost/math/special_functions/gamma.hpp>

namespace umlbench::stats {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::vector<double> flatten(const std::vector<std::vector<double>>& groups) {
  std::vector<double> all;
  for (const auto& g : groups) all.insert(all.end(), g.begin(), g.end());
  return all;
}

void check_groups(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw DegenerateInput("at least two groups are required");
  for (const auto& g : groups) {
    if (g.empty()) throw DegenerateInput("every group must be nonempty");
  }
}

struct RankedGroups {
  std::vector<double> mean_rank;
  std::size_t n = 0;
  double ties = 0.0;
};

RankedGroups rank_groups(const std::vector<std::vector<double>>& groups) {
  const auto all = flatten(groups);
  const auto ranks = midranks(all);
  RankedGroups out;
  out.n = all.size();
  out.ties = tie_sum(all);
  std::size_t pos = 0;
  for (const auto& g : groups) {
    double sum = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) sum += ranks[pos++];
    out.mean_rank.push_back(sum / static_cast<double>(g.size()));
  }
  return out;
}

}  // namespace

std::string_view magnitude_name(Magnitude m) {
  switch (m) {
    case Magnitude::Negligible: return "negligible";
    case Magnitude::Small: return "small";
    case Magnitude::Medium: return "medium";
    case Magnitude::Large: return "large";
  }
  return "?";
}

Magnitude EffectThresholds::classify(double value) const {
  const double a = std::fabs(value);
  if (a >= large) return Magnitude::Large;
  if (a >= medium) return Magnitude::Medium;
  if (a >= small) return Magnitude::Small;
  return Magnitude::Negligible;
}

double chi2_survival(double x, int df) {
  if (df < 1) throw InvalidDf("chi-squared degrees of freedom must be >= 1");
  if (std::isnan(x)) return x;
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

double normal_survival(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double tie_sum(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    const auto t = static_cast<double>(j - i);
    sum += t * t * t - t;
    i = j;
  }
  return sum;
}

StatResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
  check_groups(groups);
  const auto rg = rank_groups(groups);
  const auto n = static_cast<double>(rg.n);
  const double correction = 1.0 - rg.ties / (n * n * n - n);
  if (rg.n < 2 || correction <= 0.0) throw DegenerateInput("all observations are identical");
  double h = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double d = rg.mean_rank[g] - (n + 1.0) / 2.0;
    h += static_cast<double>(groups[g].size()) * d * d;
  }
  h = 12.0 / (n * (n + 1.0)) * h / correction;
  const int df = static_cast<int>(groups.size()) - 1;
  StatResult r;
  r.test_name = "kruskal_wallis";
  r.statistic = h;
  r.df = df;
  r.p_raw = chi2_survival(h, df);
  r.effect = EffectSize{"epsilon_squared", h / (n - 1.0), std::nullopt};
  return r;
}

std::vector<PairwiseResult> dunn_posthoc(const std::vector<std::vector<double>>& groups) {
  check_groups(groups);
  const auto rg = rank_groups(groups);
  const auto n = static_cast<double>(rg.n);
  const double variance = n * (n + 1.0) / 12.0 - rg.ties / (12.0 * (n - 1.0));
  if (rg.n < 2 || variance <= 0.0) throw DegenerateInput("all observations are identical");
  std::vector<PairwiseResult> out;
  std::vector<double> ps;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      const double se = std::sqrt(variance * (1.0 / static_cast<double>(groups[i].size()) +
                                              1.0 / static_cast<double>(groups[j].size())));
      const double z = (rg.mean_rank[i] - rg.mean_rank[j]) / se;
      StatResult r;
      r.test_name = "dunn";
      r.statistic = z;
      r.p_raw = std::min(1.0, 2.0 * normal_survival(std::fabs(z)));
      const auto cd = cliffs_delta(groups[i], groups[j]);
      r.effect = EffectSize{"cliffs_delta", cd.delta, cd.magnitude};
      ps.push_back(r.p_raw);
      out.push_back({i, j, std::move(r)});
    }
  }
  const auto adj = holm_adjust(ps);
  for (std::size_t k = 0; k < out.size(); ++k) out[k].result.p_adjusted = adj[k];
  return out;
}

std::vector<double> holm_adjust(std::span<const double> p) {
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw OutOfRange("p-value outside [0, 1]");
  }
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> out(p.size());
  double running = 0.0;
  const auto m = p.size();
  for (std::size_t k = 0; k < m; ++k) {
    running = std::max(running, std::min(1.0, static_cast<double>(m - k) * p[order[k]]));
    out[order[k]] = running;
  }
  return out;
}

CountTable drop_empty_margins(const CountTable& table) {
  if (table.empty()) return {};
  const std::size_t cols = table.front().size();
  std::vector<bool> keep_col(cols, false);
  for (const auto& row : table) {
    if (row.size() != cols) throw DegenerateMargins("ragged contingency table");
    for (std::size_t c = 0; c < cols; ++c) keep_col[c] = keep_col[c] || row[c] != 0.0;
  }
  CountTable out;
  for (const auto& row : table) {
    std::vector<double> kept;
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      if (keep_col[c]) kept.push_back(row[c]);
      total += row[c];
    }
    if (total != 0.0) out.push_back(std::move(kept));
  }
  return out;
}

double cramers_v(double chi2, double n, std::size_t rows, std::size_t cols) {
  const auto k = static_cast<double>(std::min(rows, cols));
  if (n <= 0.0 || k < 2.0) throw DegenerateMargins("Cramér's V needs N > 0 and at least a 2x2 table");
  return std::sqrt(chi2 / (n * (k - 1.0)));
}

StatResult chi2_independence(const CountTable& table) {
  const std::size_t rows = table.size();
  if (rows < 2 || table.front().size() < 2) throw DegenerateMargins("table must be at least 2x2");
  const std::size_t cols = table.front().size();
  std::vector<double> rs(rows, 0.0), cs(cols, 0.0);
  double n = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (table[r].size() != cols) throw DegenerateMargins("ragged contingency table");
    for (std::size_t c = 0; c < cols; ++c) {
      if (table[r][c] < 0.0) throw DegenerateMargins("negative count");
      rs[r] += table[r][c];
      cs[c] += table[r][c];
      n += table[r][c];
    }
  }
  for (double v : rs) {
    if (v <= 0.0) throw DegenerateMargins("a row total is zero");
  }
  for (double v : cs) {
    if (v <= 0.0) throw DegenerateMargins("a column total is zero");
  }
  double chi2 = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double e = rs[r] * cs[c] / n;
      chi2 += (table[r][c] - e) * (table[r][c] - e) / e;
    }
  }
  const int df = static_cast<int>((rows - 1) * (cols - 1));
  StatResult res;
  res.test_name = "chi2_independence";
  res.statistic = chi2;
  res.df = df;
  res.p_raw = chi2_survival(chi2, df);
  const double v = cramers_v(chi2, n, rows, cols);
  res.effect = EffectSize{"cramers_v", v, kCramersVThresholds.classify(v)};
  return res;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> values, double mu0, std::size_t exact_limit) {
  std::vector<double> d;
  for (double v : values) {
    if (v - mu0 != 0.0) d.push_back(v - mu0);
  }
  if (d.empty()) throw AllZeroDifferences("every difference from mu0 is zero");
  std::vector<double> absd;
  for (double x : d) absd.push_back(std::fabs(x));
  const auto ranks = midranks(absd);
  WilcoxonResult res;
  res.test_name = "wilcoxon_signed_rank";
  res.n_used = d.size();
  for (std::size_t i = 0; i < d.size(); ++i) (d[i] > 0 ? res.w_plus : res.w_minus) += ranks[i];
  res.statistic = std::min(res.w_plus, res.w_minus);
  const auto n = static_cast<double>(d.size());

  if (d.size() <= exact_limit) {
    // Doubled mid-ranks are integers, so the null distribution of 2 W+ is a
    // subset-sum count over 2^n equally likely sign patterns.
    std::vector<long> twice;
    long total = 0;
    for (double r : ranks) {
      twice.push_back(std::lround(2.0 * r));
      total += twice.back();
    }
    std::vector<double> ways(static_cast<std::size_t>(total) + 1, 0.0);
    ways[0] = 1.0;
    long reach = 0;
    for (long t : twice) {
      for (long s = reach; s >= 0; --s) ways[static_cast<std::size_t>(s + t)] += ways[static_cast<std::size_t>(s)];
      reach += t;
    }
    const long obs = std::lround(2.0 * res.w_plus);
    double lower = 0.0, upper = 0.0, all = 0.0;
    for (long s = 0; s <= total; ++s) {
      const double w = ways[static_cast<std::size_t>(s)];
      all += w;
      if (s <= obs) lower += w;
      if (s >= obs) upper += w;
    }
    res.p_raw = std::min(1.0, 2.0 * std::min(lower, upper) / all);
    res.exact = true;
  } else {
    const double mean = n * (n + 1.0) / 4.0;
    const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_sum(absd) / 48.0;
    if (var <= 0.0) {
      res.p_raw = 1.0;
    } else {
      const double z = std::max(0.0, std::fabs(res.w_plus - mean) - 0.5) / std::sqrt(var);
      res.p_raw = std::min(1.0, 2.0 * normal_survival(z));
    }
  }
  const double denom = res.w_plus + res.w_minus;
  res.effect = EffectSize{"matched_rank_biserial", (res.w_plus - res.w_minus) / denom, std::nullopt};
  return res;
}

CliffsDelta cliffs_delta(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw EmptyInputError("Cliff's delta needs two nonempty samples");
  std::vector<double> ys(y.begin(), y.end());
  std::sort(ys.begin(), ys.end());
  double dominance = 0.0;
  for (double xi : x) {
    const auto lo = std::lower_bound(ys.begin(), ys.end(), xi) - ys.begin();
    const auto hi = ys.end() - std::upper_bound(ys.begin(), ys.end(), xi);
    dominance += static_cast<double>(lo) - static_cast<double>(hi);
  }
  const double delta = dominance / (static_cast<double>(x.size()) * static_cast<double>(y.size()));
  return {delta, kCliffsThresholds.classify(delta)};
}

double rank_biserial(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw EmptyInputError("rank-biserial correlation needs two nonempty samples");
  std::vector<double> all(x.begin(), x.end());
  all.insert(all.end(), y.begin(), y.end());
  const auto ranks = midranks(all);
  double rx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) rx += ranks[i];
  const auto nx = static_cast<double>(x.size());
  const auto ny = static_cast<double>(y.size());
  const double u = rx - nx * (nx + 1.0) / 2.0;
  return 2.0 * u / (nx * ny) - 1.0;
}

std::uint64_t splitmix64(std::uint64_t x) {
  std::uint64_t z = x + kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(splitmix64(seed ^ splitmix64(stream))) {}

std::uint64_t CounterRng::next() { return splitmix64(key_ + kGolden * ++counter_); }

std::uint64_t CounterRng::below(std::uint64_t bound) {
  if (bound == 0) throw OutOfRange("empty range");
  unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(next()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

Interval bootstrap_ci(std::span<const double> values, std::uint64_t seed, std::size_t n_resamples, unsigned workers) {
  if (values.empty()) throw EmptyInputError("bootstrap of an empty sample");
  if (n_resamples == 0) throw OutOfRange("at least one resample is required");
  std::vector<double> means(n_resamples);
  const std::size_t n = values.size();
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b) {
      CounterRng rng(seed, b);
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) sum += values[rng.below(n)];
      means[b] = sum / static_cast<double>(n);
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n_resamples)));
  if (workers == 1) {
    run(0, n_resamples);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n_resamples + workers - 1) / workers;
    for (std::size_t begin = 0; begin < n_resamples; begin += chunk) {
      pool.emplace_back(run, begin, std::min(n_resamples, begin + chunk));
    }
  }
  std::sort(means.begin(), means.end());
  return {quantile(means, 0.025), quantile(means, 0.975)};
}

}  // namespace umlbench::stats
