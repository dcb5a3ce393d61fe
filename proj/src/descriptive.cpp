#include "umlbench/descriptive.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "umlbench/error.hpp"

namespace umlbench::stats {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw EmptyInputError("mean of an empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_sd(std::span<const double> xs) {
  const double m = mean(xs);
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double sem(std::span<const double> xs) { return sample_sd(xs) / std::sqrt(static_cast<double>(xs.size())); }

double quantile(std::vector<double> xs, double p) {
  if (xs.empty()) throw EmptyInputError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw Error("quantile probability outside [0, 1]");
  std::sort(xs.begin(), xs.end());
  const double h = static_cast<double>(xs.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= xs.size()) return xs.back();
  return xs[lo] + (h - static_cast<double>(lo)) * (xs[lo + 1] - xs[lo]);
}

double median(std::vector<double> xs) { return quantile(std::move(xs), 0.5); }

double iqr(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  return quantile(xs, 0.75) - quantile(xs, 0.25);
}

}  // namespace umlbench::stats
