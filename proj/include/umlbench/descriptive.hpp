#pragma once

#include <span>
#include <vector>

namespace umlbench::stats {

/// Arithmetic mean. Throws EmptyInputError on an empty sample.
double mean(std::span<const double> xs);

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
double sample_sd(std::span<const double> xs);

/// Standard error of the mean, sample_sd / sqrt(n).
double sem(std::span<const double> xs);

/// Quantile by linear interpolation between order statistics (Hyndman-Fan
/// type 7): h = (n - 1) p, Q = x[floor h] + (h - floor h)(x[floor h + 1] - x[floor h]).
double quantile(std::vector<double> xs, double p);

double median(std::vector<double> xs);

/// Q3 - Q1 under the same quantile rule.
double iqr(std::vector<double> xs);

}  // namespace umlbench::stats
