#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace sweep {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Wilson score interval for k successes out of n (z = 1.96 gives 95%).
Interval wilson_interval(std::int64_t k, std::int64_t n, double z = 1.96);

double mean(std::span<const double> xs);
double median(std::vector<double> xs);

/// Percentile bootstrap interval of the mean; deterministic in `seed`.
Interval bootstrap_mean_ci(std::span<const double> xs, std::uint64_t seed, int n_resamples = 1000,
                           double level = 0.95);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
KsResult ks_two_sample(std::vector<double> x, std::vector<double> y);

}  // namespace sweep
