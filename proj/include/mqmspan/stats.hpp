#pragma once

#include <optional>
#include <span>
#include <vector>

namespace mqmspan::stats {

/// Linear-interpolation percentile (Hyndman-Fan type 7); q in [0, 1]. Empty input gives 0.
double percentile(std::vector<double> values, double q);

struct Interval95 {
  double lower = 0.0;
  double upper = 0.0;
};

/// 2.5th and 97.5th percentiles.
Interval95 percentile_ci(const std::vector<double>& values);

/// 1-based ranks, tied values sharing their average rank.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of average ranks. nullopt when either side has no variation or
/// fewer than two observations.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

/// Tie-adjusted Kendall tau-b; nullopt under the same conditions as spearman.
std::optional<double> kendall_tau_b(std::span<const double> x, std::span<const double> y);

}  // namespace mqmspan::stats
