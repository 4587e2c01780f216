#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "fairrank/dataset.hpp"

namespace fairrank {

/// Impact rank ratios below this value are considered discriminatory.
inline constexpr double kIrrDiscriminationThreshold = 0.8;

/// Pairwise AUC: share of (A, B) pairs where A ranks higher, ties count 1/2.
double auc(std::span<const double> values, std::span<const Group> groups);

/// Mean over A minus mean over B.
double mean_difference(std::span<const double> values, std::span<const Group> groups);

/// Mean residual (y - y_hat) over A minus mean residual over B.
double balanced_residuals(std::span<const double> y, std::span<const double> y_hat, std::span<const Group> groups);

/// (r_A / n_A) / (r_B / n_B) using tie-averaged ranks.
double impact_rank_ratio(std::span<const double> values, std::span<const Group> groups);

inline bool is_discriminatory(double irr) { return irr < kIrrDiscriminationThreshold; }

double rmse(std::span<const double> y, std::span<const double> y_hat);

struct MetricsReport {
  std::string label;
  double auc = 0.0;
  double md = 0.0;
  double br = 0.0;
  double irr = 0.0;
  double rmse = 0.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

/// Scores predictions against targets. `rank_keys` orders instances for AUC
/// and IRR; pass the predictions themselves, or demotion ranks for projected
/// predictions.
MetricsReport evaluate(std::string label, std::span<const double> y, std::span<const double> y_hat,
                       std::span<const double> rank_keys, std::span<const Group> groups);

}  // namespace fairrank
