#include "fairrank/metrics.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "fairrank/error.hpp"
#include "fairrank/kernels.hpp"
#include "fairrank/ranking.hpp"

namespace fairrank {

namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw DataError("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
}

struct Split {
  std::vector<double> a;
  std::vector<double> b;
};

Split split(std::span<const double> values, std::span<const Group> groups) {
  check_lengths(values.size(), groups.size());
  Split s;
  for (std::size_t i = 0; i < values.size(); ++i) (groups[i] == Group::A ? s.a : s.b).push_back(values[i]);
  if (s.a.empty() || s.b.empty()) throw DataError("both partitions must be nonempty");
  return s;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double auc(std::span<const double> values, std::span<const Group> groups) {
  const Split s = split(values, groups);
  const double wins = kernels::pairwise_wins(s.a, s.b);
  return wins / (static_cast<double>(s.a.size()) * static_cast<double>(s.b.size()));
}

double mean_difference(std::span<const double> values, std::span<const Group> groups) {
  const Split s = split(values, groups);
  return mean(s.a) - mean(s.b);
}

double balanced_residuals(std::span<const double> y, std::span<const double> y_hat, std::span<const Group> groups) {
  check_lengths(y.size(), y_hat.size());
  std::vector<double> residual(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) residual[i] = y[i] - y_hat[i];
  return mean_difference(residual, groups);
}

double impact_rank_ratio(std::span<const double> values, std::span<const Group> groups) {
  check_lengths(values.size(), groups.size());
  const RankVector ranks = assign_ranks(values);
  std::size_t n_a = 0;
  for (auto g : groups) n_a += g == Group::A ? 1 : 0;
  const std::size_t n_b = groups.size() - n_a;
  if (n_a == 0 || n_b == 0) throw DataError("both partitions must be nonempty");
  const double r_a = sum_rank_partition(ranks, groups, Group::A);
  const double r_b = sum_rank_partition(ranks, groups, Group::B);
  return (r_a / static_cast<double>(n_a)) / (r_b / static_cast<double>(n_b));
}

double rmse(std::span<const double> y, std::span<const double> y_hat) {
  check_lengths(y.size(), y_hat.size());
  if (y.empty()) throw DataError("RMSE of an empty vector");
  return std::sqrt(kernels::squared_distance(y, y_hat) / static_cast<double>(y.size()));
}

MetricsReport evaluate(std::string label, std::span<const double> y, std::span<const double> y_hat,
                       std::span<const double> rank_keys, std::span<const Group> groups) {
  check_lengths(y.size(), y_hat.size());
  check_lengths(y.size(), rank_keys.size());
  MetricsReport r;
  r.label = std::move(label);
  r.auc = auc(rank_keys, groups);
  r.md = mean_difference(y_hat, groups);
  r.br = balanced_residuals(y, y_hat, groups);
  r.irr = impact_rank_ratio(rank_keys, groups);
  r.rmse = rmse(y, y_hat);
  for (auto g : groups) (g == Group::A ? r.n_a : r.n_b) += 1;
  return r;
}

}  // namespace fairrank
