#include "fairrank/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fairrank/error.hpp"

namespace fairrank {

RankVector assign_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(values[i])) throw DataError("non-finite value at index " + std::to_string(i));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  RankVector out;
  out.ranks.assign(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // positions i..j-1 hold ranks i+1..j
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) out.ranks[order[t]] = rank;
    if (j - i > 1) {
      std::vector<std::size_t> group(order.begin() + static_cast<std::ptrdiff_t>(i),
                                     order.begin() + static_cast<std::ptrdiff_t>(j));
      std::sort(group.begin(), group.end());
      out.tie_groups.push_back(std::move(group));
    }
    i = j;
  }
  return out;
}

double sum_rank_partition(const RankVector& ranks, std::span<const Group> groups, Group which) {
  if (ranks.size() != groups.size()) {
    throw DataError("rank vector has " + std::to_string(ranks.size()) + " entries but " +
                    std::to_string(groups.size()) + " labels were given");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i] == which) sum += ranks.ranks[i];
  }
  return sum;
}

double mann_whitney_u(double r_a, std::size_t n_a) {
  const double na = static_cast<double>(n_a);
  return r_a - na * (na + 1.0) / 2.0;
}

double auc_from_u(double u, std::size_t n_a, std::size_t n_b) {
  if (n_a == 0 || n_b == 0) throw DataError("AUC needs both partitions to be nonempty");
  return u / (static_cast<double>(n_a) * static_cast<double>(n_b));
}

double ConstraintSpec::distance(double r_a) const {
  if (r_a < lower) return lower - r_a;
  if (r_a > upper()) return r_a - upper();
  return 0.0;
}

ConstraintSpec constraint_bounds(std::size_t n_a, std::size_t n_b, double epsilon, KappaConvention convention) {
  if (n_a == 0 || n_b == 0) throw DataError("constraint needs both partitions to be nonempty");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be a finite value >= 0");
  const double na = static_cast<double>(n_a);
  const double nb = static_cast<double>(n_b);
  ConstraintSpec s;
  s.n_a = n_a;
  s.n_b = n_b;
  s.epsilon = epsilon;
  s.lower = na * (na + 1.0) / 2.0 + na * nb / 2.0;
  s.kappa = convention == KappaConvention::Derived ? epsilon * na * nb : epsilon * na * na;
  s.r_a_most = na * nb + na * (na + 1.0) / 2.0;
  s.r_a_least = na * (na + 1.0) / 2.0;
  return s;
}

}  // namespace fairrank
