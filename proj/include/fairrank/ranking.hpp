#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fairrank/dataset.hpp"

namespace fairrank {

/// Ascending ranks over a value vector; tied values share the average rank.
struct RankVector {
  std::vector<double> ranks;
  /// Index sets (size >= 2) of values that compare equal.
  std::vector<std::vector<std::size_t>> tie_groups;

  std::size_t size() const { return ranks.size(); }
};

RankVector assign_ranks(std::span<const double> values);

/// Sum of ranks over one partition.
double sum_rank_partition(const RankVector& ranks, std::span<const Group> groups, Group which);

/// U = r_A - n_A(n_A+1)/2: the number of (A, B) pairs won by A, ties counting one half.
double mann_whitney_u(double r_a, std::size_t n_a);

double auc_from_u(double u, std::size_t n_a, std::size_t n_b);

/// How the band width kappa is derived from epsilon.
enum class KappaConvention {
  /// kappa = epsilon * n_A * n_B, which follows from bounding U / (n_A n_B) - 1/2 by epsilon.
  Derived,
  /// kappa = epsilon * n_A * n_A, kept for comparison runs.
  Printed,
};

/// Admissible sum-rank band [C, C + kappa] for partition A.
struct ConstraintSpec {
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  double epsilon = 0.0;
  double lower = 0.0;     // C
  double kappa = 0.0;
  double r_a_most = 0.0;  // r_A when every A outranks every B
  double r_a_least = 0.0; // r_A when every B outranks every A

  double upper() const { return lower + kappa; }
  bool contains(double r_a) const { return r_a >= lower && r_a <= upper(); }
  /// Distance from r_a to the band; zero inside it.
  double distance(double r_a) const;
};

ConstraintSpec constraint_bounds(std::size_t n_a, std::size_t n_b, double epsilon,
                                 KappaConvention convention = KappaConvention::Derived);

}  // namespace fairrank
