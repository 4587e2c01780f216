#pragma once

// Projection of a prediction vector onto the rank-sum set
//   Q = { M : C <= r_A(M) <= C + kappa }.
//
// An instance is removed from the kept set S by "demotion": its projected
// value is written as 0 and, for ranking purposes, it sits below every kept
// instance (demoted instances are ordered among themselves by flat index).
// Projection then amounts to choosing the demoted set S' so that r_A lands in
// the band while keeping as much squared mass sum_{i in S} M_P[i]^2 as
// possible.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fairrank/dataset.hpp"
#include "fairrank/ranking.hpp"

namespace fairrank {

using IndexSet = std::vector<std::size_t>;

/// Which branch of the dispatch produced an outcome.
enum class ProjectionRoute { Identity, Shrink, ShrinkThenGrow, Grow, Oracle };

const char* to_string(ProjectionRoute route);

struct ProjectionOutcome {
  Eigen::VectorXd projected;  // M_P on S, 0 on S'
  IndexSet demoted;           // S', ascending
  IndexSet kept;              // S, ascending
  double achieved_r_a = 0.0;
  bool feasible = false;
  double objective = 0.0;     // sum over S of M_P[i]^2
  ProjectionRoute route = ProjectionRoute::Identity;
  std::uint64_t candidates = 0;  // subsets scored by the shrink search
};

struct DemotionRanking {
  RankVector ranks;
  double r_a = 0.0;
};

/// Ranks with S' pinned to the bottom |S'| positions (ascending flat index),
/// kept values tie-average ranked above them.
DemotionRanking demotion_rank(std::span<const double> values, const IndexSet& demoted, std::span<const Group> groups);

/// r_A under the demotion convention computed by pairwise counting:
/// n_A(n_A+1)/2 plus one point per (A, B) pair won by A (ties one half).
/// Independent of demotion_rank and quadratic in N.
double pairwise_sum_rank(std::span<const double> values, const IndexSet& demoted, std::span<const Group> groups);

/// Default search breadth for the shrink heuristic.
inline constexpr std::uint64_t kDefaultSearchBreadth = 10'000'000;

/// Largest instance the exhaustive oracle accepts.
inline constexpr std::size_t kOracleMaxSize = 16;

/// Dispatches on r_A(M + V): identity inside the band, shrink above it, grow below it.
/// Throws InfeasibleError when r_A_most < C.
ProjectionOutcome project_onto_q(const Eigen::VectorXd& m, const Eigen::VectorXd& v, const ConstraintSpec& spec,
                                 std::span<const Group> groups, std::uint64_t tau = kDefaultSearchBreadth);

/// Demotes a subset of partition A chosen by the binary subset-index search.
/// With `follow_with_grow` an undershoot below C is repaired by grow_sum_rank.
ProjectionOutcome shrink_sum_rank(std::span<const double> m_p, const ConstraintSpec& spec,
                                  std::span<const Group> groups, std::uint64_t tau = kDefaultSearchBreadth,
                                  bool follow_with_grow = true);

/// Greedily demotes partition-B instances in ascending rank order.
ProjectionOutcome grow_sum_rank(std::span<const double> m_p, const ConstraintSpec& spec,
                                std::span<const Group> groups, const IndexSet& already_demoted = {});

/// Exhaustive search over all 2^N demotion sets (N <= 16). Among feasible
/// sets it keeps the largest squared mass; ties go to the lexicographically
/// smallest S'.
ProjectionOutcome brute_force_project(std::span<const double> m_p, const ConstraintSpec& spec,
                                      std::span<const Group> groups);

/// Builds an outcome for a given demoted set, evaluating r_A exactly.
ProjectionOutcome make_outcome(std::span<const double> m_p, const ConstraintSpec& spec, std::span<const Group> groups,
                               IndexSet demoted, ProjectionRoute route);

}  // namespace fairrank
