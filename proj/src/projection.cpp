#include "fairrank/projection.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "fairrank/error.hpp"

namespace fairrank {

namespace {

void check_sizes(std::span<const double> values, std::span<const Group> groups) {
  if (values.size() != groups.size()) {
    throw DataError("prediction vector has " + std::to_string(values.size()) + " entries but " +
                    std::to_string(groups.size()) + " labels were given");
  }
}

IndexSet normalized(IndexSet s, std::size_t n) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  if (!s.empty() && s.back() >= n) throw DataError("demoted index " + std::to_string(s.back()) + " out of range");
  return s;
}

// Score of value x against a sorted list: entries below count 1, equal ones 1/2.
double wins_against(double x, const std::vector<double>& sorted) {
  const auto lo = std::lower_bound(sorted.begin(), sorted.end(), x);
  const auto hi = std::upper_bound(lo, sorted.end(), x);
  return static_cast<double>(lo - sorted.begin()) + 0.5 * static_cast<double>(hi - lo);
}

// Arbitrary-width subset index over an ordered element list. Bit b stands for
// element b; stepping the index by one flips a run of low bits and reports
// every flip so the caller can keep running totals.
class SubsetIndex {
 public:
  explicit SubsetIndex(std::size_t bits) : bits_(bits), words_((bits + 63) / 64, 0) {}

  bool test(std::size_t b) const { return (words_[b / 64] >> (b % 64)) & 1u; }
  void set(std::size_t b) {
    if (!test(b)) flip(b);
  }

  bool is_zero() const { return ones_ == 0; }
  bool is_full() const { return ones_ == bits_; }

  template <typename OnFlip>
  bool increment(OnFlip&& on_flip) {
    for (std::size_t b = 0; b < bits_; ++b) {
      flip(b);
      if (test(b)) {
        on_flip(b, true);
        return true;
      }
      on_flip(b, false);
    }
    return false;  // wrapped; caller guards with is_full()
  }

  template <typename OnFlip>
  bool decrement(OnFlip&& on_flip) {
    for (std::size_t b = 0; b < bits_; ++b) {
      flip(b);
      if (!test(b)) {
        on_flip(b, false);
        return true;
      }
      on_flip(b, true);
    }
    return false;
  }

  std::vector<std::size_t> members() const {
    std::vector<std::size_t> out;
    for (std::size_t b = 0; b < bits_; ++b) {
      if (test(b)) out.push_back(b);
    }
    return out;
  }

 private:
  void flip(std::size_t b) {
    words_[b / 64] ^= std::uint64_t{1} << (b % 64);
    ones_ = test(b) ? ones_ + 1 : ones_ - 1;
  }

  std::size_t bits_;
  std::size_t ones_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace

const char* to_string(ProjectionRoute route) {
  switch (route) {
    case ProjectionRoute::Identity:
      return "identity";
    case ProjectionRoute::Shrink:
      return "shrink";
    case ProjectionRoute::ShrinkThenGrow:
      return "shrink+grow";
    case ProjectionRoute::Grow:
      return "grow";
    case ProjectionRoute::Oracle:
      return "oracle";
  }
  return "unknown";
}

DemotionRanking demotion_rank(std::span<const double> values, const IndexSet& demoted, std::span<const Group> groups) {
  check_sizes(values, groups);
  const std::size_t n = values.size();
  const IndexSet down = normalized(demoted, n);
  std::vector<bool> is_down(n, false);
  for (auto i : down) is_down[i] = true;

  std::vector<std::size_t> kept_index;
  std::vector<double> kept_values;
  kept_index.reserve(n - down.size());
  kept_values.reserve(n - down.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_down[i]) {
      kept_index.push_back(i);
      kept_values.push_back(values[i]);
    }
  }
  const RankVector kept_ranks = assign_ranks(kept_values);

  DemotionRanking out;
  out.ranks.ranks.assign(n, 0.0);
  for (std::size_t r = 0; r < down.size(); ++r) out.ranks.ranks[down[r]] = static_cast<double>(r + 1);
  const double offset = static_cast<double>(down.size());
  for (std::size_t t = 0; t < kept_index.size(); ++t) out.ranks.ranks[kept_index[t]] = kept_ranks.ranks[t] + offset;
  for (const auto& tie : kept_ranks.tie_groups) {
    std::vector<std::size_t> mapped;
    mapped.reserve(tie.size());
    for (auto t : tie) mapped.push_back(kept_index[t]);
    out.ranks.tie_groups.push_back(std::move(mapped));
  }
  out.r_a = sum_rank_partition(out.ranks, groups, Group::A);
  return out;
}

double pairwise_sum_rank(std::span<const double> values, const IndexSet& demoted, std::span<const Group> groups) {
  check_sizes(values, groups);
  const std::size_t n = values.size();
  std::vector<bool> is_down(n, false);
  for (auto i : demoted) {
    if (i >= n) throw DataError("demoted index out of range");
    is_down[i] = true;
  }
  double wins = 0.0;
  std::size_t n_a = 0;
  for (std::size_t a = 0; a < n; ++a) {
    if (groups[a] != Group::A) continue;
    ++n_a;
    for (std::size_t b = 0; b < n; ++b) {
      if (groups[b] != Group::B) continue;
      if (is_down[a] && is_down[b]) {
        wins += a > b ? 1.0 : 0.0;
      } else if (is_down[b]) {
        wins += 1.0;
      } else if (!is_down[a]) {
        wins += values[a] > values[b] ? 1.0 : (values[a] == values[b] ? 0.5 : 0.0);
      }
    }
  }
  const double na = static_cast<double>(n_a);
  return wins + na * (na + 1.0) / 2.0;
}

ProjectionOutcome make_outcome(std::span<const double> m_p, const ConstraintSpec& spec, std::span<const Group> groups,
                               IndexSet demoted, ProjectionRoute route) {
  check_sizes(m_p, groups);
  const std::size_t n = m_p.size();
  ProjectionOutcome out;
  out.route = route;
  out.demoted = normalized(std::move(demoted), n);
  std::vector<bool> is_down(n, false);
  for (auto i : out.demoted) is_down[i] = true;
  out.projected.resize(static_cast<Eigen::Index>(n));
  out.objective = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (is_down[i]) {
      out.projected[static_cast<Eigen::Index>(i)] = 0.0;
    } else {
      out.kept.push_back(i);
      out.projected[static_cast<Eigen::Index>(i)] = m_p[i];
      out.objective += m_p[i] * m_p[i];
    }
  }
  out.achieved_r_a = demotion_rank(m_p, out.demoted, groups).r_a;
  out.feasible = spec.contains(out.achieved_r_a);
  return out;
}

ProjectionOutcome grow_sum_rank(std::span<const double> m_p, const ConstraintSpec& spec, std::span<const Group> groups,
                                const IndexSet& already_demoted) {
  check_sizes(m_p, groups);
  const std::size_t n = m_p.size();
  IndexSet demoted = normalized(already_demoted, n);
  const double r_a = demotion_rank(m_p, demoted, groups).r_a;
  const double need = spec.lower - r_a;  // d
  const double room = spec.upper() - r_a;
  if (need <= 0.0) return make_outcome(m_p, spec, groups, std::move(demoted), ProjectionRoute::Grow);

  std::vector<bool> is_down(n, false);
  for (auto i : demoted) is_down[i] = true;
  std::vector<double> kept_a;
  std::vector<std::size_t> down_a;
  std::vector<std::size_t> kept_b;
  for (std::size_t i = 0; i < n; ++i) {
    if (groups[i] == Group::A) {
      if (is_down[i]) {
        down_a.push_back(i);
      } else {
        kept_a.push_back(m_p[i]);
      }
    } else if (!is_down[i]) {
      kept_b.push_back(i);
    }
  }
  std::sort(kept_a.begin(), kept_a.end());
  std::stable_sort(kept_b.begin(), kept_b.end(), [&](std::size_t x, std::size_t y) { return m_p[x] < m_p[y]; });

  // Gain in r_A from demoting B instance i: every kept A now beats it, and
  // demoted A instances with a larger flat index now sit above it.
  auto gain = [&](std::size_t i) {
    const double kept_term = wins_against(m_p[i], kept_a);
    const auto later = down_a.end() - std::upper_bound(down_a.begin(), down_a.end(), i);
    return kept_term + static_cast<double>(later);
  };

  double l = 0.0;
  for (auto i : kept_b) {
    if (l >= need && l <= room) break;
    const double m_i = gain(i);
    if (m_i == 0.0) continue;
    const double before = l;
    l += m_i;
    demoted.push_back(i);
    if (l > room) {
      // Overshot the band; keep whichever side is closer.
      if (need - before < l - room) demoted.pop_back();
      break;
    }
  }
  return make_outcome(m_p, spec, groups, std::move(demoted), ProjectionRoute::Grow);
}

ProjectionOutcome shrink_sum_rank(std::span<const double> m_p, const ConstraintSpec& spec,
                                  std::span<const Group> groups, std::uint64_t tau, bool follow_with_grow) {
  check_sizes(m_p, groups);
  const std::size_t n = m_p.size();
  const DemotionRanking base = demotion_rank(m_p, {}, groups);
  if (base.r_a <= spec.upper()) return make_outcome(m_p, spec, groups, {}, ProjectionRoute::Shrink);

  // Partition A ordered by ascending rank; bit b of a subset index is order[b].
  std::vector<std::size_t> order;
  std::vector<double> b_values;
  for (std::size_t i = 0; i < n; ++i) {
    if (groups[i] == Group::A) {
      order.push_back(i);
    } else {
      b_values.push_back(m_p[i]);
    }
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return base.ranks.ranks[x] < base.ranks.ranks[y]; });
  std::sort(b_values.begin(), b_values.end());

  // Demoting A instance a lowers r_A by the number of B instances it beats.
  const std::size_t bits = order.size();
  std::vector<double> drop(bits), mass(bits);
  double total_drop = 0.0;  // Delta: decrement with S' = S_A
  for (std::size_t b = 0; b < bits; ++b) {
    drop[b] = wins_against(m_p[order[b]], b_values);
    mass[b] = m_p[order[b]] * m_p[order[b]];
    total_drop += drop[b];
  }
  const double d = base.r_a - spec.lower;
  const double min_drop = base.r_a - spec.upper();

  auto finish = [&](IndexSet demoted, ProjectionRoute route, std::uint64_t candidates) {
    ProjectionOutcome out = make_outcome(m_p, spec, groups, std::move(demoted), route);
    out.candidates = candidates;
    if (follow_with_grow && out.achieved_r_a < spec.lower) {
      out = grow_sum_rank(m_p, spec, groups, out.demoted);
      out.route = ProjectionRoute::ShrinkThenGrow;
      out.candidates = candidates;
    }
    return out;
  };

  if (d >= total_drop) return finish(IndexSet(order.begin(), order.end()), ProjectionRoute::Shrink, 0);

  // Anchor index j ~ 2^|S_A| * d / Delta. Up to 60 elements it is computed
  // exactly; beyond that the index space is anchored by a most-significant-bit
  // greedy decomposition of d.
  SubsetIndex anchor(bits);
  if (bits <= 60) {
    using u128 = unsigned __int128;
    const auto num = static_cast<u128>(std::llround(2.0 * d)) << bits;
    const auto den = static_cast<u128>(std::llround(2.0 * total_drop));
    u128 j = num / den;
    const u128 top = (u128{1} << bits) - 1;
    if (j > top) j = top;
    for (std::size_t b = 0; b < bits; ++b) {
      if ((j >> b) & 1u) anchor.set(b);
    }
  } else {
    double acc = 0.0;
    for (std::size_t b = bits; b-- > 0;) {
      if (acc + drop[b] <= d) {
        acc += drop[b];
        anchor.set(b);
      }
    }
  }

  double anchor_drop = 0.0, anchor_mass = 0.0;
  for (std::size_t b = 0; b < bits; ++b) {
    if (anchor.test(b)) {
      anchor_drop += drop[b];
      anchor_mass += mass[b];
    }
  }

  // Candidate score: distance of the decrement to [min_drop, d], then demoted
  // mass (less is better).
  struct Best {
    double distance;
    double lost_mass;
    SubsetIndex index;
  };
  auto distance_of = [&](double dec) { return dec > d ? dec - d : (dec < min_drop ? min_drop - dec : 0.0); };
  Best best{distance_of(anchor_drop), anchor_mass, anchor};
  std::uint64_t candidates = 1;

  auto consider = [&](const SubsetIndex& idx, double dec, double lost) {
    ++candidates;
    const double dist = distance_of(dec);
    if (dist < best.distance || (dist == best.distance && lost < best.lost_mass)) {
      best.distance = dist;
      best.lost_mass = lost;
      best.index = idx;
    }
  };

  // floor(j) - p .. floor(j) downward.
  {
    SubsetIndex cur = anchor;
    double dec = anchor_drop, lost = anchor_mass;
    auto on_flip = [&](std::size_t b, bool now_set) {
      dec += now_set ? drop[b] : -drop[b];
      lost += now_set ? mass[b] : -mass[b];
    };
    for (std::uint64_t step = 0; step < tau && !cur.is_zero(); ++step) {
      cur.decrement(on_flip);
      consider(cur, dec, lost);
    }
  }
  // ceil(j) .. ceil(j) + p upward; ceil(j) = floor(j) + 1 unless j is integral,
  // which only matters for the first step and is already covered by the anchor.
  {
    SubsetIndex cur = anchor;
    double dec = anchor_drop, lost = anchor_mass;
    auto on_flip = [&](std::size_t b, bool now_set) {
      dec += now_set ? drop[b] : -drop[b];
      lost += now_set ? mass[b] : -mass[b];
    };
    for (std::uint64_t step = 0; step <= tau && !cur.is_full(); ++step) {
      cur.increment(on_flip);
      consider(cur, dec, lost);
    }
  }

  IndexSet demoted;
  for (auto b : best.index.members()) demoted.push_back(order[b]);
  return finish(std::move(demoted), ProjectionRoute::Shrink, candidates);
}

ProjectionOutcome brute_force_project(std::span<const double> m_p, const ConstraintSpec& spec,
                                      std::span<const Group> groups) {
  check_sizes(m_p, groups);
  const std::size_t n = m_p.size();
  if (n > kOracleMaxSize) {
    throw InstanceTooLarge("exhaustive projection supports at most " + std::to_string(kOracleMaxSize) +
                           " instances, got " + std::to_string(n));
  }
  bool found = false;
  double best_objective = 0.0;
  IndexSet best_set;
  const std::uint32_t limit = std::uint32_t{1} << n;
  IndexSet current;
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    current.clear();
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if ((mask >> i) & 1u) {
        current.push_back(i);
      } else {
        objective += m_p[i] * m_p[i];
      }
    }
    const double r_a = demotion_rank(m_p, current, groups).r_a;
    if (!spec.contains(r_a)) continue;
    if (!found || objective > best_objective ||
        (objective == best_objective &&
         std::lexicographical_compare(current.begin(), current.end(), best_set.begin(), best_set.end()))) {
      found = true;
      best_objective = objective;
      best_set = current;
    }
  }
  ProjectionOutcome out = make_outcome(m_p, spec, groups, found ? best_set : IndexSet{}, ProjectionRoute::Oracle);
  if (!found) out.feasible = false;
  return out;
}

ProjectionOutcome project_onto_q(const Eigen::VectorXd& m, const Eigen::VectorXd& v, const ConstraintSpec& spec,
                                 std::span<const Group> groups, std::uint64_t tau) {
  if (m.size() != v.size()) throw DataError("M and V lengths differ");
  if (static_cast<std::size_t>(m.size()) != groups.size()) throw DataError("M length does not match the labels");
  if (spec.r_a_most < spec.lower) {
    std::ostringstream os;
    os << "no feasible solution: the largest attainable sum-rank of partition A (" << spec.r_a_most
       << ") is below the lower bound C (" << spec.lower << ")";
    throw InfeasibleError(os.str());
  }
  const Eigen::VectorXd m_p = m + v;
  const std::span<const double> values(m_p.data(), static_cast<std::size_t>(m_p.size()));
  const double r_a = demotion_rank(values, {}, groups).r_a;
  if (spec.contains(r_a)) return make_outcome(values, spec, groups, {}, ProjectionRoute::Identity);
  if (r_a > spec.upper()) return shrink_sum_rank(values, spec, groups, tau, true);
  return grow_sum_rank(values, spec, groups);
}

}  // namespace fairrank
