#include <doctest.h>

#include <random>

#include "fairrank/error.hpp"
#include "fairrank/metrics.hpp"
#include "fairrank/ranking.hpp"
#include "support/oracles.hpp"

using namespace fairrank;

namespace {

std::vector<Group> labels(const char* s) {
  std::vector<Group> g;
  for (; *s; ++s) g.push_back(*s == 'A' ? Group::A : Group::B);
  return g;
}

std::vector<Group> flipped(std::vector<Group> g) {
  for (auto& x : g) x = other(x);
  return g;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("auc example") {
    const std::vector<double> v{10, 20, 15, 5, 30};
    CHECK(auc(v, labels("ABABB")) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(auc(std::vector<double>{1, 1}, labels("AB")) == 0.5);
    CHECK_THROWS_AS(auc(std::vector<double>{1, 2}, labels("AA")), DataError);
  }

  TEST_CASE("mean difference and balanced residuals") {
    const std::vector<double> v{1, 2, 3, 4};
    CHECK(mean_difference(v, labels("AABB")) == -2.0);
    CHECK(mean_difference(v, labels("BBAA")) == 2.0);
    const std::vector<double> y{1, 2, 3, 4};
    CHECK(balanced_residuals(y, y, labels("ABAB")) == 0.0);
    const std::vector<double> zero(4, 0.0);
    CHECK(balanced_residuals(y, zero, labels("AABB")) == -2.0);
    CHECK_THROWS_AS(balanced_residuals(y, std::vector<double>{0.0}, labels("AABB")), DataError);
  }

  TEST_CASE("impact rank ratio") {
    const std::vector<double> v{1, 2, 3, 4, 5};
    CHECK(impact_rank_ratio(v, labels("AABBB")) == doctest::Approx(0.375).epsilon(1e-15));
    CHECK(impact_rank_ratio(std::vector<double>{2, 2, 2, 2}, labels("ABAB")) == 1.0);
    CHECK(is_discriminatory(0.79));
    CHECK_FALSE(is_discriminatory(0.81));
    CHECK_FALSE(is_discriminatory(kIrrDiscriminationThreshold));
  }

  TEST_CASE("rmse") {
    CHECK(rmse(std::vector<double>{3, 4}, std::vector<double>{0, 0}) == doctest::Approx(3.5355339059).epsilon(1e-10));
    CHECK(rmse(std::vector<double>{1, 2}, std::vector<double>{1, 2}) == 0.0);
    CHECK_THROWS_AS(rmse(std::vector<double>{}, std::vector<double>{}), DataError);
  }

  TEST_CASE("evaluate bundles every metric") {
    const std::vector<double> y{1, 2, 3, 4, 5};
    const std::vector<double> y_hat{1.5, 2, 2.5, 4, 6};
    const auto g = labels("AABBB");
    const MetricsReport r = evaluate("raw", y, y_hat, y_hat, g);
    CHECK(r.label == "raw");
    CHECK(r.n_a == 2);
    CHECK(r.n_b == 3);
    CHECK(r.auc == auc(y_hat, g));
    CHECK(r.irr == impact_rank_ratio(y_hat, g));
    CHECK(r.md == mean_difference(y_hat, g));
    CHECK(r.rmse == rmse(y, y_hat));
  }

  TEST_CASE("group flip and shift invariance") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 200; ++trial) {
      auto inst = fairrank::testing::random_instance(rng, 3 + trial % 25, trial % 2 ? 4 : 0);
      const auto g = inst.groups;
      CHECK(auc(inst.values, g) + auc(inst.values, flipped(g)) == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(mean_difference(inst.values, g) == doctest::Approx(-mean_difference(inst.values, flipped(g))));
      std::vector<double> shifted = inst.values;
      for (auto& x : shifted) x += 4.0;  // integers and normals both stay exactly ordered
      CHECK(auc(shifted, g) == auc(inst.values, g));
      CHECK(impact_rank_ratio(shifted, g) == impact_rank_ratio(inst.values, g));
    }
  }

  TEST_CASE("pairwise and rank-sum AUC agree") {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 300; ++trial) {
      auto inst = fairrank::testing::random_instance(rng, 2 + trial % 60, trial % 3 == 0 ? 5 : 0);
      const auto n_a = static_cast<std::size_t>(std::count(inst.groups.begin(), inst.groups.end(), Group::A));
      const std::size_t n_b = inst.values.size() - n_a;
      const double r_a = sum_rank_partition(assign_ranks(inst.values), inst.groups, Group::A);
      REQUIRE(std::abs(auc(inst.values, inst.groups) - auc_from_u(mann_whitney_u(r_a, n_a), n_a, n_b)) <= 1e-12);
    }
  }
}
