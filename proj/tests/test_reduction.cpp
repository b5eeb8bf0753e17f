#include <gtest/gtest.h>

#include <random>
#include <set>

#include "ckm/reduction.hpp"
#include "helpers.hpp"

using namespace ckm;

namespace {

struct Case {
  Instance hard;
  SoftSolution soft;
  Assignment base;
};

// Random hard instance with a random soft solution over client locations.
Case random_case(std::mt19937_64& rng) {
  for (;;) {
    const int nF = std::uniform_int_distribution<int>(2, 8)(rng);
    const int nC = std::uniform_int_distribution<int>(2, 8)(rng);
    const int u = std::uniform_int_distribution<int>(1, 4)(rng);
    if (nF * u < nC) continue;
    const int kMin = (nC + u - 1) / u;
    const int k = std::uniform_int_distribution<int>(kMin, std::min(nF, kMin + 2))(rng);
    Case c;
    c.hard = testkit::grid_instance(nF, nC, k, u, rng());
    c.soft.open.counts.assign(nC, 0);
    for (int t = 0; t < k; ++t) ++c.soft.open.counts[std::uniform_int_distribution<int>(0, nC - 1)(rng)];
    c.soft.target = min_cost_assignment(make_colocated(c.hard), c.soft.open).target;
    c.base = min_cost_assignment(c.hard, OpeningMultiset{std::vector<int>(nF, 1)});
    return c;
  }
}

void expect_valid(const Case& c, const ReductionResult& r) {
  const ReductionStats& s = r.stats;
  EXPECT_LE(static_cast<int>(r.opened.size()), c.hard.k);
  EXPECT_EQ(std::set<int>(r.opened.begin(), r.opened.end()).size(), r.opened.size());
  OpeningMultiset open{std::vector<int>(c.hard.numFacilities, 0)};
  for (int f : r.opened) open.counts[f] = 1;
  EXPECT_EQ(assignment_cost(c.hard, open, r.assignment.target), r.assignment.cost);
  double softCost = 0.0;
  for (int j = 0; j < c.hard.numClients; ++j) softCost += c.hard.client_dist(j, c.soft.target[j]);
  EXPECT_EQ(s.baseCost, c.base.cost);
  EXPECT_EQ(s.softCost, softCost);
  EXPECT_LE(r.assignment.cost, c.base.cost + 2.0 * softCost);
  EXPECT_LE(s.constructedCost, c.base.cost + 2.0 * softCost);
  EXPECT_LE(s.concatenated, c.base.cost + softCost);
  EXPECT_LE(s.afterCycles, s.concatenated);
  EXPECT_LE(s.afterPaths, s.afterCycles);
  EXPECT_TRUE(s.forestAfterCycles);
  EXPECT_TRUE(s.oneUnderMatchedPerTree);
  EXPECT_TRUE(s.treeCountsMatch);
}

}  // namespace

TEST(SoftToHard, RandomInstances) {
  std::mt19937_64 rng(606);
  for (int t = 0; t < 100; ++t) {
    const Case c = random_case(rng);
    expect_valid(c, soft_to_hard(c.hard, c.soft, c.base.target));
  }
}

TEST(SoftToHard, GroupsWithStackedCopies) {
  Case c;
  c.hard = gen_gap_groups(2);
  c.soft.open.counts = {3, 0, 0, 0, 0, 0};
  c.soft.target = min_cost_assignment(make_colocated(c.hard), c.soft.open).target;
  c.base = min_cost_assignment(c.hard, OpeningMultiset{std::vector<int>(6, 1)});
  const auto r = soft_to_hard(c.hard, c.soft, c.base.target);
  EXPECT_LE(r.opened.size(), 3u);
  expect_valid(c, r);
}

TEST(SoftToHard, IdentityLikeCase) {
  // Facilities co-located with clients; soft copies sit at distinct locations.
  Instance hard = testkit::grid_instance(4, 4, 2, 2, 31, true);
  hard.colocated = false;
  Case c;
  c.hard = hard;
  c.soft.open.counts = {1, 0, 1, 0};
  c.soft.target = min_cost_assignment(make_colocated(hard), c.soft.open).target;
  c.base.target = c.soft.target;
  c.base.cost = 0.0;
  for (int j = 0; j < 4; ++j) c.base.cost += hard.d(c.base.target[j], j);
  const auto r = soft_to_hard(hard, c.soft, c.base.target);
  expect_valid(c, r);
}

TEST(SoftToHard, Preconditions) {
  const Instance hard = gen_gap_groups(2);
  const auto base = min_cost_assignment(hard, OpeningMultiset{std::vector<int>(6, 1)}).target;
  SoftSolution tooMany{OpeningMultiset{{4, 0, 0, 0, 0, 0}}, {0, 0, 0, 0, 0, 0}};
  EXPECT_THROW(soft_to_hard(hard, tooMany, base), Error);
  SoftSolution over{OpeningMultiset{{1, 0, 0, 0, 0, 0}}, {0, 0, 0, 0, 0, 0}};
  EXPECT_THROW(soft_to_hard(hard, over, base), Error);
  SoftSolution ok{OpeningMultiset{{3, 0, 0, 0, 0, 0}}, {0, 0, 0, 0, 0, 0}};
  EXPECT_THROW(soft_to_hard(hard, ok, {0, 0, 0, 0, 0, 0}), Error);
}
