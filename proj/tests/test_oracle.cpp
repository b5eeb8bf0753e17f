#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "ckm/cut_loop.hpp"
#include "ckm/oracle.hpp"
#include "helpers.hpp"

using namespace ckm;

namespace {

// Exact optimum by recursion over copy counts and brute-force assignment.
double naive_opt(const Instance& inst, int kPrime, bool soft) {
  std::vector<int> counts(inst.numFacilities, 0);
  double best = 1e300;
  auto rec = [&](auto&& self, int i, int left) -> void {
    if (i == inst.numFacilities) {
      long long cap = 0;
      for (int c : counts) cap += static_cast<long long>(c) * inst.u;
      if (cap >= inst.numClients) best = std::min(best, testkit::brute_assignment_cost(inst, counts));
      return;
    }
    for (int c = 0; c <= (soft ? left : std::min(left, 1)); ++c) {
      counts[i] = c;
      self(self, i + 1, left - c);
    }
    counts[i] = 0;
  };
  rec(rec, 0, kPrime);
  return best;
}

}  // namespace

TEST(ExactOpt, GroupsTwo) {
  const Instance g = gen_gap_groups(2);
  const ExactResult r = exact_opt(g, 3, false);
  EXPECT_EQ(r.bestCost, 1.0);
  EXPECT_EQ(r.enumerated, 20);
  EXPECT_EQ(min_cost_assignment(g, r.bestOpening).cost, r.bestCost);
  EXPECT_GE(exact_opt(g, 2 * g.k - 3, false).bestCost, 1.0);
}

TEST(ExactOpt, GroupsThree) {
  const Instance g = gen_gap_groups(3);
  EXPECT_GE(exact_opt(g, g.k, false).bestCost, 1.0);
  EXPECT_GE(exact_opt(g, 2 * g.k - 3, false).bestCost, 1.0);
}

TEST(ExactOpt, OpenEverything) {
  const Instance inst = testkit::grid_instance(5, 5, 5, 1, 2, true);
  EXPECT_EQ(exact_opt(inst, 5, false).bestCost, 0.0);
}

TEST(ExactOpt, MatchesNaiveEnumeration) {
  std::mt19937_64 rng(44);
  for (int t = 0; t < 30; ++t) {
    const int nF = std::uniform_int_distribution<int>(1, 5)(rng);
    const int nC = std::uniform_int_distribution<int>(1, 6)(rng);
    const int u = std::uniform_int_distribution<int>(1, 3)(rng);
    const bool soft = t % 2 == 0;
    const int kMin = (nC + u - 1) / u;
    if (!soft && kMin > nF) continue;
    const int k = soft ? kMin + static_cast<int>(rng() % 2) : std::min(nF, kMin + static_cast<int>(rng() % 2));
    const Instance inst = testkit::grid_instance(nF, nC, k, u, rng());
    EXPECT_EQ(exact_opt(inst, k, soft).bestCost, naive_opt(inst, k, soft));
  }
}

TEST(ExactOpt, RelabelingInvariant) {
  const Instance inst = testkit::grid_instance(4, 6, 3, 2, 71);
  std::vector<int> pf{2, 0, 3, 1}, pc{5, 3, 1, 0, 2, 4};
  Instance perm = inst;
  auto point = [&](int p) { return p < 4 ? pf[p] : 4 + pc[p - 4]; };
  for (int a = 0; a < 10; ++a)
    for (int b = 0; b < 10; ++b) perm.dist[point(a) * 10 + point(b)] = inst.dist[a * 10 + b];
  for (bool soft : {false, true}) EXPECT_EQ(exact_opt(inst, 3, soft).bestCost, exact_opt(perm, 3, soft).bestCost);
}

TEST(ExactOpt, Errors) {
  const Instance g = gen_gap_groups(8);
  try {
    exact_opt(g, 9, false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Size);
  }
  try {
    exact_opt(gen_gap_groups(2), 2, false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Infeasible);
  }
}

TEST(RelaxationOrdering, BasicBelowRectBelowExact) {
  std::mt19937_64 rng(808);
  for (int t = 0; t < 30; ++t) {
    const Instance inst = testkit::random_colocated(rng, 8, 3);
    const CutLoopResult loop = cut_loop(inst);
    const double exact = exact_opt(inst, inst.k, false).bestCost;
    EXPECT_LE(loop.basicValue, loop.rectValue + 1e-6);
    EXPECT_LE(loop.rectValue, exact + 1e-6);
    const auto full = exhaustive_cut_loop(inst);
    EXPECT_LE(full.rectValue, exact + 1e-6);
    EXPECT_LE(full.basicValue, full.rectValue + 1e-6);
  }
}
