#include <gtest/gtest.h>

#include "ckm/report.hpp"

using namespace ckm;

namespace {

Instance two_points() {
  Instance inst;
  inst.numFacilities = inst.numClients = 2;
  inst.k = 2;
  inst.u = 1;
  inst.colocated = true;
  inst.dist = {0, 1, 0, 1, 1, 0, 1, 0, 0, 1, 0, 1, 1, 0, 1, 0};
  return inst;
}

}  // namespace

TEST(GapDemo, GroupsTwo) {
  const json r = gapdemo_report(2, 0);
  EXPECT_NEAR(r["groups"]["lpBasicValue"].get<double>(), 0.0, 1e-9);
  EXPECT_GT(r["groups"]["lpRectValue"].get<double>(), 0.0);
  EXPECT_EQ(r["groups"]["exactOpt"].get<double>(), 1.0);
  EXPECT_TRUE(r["expander"].contains("skipped"));
}

TEST(GapDemo, ExpanderFour) {
  const json r = gapdemo_report(4, 0);
  const json& e = r["expander"];
  EXPECT_EQ(e["edgeExpansion"].get<double>(), 2.0);
  EXPECT_TRUE(e["rectangleFeasible"].get<bool>());
  EXPECT_TRUE(e["basicLpFeasible"].get<bool>());
  EXPECT_DOUBLE_EQ(e["fractionalCost"].get<double>(), e["formulaCost"].get<double>());
  EXPECT_EQ(e["exactOpt"].get<double>(), 3.0);
}

TEST(GapDemo, ByteStable) {
  EXPECT_EQ(gapdemo_report(8, 7).dump(2), gapdemo_report(8, 7).dump(2));
}

TEST(GapDemo, RelaxationOrdering) {
  for (int u : {2, 3}) {
    const json g = gapdemo_report(u, 0)["groups"];
    EXPECT_LE(g["lpBasicValue"].get<double>(), g["lpRectValue"].get<double>() + 1e-6);
    EXPECT_LE(g["lpRectValue"].get<double>(), g["exactOpt"].get<double>() + 1e-6);
    EXPECT_LE(g["openings"].get<int>(), g["bound"].get<int>());
  }
}

TEST(SolveReport, TrivialInstanceNeedsNoCuts) {
  const json r = solve_rect_report(two_points(), {});
  EXPECT_EQ(r["cutsAdded"].get<int>(), 0);
  EXPECT_EQ(r["lpRectValue"].get<double>(), 0.0);
}

TEST(SolveReport, RectHistoryIsMonotone) {
  const json r = solve_rect_report(gen_gap_groups(3), {});
  const auto h = r["history"].get<std::vector<double>>();
  for (std::size_t t = 1; t < h.size(); ++t) EXPECT_GE(h[t], h[t - 1] - 1e-7);
  EXPECT_EQ(r["cutsAdded"].get<std::size_t>() + 1, h.size());
}

TEST(RoundReport, GroupsTwoEpsOne) {
  json trace;
  const json r = round_report(gen_gap_groups(2), 1.0, &trace);
  EXPECT_EQ(r["status"], "rounded");
  EXPECT_LE(r["openings"].get<int>(), 6);
  EXPECT_TRUE(trace.contains("ledger"));
  EXPECT_FALSE(trace["final_openings"].is_null());
}

TEST(SoftSolutionJson, Errors) {
  EXPECT_THROW(soft_from_json(json::object(), 2), Error);
  EXPECT_THROW(soft_from_json(json{{"openings", {1}}, {"assignment", {0, 0}}}, 2), Error);
  EXPECT_THROW(soft_from_json(json{{"openings", {-1, 2}}, {"assignment", {1, 1}}}, 2), Error);
  const SoftSolution s = soft_from_json(json{{"openings", {1, 1}}, {"assignment", {0, 1}}}, 2);
  EXPECT_EQ(s.open.total(), 2);
}
