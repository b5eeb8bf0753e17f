#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ckm/cut_loop.hpp"
#include "ckm/error.hpp"
#include "ckm/instance.hpp"
#include "ckm/instance_io.hpp"
#include "ckm/oracle.hpp"
#include "ckm/rectangle.hpp"
#include "ckm/reduction.hpp"
#include "ckm/rounding.hpp"
#include "ckm/simplex.hpp"

namespace ckm {

// Reports never contain timings so that they are byte-stable across runs.

inline json summary_json(const Instance& inst) {
  return {{"num_facilities", inst.numFacilities},
          {"num_clients", inst.numClients},
          {"k", inst.k},
          {"u", inst.u},
          {"colocated", inst.colocated}};
}

inline json cut_json(const RectangleCut& c) {
  return {{"B", c.B}, {"J", c.J}, {"p", c.p}, {"piece", std::string(to_string(c.piece))},
          {"lhs", c.lhs}, {"rhs", c.rhs}};
}

inline json opening_json(const OpeningMultiset& open) {
  json a = json::array();
  for (std::size_t i = 0; i < open.counts.size(); ++i)
    if (open.counts[i] > 0) a.push_back({{"location", i}, {"copies", open.counts[i]}});
  return a;
}

inline json integral_json(const IntegralSolution& s) {
  return {{"openings", opening_json(s.open)},
          {"assignment", s.assignment.target},
          {"cost", s.assignment.cost}};
}

inline json diagnostics_json(const RoundingDiagnostics& d) {
  json coll = json::array();
  for (const auto& c : d.collections)
    coll.push_back({{"tree", c.tree}, {"level", c.level}, {"lhs", c.lhs}, {"rhs", c.rhs}});
  json sep = json::array();
  for (const auto& s : d.separations)
    sep.push_back({{"tree", s.tree}, {"level", s.level}, {"distance", s.distance}, {"half_next", s.halfNext}});
  return {{"ell", d.ell},
          {"small_case", d.smallCase},
          {"transport_cost", d.transportCost},
          {"transport_bound", d.transportBound},
          {"moving_cost", d.movingCost},
          {"openings", d.openings},
          {"opening_bound", d.openingBound},
          {"assignment_cost", d.assignmentCost},
          {"collections", std::move(coll)},
          {"separations", std::move(sep)}};
}

inline json trace_json(const RoundingResult& r) {
  const RoundingTrace& t = r.trace;
  json regions = json::array();
  for (const auto& reg : t.voronoi.regions) regions.push_back(reg.size());
  json trees = json::array();
  for (std::size_t ti = 0; ti < t.trees.size(); ++ti) {
    const auto& tr = t.trees[ti];
    json levels = json::array();
    for (const auto& lv : tr.levelSets) levels.push_back(lv);
    json tj = {{"vertices", tr.vertices}, {"parent", tr.parent}, {"root", tr.root},
               {"rank", tr.rank}, {"height", tr.height}, {"level_sets", std::move(levels)}};
    if (ti < t.finalStates.size())
      tj["final"] = {{"alpha", t.finalStates[ti].alpha}, {"beta", t.finalStates[ti].beta}};
    trees.push_back(std::move(tj));
  }
  json ledger = json::array();
  for (const auto& e : t.ledger)
    ledger.push_back({{"tree", e.tree}, {"level", e.level}, {"from", e.from}, {"to", e.to},
                      {"amount", e.amount}, {"distance", e.distance}});
  json out = {{"representatives", t.reps.reps},
              {"region_sizes", std::move(regions)},
              {"alpha", t.transport.alpha},
              {"beta", t.transport.beta},
              {"trees", std::move(trees)},
              {"ledger", std::move(ledger)}};
  out["final_openings"] = r.solution ? opening_json(r.solution->open) : json(nullptr);
  return out;
}

inline json history_json(const std::vector<double>& h) { return json(h); }

struct SolveOptions {
  double eps = 0.5;
  int maxRounds = kDefaultMaxCutRounds;
  double tol = 1e-7;
};

/// `solve --mode basic`.
inline json solve_basic_report(const Instance& inst, double tol) {
  const FractionalSolution s = solve_lp(build_basic_lp(inst), tol);
  return {{"mode", "basic"}, {"instance", summary_json(inst)}, {"lpBasicValue", s.objective},
          {"y", s.y}};
}

/// `solve --mode rect`. Co-located instances run round-or-separate; others
/// separate exhaustively over facility sets.
inline json solve_rect_report(const Instance& inst, const SolveOptions& o) {
  json r = {{"mode", "rect"}, {"instance", summary_json(inst)}};
  if (inst.colocated) {
    const CutLoopResult res = cut_loop(inst, {o.eps, o.maxRounds, o.tol});
    r["separation"] = "round_or_separate";
    r["lpBasicValue"] = res.basicValue;
    r["lpRectValue"] = res.rectValue;
    r["cutsAdded"] = res.cuts.size();
    r["cutRounds"] = res.rounds;
    r["history"] = res.history;
    json cuts = json::array();
    for (const auto& c : res.cuts) cuts.push_back(cut_json(c));
    r["cuts"] = std::move(cuts);
    r["status"] = "rounded";
    r["integral"] = integral_json(*res.rounding.solution);
    r["openings"] = res.rounding.diag.openings;
    r["bound"] = res.rounding.diag.openingBound;
  } else {
    const ExhaustiveLoopResult res = exhaustive_cut_loop(inst, o.maxRounds, o.tol);
    r["separation"] = "exhaustive";
    r["lpBasicValue"] = res.basicValue;
    r["lpRectValue"] = res.rectValue;
    r["cutsAdded"] = res.cuts.size();
    r["cutRounds"] = res.rounds;
    r["history"] = res.history;
    r["status"] = "rect_feasible";
  }
  return r;
}

/// `round`: the cut loop, reported around the successful rounding attempt.
inline json round_report(const Instance& inst, double eps, json* trace = nullptr) {
  const CutLoopResult res = cut_loop(inst, {eps, kDefaultMaxCutRounds, 1e-7});
  const RoundingResult& rr = res.rounding;
  json r = {{"instance", summary_json(inst)},
            {"eps", eps},
            {"status", "rounded"},
            {"lpBasicValue", res.basicValue},
            {"lpRectValue", res.rectValue},
            {"cutsAdded", res.cuts.size()},
            {"cutRounds", res.rounds},
            {"integralCost", rr.solution->assignment.cost},
            {"openings", rr.diag.openings},
            {"bound", rr.diag.openingBound},
            {"solution", integral_json(*rr.solution)},
            {"diagnostics", diagnostics_json(rr.diag)}};
  r["ratioLp"] = res.rectValue > 0 ? json(rr.solution->assignment.cost / res.rectValue) : json(nullptr);
  if (trace) *trace = trace_json(rr);
  return r;
}

inline json exact_report(const Instance& inst, int kPrime, bool soft) {
  const ExactResult e = exact_opt(inst, kPrime, soft);
  return {{"instance", summary_json(inst)},
          {"kPrime", kPrime},
          {"soft", soft},
          {"exactOpt", e.bestCost},
          {"opening", opening_json(e.bestOpening)},
          {"enumerated", e.enumerated},
          {"evaluated", e.evaluated}};
}

/// Soft solution file: {"openings": [copies per client location],
/// "assignment": [client location serving each client]}.
inline SoftSolution soft_from_json(const json& j, int numClients) {
  if (!j.is_object() || !j.contains("openings") || !j.contains("assignment"))
    fail(ErrorKind::Parse, "soft solution: needs \"openings\" and \"assignment\" arrays");
  SoftSolution s;
  try {
    s.open.counts = j.at("openings").get<std::vector<int>>();
    s.target = j.at("assignment").get<std::vector<int>>();
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("soft solution: ") + e.what());
  }
  if (static_cast<int>(s.open.counts.size()) != numClients || static_cast<int>(s.target.size()) != numClients)
    fail(ErrorKind::Shape, "soft solution: arrays must have one entry per client");
  for (int c : s.open.counts)
    if (c < 0) fail(ErrorKind::Parse, "soft solution: negative opening count");
  return s;
}

/// `reduce`: the base matching is the cheapest assignment with every hard
/// facility open once.
inline json reduce_report(const Instance& hard, const SoftSolution& soft) {
  const Assignment base = min_cost_assignment(hard, OpeningMultiset{std::vector<int>(hard.numFacilities, 1)});
  const ReductionResult rr = soft_to_hard(hard, soft, base.target);
  const ReductionStats& s = rr.stats;
  return {{"instance", summary_json(hard)},
          {"opened", rr.opened},
          {"assignment", rr.assignment.target},
          {"cost", rr.assignment.cost},
          {"baseCost", s.baseCost},
          {"softCost", s.softCost},
          {"costBound", s.baseCost + 2.0 * s.softCost},
          {"cycleRounds", s.cycleRounds},
          {"pathRounds", s.pathRounds},
          {"forestAfterCycles", s.forestAfterCycles},
          {"oneUnderMatchedPerTree", s.oneUnderMatchedPerTree}};
}

inline json exact_or_skip(const Instance& inst, int kPrime, bool soft) {
  if (exact_search_size(inst.numFacilities, kPrime, soft) > kMaxExactCandidates) return nullptr;
  return exact_opt(inst, kPrime, soft).bestCost;
}

inline json ratio_or_null(const json& num, double den) {
  if (num.is_null() || !(den > 0)) return nullptr;
  return num.get<double>() / den;
}

/// The groups experiment: natural relaxation, cut loop, and the exact
/// optimum with k and with 2k-3 facilities when enumeration is small enough.
inline json groups_experiment(int u, double eps = 0.5) {
  const Instance inst = gen_gap_groups(u);
  const CutLoopResult res = cut_loop(inst, {eps, kDefaultMaxCutRounds, 1e-7});
  const double cost = res.rounding.solution->assignment.cost;
  json r = {{"instance", summary_json(inst)},
            {"eps", eps},
            {"lpBasicValue", res.basicValue},
            {"lpRectValue", res.rectValue},
            {"cutsAdded", res.cuts.size()},
            {"cutRounds", res.rounds},
            {"history", res.history},
            {"integralCost", cost},
            {"openings", res.rounding.diag.openings},
            {"bound", res.rounding.diag.openingBound}};
  r["exactOpt"] = exact_or_skip(inst, inst.k, false);
  r["exactOpt2kMinus3"] = inst.k >= 2 ? exact_or_skip(inst, 2 * inst.k - 3, false) : json(nullptr);
  r["ratioLp"] = ratio_or_null(json(cost), res.rectValue);
  r["ratioExact"] = r["exactOpt"].is_null() ? json(nullptr) : ratio_or_null(json(cost), r["exactOpt"].get<double>());
  return r;
}

/// The expander experiment: the fractional solution with gamma = 1/chi, its
/// rectangle feasibility over every facility set, and the soft optimum with
/// k copies.
inline json expander_experiment(int u, std::uint64_t seed) {
  const Instance inst = gen_expander_gap(u, seed);
  const GraphDescription& g = *inst.graph;
  const double chi = edge_expansion(g);
  const double gamma = 1.0 / chi;
  const FractionalSolution sol = build_expander_fractional(inst, g, gamma);
  json edges = json::array();
  for (auto [a, b] : g.edges) edges.push_back({a, b});
  json r = {{"instance", summary_json(inst)},
            {"edges", std::move(edges)},
            {"edgeExpansion", chi},
            {"gamma", gamma},
            {"fractionalCost", sol.objective},
            {"formulaCost", 3.0 * gamma * (u + 1)}};
  r["basicLpFeasible"] = !check_basic_lp(sol, inst.k, inst.u, 1e-9).has_value();
  const auto viol = bruteforce_feasibility(sol, inst.u, kCutTol);
  r["rectangleFeasible"] = !viol.has_value();
  r["violatedRectangle"] = viol ? cut_json(*viol) : json(nullptr);
  const json ex = exact_or_skip(inst, inst.k, true);
  r["exactOpt"] = ex;
  r["ratio"] = ratio_or_null(ex, sol.objective);
  return r;
}

/// `gapdemo`: both experiments at capacity u. The expander needs u even and
/// at least 4; otherwise its entry records why it was skipped.
inline json gapdemo_report(int u, std::uint64_t seed) {
  json r = {{"u", u}, {"seed", seed}};
  r["groups"] = groups_experiment(u);
  if (u >= 4 && u % 2 == 0)
    r["expander"] = expander_experiment(u, seed);
  else
    r["expander"] = {{"skipped", "a 3-regular graph on u vertices needs u even and at least 4"}};
  return r;
}

}  // namespace ckm
