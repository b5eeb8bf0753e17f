#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "ckm/error.hpp"
#include "ckm/instance.hpp"
#include "ckm/lp_model.hpp"
#include "ckm/rectangle.hpp"
#include "ckm/rounding.hpp"
#include "ckm/simplex.hpp"

namespace ckm {

inline constexpr int kDefaultMaxCutRounds = 200;

struct CutLoopOptions {
  double eps = 0.5;
  int maxRounds = kDefaultMaxCutRounds;
  double tol = 1e-7;
};

struct CutLoopResult {
  double basicValue = 0.0;
  double rectValue = 0.0;
  std::vector<double> history;  // LP value at every round
  std::vector<RectangleCut> cuts;
  int rounds = 0;
  FractionalSolution lastLp;
  RoundingResult rounding;  // the successful attempt
};

/// Solve the natural relaxation, try to round, add the violated rectangle as
/// a cut, and repeat until rounding succeeds. Fails with CutRoundCap after
/// maxRounds unsuccessful attempts.
inline CutLoopResult cut_loop(const Instance& inst, const CutLoopOptions& opts = {}) {
  SimplexOptions so;
  so.optimalityTol = opts.tol;
  LPModel model = build_basic_lp(inst);
  LpSession session(model, so);
  CutLoopResult out;
  for (int round = 0;; ++round) {
    FractionalSolution sol = to_fractional(session.model(), session.solve_values());
    if (round == 0) out.basicValue = sol.objective;
    if (!out.history.empty() && sol.objective < out.history.back() - 1e-7 * (1.0 + std::abs(sol.objective)))
      fail(ErrorKind::Internal, "LP value decreased after adding a cut");
    out.history.push_back(sol.objective);
    out.rectValue = sol.objective;
    out.lastLp = sol;
    out.rounds = round + 1;
    RoundingResult r = round_solution(inst, sol, opts.eps, opts.tol);
    if (r.rounded()) {
      out.rounding = std::move(r);
      return out;
    }
    if (round + 1 >= opts.maxRounds)
      fail(ErrorKind::CutRoundCap, "rounding still separates after " + std::to_string(opts.maxRounds) +
                                       " cut rounds");
    std::vector<LinearConstraint> rows;
    for (const auto& c : r.cuts) {
      for (const auto& old : out.cuts)
        if (old.B == c.B && old.J == c.J && old.piece == c.piece)
          fail(ErrorKind::Internal, "separation returned a cut that is already in the pool");
      rows.push_back(cut_to_linear(c, inst.u, inst.numFacilities, inst.numClients));
      out.cuts.push_back(c);
    }
    session.add_rows(rows);
  }
}

struct ExhaustiveLoopResult {
  double basicValue = 0.0;
  double rectValue = 0.0;
  std::vector<double> history;
  std::vector<RectangleCut> cuts;
  int rounds = 0;
  FractionalSolution lastLp;
};

/// The rectangle LP itself on small instances: separate by enumerating every
/// facility set until none is violated.
inline ExhaustiveLoopResult exhaustive_cut_loop(const Instance& inst, int maxRounds = kDefaultMaxCutRounds,
                                                double tol = 1e-7, int cutsPerRound = 32) {
  if (inst.numFacilities > kMaxBruteForceFacilities)
    fail(ErrorKind::Size, "exhaustive separation supports at most " +
                              std::to_string(kMaxBruteForceFacilities) + " facilities");
  SimplexOptions so;
  so.optimalityTol = tol;
  LpSession session(build_basic_lp(inst), so);
  ExhaustiveLoopResult out;
  for (int round = 0;; ++round) {
    FractionalSolution sol = to_fractional(session.model(), session.solve_values());
    if (round == 0) out.basicValue = sol.objective;
    if (!out.history.empty() && sol.objective < out.history.back() - 1e-7 * (1.0 + std::abs(sol.objective)))
      fail(ErrorKind::Internal, "LP value decreased after adding a cut");
    out.history.push_back(sol.objective);
    out.rectValue = sol.objective;
    out.lastLp = sol;
    out.rounds = round + 1;
    auto cuts = all_violated_rectangles(sol, inst.u, tol);
    if (cuts.empty()) return out;
    std::stable_sort(cuts.begin(), cuts.end(), [](const RectangleCut& a, const RectangleCut& b) {
      return a.violation() > b.violation();
    });
    if (static_cast<int>(cuts.size()) > cutsPerRound) cuts.resize(cutsPerRound);
    if (round + 1 >= maxRounds)
      fail(ErrorKind::CutRoundCap, "separation still finds violated rectangles after " +
                                       std::to_string(maxRounds) + " rounds");
    std::vector<LinearConstraint> rows;
    for (auto& c : cuts) {
      rows.push_back(cut_to_linear(c, inst.u, inst.numFacilities, inst.numClients));
      out.cuts.push_back(std::move(c));
    }
    session.add_rows(rows);
  }
}

}  // namespace ckm
