#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "ckm/error.hpp"
#include "ckm/lp_model.hpp"
#include "ckm/numeric.hpp"
#include "ckm/solution.hpp"

namespace ckm {

inline constexpr double kCutTol = 1e-7;

/// f(p, q): the most clients that q (possibly fractional) facilities of
/// capacity u can serve out of p, interpolated linearly in q.
inline double f_value(long long p, double q, int u) {
  const long long fl = p / u;
  const long long r = p % u;
  const long long cl = fl + (r > 0 ? 1 : 0);
  if (q <= static_cast<double>(fl)) return q * u;
  if (q >= static_cast<double>(cl)) return static_cast<double>(p);
  return static_cast<double>(u * fl) + static_cast<double>(r) * (q - static_cast<double>(fl));
}

enum class CutPiece { CapP, CapUQ, Interpolation };

inline const char* to_string(CutPiece piece) {
  switch (piece) {
    case CutPiece::CapP: return "cap-p";
    case CutPiece::CapUQ: return "cap-uq";
    case CutPiece::Interpolation: return "interpolation";
  }
  return "?";
}

/// A violated rectangle: x_{B,J} > f(|J|, y_B), with the linear piece of f
/// that is tightest at the current y_B.
struct RectangleCut {
  std::vector<int> B;
  std::vector<int> J;
  int p = 0;
  CutPiece piece = CutPiece::CapP;
  double lhs = 0.0;  // x_{B,J}
  double rhs = 0.0;  // f(p, y_B)
  double violation() const { return lhs - rhs; }
};

/// Values of the three linear pieces at (p, q); f is their minimum.
inline std::array<double, 3> piece_values(long long p, double q, int u) {
  const long long fl = p / u;
  const long long r = p % u;
  return {static_cast<double>(p), u * q,
          static_cast<double>(u * fl) + static_cast<double>(r) * (q - static_cast<double>(fl))};
}

inline std::vector<double> x_of_set(const FractionalSolution& sol, const std::vector<int>& B) {
  std::vector<double> xb(sol.numClients, 0.0);
  for (int i : B)
    for (int j = 0; j < sol.numClients; ++j) xb[j] += sol.xf(i, j);
  return xb;
}

inline double y_of_set(const FractionalSolution& sol, const std::vector<int>& B) {
  double s = 0.0;
  for (int i : B) s += sol.y[i];
  return s;
}

/// Top-p separation for a fixed facility set B. Returns the cut for the most
/// violated p, or nothing when every prefix is within tol of f.
inline std::optional<RectangleCut> check_rectangle(const FractionalSolution& sol,
                                                   const std::vector<int>& B, int u,
                                                   double tol = kCutTol) {
  if (B.empty()) return std::nullopt;
  for (int i : B)
    if (i < 0 || i >= sol.numFacilities) fail(ErrorKind::Shape, "facility index out of range");
  const auto xb = x_of_set(sol, B);
  const double yb = y_of_set(sol, B);
  std::vector<int> order(sol.numClients);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return xb[a] > xb[b]; });

  int bestP = 0;
  double bestViolation = tol;
  double bestLhs = 0.0, prefix = 0.0;
  for (int p = 1; p <= sol.numClients; ++p) {
    prefix += xb[order[p - 1]];
    const double v = prefix - f_value(p, yb, u);
    if (v > bestViolation) {
      bestViolation = v;
      bestP = p;
      bestLhs = prefix;
    }
  }
  if (bestP == 0) return std::nullopt;

  RectangleCut cut;
  cut.B = B;
  std::sort(cut.B.begin(), cut.B.end());
  cut.J.assign(order.begin(), order.begin() + bestP);
  std::sort(cut.J.begin(), cut.J.end());
  cut.p = bestP;
  cut.lhs = bestLhs;
  cut.rhs = f_value(bestP, yb, u);
  const auto pv = piece_values(bestP, yb, u);
  const auto tight = std::min_element(pv.begin(), pv.end()) - pv.begin();
  cut.piece = static_cast<CutPiece>(tight);
  return cut;
}

/// The linear row for the cut's piece over x_{i,j} (i in B, j in J) and y_i (i in B).
inline LinearConstraint cut_to_linear(const RectangleCut& cut, int u, int numFacilities,
                                      int numClients) {
  LinearConstraint row;
  row.sense = Sense::LessEqual;
  for (int i : cut.B)
    for (int j : cut.J) row.terms.emplace_back(i * numClients + j, 1.0);
  const int yBase = numFacilities * numClients;
  const long long fl = cut.p / u;
  const long long r = cut.p % u;
  switch (cut.piece) {
    case CutPiece::CapP:
      row.rhs = cut.p;
      break;
    case CutPiece::CapUQ:
      for (int i : cut.B) row.terms.emplace_back(yBase + i, -double(u));
      row.rhs = 0.0;
      break;
    case CutPiece::Interpolation:
      if (r > 0)
        for (int i : cut.B) row.terms.emplace_back(yBase + i, -double(r));
      row.rhs = static_cast<double>(fl * (u - r));
      break;
  }
  return row;
}

inline constexpr int kMaxBruteForceFacilities = 20;

/// Checks the rectangle constraints for every nonempty B by enumeration. Returns the first
/// violated B (in increasing bitmask order) together with its cut.
inline std::optional<RectangleCut> bruteforce_feasibility(const FractionalSolution& sol, int u,
                                                          double tol = kCutTol) {
  const int n = sol.numFacilities;
  if (n > kMaxBruteForceFacilities)
    fail(ErrorKind::Size, "brute-force rectangle check supports at most " +
                              std::to_string(kMaxBruteForceFacilities) + " facilities, got " +
                              std::to_string(n));
  const std::uint32_t limit = std::uint32_t{1} << n;
  std::vector<int> B;
  for (std::uint32_t mask = 1; mask < limit; ++mask) {
    B.clear();
    for (int i = 0; i < n; ++i)
      if (mask >> i & 1u) B.push_back(i);
    if (auto cut = check_rectangle(sol, B, u, tol)) return cut;
  }
  return std::nullopt;
}

/// The most violated cut of every violated nonempty B, in bitmask order.
inline std::vector<RectangleCut> all_violated_rectangles(const FractionalSolution& sol, int u,
                                                         double tol = kCutTol) {
  const int n = sol.numFacilities;
  if (n > kMaxBruteForceFacilities)
    fail(ErrorKind::Size, "brute-force rectangle check supports at most " +
                              std::to_string(kMaxBruteForceFacilities) + " facilities, got " +
                              std::to_string(n));
  std::vector<RectangleCut> out;
  std::vector<int> B;
  for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << n); ++mask) {
    B.clear();
    for (int i = 0; i < n; ++i)
      if (mask >> i & 1u) B.push_back(i);
    if (auto cut = check_rectangle(sol, B, u, tol)) out.push_back(std::move(*cut));
  }
  return out;
}

struct Lemma3Result {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// Checks sum_j x_{B,j}(1 - x_{B,j}) >= u frac(y'_B) cofrac(y_B),
/// where y'_B = x_B / u. Only claimed when every rectangle with this B holds
/// and y'_B >= floor(y_B).
inline Lemma3Result lemma3_check(const FractionalSolution& sol, const std::vector<int>& B, int u,
                                 double tol = kCutTol) {
  if (check_rectangle(sol, B, u, tol))
    fail(ErrorKind::Precondition, "a rectangle constraint fails for this B; the inequality is not claimed");
  const auto xb = x_of_set(sol, B);
  const double yb = y_of_set(sol, B);
  double total = 0.0;
  Lemma3Result res;
  for (double v : xb) {
    total += v;
    res.lhs += v * (1.0 - v);
  }
  const double yPrime = total / u;
  if (yPrime < num::floor_t(yb) - num::kIntTol)
    fail(ErrorKind::Precondition, "y'_B is below floor(y_B); the inequality is not claimed");
  res.rhs = u * num::frac(yPrime) * num::cofrac(yb);
  res.holds = res.lhs >= res.rhs - tol;
  return res;
}

}  // namespace ckm
