#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ckm/error.hpp"
#include "ckm/flow.hpp"
#include "ckm/instance.hpp"

namespace ckm {

inline constexpr double kMaxExactCandidates = 1e6;

struct ExactResult {
  double bestCost = std::numeric_limits<double>::infinity();
  OpeningMultiset bestOpening;
  long long enumerated = 0;  // candidates generated
  long long evaluated = 0;   // candidates that reached the flow solver
};

inline double binomial(int n, int r) {
  if (r < 0 || r > n) return 0.0;
  double b = 1.0;
  for (int t = 1; t <= r; ++t) b = b * (n - r + t) / t;
  return b;
}

/// Number of openings exact_opt would enumerate.
inline double exact_search_size(int numFacilities, int kPrime, bool soft) {
  if (soft) return binomial(numFacilities + kPrime - 1, kPrime);
  return binomial(numFacilities, std::min(kPrime, numFacilities));
}

/// Optimum over all openings of at most kPrime copies (distinct locations
/// unless soft). Opening more never costs more, so only the largest size is
/// enumerated, in lexicographic order; the first optimum found is kept.
inline ExactResult exact_opt(const Instance& inst, int kPrime, bool soft) {
  const int nF = inst.numFacilities;
  if (kPrime < 1) fail(ErrorKind::Parameter, "k' must be at least 1");
  if (nF < 1) fail(ErrorKind::Parameter, "instance has no facilities");
  const double space = exact_search_size(nF, kPrime, soft);
  if (space > kMaxExactCandidates)
    fail(ErrorKind::Size, "exact search would enumerate " + std::to_string(static_cast<long long>(space)) +
                              " openings (limit 1000000)");
  const int size = soft ? kPrime : std::min(kPrime, nF);
  if (static_cast<long long>(size) * inst.u < inst.numClients)
    fail(ErrorKind::Infeasible, "no opening of " + std::to_string(size) + " copies can serve " +
                                    std::to_string(inst.numClients) + " clients");

  ExactResult res;
  // Non-decreasing location indices; strictly increasing when hard.
  std::vector<int> pick(size);
  for (int t = 0; t < size; ++t) pick[t] = soft ? 0 : t;
  std::vector<double> nearest(inst.numClients);
  for (;;) {
    ++res.enumerated;
    OpeningMultiset open{std::vector<int>(nF, 0)};
    for (int i : pick) ++open.counts[i];
    // Uncapacitated lower bound: every client at its nearest open location.
    double bound = 0.0;
    for (int j = 0; j < inst.numClients; ++j) {
      double b = std::numeric_limits<double>::infinity();
      for (int i : pick) b = std::min(b, inst.d(i, j));
      bound += b;
    }
    if (bound < res.bestCost) {
      ++res.evaluated;
      const Assignment a = min_cost_assignment(inst, open);
      if (a.cost < res.bestCost) {
        res.bestCost = a.cost;
        res.bestOpening = open;
      }
    }
    // Next combination / multiset in lexicographic order.
    int t = size - 1;
    if (soft) {
      while (t >= 0 && pick[t] == nF - 1) --t;
      if (t < 0) break;
      const int v = pick[t] + 1;
      for (int q = t; q < size; ++q) pick[q] = v;
    } else {
      while (t >= 0 && pick[t] == nF - size + t) --t;
      if (t < 0) break;
      ++pick[t];
      for (int q = t + 1; q < size; ++q) pick[q] = pick[q - 1] + 1;
    }
  }
  return res;
}

}  // namespace ckm
