#pragma once

#include <cstdint>
#include <cmath>
#include <cstdlib>
#include <random>
#include <vector>

#include "ckm/instance.hpp"
#include "ckm/lp_model.hpp"

namespace ckm::testkit {

// Points on a small integer grid with the L1 metric, so every distance is an
// exact small integer.
inline Instance grid_instance(int nF, int nC, int k, int u, std::uint64_t seed, bool colocated = false,
                              int side = 6) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coord(0, side);
  const int n = colocated ? nC : nF + nC;
  std::vector<std::pair<int, int>> pts(n);
  for (auto& p : pts) p = {coord(rng), coord(rng)};
  Instance inst;
  inst.numFacilities = colocated ? nC : nF;
  inst.numClients = nC;
  inst.k = k;
  inst.u = u;
  inst.colocated = colocated;
  const int np = inst.numFacilities + nC;
  auto at = [&](int p) { return colocated ? pts[p % nC] : pts[p]; };
  inst.dist.resize(static_cast<std::size_t>(np) * np);
  for (int a = 0; a < np; ++a)
    for (int b = 0; b < np; ++b)
      inst.dist[static_cast<std::size_t>(a) * np + b] =
          std::abs(at(a).first - at(b).first) + std::abs(at(a).second - at(b).second);
  return inst;
}

// Random co-located instance with a feasible budget.
inline Instance random_colocated(std::mt19937_64& rng, int maxN = 10, int maxU = 4) {
  const int n = std::uniform_int_distribution<int>(2, maxN)(rng);
  const int u = std::uniform_int_distribution<int>(1, maxU)(rng);
  const int kMin = (n + u - 1) / u;
  const int k = std::uniform_int_distribution<int>(kMin, std::max(kMin, std::min(n, kMin + 2)))(rng);
  return grid_instance(n, n, k, u, rng(), true);
}

// Cheapest capacity-feasible assignment by trying every client -> location map.
inline double brute_assignment_cost(const Instance& inst, const std::vector<int>& counts) {
  std::vector<int> locs;
  for (int i = 0; i < inst.numFacilities; ++i)
    if (counts[i] > 0) locs.push_back(i);
  std::vector<long long> load(inst.numFacilities, 0);
  double best = 1e300;
  auto rec = [&](auto&& self, int j, double cost) -> void {
    if (cost >= best) return;
    if (j == inst.numClients) {
      best = cost;
      return;
    }
    for (int i : locs) {
      if (load[i] >= static_cast<long long>(counts[i]) * inst.u) continue;
      ++load[i];
      self(self, j + 1, cost + inst.d(i, j));
      --load[i];
    }
  };
  rec(rec, 0, 0.0);
  return best;
}

// Optimum of a bounded LP over x >= 0 by enumerating every basis: fix n
// constraints (all equalities plus a subset of inequalities and bounds) at
// equality, solve, keep the cheapest feasible point.
inline double vertex_enumeration_optimum(const LPModel& m, double tol = 1e-9) {
  const int n = m.numVariables;
  struct Row {
    std::vector<double> a;
    double b;
    Sense sense;
  };
  std::vector<Row> eq, ineq;
  for (const auto& r : m.rows) {
    Row row{std::vector<double>(n, 0.0), r.rhs, r.sense};
    for (auto [v, c] : r.terms) row.a[v] += c;
    (r.sense == Sense::Equal ? eq : ineq).push_back(std::move(row));
  }
  for (int v = 0; v < n; ++v) {
    Row row{std::vector<double>(n, 0.0), 0.0, Sense::GreaterEqual};
    row.a[v] = 1.0;
    ineq.push_back(std::move(row));
  }
  const int need = n - static_cast<int>(eq.size());
  const int total = static_cast<int>(ineq.size());
  double best = 1e300;
  std::vector<int> pick(need);
  for (int t = 0; t < need; ++t) pick[t] = t;
  std::vector<double> mat(static_cast<std::size_t>(n) * (n + 1));
  for (;;) {
    for (int r = 0; r < n; ++r) {
      const Row& row = r < static_cast<int>(eq.size()) ? eq[r] : ineq[pick[r - eq.size()]];
      for (int c = 0; c < n; ++c) mat[r * (n + 1) + c] = row.a[c];
      mat[r * (n + 1) + n] = row.b;
    }
    bool singular = false;
    for (int c = 0; c < n && !singular; ++c) {
      int piv = c;
      for (int r = c + 1; r < n; ++r)
        if (std::abs(mat[r * (n + 1) + c]) > std::abs(mat[piv * (n + 1) + c])) piv = r;
      if (std::abs(mat[piv * (n + 1) + c]) < 1e-12) {
        singular = true;
        break;
      }
      if (piv != c)
        for (int k = 0; k <= n; ++k) std::swap(mat[c * (n + 1) + k], mat[piv * (n + 1) + k]);
      for (int r = 0; r < n; ++r) {
        if (r == c) continue;
        const double f = mat[r * (n + 1) + c] / mat[c * (n + 1) + c];
        if (f == 0.0) continue;
        for (int k = c; k <= n; ++k) mat[r * (n + 1) + k] -= f * mat[c * (n + 1) + k];
      }
    }
    if (!singular) {
      std::vector<double> x(n);
      for (int c = 0; c < n; ++c) x[c] = mat[c * (n + 1) + n] / mat[c * (n + 1) + c];
      bool feasible = true;
      for (const auto& row : ineq) {
        double s = 0.0;
        for (int c = 0; c < n; ++c) s += row.a[c] * x[c];
        if ((row.sense == Sense::LessEqual && s > row.b + tol) ||
            (row.sense == Sense::GreaterEqual && s < row.b - tol)) {
          feasible = false;
          break;
        }
      }
      if (feasible) {
        double obj = 0.0;
        for (int c = 0; c < n; ++c) obj += m.objective[c] * x[c];
        best = std::min(best, obj);
      }
    }
    int t = need - 1;
    while (t >= 0 && pick[t] == total - need + t) --t;
    if (t < 0) break;
    ++pick[t];
    for (int q = t + 1; q < need; ++q) pick[q] = pick[q - 1] + 1;
  }
  return best;
}

}  // namespace ckm::testkit
