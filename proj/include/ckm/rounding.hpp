#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ckm/error.hpp"
#include "ckm/flow.hpp"
#include "ckm/instance.hpp"
#include "ckm/numeric.hpp"
#include "ckm/rectangle.hpp"
#include "ckm/solution.hpp"
#include "ckm/trees.hpp"

namespace ckm {

/// ell = max(2, ceil(3 / eps)) for eps in (0, 2].
inline int ell_for(double eps) {
  if (!(eps > 0.0 && eps <= 2.0)) fail(ErrorKind::Parameter, "eps must lie in (0, 2]");
  return std::max(2, static_cast<int>(std::ceil(3.0 / eps - 1e-12)));
}

/// ceil((1 + eps) k): the number of openings a successful rounding may use.
inline int opening_bound(int k, double eps) {
  return static_cast<int>(std::ceil((1.0 + eps) * k - 1e-9));
}

inline std::vector<double> avg_costs(const Instance& inst, const FractionalSolution& sol) {
  std::vector<double> dav(sol.numClients, 0.0);
  for (int i = 0; i < sol.numFacilities; ++i)
    for (int j = 0; j < sol.numClients; ++j) dav[j] += sol.xf(i, j) * inst.d(i, j);
  return dav;
}

struct RepresentativeSet {
  std::vector<int> reps;       // client indices in greedy order
  std::vector<int> removedBy;  // per client: position of the representative that removed it
  std::vector<double> radius;  // per client: 2 ell d_av(j)
};

inline RepresentativeSet select_representatives(const Instance& inst, const std::vector<double>& dav,
                                                int ell) {
  if (ell < 2) fail(ErrorKind::Parameter, "ell must be at least 2");
  const int n = inst.numClients;
  RepresentativeSet rs;
  rs.removedBy.assign(n, -1);
  rs.radius.resize(n);
  for (int j = 0; j < n; ++j) rs.radius[j] = 2.0 * ell * dav[j];
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return dav[a] < dav[b]; });
  for (int v : order) {
    if (rs.removedBy[v] >= 0) continue;
    const int pos = static_cast<int>(rs.reps.size());
    rs.reps.push_back(v);
    for (int j = 0; j < n; ++j)
      if (rs.removedBy[j] < 0 && inst.client_dist(j, v) <= rs.radius[j]) rs.removedBy[j] = pos;
    ensure(rs.removedBy[v] == pos, "a representative removes itself");
  }
  return rs;
}

struct VoronoiPartition {
  std::vector<int> regionOf;              // facility -> representative position
  std::vector<std::vector<int>> regions;  // representative position -> facilities
};

inline VoronoiPartition voronoi_partition(const Instance& inst, const RepresentativeSet& rs) {
  if (rs.reps.empty()) fail(ErrorKind::Precondition, "no representatives");
  VoronoiPartition vp;
  vp.regionOf.assign(inst.numFacilities, 0);
  vp.regions.assign(rs.reps.size(), {});
  for (int i = 0; i < inst.numFacilities; ++i) {
    int best = 0;
    for (int t = 1; t < static_cast<int>(rs.reps.size()); ++t)
      if (inst.d(i, rs.reps[t]) < inst.d(i, rs.reps[best])) best = t;
    vp.regionOf[i] = best;
    vp.regions[best].push_back(i);
  }
  return vp;
}

/// Demand alpha_v = y'(U_v) and supply beta_v = y(U_v) at each representative
/// after every client's mass has moved to the representative of its facility.
struct Transport {
  std::vector<double> alpha;
  std::vector<double> beta;
  double cost = 0.0;  // sum_{i,j} x_{i,j} d(j, v(i)), unscaled
};

inline Transport move_to_representatives(const Instance& inst, const FractionalSolution& sol,
                                         const RepresentativeSet& rs, const VoronoiPartition& vp) {
  Transport tr;
  const std::size_t m = rs.reps.size();
  tr.alpha.assign(m, 0.0);
  tr.beta.assign(m, 0.0);
  for (int i = 0; i < sol.numFacilities; ++i) {
    const int v = vp.regionOf[i];
    tr.beta[v] += sol.y[i];
    double load = 0.0;
    for (int j = 0; j < sol.numClients; ++j) {
      load += sol.xf(i, j);
      tr.cost += sol.xf(i, j) * inst.client_dist(j, rs.reps[v]);
    }
    tr.alpha[v] += load / inst.u;
  }
  return tr;
}

inline RepMetric rep_metric(const Instance& inst, const RepresentativeSet& rs) {
  RepMetric d;
  d.n = static_cast<int>(rs.reps.size());
  d.d.resize(static_cast<std::size_t>(d.n) * d.n);
  for (int a = 0; a < d.n; ++a)
    for (int b = 0; b < d.n; ++b)
      d.d[static_cast<std::size_t>(a) * d.n + b] = inst.client_dist(rs.reps[a], rs.reps[b]);
  return d;
}

struct LedgerEntry {
  int tree = 0;
  int level = 0;
  int from = 0;  // representative positions
  int to = 0;
  double amount = 0.0;  // scaled demand (units of u clients)
  double distance = 0.0;
};

/// Per-appearance demand and supply for one tree (local indexing).
struct TreeState {
  std::vector<double> alpha;
  std::vector<double> beta;
};

/// A check of the moving-cost inequality at a collection from the level set A'.
struct CollectionCheck {
  int tree = 0;
  int level = 0;
  double lhs = 0.0;  // frac(y'_S) cofrac(y_S) d(A', C* \ A')
  double rhs = 0.0;  // 4/u D_S + (4 ell + 2)/u D'_S
};

/// A check of d(A, C* \ A) >= L'/2 for a level set A without the root.
struct SeparationCheck {
  int tree = 0;
  int level = 0;
  double distance = 0.0;
  double halfNext = 0.0;
};

struct RoundingDiagnostics {
  int ell = 0;
  bool smallCase = false;
  double transportCost = 0.0;
  double transportBound = 0.0;
  double movingCost = 0.0;
  int openings = 0;
  int openingBound = 0;
  double assignmentCost = 0.0;
  std::vector<CollectionCheck> collections;
  std::vector<SeparationCheck> separations;
  std::vector<double> rankRatios;  // max/min length within each rank
  std::vector<double> rankRatioBounds;
};

struct RoundingTrace {
  RepresentativeSet reps;
  VoronoiPartition voronoi;
  Transport transport;
  std::vector<NeighborhoodTree> trees;
  std::vector<TreeState> finalStates;
  std::vector<LedgerEntry> ledger;
};

struct IntegralSolution {
  OpeningMultiset open;
  Assignment assignment;
};

struct RoundingResult {
  std::optional<IntegralSolution> solution;  // set when rounding succeeded
  std::vector<RectangleCut> cuts;            // set when a rectangle was violated
  RoundingDiagnostics diag;
  RoundingTrace trace;
  bool rounded() const { return solution.has_value(); }
};

namespace detail {

inline constexpr double kMoveTol = 1e-9;

struct Parcel {
  int source;  // representative position the demand originally came from
  double amount;
};

// Demand moved through the holder is tracked per parcel so every unit is
// charged from where it was collected to where it lands.
class Mover {
 public:
  Mover(const NeighborhoodTree& t, TreeState& st, const RepMetric& d, int u, int treeIndex,
        int level, std::vector<LedgerEntry>& ledger, double& cost)
      : t_(t), st_(st), d_(d), u_(u), tree_(treeIndex), level_(level), ledger_(ledger), cost_(cost) {}

  void collect_demand(int k, double amount) {
    if (amount <= 0.0) return;
    st_.alpha[k] -= amount;
    parcels_.push_back({t_.vertices[k], amount});
    demand_ += amount;
  }
  void collect_supply(int k, double amount) {
    if (amount <= 0.0) return;
    st_.beta[k] -= amount;
    supply_ += amount;
  }
  double demand() const { return demand_; }
  double supply() const { return supply_; }

  void give_demand(int k, double amount) {
    amount = std::min(amount, demand_);
    demand_ -= amount;
    st_.alpha[k] += amount;
    const int dest = t_.vertices[k];
    while (amount > 0.0 && !parcels_.empty()) {
      Parcel& p = parcels_.front();
      const double take = std::min(amount, p.amount);
      if (take > 0.0 && p.source != dest) {
        const double dist = d_(p.source, dest);
        ledger_.push_back({tree_, level_, p.source, dest, take, dist});
        cost_ += u_ * take * dist;
      }
      p.amount -= take;
      amount -= take;
      if (p.amount <= 0.0) parcels_.pop_front();
    }
  }
  void give_supply(int k, double amount) {
    amount = std::min(amount, supply_);
    supply_ -= amount;
    st_.beta[k] += amount;
  }
  void give_all(int k) {
    give_demand(k, demand_);
    give_supply(k, supply_);
    parcels_.clear();
    demand_ = supply_ = 0.0;
  }

 private:
  const NeighborhoodTree& t_;
  TreeState& st_;
  const RepMetric& d_;
  int u_;
  int tree_;
  int level_;
  std::vector<LedgerEntry>& ledger_;
  double& cost_;
  std::deque<Parcel> parcels_;
  double demand_ = 0.0;
  double supply_ = 0.0;
};

inline void snap_state(TreeState& st) {
  for (auto& a : st.alpha) a = num::snap(a);
  for (auto& b : st.beta) b = num::snap(b);
}

inline bool equal_integral(double a, double b) {
  return std::abs(a - b) <= kMoveTol && num::is_integral(a);
}

// Set distance between A (global positions) and all other representatives.
inline double set_distance(const std::vector<int>& A, const RepMetric& d) {
  std::vector<char> in(d.n, 0);
  for (int v : A) in[v] = 1;
  double best = std::numeric_limits<double>::infinity();
  for (int a : A)
    for (int w = 0; w < d.n; ++w)
      if (!in[w]) best = std::min(best, d(a, w));
  return best;
}

}  // namespace detail

/// Runs the level-by-level moving operation on one tree. Before touching a
/// level set A the rectangle constraint is checked for B = U_A against the
/// original fractional solution; a violation aborts and is returned.
inline std::optional<RectangleCut> move_within_tree(
    const Instance& inst, const NeighborhoodTree& t, int treeIndex, TreeState& st, int ell, int u,
    const FractionalSolution& sol, const std::vector<double>& dav, const VoronoiPartition& vp,
    const RepMetric& d, std::vector<LedgerEntry>& ledger, double& movingCost,
    RoundingDiagnostics& diag, double cutTol = kCutTol) {
  const double inv = 1.0 / ell;
  const int n = t.size();
  auto region = [&](const std::vector<int>& A) {
    std::vector<int> B;
    for (int k : A) B.insert(B.end(), vp.regions[t.vertices[k]].begin(), vp.regions[t.vertices[k]].end());
    std::sort(B.begin(), B.end());
    return B;
  };
  auto globals = [&](const std::vector<int>& A) {
    std::vector<int> g;
    for (int k : A) g.push_back(t.vertices[k]);
    return g;
  };
  auto contains_root = [&](const std::vector<int>& A) {
    return std::find(A.begin(), A.end(), t.root) != A.end();
  };

  // Shortest edge per rank, for the separation checks.
  std::vector<double> shortest(t.height + 2, std::numeric_limits<double>::infinity());
  std::vector<double> longest(t.height + 2, 0.0);
  for (int k = 0; k < n; ++k)
    if (k != t.root) {
      const double len = d(t.vertices[k], t.vertices[t.parent[k]]);
      shortest[t.rank[k]] = std::min(shortest[t.rank[k]], len);
      longest[t.rank[k]] = std::max(longest[t.rank[k]], len);
    }
  for (int i = 1; i <= t.height; ++i) {
    const double ratio = shortest[i] > 0.0 ? longest[i] / shortest[i]
                         : longest[i] > 0.0 ? std::numeric_limits<double>::infinity()
                                            : 1.0;
    diag.rankRatios.push_back(ratio);
    diag.rankRatioBounds.push_back(std::pow(3.0, n - 1));
  }

  std::vector<int> levelOf(n);  // level-(i-1) set index per vertex
  for (int i = 0; i <= t.height; ++i) {
    const auto& sets = t.levelSets[i];
    for (std::size_t s = 0; s < sets.size(); ++s) {
      const auto& A = sets[s];
      if (i < t.height && !contains_root(A))
        diag.separations.push_back(
            {treeIndex, i, detail::set_distance(globals(A), d), shortest[i + 1] / 2.0});
      // A set that gained no edge at this level was already checked and settled.
      if (i > 0 && t.levelSets[i - 1][levelOf[A.front()]].size() == A.size()) continue;
      if (auto cut = check_rectangle(sol, region(A), u, cutTol)) return cut;
      if (i == 0) continue;

      detail::Mover mover(t, st, d, u, treeIndex, i, ledger, movingCost);
      for (int k : A) {
        if (k == t.root) continue;
        if (st.beta[k] < num::ceil_t(st.alpha[k]) - inv - detail::kMoveTol) {
          const auto& Aprev = t.levelSets[i - 1][levelOf[k]];
          const auto S = region(Aprev);
          double yS = 0.0, load = 0.0, DS = 0.0, DpS = 0.0;
          for (int f : S) {
            yS += sol.y[f];
            for (int j = 0; j < sol.numClients; ++j) {
              load += sol.xf(f, j);
              DS += sol.xf(f, j) * inst.d(f, j);
              DpS += sol.xf(f, j) * dav[j];
            }
          }
          CollectionCheck cc;
          cc.tree = treeIndex;
          cc.level = i;
          cc.lhs = num::frac(load / u) * num::cofrac(yS) * detail::set_distance(globals(Aprev), d);
          cc.rhs = 4.0 / u * DS + (4.0 * ell + 2.0) / u * DpS;
          diag.collections.push_back(cc);
          const double fl = num::floor_t(st.alpha[k]);
          mover.collect_supply(k, st.beta[k] - fl);
          mover.collect_demand(k, st.alpha[k] - fl);
          st.alpha[k] = st.beta[k] = fl;
        }
      }
      for (int k : A) {
        const double c = num::ceil_t(st.alpha[k]);
        if (st.beta[k] > c + detail::kMoveTol) mover.collect_supply(k, st.beta[k] - c);
      }

      if (contains_root(A)) {
        mover.give_all(t.root);
      } else {
        for (int k : A) {
          if (st.alpha[k] < st.beta[k] - detail::kMoveTol)
            mover.give_demand(k, st.beta[k] - st.alpha[k]);
          if (!detail::equal_integral(st.alpha[k], st.beta[k]) &&
              std::abs(st.alpha[k] - st.beta[k]) <= detail::kMoveTol) {
            const double need = num::ceil_t(st.alpha[k]) - st.alpha[k];
            const double step = std::min({need, mover.demand(), mover.supply()});
            mover.give_demand(k, step);
            mover.give_supply(k, step);
          }
          detail::snap_state(st);
        }
        mover.give_all(A.front());
      }
      detail::snap_state(st);

      // Properties after the operation.
      if (contains_root(A)) {
        for (int k : A)
          if (k != t.root)
            ensure(st.beta[k] >= num::ceil_t(st.alpha[k]) - inv - 1e-7,
                   "every non-root vertex of a root set keeps beta >= ceil(alpha) - 1/ell");
      } else {
        int nonIntegral = 0;
        bool allGood = true;
        for (int k : A) {
          if (!detail::equal_integral(st.alpha[k], st.beta[k])) ++nonIntegral;
          if (st.beta[k] < num::ceil_t(st.alpha[k]) - inv - 1e-7) allGood = false;
        }
        ensure(nonIntegral <= 1 || allGood, "level set satisfies one of the two post-move properties");
      }
      for (int k : A) ensure(st.alpha[k] <= st.beta[k] + 1e-7, "alpha never exceeds beta");
    }
    if (i < t.height)
      for (std::size_t s = 0; s < sets.size(); ++s)
        for (int k : sets[s]) levelOf[k] = static_cast<int>(s);
  }
  return std::nullopt;
}

/// Round-or-separate on an F = C instance: either an integral solution with
/// ceil(alpha_v) copies at every representative, or a violated rectangle.
inline RoundingResult round_solution(const Instance& inst, const FractionalSolution& sol, double eps,
                                     double cutTol = kCutTol) {
  if (!inst.colocated || inst.numFacilities != inst.numClients)
    fail(ErrorKind::Precondition,
         "rounding needs a co-located instance (F = C); reduce hard instances with soft_to_hard");
  if (sol.numFacilities != inst.numFacilities || sol.numClients != inst.numClients)
    fail(ErrorKind::Shape, "solution dimensions do not match the instance");
  if (auto v = check_basic_lp(sol, inst.k, inst.u, 1e-6))
    fail(ErrorKind::Precondition, "solution violates the natural relaxation: " + describe(*v));

  RoundingResult res;
  RoundingDiagnostics& diag = res.diag;
  RoundingTrace& tr = res.trace;
  const int ell = ell_for(eps);
  diag.ell = ell;
  const auto dav = avg_costs(inst, sol);
  double lp = 0.0;
  for (double v : dav) lp += v;
  tr.reps = select_representatives(inst, dav, ell);
  tr.voronoi = voronoi_partition(inst, tr.reps);
  tr.transport = move_to_representatives(inst, sol, tr.reps, tr.voronoi);
  diag.transportCost = tr.transport.cost;
  diag.transportBound = 2.0 * (ell + 1) * lp;

  const RepMetric d = rep_metric(inst, tr.reps);
  const int m = d.n;
  diag.smallCase = m < ell;
  if (diag.smallCase)
    tr.trees = {mst_tree(d)};
  else
    tr.trees = build_neighborhood_trees(d, ell);

  std::vector<char> nonRoot(m, 0), placed(m, 0);
  for (const auto& t : tr.trees)
    for (int k = 0; k < t.size(); ++k)
      if (k != t.root) {
        ensure(!nonRoot[t.vertices[k]], "a representative is a non-root at most once");
        nonRoot[t.vertices[k]] = 1;
      }
  tr.finalStates.resize(tr.trees.size());
  for (std::size_t ti = 0; ti < tr.trees.size(); ++ti) {
    auto& t = tr.trees[ti];
    ensure(find_neighborhood_violation(t, d) < 0, "every tree is a neighborhood tree");
    rank_and_levels(t, d);
    TreeState& st = tr.finalStates[ti];
    st.alpha.assign(t.size(), 0.0);
    st.beta.assign(t.size(), 0.0);
    for (int k = 0; k < t.size(); ++k) {
      const int v = t.vertices[k];
      if (k != t.root || (!nonRoot[v] && !placed[v])) {
        st.alpha[k] = tr.transport.alpha[v];
        st.beta[k] = tr.transport.beta[v];
        placed[v] = 1;
      }
    }
  }
  for (int v = 0; v < m; ++v) ensure(placed[v], "every representative's demand is placed");

  for (std::size_t ti = 0; ti < tr.trees.size(); ++ti) {
    auto cut = move_within_tree(inst, tr.trees[ti], static_cast<int>(ti), tr.finalStates[ti], ell,
                                inst.u, sol, dav, tr.voronoi, d, tr.ledger, diag.movingCost, diag,
                                cutTol);
    if (cut) {
      res.cuts.push_back(std::move(*cut));
      return res;
    }
  }

  IntegralSolution out;
  out.open.counts.assign(inst.numFacilities, 0);
  for (std::size_t ti = 0; ti < tr.trees.size(); ++ti) {
    const auto& t = tr.trees[ti];
    for (int k = 0; k < t.size(); ++k)
      out.open.counts[tr.reps.reps[t.vertices[k]]] +=
          static_cast<int>(num::ceil_t(tr.finalStates[ti].alpha[k]));
  }
  diag.openings = out.open.total();
  diag.openingBound = opening_bound(inst.k, eps);
  out.assignment = min_cost_assignment(inst, out.open);
  diag.assignmentCost = out.assignment.cost;
  res.solution = std::move(out);
  return res;
}

}  // namespace ckm
