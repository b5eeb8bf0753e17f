#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ckm/error.hpp"
#include "ckm/flow.hpp"
#include "ckm/instance.hpp"

namespace ckm {

/// Soft-capacitated solution on (k, u, C, C, d): copies opened at client
/// locations, and the client location each client is served from.
struct SoftSolution {
  OpeningMultiset open;     // indexed by client location
  std::vector<int> target;  // client -> client location
};

/// Multigraph between F-nodes (hard facilities) and S-nodes (soft copies).
struct MultiMatching {
  int numF = 0;
  int numS = 0;
  std::vector<int> copyLocation;  // S-node -> client location
  std::vector<int> demand;        // S-node -> t_s
  std::map<std::pair<int, int>, long long> mult;  // (F-node, S-node) -> multiplicity

  long long degree_f(int f) const {
    long long s = 0;
    for (const auto& [e, m] : mult)
      if (e.first == f) s += m;
    return s;
  }
  long long degree_s(int s) const {
    long long t = 0;
    for (const auto& [e, m] : mult)
      if (e.second == s) t += m;
    return t;
  }
};

inline double matching_cost(const Instance& hard, const MultiMatching& mm) {
  double c = 0.0;
  for (const auto& [e, m] : mm.mult) c += m * hard.d(e.first, mm.copyLocation[e.second]);
  return c;
}

struct ReductionStats {
  double baseCost = 0.0;        // C
  double softCost = 0.0;        // C'
  double concatenated = 0.0;    // matching cost right after concatenation
  double afterCycles = 0.0;
  double afterPaths = 0.0;
  double constructedCost = 0.0; // assignment read off the final matching
  int cycleRounds = 0;
  int pathRounds = 0;
  bool forestAfterCycles = false;
  bool oneUnderMatchedPerTree = false;
  bool treeCountsMatch = false;  // each tree holds exactly ceil(t/u) F-nodes
};

struct ReductionResult {
  std::vector<int> opened;  // distinct F-locations
  Assignment assignment;
  ReductionStats stats;
};

namespace detail {

// Unit-multiplicity view of the support: nodes 0..numF-1 are F, then S.
struct Support {
  int n;
  std::vector<std::vector<int>> adj;
};

inline Support support_of(const MultiMatching& mm) {
  Support g{mm.numF + mm.numS, std::vector<std::vector<int>>(mm.numF + mm.numS)};
  for (const auto& [e, m] : mm.mult) {
    if (m <= 0) continue;
    g.adj[e.first].push_back(mm.numF + e.second);
    g.adj[mm.numF + e.second].push_back(e.first);
  }
  for (auto& row : g.adj) std::sort(row.begin(), row.end());
  return g;
}

// Some cycle of the support as a closed node sequence (first == last), if any.
inline std::optional<std::vector<int>> find_cycle(const Support& g) {
  std::vector<int> parent(g.n, -2), depth(g.n, 0);
  for (int s = 0; s < g.n; ++s) {
    if (parent[s] != -2) continue;
    parent[s] = -1;
    std::vector<int> stack{s};
    std::vector<int> order;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : g.adj[v]) {
        if (w == parent[v]) continue;
        if (parent[w] == -2) {
          parent[w] = v;
          depth[w] = depth[v] + 1;
          stack.push_back(w);
        } else if (depth[w] <= depth[v]) {
          // Non-tree edge (v, w): walk both ends up to their meeting point.
          std::vector<int> a{v}, b{w};
          int x = v, y = w;
          while (depth[x] > depth[y]) a.push_back(x = parent[x]);
          while (depth[y] > depth[x]) b.push_back(y = parent[y]);
          while (x != y) {
            a.push_back(x = parent[x]);
            b.push_back(y = parent[y]);
          }
          b.pop_back();
          std::vector<int> cyc = a;
          cyc.insert(cyc.end(), b.rbegin(), b.rend());
          cyc.push_back(v);
          if (cyc.size() >= 4) return cyc;
        }
      }
    }
  }
  return std::nullopt;
}

inline std::vector<int> path_between(const Support& g, int from, int to) {
  std::vector<int> prev(g.n, -2);
  std::vector<int> queue{from};
  prev[from] = -1;
  for (std::size_t h = 0; h < queue.size(); ++h)
    for (int w : g.adj[queue[h]])
      if (prev[w] == -2) {
        prev[w] = queue[h];
        queue.push_back(w);
      }
  std::vector<int> path;
  if (prev[to] == -2) return path;
  for (int v = to; v != -1; v = prev[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

inline std::vector<int> components(const Support& g) {
  std::vector<int> comp(g.n, -1);
  int c = 0;
  for (int s = 0; s < g.n; ++s) {
    if (comp[s] >= 0) continue;
    std::vector<int> stack{s};
    comp[s] = c;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : g.adj[v])
        if (comp[w] < 0) {
          comp[w] = c;
          stack.push_back(w);
        }
    }
    ++c;
  }
  return comp;
}

// Alternately raises and lowers multiplicities along a walk of edges.
// plus[e] says whether walk edge e gains. Every edge is (F, S) in some order.
struct WalkEdge {
  int f;
  int s;
};

inline std::vector<WalkEdge> walk_edges(const std::vector<int>& nodes, int numF) {
  std::vector<WalkEdge> out;
  for (std::size_t t = 0; t + 1 < nodes.size(); ++t) {
    int a = nodes[t], b = nodes[t + 1];
    if (a >= numF) std::swap(a, b);
    out.push_back({a, b - numF});
  }
  return out;
}

inline double color_length(const Instance& hard, const MultiMatching& mm,
                           const std::vector<WalkEdge>& edges, int parity) {
  double s = 0.0;
  for (std::size_t t = parity; t < edges.size(); t += 2)
    s += hard.d(edges[t].f, mm.copyLocation[edges[t].s]);
  return s;
}

inline void shift(MultiMatching& mm, const std::vector<WalkEdge>& edges, int gainParity, long long delta) {
  for (std::size_t t = 0; t < edges.size(); ++t) {
    auto key = std::pair{edges[t].f, edges[t].s};
    mm.mult[key] += (static_cast<int>(t % 2) == gainParity) ? delta : -delta;
    if (mm.mult[key] == 0) mm.mult.erase(key);
  }
}

inline long long min_losing(const MultiMatching& mm, const std::vector<WalkEdge>& edges, int gainParity) {
  long long best = std::numeric_limits<long long>::max();
  for (std::size_t t = 0; t < edges.size(); ++t)
    if (static_cast<int>(t % 2) != gainParity) best = std::min(best, mm.mult.at({edges[t].f, edges[t].s}));
  return best;
}

}  // namespace detail

/// Turns a soft solution into a hard one opening at most k distinct locations,
/// with cost at most C + 2C', where C is the cost of baseMatching (clients to
/// all facilities, each used at most u times) and C' the soft cost.
inline ReductionResult soft_to_hard(const Instance& hard, const SoftSolution& soft,
                                    const std::vector<int>& baseMatching) {
  const int nF = hard.numFacilities, nC = hard.numClients, u = hard.u;
  if (static_cast<int>(soft.open.counts.size()) != nC || static_cast<int>(soft.target.size()) != nC)
    fail(ErrorKind::Precondition, "soft solution must be indexed by client locations");
  if (static_cast<int>(baseMatching.size()) != nC)
    fail(ErrorKind::Precondition, "base matching must cover every client");
  if (soft.open.total() > hard.k)
    fail(ErrorKind::Precondition, "soft solution opens more than k copies");

  ReductionResult res;
  ReductionStats& st = res.stats;
  std::vector<int> baseLoad(nF, 0);
  for (int j = 0; j < nC; ++j) {
    const int f = baseMatching[j];
    if (f < 0 || f >= nF) fail(ErrorKind::Precondition, "base matching leaves a client unassigned");
    if (++baseLoad[f] > u) fail(ErrorKind::Precondition, "base matching overloads a facility");
    st.baseCost += hard.d(f, j);
  }

  // Split each soft location into copies of at most u clients, in client order.
  MultiMatching mm;
  mm.numF = nF;
  std::vector<std::vector<int>> servedAt(nC);
  for (int j = 0; j < nC; ++j) {
    const int c = soft.target[j];
    if (c < 0 || c >= nC) fail(ErrorKind::Precondition, "soft assignment leaves a client unassigned");
    servedAt[c].push_back(j);
    st.softCost += hard.client_dist(j, c);
  }
  std::vector<int> copyOf(nC, -1);
  for (int c = 0; c < nC; ++c) {
    const auto& js = servedAt[c];
    if (static_cast<long long>(js.size()) > static_cast<long long>(soft.open.counts[c]) * u)
      fail(ErrorKind::Precondition, "soft location " + std::to_string(c) + " is over capacity");
    for (std::size_t t = 0; t < js.size(); t += u) {
      const int s = mm.numS++;
      mm.copyLocation.push_back(c);
      mm.demand.push_back(static_cast<int>(std::min<std::size_t>(u, js.size() - t)));
      for (std::size_t q = t; q < std::min(js.size(), t + u); ++q) copyOf[js[q]] = s;
    }
  }
  for (int j = 0; j < nC; ++j) ++mm.mult[{baseMatching[j], copyOf[j]}];
  st.concatenated = matching_cost(hard, mm);

  // Cycle canceling: the cheaper color gains, one edge of the other vanishes.
  for (;;) {
    const auto g = detail::support_of(mm);
    const auto cyc = detail::find_cycle(g);
    if (!cyc) break;
    const auto edges = detail::walk_edges(*cyc, nF);
    const int gain = detail::color_length(hard, mm, edges, 0) <= detail::color_length(hard, mm, edges, 1) ? 0 : 1;
    detail::shift(mm, edges, gain, detail::min_losing(mm, edges, gain));
    ++st.cycleRounds;
  }
  st.afterCycles = matching_cost(hard, mm);
  st.forestAfterCycles = !detail::find_cycle(detail::support_of(mm)).has_value();

  // Path canceling between under-matched F-nodes of the same tree.
  for (;;) {
    const auto g = detail::support_of(mm);
    const auto comp = detail::components(g);
    int a = -1, b = -1;
    for (int f = 0; f < nF && b < 0; ++f) {
      const long long df = mm.degree_f(f);
      if (df == 0 || df >= u) continue;
      for (int h = f + 1; h < nF; ++h) {
        const long long dh = mm.degree_f(h);
        if (dh > 0 && dh < u && comp[h] == comp[f]) {
          a = f;
          b = h;
          break;
        }
      }
    }
    if (b < 0) break;
    const auto path = detail::path_between(g, a, b);
    const auto edges = detail::walk_edges(path, nF);
    // Parity 0 edges touch a, the last (odd) edge touches b.
    const int gain = detail::color_length(hard, mm, edges, 0) <= detail::color_length(hard, mm, edges, 1) ? 0 : 1;
    const int gainer = gain == 0 ? a : b;
    const long long delta = std::min(detail::min_losing(mm, edges, gain), u - mm.degree_f(gainer));
    ensure(delta > 0, "path canceling makes progress");
    detail::shift(mm, edges, gain, delta);
    ++st.pathRounds;
  }
  st.afterPaths = matching_cost(hard, mm);

  const auto g = detail::support_of(mm);
  const auto comp = detail::components(g);
  const int numComp = comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
  std::vector<int> under(numComp, 0), fCount(numComp, 0);
  std::vector<long long> total(numComp, 0);
  for (int f = 0; f < nF; ++f) {
    const long long df = mm.degree_f(f);
    if (df == 0) continue;
    ++fCount[comp[f]];
    if (df < u) ++under[comp[f]];
    total[comp[f]] += df;
  }
  st.oneUnderMatchedPerTree = std::all_of(under.begin(), under.end(), [](int c) { return c <= 1; });
  st.treeCountsMatch = true;
  for (int c = 0; c < numComp; ++c)
    if (total[c] > 0 && fCount[c] != (total[c] + u - 1) / u) st.treeCountsMatch = false;

  for (int f = 0; f < nF; ++f)
    if (mm.degree_f(f) > 0) res.opened.push_back(f);

  // Read an assignment off the matching: clients of copy s go to its F-edges.
  std::vector<int> target(nC, -1);
  std::vector<std::vector<std::pair<int, long long>>> edgesAt(mm.numS);
  for (const auto& [e, m] : mm.mult) edgesAt[e.second].push_back({e.first, m});
  std::vector<std::size_t> cursor(mm.numS, 0);
  for (int j = 0; j < nC; ++j) {
    const int s = copyOf[j];
    auto& list = edgesAt[s];
    while (list[cursor[s]].second == 0) ++cursor[s];
    target[j] = list[cursor[s]].first;
    --list[cursor[s]].second;
  }
  OpeningMultiset open{std::vector<int>(nF, 0)};
  for (int f : res.opened) open.counts[f] = 1;
  st.constructedCost = assignment_cost(hard, open, target);
  res.assignment = min_cost_assignment(hard, open);
  return res;
}

}  // namespace ckm
