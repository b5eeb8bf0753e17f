#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "ckm/error.hpp"
#include "ckm/instance.hpp"

namespace ckm {

/// Number of facility copies opened at each location (indexed by facility).
struct OpeningMultiset {
  std::vector<int> counts;

  int total() const { return std::accumulate(counts.begin(), counts.end(), 0); }
  int distinct() const {
    return static_cast<int>(std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; }));
  }
  friend bool operator==(const OpeningMultiset&, const OpeningMultiset&) = default;
};

/// Client -> facility location, plus the resulting connection cost.
struct Assignment {
  std::vector<int> target;
  double cost = 0.0;
  /// True when the final potentials left every residual arc with a
  /// non-negative reduced cost.
  bool certified = false;
};

namespace detail {

// Successive shortest paths with Johnson potentials. Dense Dijkstra: the
// networks built here have at most a few hundred nodes.
class MinCostFlow {
 public:
  struct Arc {
    int to;
    int rev;
    long long cap;
    double cost;
  };

  explicit MinCostFlow(int nodes) : g_(nodes), potential_(nodes, 0.0) {}

  int add_arc(int from, int to, long long cap, double cost) {
    g_[from].push_back({to, static_cast<int>(g_[to].size()), cap, cost});
    g_[to].push_back({from, static_cast<int>(g_[from].size()) - 1, 0, -cost});
    return static_cast<int>(g_[from].size()) - 1;
  }

  const Arc& arc(int from, int idx) const { return g_[from][idx]; }

  /// Pushes up to `want` units from s to t; returns the amount pushed.
  long long run(int s, int t, long long want) {
    const int n = static_cast<int>(g_.size());
    long long pushed = 0;
    std::vector<double> dist(n);
    std::vector<int> prevNode(n), prevArc(n);
    std::vector<char> done(n);
    while (pushed < want) {
      if (!shortest_paths(s, dist, prevNode, prevArc, done)) break;
      if (!done[t]) break;
      long long bottleneck = want - pushed;
      for (int v = t; v != s; v = prevNode[v])
        bottleneck = std::min(bottleneck, g_[prevNode[v]][prevArc[v]].cap);
      for (int v = t; v != s; v = prevNode[v]) {
        Arc& a = g_[prevNode[v]][prevArc[v]];
        a.cap -= bottleneck;
        g_[v][a.rev].cap += bottleneck;
      }
      pushed += bottleneck;
      update_potentials(dist, done);
    }
    return pushed;
  }

  /// Every residual arc between nodes reachable from s has non-negative
  /// reduced cost under the current potentials.
  bool reduced_costs_nonnegative(int s, double tol) {
    const int n = static_cast<int>(g_.size());
    std::vector<double> dist(n);
    std::vector<int> prevNode(n), prevArc(n);
    std::vector<char> done(n);
    shortest_paths(s, dist, prevNode, prevArc, done);
    update_potentials(dist, done);
    for (int v = 0; v < n; ++v) {
      if (!done[v]) continue;
      for (const Arc& a : g_[v])
        if (a.cap > 0 && done[a.to] && a.cost + potential_[v] - potential_[a.to] < -tol)
          return false;
    }
    return true;
  }

 private:
  // Unreached nodes are shifted by the largest finite label, which keeps
  // every residual reduced cost non-negative.
  void update_potentials(const std::vector<double>& dist, const std::vector<char>& done) {
    double far = 0.0;
    for (std::size_t v = 0; v < dist.size(); ++v)
      if (done[v]) far = std::max(far, dist[v]);
    for (std::size_t v = 0; v < dist.size(); ++v) potential_[v] += done[v] ? dist[v] : far;
  }

  bool shortest_paths(int s, std::vector<double>& dist, std::vector<int>& prevNode,
                      std::vector<int>& prevArc, std::vector<char>& done) const {
    const int n = static_cast<int>(g_.size());
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(done.begin(), done.end(), 0);
    dist[s] = 0.0;
    for (;;) {
      int v = -1;
      for (int w = 0; w < n; ++w)
        if (!done[w] && dist[w] < kInf && (v < 0 || dist[w] < dist[v])) v = w;
      if (v < 0) break;
      done[v] = 1;
      for (int idx = 0; idx < static_cast<int>(g_[v].size()); ++idx) {
        const Arc& a = g_[v][idx];
        if (a.cap <= 0 || done[a.to]) continue;
        // Reduced costs are non-negative up to rounding noise.
        const double rc = std::max(0.0, a.cost + potential_[v] - potential_[a.to]);
        if (dist[v] + rc < dist[a.to] - 1e-12) {
          dist[a.to] = dist[v] + rc;
          prevNode[a.to] = v;
          prevArc[a.to] = idx;
        }
      }
    }
    return true;
  }

  std::vector<std::vector<Arc>> g_;
  std::vector<double> potential_;
};

}  // namespace detail

/// Cheapest capacity-feasible assignment of every client to an opened copy.
/// Clients with identical distance profiles over the open locations are
/// pooled, so one augmentation can route several clients at once.
inline Assignment min_cost_assignment(const Instance& inst, const OpeningMultiset& open) {
  if (static_cast<int>(open.counts.size()) != inst.numFacilities)
    fail(ErrorKind::Shape, "opening multiset has " + std::to_string(open.counts.size()) +
                               " entries for " + std::to_string(inst.numFacilities) + " locations");
  long long capacity = 0;
  std::vector<int> locations;
  for (int i = 0; i < inst.numFacilities; ++i) {
    if (open.counts[i] < 0) fail(ErrorKind::Parameter, "negative copy count");
    if (open.counts[i] > 0) locations.push_back(i);
    capacity += static_cast<long long>(open.counts[i]) * inst.u;
  }
  if (capacity < inst.numClients)
    fail(ErrorKind::Infeasible, "opened capacity " + std::to_string(capacity) +
                                    " cannot serve " + std::to_string(inst.numClients) + " clients");

  std::map<std::vector<double>, int> groupOf;
  std::vector<std::vector<int>> members;
  for (int j = 0; j < inst.numClients; ++j) {
    std::vector<double> profile;
    profile.reserve(locations.size());
    for (int i : locations) profile.push_back(inst.d(i, j));
    auto [it, inserted] = groupOf.try_emplace(std::move(profile), static_cast<int>(members.size()));
    if (inserted) members.emplace_back();
    members[it->second].push_back(j);
  }

  const int G = static_cast<int>(members.size());
  const int L = static_cast<int>(locations.size());
  const int source = 0, sink = 1 + G + L;
  detail::MinCostFlow net(sink + 1);
  std::vector<std::vector<int>> arcIdx(G, std::vector<int>(L));
  for (int g = 0; g < G; ++g) {
    net.add_arc(source, 1 + g, static_cast<long long>(members[g].size()), 0.0);
    for (int l = 0; l < L; ++l)
      arcIdx[g][l] = net.add_arc(1 + g, 1 + G + l, static_cast<long long>(members[g].size()),
                                 inst.d(locations[l], members[g].front()));
  }
  for (int l = 0; l < L; ++l)
    net.add_arc(1 + G + l, sink, static_cast<long long>(open.counts[locations[l]]) * inst.u, 0.0);

  const long long routed = net.run(source, sink, inst.numClients);
  if (routed != inst.numClients)
    fail(ErrorKind::Internal, "flow routed " + std::to_string(routed) + " of " +
                                  std::to_string(inst.numClients) + " clients");

  Assignment a;
  a.target.assign(inst.numClients, -1);
  for (int g = 0; g < G; ++g) {
    std::size_t next = 0;
    for (int l = 0; l < L; ++l) {
      const auto& arc = net.arc(1 + g, arcIdx[g][l]);
      const long long used = static_cast<long long>(members[g].size()) - arc.cap;
      for (long long c = 0; c < used; ++c) a.target[members[g][next++]] = locations[l];
    }
    ensure(next == members[g].size(), "flow decomposition covers every pooled client");
  }
  for (int j = 0; j < inst.numClients; ++j) a.cost += inst.d(a.target[j], j);
  a.certified = net.reduced_costs_nonnegative(source, 1e-9);
  return a;
}

/// Connection cost of an explicit assignment; throws if it overloads a location.
inline double assignment_cost(const Instance& inst, const OpeningMultiset& open,
                              const std::vector<int>& target) {
  if (static_cast<int>(target.size()) != inst.numClients)
    fail(ErrorKind::Shape, "assignment must cover every client");
  std::vector<long long> load(inst.numFacilities, 0);
  double cost = 0.0;
  for (int j = 0; j < inst.numClients; ++j) {
    const int i = target[j];
    if (i < 0 || i >= inst.numFacilities)
      fail(ErrorKind::Precondition, "client " + std::to_string(j) + " is unassigned");
    ++load[i];
    cost += inst.d(i, j);
  }
  for (int i = 0; i < inst.numFacilities; ++i)
    if (load[i] > static_cast<long long>(open.counts[i]) * inst.u)
      fail(ErrorKind::Precondition, "location " + std::to_string(i) + " serves " +
                                        std::to_string(load[i]) + " clients beyond its capacity");
  return cost;
}

}  // namespace ckm
