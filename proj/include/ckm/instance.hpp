#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ckm/error.hpp"
#include "ckm/solution.hpp"

namespace ckm {

inline constexpr double kMetricTol = 1e-9;

struct GraphDescription {
  int vertexCount = 0;
  std::vector<std::pair<int, int>> edges;
  bool regular3 = false;

  std::vector<std::vector<int>> adjacency() const {
    std::vector<std::vector<int>> adj(vertexCount);
    for (auto [a, b] : edges) {
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    for (auto& row : adj) std::sort(row.begin(), row.end());
    return adj;
  }

  friend bool operator==(const GraphDescription&, const GraphDescription&) = default;
};

/// A capacitated k-median instance. Points are indexed facilities first, then
/// clients; dist is the row-major (nF+nC)^2 metric over all of them.
struct Instance {
  int numFacilities = 0;
  int numClients = 0;
  std::vector<double> dist;
  int k = 1;
  int u = 1;
  bool colocated = false;
  std::optional<GraphDescription> graph;

  int numPoints() const { return numFacilities + numClients; }
  int facility_point(int i) const { return i; }
  int client_point(int j) const { return numFacilities + j; }

  double point_dist(int a, int b) const {
    return dist[static_cast<std::size_t>(a) * numPoints() + b];
  }
  /// facility-to-client distance
  double d(int i, int j) const { return point_dist(i, client_point(j)); }
  double client_dist(int j, int jj) const { return point_dist(client_point(j), client_point(jj)); }
  double facility_dist(int i, int ii) const { return point_dist(i, ii); }

  friend bool operator==(const Instance&, const Instance&) = default;
};

struct MetricViolation {
  int i = 0;
  int j = 0;
  int l = 0;
  std::string reason;
};

/// Checks zero diagonal, non-negativity, symmetry and d(i,l) <= d(i,j) + d(j,l) + tol.
/// Returns the first violating triple in lexicographic order.
inline std::optional<MetricViolation> validate_metric(std::span<const double> dist, int n,
                                                      double tol = kMetricTol) {
  if (n < 0 || dist.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
    fail(ErrorKind::Shape, "distance matrix is not square: " + std::to_string(dist.size()) +
                               " entries for " + std::to_string(n) + " points");
  auto at = [&](int a, int b) { return dist[static_cast<std::size_t>(a) * n + b]; };
  for (int a = 0; a < n; ++a) {
    if (std::abs(at(a, a)) > tol) return MetricViolation{a, a, a, "non-zero diagonal"};
    for (int b = 0; b < n; ++b) {
      if (at(a, b) < -tol) return MetricViolation{a, b, b, "negative distance"};
      if (std::abs(at(a, b) - at(b, a)) > tol) return MetricViolation{a, b, a, "asymmetric"};
    }
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        if (at(a, c) > at(a, b) + at(b, c) + tol)
          return MetricViolation{a, b, c, "triangle inequality"};
  return std::nullopt;
}

/// Throws on any broken instance invariant.
inline void validate_instance(const Instance& inst, double tol = kMetricTol) {
  if (inst.numFacilities < 1 || inst.numClients < 1)
    fail(ErrorKind::Parameter, "instance needs at least one facility and one client");
  if (inst.k < 1 || inst.u < 1) fail(ErrorKind::Parameter, "k and u must be at least 1");
  if (static_cast<long long>(inst.k) * inst.u < inst.numClients)
    fail(ErrorKind::Parameter, "k*u = " + std::to_string(static_cast<long long>(inst.k) * inst.u) +
                                   " is below the client count " + std::to_string(inst.numClients));
  if (inst.colocated && inst.numFacilities != inst.numClients)
    fail(ErrorKind::Parameter, "colocated instance must have as many facilities as clients");
  if (auto v = validate_metric(inst.dist, inst.numPoints(), tol))
    fail(ErrorKind::Parameter, "distance matrix is not a metric (" + v->reason + " at " +
                                   std::to_string(v->i) + "," + std::to_string(v->j) + "," +
                                   std::to_string(v->l) + ")");
  if (inst.colocated)
    for (int j = 0; j < inst.numClients; ++j)
      if (std::abs(inst.d(j, j)) > tol)
        fail(ErrorKind::Parameter, "colocated flag set but facility " + std::to_string(j) +
                                       " is not at client " + std::to_string(j));
}

namespace detail {

// Fills a facility+client metric from per-point coordinates in some base metric.
template <class BaseDist>
std::vector<double> lift_metric(const std::vector<int>& pointSite, BaseDist&& base) {
  const std::size_t n = pointSite.size();
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) dist[a * n + b] = base(pointSite[a], pointSite[b]);
  return dist;
}

inline std::vector<std::vector<int>> all_pairs_hops(const GraphDescription& g) {
  const auto adj = g.adjacency();
  const int n = g.vertexCount;
  std::vector<std::vector<int>> hops(n, std::vector<int>(n, -1));
  for (int s = 0; s < n; ++s) {
    std::queue<int> q;
    q.push(s);
    hops[s][s] = 0;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int w : adj[v])
        if (hops[s][w] < 0) {
          hops[s][w] = hops[s][v] + 1;
          q.push(w);
        }
    }
  }
  return hops;
}

}  // namespace detail

/// u groups of u+1 co-located points; 0 within a group, 1 across. k = u+1.
inline Instance gen_gap_groups(int u) {
  if (u < 1) fail(ErrorKind::Parameter, "gap groups need u >= 1");
  const int n = u * (u + 1);
  std::vector<int> site(2 * n);
  for (int p = 0; p < n; ++p) site[p] = site[n + p] = p / (u + 1);
  Instance inst;
  inst.numFacilities = n;
  inst.numClients = n;
  inst.k = u + 1;
  inst.u = u;
  inst.colocated = true;
  inst.dist = detail::lift_metric(site, [](int a, int b) { return a == b ? 0.0 : 1.0; });
  return inst;
}

inline bool is_connected(const GraphDescription& g) {
  if (g.vertexCount == 0) return true;
  const auto hops = detail::all_pairs_hops(g);
  return std::all_of(hops[0].begin(), hops[0].end(), [](int h) { return h >= 0; });
}

/// Random connected 3-regular simple graph on `vertices` vertices, drawn from
/// the pairing model with rejection of loops, multi-edges and disconnected draws.
inline GraphDescription random_cubic_graph(int vertices, std::uint64_t seed) {
  if (vertices < 4 || vertices % 2 != 0)
    fail(ErrorKind::Parameter, "a 3-regular simple graph needs an even vertex count >= 4, got " +
                                   std::to_string(vertices));
  std::mt19937_64 rng(seed);
  std::vector<int> stubs(3 * vertices);
  for (int s = 0; s < 3 * vertices; ++s) stubs[s] = s / 3;
  for (int attempt = 0; attempt < 100000; ++attempt) {
    std::shuffle(stubs.begin(), stubs.end(), rng);
    std::set<std::pair<int, int>> seen;
    bool simple = true;
    for (std::size_t s = 0; s < stubs.size() && simple; s += 2) {
      auto [a, b] = std::minmax(stubs[s], stubs[s + 1]);
      simple = a != b && seen.emplace(a, b).second;
    }
    if (!simple) continue;
    GraphDescription g;
    g.vertexCount = vertices;
    g.regular3 = true;
    g.edges.assign(seen.begin(), seen.end());
    if (is_connected(g)) return g;
  }
  fail(ErrorKind::Internal, "pairing model failed to produce a simple connected cubic graph");
}

/// Graph-metric instance: one facility per vertex, u+1 clients per vertex,
/// k = u+1, capacity u. Client j sits at vertex j / (u+1).
inline Instance gen_expander_gap(int u, std::uint64_t seed) {
  GraphDescription g = random_cubic_graph(u, seed);
  const auto hops = detail::all_pairs_hops(g);
  const int nC = u * (u + 1);
  std::vector<int> site(u + nC);
  for (int i = 0; i < u; ++i) site[i] = i;
  for (int j = 0; j < nC; ++j) site[u + j] = j / (u + 1);
  Instance inst;
  inst.numFacilities = u;
  inst.numClients = nC;
  inst.k = u + 1;
  inst.u = u;
  inst.colocated = false;
  inst.dist = detail::lift_metric(site, [&](int a, int b) { return double(hops[a][b]); });
  inst.graph = std::move(g);
  return inst;
}

inline constexpr int kMaxExpansionVertices = 24;

/// Exact edge expansion min_{0 < |B| <= n/2} |E(B, V\B)| / |B| by enumerating subsets.
inline double edge_expansion(const GraphDescription& g) {
  const int n = g.vertexCount;
  if (n > kMaxExpansionVertices)
    fail(ErrorKind::Size, "edge expansion enumeration is limited to " +
                              std::to_string(kMaxExpansionVertices) + " vertices");
  if (n < 2) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const std::uint32_t limit = 1u << n;
  for (std::uint32_t mask = 1; mask < limit; ++mask) {
    const int size = std::popcount(mask);
    if (2 * size > n) continue;
    int cut = 0;
    for (auto [a, b] : g.edges) cut += ((mask >> a) & 1u) != ((mask >> b) & 1u);
    best = std::min(best, double(cut) / size);
  }
  return best;
}

/// The spread-out fractional point on a graph-metric gap instance: y_i = 1 + 1/u
/// everywhere, each client keeps 1 - 3*gamma/u at home and sends gamma/u to each
/// of the three neighbours of its vertex.
inline FractionalSolution build_expander_fractional(const Instance& inst, const GraphDescription& g,
                                                    double gamma) {
  const int u = inst.u;
  if (!g.regular3 || g.vertexCount != u || inst.numFacilities != u ||
      inst.numClients != u * (u + 1))
    fail(ErrorKind::Parameter, "instance/graph pair was not produced by gen_expander_gap");
  const double chi = edge_expansion(g);
  if (chi <= 0.0 || gamma < 1.0 / chi - 1e-12)
    fail(ErrorKind::Parameter, "gamma must be at least 1/expansion = " + std::to_string(1.0 / chi));
  if (3.0 * gamma / u > 1.0 + 1e-12)
    fail(ErrorKind::Parameter, "gamma too large: 3*gamma/u exceeds 1");
  const auto adj = g.adjacency();
  FractionalSolution s = make_zero_solution(u, inst.numClients);
  for (int i = 0; i < u; ++i) s.y[i] = 1.0 + 1.0 / u;
  for (int j = 0; j < inst.numClients; ++j) {
    const int home = j / (u + 1);
    s.xf(home, j) = std::max(0.0, 1.0 - 3.0 * gamma / u);
    for (int nb : adj[home]) s.xf(nb, j) = gamma / u;
  }
  double obj = 0.0;
  for (int i = 0; i < u; ++i)
    for (int j = 0; j < inst.numClients; ++j) obj += s.xf(i, j) * inst.d(i, j);
  s.objective = obj;
  return s;
}

/// F = C version of an instance: one facility co-located with every client.
/// Opening copies at a client location is the soft-capacitated view.
inline Instance make_colocated(const Instance& inst) {
  const int n = inst.numClients;
  Instance out;
  out.numFacilities = n;
  out.numClients = n;
  out.k = inst.k;
  out.u = inst.u;
  out.colocated = true;
  out.dist.assign(static_cast<std::size_t>(4) * n * n, 0.0);
  for (int a = 0; a < 2 * n; ++a)
    for (int b = 0; b < 2 * n; ++b)
      out.dist[static_cast<std::size_t>(a) * 2 * n + b] = inst.client_dist(a % n, b % n);
  return out;
}

}  // namespace ckm
