#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "ckm/error.hpp"

namespace ckm {

/// Symmetric distance table over representatives, indexed by greedy position.
struct RepMetric {
  int n = 0;
  std::vector<double> d;
  double operator()(int a, int b) const { return d[static_cast<std::size_t>(a) * n + b]; }
};

/// Rooted tree over representatives. Vertices are global representative
/// positions kept in ascending order; parent holds local indices (-1 at the root).
struct NeighborhoodTree {
  std::vector<int> vertices;
  std::vector<int> parent;
  int root = 0;  // local index

  // Filled by rank_and_levels. rank[k] belongs to the edge (k, parent[k]).
  std::vector<int> rank;
  int height = 0;
  /// levelSets[i] lists the components of (V, E_{<=i}) as sorted local index lists.
  std::vector<std::vector<std::vector<int>>> levelSets;

  int size() const { return static_cast<int>(vertices.size()); }
  int root_vertex() const { return vertices[root]; }
  int local_of(int v) const {
    auto it = std::lower_bound(vertices.begin(), vertices.end(), v);
    return (it != vertices.end() && *it == v) ? static_cast<int>(it - vertices.begin()) : -1;
  }
};

namespace detail {

// Builds a tree from global parent pointers restricted to `members`.
inline NeighborhoodTree make_tree(std::vector<int> members, const std::vector<int>& globalParent,
                                  int rootVertex) {
  std::sort(members.begin(), members.end());
  NeighborhoodTree t;
  t.vertices = members;
  t.parent.assign(members.size(), -1);
  for (std::size_t k = 0; k < members.size(); ++k) {
    const int v = members[k];
    if (v == rootVertex) {
      t.root = static_cast<int>(k);
      continue;
    }
    t.parent[k] = t.local_of(globalParent[v]);
    ensure(t.parent[k] >= 0, "tree parent lies inside the tree");
  }
  return t;
}

}  // namespace detail

/// Subtree membership Lambda_T(v) for every local vertex.
inline std::vector<std::vector<int>> subtree_sets(const NeighborhoodTree& t) {
  const int n = t.size();
  std::vector<std::vector<int>> children(n);
  for (int k = 0; k < n; ++k)
    if (t.parent[k] >= 0) children[t.parent[k]].push_back(k);
  std::vector<std::vector<int>> sub(n);
  std::vector<int> stack;
  for (int k = 0; k < n; ++k) {
    stack = {k};
    while (!stack.empty()) {
      const int w = stack.back();
      stack.pop_back();
      sub[k].push_back(w);
      for (int c : children[w]) stack.push_back(c);
    }
  }
  return sub;
}

/// Every non-root vertex's parent is its nearest representative outside its
/// own subtree. Returns the first failing vertex (global position) or -1.
inline int find_neighborhood_violation(const NeighborhoodTree& t, const RepMetric& d,
                                       double tol = 1e-9) {
  const auto sub = subtree_sets(t);
  std::vector<char> inSub(d.n);
  for (int k = 0; k < t.size(); ++k) {
    if (k == t.root) continue;
    std::fill(inSub.begin(), inSub.end(), 0);
    for (int w : sub[k]) inSub[t.vertices[w]] = 1;
    const int v = t.vertices[k];
    double nearest = std::numeric_limits<double>::infinity();
    for (int w = 0; w < d.n; ++w)
      if (!inSub[w]) nearest = std::min(nearest, d(v, w));
    if (std::abs(nearest - d(v, t.vertices[t.parent[k]])) > tol) return v;
  }
  return -1;
}

/// Minimum spanning tree over all representatives, rooted at position 0.
inline NeighborhoodTree mst_tree(const RepMetric& d) {
  const int n = d.n;
  std::vector<int> parent(n, -1);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<char> in(n, 0);
  best[0] = 0.0;
  for (int it = 0; it < n; ++it) {
    int v = -1;
    for (int w = 0; w < n; ++w)
      if (!in[w] && (v < 0 || best[w] < best[v])) v = w;
    in[v] = 1;
    for (int w = 0; w < n; ++w)
      if (!in[w] && d(v, w) < best[w]) {
        best[w] = d(v, w);
        parent[w] = v;
      }
  }
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  return detail::make_tree(all, parent, 0);
}

/// Covers all representatives by neighborhood trees of size in [ell, ell^2]
/// whose non-root vertex sets are disjoint. Requires at least ell representatives.
///
/// Small trees are merged by hanging their root below the nearest outside
/// representative. Oversized trees are then split along their treelets: the
/// piece cut off is a vertex v together with whole treelet subtrees hung at v,
/// so both parts remain sequences of valid hangs.
inline std::vector<NeighborhoodTree> build_neighborhood_trees(const RepMetric& d, int ell) {
  const int n = d.n;
  if (ell < 1) fail(ErrorKind::Parameter, "ell must be positive");
  if (n < ell)
    fail(ErrorKind::Precondition, "need at least ell representatives to build the forest");

  struct Hang {
    int treeletRoot;
    int at;                    // vertex the treelet root is hung below
    std::vector<int> members;  // treelet vertices at hang time
  };

  std::vector<int> parent(n, -1);
  std::vector<int> rootOf(n);
  std::iota(rootOf.begin(), rootOf.end(), 0);
  std::vector<std::vector<int>> members(n);
  for (int v = 0; v < n; ++v) members[v] = {v};
  std::vector<std::vector<Hang>> hangsAt(n);  // keyed by receiving root

  for (;;) {
    int r = -1;
    for (int v = 0; v < n; ++v)
      if (rootOf[v] == v && static_cast<int>(members[v].size()) < ell) {
        r = v;
        break;
      }
    if (r < 0) break;
    int star = -1;
    for (int w = 0; w < n; ++w)
      if (rootOf[w] != r && (star < 0 || d(r, w) < d(r, star))) star = w;
    const int target = rootOf[star];
    parent[r] = star;
    hangsAt[target].push_back({r, star, members[r]});
    for (int w : members[r]) rootOf[w] = target;
    members[target].insert(members[target].end(), members[r].begin(), members[r].end());
    members[r].clear();
  }

  std::vector<NeighborhoodTree> out;
  const long long cap = static_cast<long long>(ell) * ell;
  const long long heavy = static_cast<long long>(ell) * (ell - 1);
  for (int r = 0; r < n; ++r) {
    if (rootOf[r] != r) continue;
    // Super-node 0 is {r}; super-node h+1 is hang event h.
    std::vector<std::vector<int>> nodeMembers{{r}};
    std::vector<int> hungAt{-1};
    for (const Hang& h : hangsAt[r]) {
      nodeMembers.push_back(h.members);
      hungAt.push_back(h.at);
    }
    const int S = static_cast<int>(nodeMembers.size());
    std::vector<int> nodeOfVertex(n, -1);
    for (int s = 0; s < S; ++s)
      for (int v : nodeMembers[s]) nodeOfVertex[v] = s;
    std::vector<int> superParent(S, -1);
    for (int s = 1; s < S; ++s) superParent[s] = nodeOfVertex[hungAt[s]];

    std::vector<char> alive(S, 1);
    auto alive_size = [&] {
      long long total = 0;
      for (int s = 0; s < S; ++s)
        if (alive[s]) total += static_cast<long long>(nodeMembers[s].size());
      return total;
    };
    auto subtree_weight = [&] {
      std::vector<long long> w(S, 0);
      // Hang events only attach to earlier super-nodes, so reverse order is bottom-up.
      for (int s = S - 1; s >= 0; --s) {
        if (!alive[s]) continue;
        w[s] += static_cast<long long>(nodeMembers[s].size());
        if (s > 0) w[superParent[s]] += w[s];
      }
      return w;
    };

    while (alive_size() > cap) {
      const auto w = subtree_weight();
      int cur = 0;
      for (;;) {
        int next = -1;
        for (int s = 1; s < S; ++s)
          if (alive[s] && superParent[s] == cur && w[s] >= heavy) {
            next = s;
            break;
          }
        if (next < 0) break;
        cur = next;
      }
      // Hanging weight per vertex of the chosen treelet.
      int pivot = -1;
      long long pivotWeight = -1;
      for (int v : nodeMembers[cur]) {
        long long hw = 0;
        for (int s = 1; s < S; ++s)
          if (alive[s] && superParent[s] == cur && hungAt[s] == v) hw += w[s];
        if (hw > pivotWeight || (hw == pivotWeight && v < pivot)) {
          pivot = v;
          pivotWeight = hw;
        }
      }
      ensure(pivotWeight >= ell - 1, "some treelet vertex carries at least ell-1 hanging weight");
      std::vector<int> kids;
      for (int s = 1; s < S; ++s)
        if (alive[s] && superParent[s] == cur && hungAt[s] == pivot) kids.push_back(s);
      std::vector<int> chosen;
      int single = -1;
      for (int s : kids)
        if (w[s] >= ell - 1 && (single < 0 || w[s] < w[single])) single = s;
      if (single >= 0) {
        chosen = {single};
      } else {
        long long acc = 0;
        for (int s : kids) {
          chosen.push_back(s);
          acc += w[s];
          if (acc >= ell - 1) break;
        }
      }
      std::vector<int> piece{pivot};
      std::vector<int> stack = chosen;
      while (!stack.empty()) {
        const int s = stack.back();
        stack.pop_back();
        alive[s] = 0;
        piece.insert(piece.end(), nodeMembers[s].begin(), nodeMembers[s].end());
        for (int c = 1; c < S; ++c)
          if (alive[c] && superParent[c] == s) stack.push_back(c);
      }
      out.push_back(detail::make_tree(piece, parent, pivot));
    }
    std::vector<int> rest;
    for (int s = 0; s < S; ++s)
      if (alive[s]) rest.insert(rest.end(), nodeMembers[s].begin(), nodeMembers[s].end());
    out.push_back(detail::make_tree(rest, parent, r));
  }
  std::sort(out.begin(), out.end(), [](const NeighborhoodTree& a, const NeighborhoodTree& b) {
    return a.root_vertex() != b.root_vertex() ? a.root_vertex() < b.root_vertex()
                                              : a.vertices < b.vertices;
  });
  return out;
}

struct TreeEdge {
  int child;  // local index; the edge is (child, parent[child])
  double length;
};

/// Tree edges sorted by length, ties by (smaller, larger) endpoint position.
inline std::vector<TreeEdge> sorted_edges(const NeighborhoodTree& t, const RepMetric& d) {
  std::vector<TreeEdge> edges;
  for (int k = 0; k < t.size(); ++k)
    if (k != t.root) edges.push_back({k, d(t.vertices[k], t.vertices[t.parent[k]])});
  auto key = [&](const TreeEdge& e) {
    const int a = t.vertices[e.child], b = t.vertices[t.parent[e.child]];
    return std::pair{std::min(a, b), std::max(a, b)};
  };
  std::sort(edges.begin(), edges.end(), [&](const TreeEdge& a, const TreeEdge& b) {
    if (a.length != b.length) return a.length < b.length;
    return key(a) < key(b);
  });
  return edges;
}

/// Assigns edge ranks by the doubling rule and computes the level sets.
inline void rank_and_levels(NeighborhoodTree& t, const RepMetric& d) {
  const int n = t.size();
  t.rank.assign(n, 0);
  const auto edges = sorted_edges(t, d);
  int rank = 0;
  double total = 0.0;
  for (std::size_t s = 0; s < edges.size(); ++s) {
    if (s == 0 || edges[s].length > 2.0 * total) ++rank;
    t.rank[edges[s].child] = rank;
    total += edges[s].length;
  }
  t.height = rank;

  t.levelSets.assign(t.height + 1, {});
  std::vector<int> comp(n);
  for (int i = 0; i <= t.height; ++i) {
    std::iota(comp.begin(), comp.end(), 0);
    auto find = [&](int a) {
      while (comp[a] != a) a = comp[a] = comp[comp[a]];
      return a;
    };
    for (int k = 0; k < n; ++k)
      if (k != t.root && t.rank[k] <= i) {
        const int a = find(k), b = find(t.parent[k]);
        if (a != b) comp[std::max(a, b)] = std::min(a, b);
      }
    std::vector<std::vector<int>> groups(n);
    for (int k = 0; k < n; ++k) groups[find(k)].push_back(k);
    for (auto& g : groups)
      if (!g.empty()) t.levelSets[i].push_back(std::move(g));
  }
}

}  // namespace ckm
