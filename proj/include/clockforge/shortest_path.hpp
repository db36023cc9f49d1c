#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <queue>
#include <utility>
#include <vector>

#include "clockforge/rational.hpp"

namespace clockforge {

/// Dijkstra over the reversed graph: exact distance from every vertex to
/// `target`, or nullopt when the target is unreachable.
///
/// `for_each_predecessor(v, relax)` must call `relax(u, w)` once for every edge
/// u -> v of weight w >= 0. The graph may be implicit.
template <class ForEachPredecessor>
std::vector<std::optional<Rational>> distances_to(std::size_t vertex_count, std::size_t target,
                                                  ForEachPredecessor&& for_each_predecessor) {
  using Item = std::pair<Rational, std::size_t>;
  std::vector<std::optional<Rational>> dist(vertex_count);
  std::vector<bool> settled(vertex_count, false);
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[target] = Rational(0);
  heap.emplace(Rational(0), target);
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (settled[v]) continue;
    settled[v] = true;
    for_each_predecessor(v, [&](std::size_t u, const Rational& w) {
      if (settled[u]) return;
      Rational cand = d + w;
      if (!dist[u] || cand < *dist[u]) {
        dist[u] = cand;
        heap.emplace(std::move(cand), u);
      }
    });
  }
  return dist;
}

/// Walks forward from `source` taking, at every step, the lowest-numbered
/// successor that stays on a shortest path. With distances from distances_to()
/// this yields the lexicographically smallest shortest vertex sequence.
///
/// `for_each_successor(v, visit)` must call `visit(u, w)` in ascending u and
/// stop early when `visit` returns true.
template <class ForEachSuccessor>
std::vector<std::size_t> lexicographic_shortest_path(
    std::size_t source, std::size_t target, const std::vector<std::optional<Rational>>& dist,
    ForEachSuccessor&& for_each_successor) {
  std::vector<std::size_t> path;
  if (!dist[source]) return path;
  path.push_back(source);
  std::size_t v = source;
  while (v != target) {
    std::optional<std::size_t> next;
    for_each_successor(v, [&](std::size_t u, const Rational& w) {
      if (dist[u] && w + *dist[u] == *dist[v]) {
        next = u;
        return true;
      }
      return false;
    });
    if (!next) return {};  // inconsistent distances; cannot happen for exact weights
    v = *next;
    path.push_back(v);
  }
  return path;
}

}  // namespace clockforge
