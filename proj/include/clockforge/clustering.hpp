#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clockforge/error.hpp"
#include "clockforge/rational.hpp"
#include "clockforge/shortest_path.hpp"
#include "clockforge/timerset.hpp"

namespace clockforge {

/// Hardware tick rate needed to serve `period` exactly: 1e9 / ns, in Hz.
inline Rational frequency_of(TimerPeriod period) {
  return Rational(Rational::Int(1'000'000'000), Rational::Int(period.ns()));
}

enum class Algorithm { jensen, greedy, global_gcd, fixed, brute_force };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::jensen: return "jensen";
    case Algorithm::greedy: return "greedy";
    case Algorithm::global_gcd: return "global_gcd";
    case Algorithm::fixed: return "fixed";
    case Algorithm::brute_force: return "brute_force";
  }
  return "jensen";
}

inline Algorithm parse_algorithm(std::string_view tag) {
  if (tag == "jensen") return Algorithm::jensen;
  if (tag == "greedy") return Algorithm::greedy;
  if (tag == "gcd" || tag == "global_gcd") return Algorithm::global_gcd;
  if (tag == "fixed") return Algorithm::fixed;
  if (tag == "brute_force" || tag == "brute") return Algorithm::brute_force;
  throw ValidationError("unknown algorithm '" + std::string(tag) + "'");
}

/// Software timers sharing one hardware timer.
struct Cluster {
  std::vector<TimerPeriod> members;  // ascending
  TimerPeriod gcd;
  /// Hardware tick rate. Equals 1e9/gcd except for the fixed-frequency
  /// baseline, where it is the imposed rate (a multiple of 1e9/gcd).
  Rational frequency_hz;

  static Cluster of(std::vector<TimerPeriod> members) {
    std::sort(members.begin(), members.end());
    TimerPeriod g = gcd_of(members);
    return Cluster{std::move(members), g, frequency_of(g)};
  }

  friend bool operator==(const Cluster&, const Cluster&) = default;
};

struct AllocationResult {
  Algorithm algorithm = Algorithm::jensen;
  std::vector<Cluster> clusters;
  Rational weight;  // sum of cluster frequencies, Hz
  std::size_t hw_count = 0;
  std::size_t unused_hw = 0;

  /// Cluster frequencies, ascending.
  std::vector<Rational> frequency_multiset() const {
    std::vector<Rational> f;
    for (const auto& c : clusters) f.push_back(c.frequency_hz);
    std::sort(f.begin(), f.end());
    return f;
  }

  friend bool operator==(const AllocationResult&, const AllocationResult&) = default;
};

/// Sum of 1/GCD over the clusters, in Hz.
inline Rational evaluate_weight(std::span<const std::vector<TimerPeriod>> partition) {
  if (partition.empty()) throw ValidationError("cannot evaluate an empty partition");
  std::vector<TimerPeriod> seen;
  Rational w;
  for (const auto& c : partition) {
    if (c.empty()) throw ValidationError("partition contains an empty cluster");
    seen.insert(seen.end(), c.begin(), c.end());
    w += frequency_of(gcd_of(c));
  }
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
    throw ValidationError("partition clusters are not disjoint");
  return w;
}

// ---------------------------------------------------------------------------
// Stage graph

/// Number of stages between the empty set and the full set.
/// A result <= 0 means there are no more timers than hardware timers.
inline std::int64_t stage_count(std::size_t n_sw, std::size_t n_hw) {
  if (n_sw >= 2 * n_hw) return static_cast<std::int64_t>(n_hw);
  return static_cast<std::int64_t>(n_sw) - static_cast<std::int64_t>(n_hw);
}

struct StageBounds {
  std::size_t min;
  std::size_t max;
  friend bool operator==(const StageBounds&, const StageBounds&) = default;
};

/// Cardinality bounds of the subsets at stage `t`: the union of the first t
/// clusters of a partition listed by decreasing cluster size.
inline StageBounds stage_bounds(std::size_t t, std::size_t n_sw, std::size_t n_hw) {
  if (n_hw == 0 || n_sw <= n_hw)
    throw ValidationError("stage bounds need more timers than hardware timers");
  const auto s = stage_count(n_sw, n_hw);
  if (t < 1 || static_cast<std::int64_t>(t) > s)
    throw ValidationError("stage " + std::to_string(t) + " outside [1, " + std::to_string(s) + "]");
  const std::size_t q = n_sw / n_hw;
  const std::size_t r = n_sw - n_hw * q;
  std::size_t mn = 0;
  if (r == 0)
    mn = t * q;
  else if (t <= r)
    mn = (q + 1) * t;
  else
    mn = n_sw - (n_hw - t) * q;
  return {mn, n_sw - n_hw + t};
}

struct JensenOptions {
  /// Refuse inputs with more than this many subsets (2^|reduced|).
  std::uint64_t max_subsets = std::uint64_t{1} << 20;
};

/// Element count above which the stage graph gets memory hungry.
inline constexpr std::size_t kJensenWarnSize = 17;

struct StageVertex {
  std::uint64_t mask;  // bit i <=> elements[i]
  std::size_t stage;
  friend bool operator==(const StageVertex&, const StageVertex&) = default;
};

struct StageEdge {
  std::size_t from;
  std::size_t to;
  Rational weight;  // Hz
  friend bool operator==(const StageEdge&, const StageEdge&) = default;
};

/// Materialized stage graph. Vertex 0 is the empty set; `sink` is the full set.
///
/// When the stage count is smaller than the hardware timer count, the last
/// stage is followed by the full set on its own extra stage: that final edge
/// peels every remaining timer off as a singleton cluster, and its weight is the
/// sum of their frequencies.
struct StageGraph {
  std::vector<TimerPeriod> elements;
  std::size_t n_hw = 0;
  std::size_t stage_total = 0;     // stages excluding the empty set
  bool singleton_tail = false;     // sink sits on the extra stage
  std::vector<StageVertex> vertices;
  std::vector<StageEdge> edges;    // sorted by (from, to)
  std::size_t source = 0;
  std::size_t sink = 0;

  std::vector<TimerPeriod> subset(std::uint64_t mask) const {
    std::vector<TimerPeriod> out;
    for (std::size_t i = 0; i < elements.size(); ++i)
      if (mask >> i & 1U) out.push_back(elements[i]);
    return out;
  }
};

namespace detail {

inline std::uint64_t full_mask(std::size_t n) {
  return n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
}

inline void check_subset_guard(std::size_t n, const JensenOptions& opt) {
  if (n >= 63 || (std::uint64_t{1} << n) > opt.max_subsets)
    throw RefusalError("stage graph over " + std::to_string(n) + " timers needs 2^" +
                       std::to_string(n) + " subsets, above the limit of " +
                       std::to_string(opt.max_subsets));
}

/// Implicit stage graph: vertices are generated up front, edges on demand.
class StageLattice {
public:
  StageLattice(const TimerSet& reduced, std::size_t n_hw, const JensenOptions& opt)
      : elements_(reduced.periods()), n_(reduced.size()), k_(n_hw) {
    if (n_hw < 2) throw ValidationError("stage graph needs at least 2 hardware timers");
    if (n_ <= n_hw)
      throw TrivialAllocation(std::to_string(n_) + " timers fit on " + std::to_string(n_hw) +
                              " hardware timers without clustering");
    check_subset_guard(n_, opt);
    stages_ = static_cast<std::size_t>(stage_count(n_, k_));
    full_ = full_mask(n_);

    gcd_.assign(std::size_t{1} << n_, 0);
    for (std::uint64_t m = 1; m <= full_; ++m) {
      const int low = std::countr_zero(m);
      gcd_[m] = std::gcd(gcd_[m & (m - 1)], elements_[low].ns());
    }

    levels_.push_back({0});
    bounds_.push_back({0, 0});
    for (std::size_t t = 1; t <= stages_; ++t) {
      bounds_.push_back(stage_bounds(t, n_, k_));
      levels_.push_back(combinations(bounds_[t].min, bounds_[t].max));
    }
    tail_ = bounds_[stages_].max < n_;
    if (tail_) levels_.push_back({full_});

    std::size_t off = 0;
    for (const auto& lv : levels_) {
      offset_.push_back(off);
      off += lv.size();
    }
    offset_.push_back(off);
    vertex_count_ = off;

    // mask -> index lookup for levels that serve as predecessors via submasks
    index_.resize(levels_.size());
    for (std::size_t t = 1; t + 1 < levels_.size(); ++t) {
      if (tail_ && t == stages_) continue;  // the tail scans its level directly
      index_[t].assign(std::size_t{1} << n_, -1);
      for (std::size_t i = 0; i < levels_[t].size(); ++i)
        index_[t][levels_[t][i]] = static_cast<std::int32_t>(i);
    }
  }

  std::size_t vertex_count() const { return vertex_count_; }
  std::size_t sink() const { return vertex_count_ - 1; }
  std::size_t stages() const { return stages_; }
  bool singleton_tail() const { return tail_; }
  std::size_t level_count() const { return levels_.size(); }
  const std::vector<std::uint64_t>& level(std::size_t t) const { return levels_[t]; }
  const std::vector<TimerPeriod>& elements() const { return elements_; }

  std::size_t level_of(std::size_t id) const {
    auto it = std::upper_bound(offset_.begin(), offset_.end(), id);
    return static_cast<std::size_t>(it - offset_.begin()) - 1;
  }
  std::uint64_t mask_of(std::size_t id) const {
    const auto t = level_of(id);
    return levels_[t][id - offset_[t]];
  }

  /// Weight of the edge from `from` to `to` where `to` lies on level `t`.
  Rational weight(std::uint64_t from, std::uint64_t to, std::size_t t) const {
    const std::uint64_t diff = to & ~from;
    if (tail_ && t == levels_.size() - 1) {
      Rational w;
      for (std::uint64_t m = diff; m != 0; m &= m - 1)
        w += frequency_of(elements_[static_cast<std::size_t>(std::countr_zero(m))]);
      return w;
    }
    return frequency_of(TimerPeriod(gcd_[diff]));
  }

  template <class Relax>
  void for_each_predecessor(std::size_t id, Relax&& relax) const {
    const std::size_t t = level_of(id);
    if (t == 0) return;
    const std::uint64_t to = levels_[t][id - offset_[t]];
    if (t == 1) {
      relax(std::size_t{0}, weight(0, to, t));
      return;
    }
    const std::size_t p = t - 1;
    if (tail_ && t == levels_.size() - 1) {
      for (std::size_t i = 0; i < levels_[p].size(); ++i) {
        const std::uint64_t from = levels_[p][i];
        if (tail_admissible(from)) relax(offset_[p] + i, weight(from, to, t));
      }
      return;
    }
    const auto pop = static_cast<std::size_t>(std::popcount(to));
    const auto& idx = index_[p];
    const auto [lo, hi] = bounds_[p];
    if (pop < 63 && (std::uint64_t{1} << pop) <= levels_[p].size()) {
      for (std::uint64_t s = (to - 1) & to;; s = (s - 1) & to) {
        const auto c = static_cast<std::size_t>(std::popcount(s));
        if (c >= lo && c <= hi && idx[s] >= 0)
          relax(offset_[p] + static_cast<std::size_t>(idx[s]), weight(s, to, t));
        if (s == 0) break;
      }
    } else {
      for (std::size_t i = 0; i < levels_[p].size(); ++i) {
        const std::uint64_t from = levels_[p][i];
        if (from != to && (from & ~to) == 0) relax(offset_[p] + i, weight(from, to, t));
      }
    }
  }

  /// Successors in ascending id; stops when `visit` returns true.
  template <class Visit>
  void for_each_successor(std::size_t id, Visit&& visit) const {
    const std::size_t t = level_of(id);
    if (t + 1 >= levels_.size()) return;
    const std::uint64_t from = levels_[t][id - offset_[t]];
    const std::size_t nt = t + 1;
    const bool into_tail = tail_ && nt == levels_.size() - 1;
    if (into_tail && !tail_admissible(from)) return;
    for (std::size_t i = 0; i < levels_[nt].size(); ++i) {
      const std::uint64_t to = levels_[nt][i];
      if (from != to && (from & ~to) == 0)
        if (visit(offset_[nt] + i, weight(from, to, nt))) return;
    }
  }

private:
  // Peeling the rest as singletons must not exceed the hardware timer count.
  bool tail_admissible(std::uint64_t from) const {
    const auto rest = n_ - static_cast<std::size_t>(std::popcount(from));
    return stages_ + rest <= k_;
  }

  // All masks with cardinality in [lo, hi]; by cardinality, then in
  // lexicographic order of their index tuples.
  std::vector<std::uint64_t> combinations(std::size_t lo, std::size_t hi) const {
    std::vector<std::uint64_t> out;
    for (std::size_t j = lo; j <= hi && j <= n_; ++j) {
      if (j == 0) {
        out.push_back(0);
        continue;
      }
      std::vector<std::size_t> idx(j);
      std::iota(idx.begin(), idx.end(), 0);
      while (true) {
        std::uint64_t m = 0;
        for (auto i : idx) m |= std::uint64_t{1} << i;
        out.push_back(m);
        std::size_t pos = j;
        while (pos > 0 && idx[pos - 1] == n_ - j + pos - 1) --pos;
        if (pos == 0) break;
        ++idx[pos - 1];
        for (std::size_t q = pos; q < j; ++q) idx[q] = idx[q - 1] + 1;
      }
    }
    return out;
  }

  std::vector<TimerPeriod> elements_;
  std::size_t n_;
  std::size_t k_;
  std::size_t stages_ = 0;
  bool tail_ = false;
  std::uint64_t full_ = 0;
  std::vector<std::uint64_t> gcd_;
  std::vector<std::vector<std::uint64_t>> levels_;
  std::vector<StageBounds> bounds_;
  std::vector<std::size_t> offset_;
  std::size_t vertex_count_ = 0;
  std::vector<std::vector<std::int32_t>> index_;
};

inline std::vector<std::vector<TimerPeriod>> clusters_along(const std::vector<TimerPeriod>& elements,
                                                            const std::vector<std::uint64_t>& masks,
                                                            bool singleton_tail) {
  std::vector<std::vector<TimerPeriod>> out;
  auto subset = [&](std::uint64_t m) {
    std::vector<TimerPeriod> v;
    for (std::size_t i = 0; i < elements.size(); ++i)
      if (m >> i & 1U) v.push_back(elements[i]);
    return v;
  };
  for (std::size_t i = 1; i < masks.size(); ++i) {
    const std::uint64_t diff = masks[i] & ~masks[i - 1];
    if (singleton_tail && i + 1 == masks.size()) {
      for (auto p : subset(diff)) out.push_back({p});
    } else {
      out.push_back(subset(diff));
    }
  }
  return out;
}

struct ExactKPartition {
  std::vector<std::vector<TimerPeriod>> clusters;
  Rational weight;
};

/// Minimum-weight partition into exactly k >= 2 clusters (k < |reduced|).
inline ExactKPartition jensen_exact(const TimerSet& reduced, std::size_t k, const JensenOptions& opt) {
  const StageLattice lat(reduced, k, opt);
  auto dist = distances_to(lat.vertex_count(), lat.sink(), [&](std::size_t v, auto&& relax) {
    lat.for_each_predecessor(v, relax);
  });
  auto path = lexicographic_shortest_path(0, lat.sink(), dist, [&](std::size_t v, auto&& visit) {
    lat.for_each_successor(v, visit);
  });
  std::vector<std::uint64_t> masks;
  for (auto id : path) masks.push_back(lat.mask_of(id));
  return {clusters_along(lat.elements(), masks, lat.singleton_tail()), *dist[0]};
}

inline AllocationResult make_result(Algorithm a, std::vector<Cluster> clusters, std::size_t hw) {
  AllocationResult r;
  r.algorithm = a;
  for (const auto& c : clusters) r.weight += c.frequency_hz;
  r.clusters = std::move(clusters);
  r.hw_count = hw;
  r.unused_hw = hw > r.clusters.size() ? hw - r.clusters.size() : 0;
  return r;
}

inline AllocationResult singleton_result(Algorithm a, const TimerSet& reduced, std::size_t hw) {
  std::vector<Cluster> cs;
  for (auto p : reduced) cs.push_back(Cluster::of({p}));
  return make_result(a, std::move(cs), hw);
}

inline void check_allocation_input(const TimerSet& reduced, std::size_t n_hw) {
  if (reduced.empty()) throw ValidationError("cannot allocate an empty timer set");
  if (n_hw == 0) throw ValidationError("need at least one hardware timer");
}

}  // namespace detail

/// Builds the full stage graph (every vertex and edge). Meant for inspection
/// and small inputs; optimal_partition() walks the same graph implicitly.
inline StageGraph build_stage_graph(const TimerSet& reduced, std::size_t n_hw,
                                    const JensenOptions& opt = {}) {
  const detail::StageLattice lat(reduced, n_hw, opt);
  StageGraph g;
  g.elements = lat.elements();
  g.n_hw = n_hw;
  g.stage_total = lat.stages();
  g.singleton_tail = lat.singleton_tail();
  for (std::size_t t = 0; t < lat.level_count(); ++t)
    for (auto m : lat.level(t)) g.vertices.push_back({m, t});
  for (std::size_t v = 0; v < lat.vertex_count(); ++v)
    lat.for_each_predecessor(v, [&](std::size_t u, const Rational& w) { g.edges.push_back({u, v, w}); });
  std::sort(g.edges.begin(), g.edges.end(),
            [](const StageEdge& a, const StageEdge& b) { return std::tie(a.from, a.to) < std::tie(b.from, b.to); });
  g.source = 0;
  g.sink = lat.sink();
  return g;
}

/// Lexicographically smallest shortest source -> sink path, as vertex ids.
inline std::vector<std::size_t> shortest_path(const StageGraph& g) {
  std::vector<std::vector<std::pair<std::size_t, const Rational*>>> preds(g.vertices.size());
  std::vector<std::vector<std::pair<std::size_t, const Rational*>>> succs(g.vertices.size());
  for (const auto& e : g.edges) {
    preds[e.to].emplace_back(e.from, &e.weight);
    succs[e.from].emplace_back(e.to, &e.weight);
  }
  auto dist = distances_to(g.vertices.size(), g.sink, [&](std::size_t v, auto&& relax) {
    for (auto [u, w] : preds[v]) relax(u, *w);
  });
  return lexicographic_shortest_path(g.source, g.sink, dist, [&](std::size_t v, auto&& visit) {
    for (auto [u, w] : succs[v])
      if (visit(u, *w)) return;
  });
}

/// Clusters induced by a source -> sink path: successive set differences, with
/// the singleton tail split into one cluster per timer.
inline std::vector<std::vector<TimerPeriod>> partition_from_path(const StageGraph& g,
                                                                 const std::vector<std::size_t>& path) {
  std::vector<std::uint64_t> masks;
  for (auto id : path) masks.push_back(g.vertices.at(id).mask);
  return detail::clusters_along(g.elements, masks, g.singleton_tail);
}

/// Optimal allocation of the reduced set onto at most n_hw hardware timers.
///
/// Each cluster count k in [1, n_hw] is solved on its own stage graph (k = 1 is
/// the single global cluster) and the lightest result wins; on equal weight the
/// smaller k wins. Within one stage graph, equal-length shortest paths resolve
/// to the lexicographically smallest vertex sequence.
inline AllocationResult optimal_partition(const TimerSet& reduced, std::size_t n_hw,
                                          const JensenOptions& opt = {}) {
  detail::check_allocation_input(reduced, n_hw);
  if (reduced.size() <= n_hw) return detail::singleton_result(Algorithm::jensen, reduced, n_hw);
  if (n_hw >= 2) detail::check_subset_guard(reduced.size(), opt);

  std::vector<std::vector<TimerPeriod>> best{reduced.periods()};
  Rational best_w = frequency_of(gcd_of(reduced));
  for (std::size_t k = 2; k <= n_hw; ++k) {
    auto cand = detail::jensen_exact(reduced, k, opt);
    if (cand.weight < best_w) {
      best_w = cand.weight;
      best = std::move(cand.clusters);
    }
  }
  std::vector<Cluster> cs;
  for (auto& c : best) cs.push_back(Cluster::of(std::move(c)));
  return detail::make_result(Algorithm::jensen, std::move(cs), n_hw);
}

/// Largest remaining period goes to the hardware timer with the smallest
/// current frequency (empty timers run at 0 Hz; ties go to the lowest index).
inline AllocationResult greedy_allocate(const TimerSet& reduced, std::size_t n_hw) {
  detail::check_allocation_input(reduced, n_hw);
  std::vector<std::vector<TimerPeriod>> timers(n_hw);
  std::vector<Rational> freq(n_hw, Rational(0));
  for (auto it = reduced.periods().rbegin(); it != reduced.periods().rend(); ++it) {
    std::size_t pick = 0;
    for (std::size_t h = 1; h < n_hw; ++h)
      if (freq[h] < freq[pick]) pick = h;
    timers[pick].push_back(*it);
    freq[pick] = frequency_of(gcd_of(timers[pick]));
  }
  std::vector<Cluster> cs;
  for (auto& t : timers)
    if (!t.empty()) cs.push_back(Cluster::of(std::move(t)));
  return detail::make_result(Algorithm::greedy, std::move(cs), n_hw);
}

/// One hardware timer at 1/GCD of the whole set.
inline AllocationResult global_gcd_allocate(const TimerSet& reduced) {
  detail::check_allocation_input(reduced, 1);
  return detail::make_result(Algorithm::global_gcd, {Cluster::of(reduced.periods())}, 1);
}

/// One hardware timer at an imposed frequency; every period must be a whole
/// number of ticks.
inline AllocationResult fixed_frequency_allocate(const TimerSet& reduced, const Rational& freq_hz) {
  detail::check_allocation_input(reduced, 1);
  if (!freq_hz.is_positive()) throw ValidationError("fixed frequency must be positive, got " + freq_hz.str());
  const Rational per_ns = freq_hz / Rational(1'000'000'000);
  for (auto p : reduced) {
    if (!(Rational::from_unsigned(p.ns()) * per_ns).is_integer())
      throw ResolutionError("period " + std::to_string(p.ns()) + " ns is not a whole number of ticks at " +
                            freq_hz.str() + " Hz");
  }
  Cluster c = Cluster::of(reduced.periods());
  c.frequency_hz = freq_hz;
  return detail::make_result(Algorithm::fixed, {std::move(c)}, 1);
}

inline constexpr std::size_t kBruteForceMaxSize = 12;

/// Exhaustive search over every partition into at most n_hw clusters. Ties go
/// to the lexicographically smallest sorted cluster list.
inline AllocationResult brute_force_optimal(const TimerSet& reduced, std::size_t n_hw) {
  detail::check_allocation_input(reduced, n_hw);
  const std::size_t n = reduced.size();
  if (n > kBruteForceMaxSize)
    throw RefusalError("brute force refuses " + std::to_string(n) + " timers (limit " +
                       std::to_string(kBruteForceMaxSize) + ")");

  // Restricted growth strings: block[i] <= 1 + max(block[0..i-1]). Blocks are
  // then numbered by their smallest member, which is their sorted order.
  std::vector<std::size_t> block(n, 0);
  std::optional<Rational> best_w;
  std::vector<std::vector<TimerPeriod>> best;

  auto to_clusters = [&](std::size_t count) {
    std::vector<std::vector<TimerPeriod>> cs(count);
    for (std::size_t i = 0; i < n; ++i) cs[block[i]].push_back(reduced[i]);
    return cs;
  };

  auto visit = [&](std::size_t count) {
    auto cs = to_clusters(count);
    Rational w;
    for (const auto& c : cs) w += frequency_of(gcd_of(c));
    if (!best_w || w < *best_w || (w == *best_w && cs < best)) {
      best_w = std::move(w);
      best = std::move(cs);
    }
  };

  auto rec = [&](auto&& self, std::size_t i, std::size_t used) -> void {
    if (i == n) {
      visit(used);
      return;
    }
    for (std::size_t b = 0; b <= used && b < n_hw; ++b) {
      block[i] = b;
      self(self, i + 1, std::max(used, b + 1));
    }
  };
  rec(rec, 0, 0);

  std::vector<Cluster> cs;
  for (auto& c : best) cs.push_back(Cluster::of(std::move(c)));
  return detail::make_result(Algorithm::brute_force, std::move(cs), n_hw);
}

}  // namespace clockforge
