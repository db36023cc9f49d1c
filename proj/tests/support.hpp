#pragma once

// Shared by unit, property and acceptance tests: random generators and
// oracles written independently of the library algorithms.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "clockforge/clockforge.hpp"

namespace testsupport {

using namespace clockforge;

inline std::string data_path(const std::string& name) { return std::string(CLOCKFORGE_DATA_DIR) + "/" + name; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) {  // inclusive
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(gen_);
  }
  bool chance(double p) { return std::bernoulli_distribution(p)(gen_); }
  template <class T>
  const T& pick(const std::vector<T>& xs) {
    return xs[uniform(0, xs.size() - 1)];
  }

private:
  std::mt19937_64 gen_;
};

// ---------------------------------------------------------------------------
// Timers

/// Periods built from small prime powers so that GCDs are interesting.
inline std::vector<std::uint64_t> random_periods(Rng& rng, std::size_t count) {
  static const std::vector<std::uint64_t> primes = {2, 3, 5, 7, 11};
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t p = 1;
    for (auto q : primes) {
      auto e = rng.uniform(0, q == 2 ? 6 : (q <= 5 ? 3 : 1));
      for (std::uint64_t k = 0; k < e; ++k) p *= q;
    }
    out.push_back(p);
  }
  return out;
}

/// Random antichain of exactly `n` periods (no element divides another).
inline TimerSet random_reduced(Rng& rng, std::size_t n) {
  for (;;) {
    std::set<std::uint64_t> s;
    for (int guard = 0; s.size() < n && guard < 2000; ++guard) {
      auto cand = random_periods(rng, 1).front();
      bool ok = std::none_of(s.begin(), s.end(), [&](std::uint64_t x) { return cand % x == 0 || x % cand == 0; });
      if (ok) s.insert(cand);
    }
    if (s.size() == n) {
      std::vector<TimerPeriod> ps;
      for (auto x : s) ps.emplace_back(x);
      return TimerSet(std::move(ps));
    }
  }
}

/// Groups as (minimum, sorted members): minima are the elements with no proper
/// divisor in the set; every other element joins the smallest minimum dividing it.
inline std::vector<std::pair<std::uint64_t, std::vector<std::uint64_t>>> oracle_groups(std::vector<std::uint64_t> xs) {
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<std::pair<std::uint64_t, std::vector<std::uint64_t>>> groups;
  for (auto x : xs) {
    bool minimal = std::none_of(xs.begin(), xs.end(), [&](std::uint64_t y) { return y < x && x % y == 0; });
    if (minimal) groups.push_back({x, {}});
  }
  for (auto x : xs) {
    for (auto& [m, members] : groups) {
      if (m == x) break;
      if (x % m == 0) {
        members.push_back(x);
        break;
      }
    }
  }
  return groups;
}

inline Rational hz_of_ns(std::uint64_t ns) { return Rational(Rational::Int(1000000000), Rational::Int(ns)); }

/// Minimum Σ 1e9/gcd over partitions into at most k blocks, by subset DP.
inline Rational oracle_min_weight(const std::vector<std::uint64_t>& xs, std::size_t k) {
  const std::size_t n = xs.size();
  const std::uint32_t full = (1u << n) - 1;
  std::vector<std::uint64_t> g(full + 1, 0);
  for (std::uint32_t m = 1; m <= full; ++m) {
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (m >> i & 1) acc = std::gcd(acc, xs[i]);
    g[m] = acc;
  }
  // best[j][m]: m split into at most j blocks.
  std::vector<std::vector<std::optional<Rational>>> best(k + 1, std::vector<std::optional<Rational>>(full + 1));
  best[0][0] = Rational(0);
  for (std::size_t j = 1; j <= k; ++j) {
    best[j][0] = Rational(0);
    for (std::uint32_t m = 1; m <= full; ++m) {
      const std::uint32_t low = m & (~m + 1);
      std::optional<Rational> b = best[j - 1][m];
      for (std::uint32_t sub = m; sub; sub = (sub - 1) & m) {
        if (!(sub & low)) continue;
        const auto& rest = best[j - 1][m ^ sub];
        if (!rest) continue;
        Rational w = *rest + hz_of_ns(g[sub]);
        if (!b || w < *b) b = w;
      }
      best[j][m] = b;
    }
  }
  return *best[k][full];
}

// ---------------------------------------------------------------------------
// Clock graphs

struct GraphShape {
  std::size_t sources_min = 1, sources_max = 2;
  std::size_t internal_min = 2, internal_max = 6;
  std::uint64_t max_register_space = 1000000;
};

inline std::uint64_t register_space(const ClockGraph& g) {
  std::uint64_t total = 1;
  for (const auto& v : g.vertices()) {
    std::uint64_t d = 1;
    if (const auto* s = std::get_if<SourceSpec>(&v.annotation)) d = std::max<std::size_t>(1, s->frequencies.size());
    if (const auto* s = std::get_if<SelectorSpec>(&v.annotation)) d = s->options.size();
    if (const auto* s = std::get_if<DividerSpec>(&v.annotation))
      d = s->range ? s->range->max - s->range->min + 1 : s->divisors.size();
    if (total > (1ull << 40) / std::max<std::uint64_t>(d, 1)) return 1ull << 40;
    total *= d;
  }
  return total;
}

/// Frequency leaving v under a total register assignment, computed directly.
inline std::optional<Rational> oracle_output(const ClockGraph& g, const std::map<std::string, RegisterValue>& regs,
                                             VertexId v) {
  const auto& vx = g.vertex(v);
  auto it = regs.find(vx.name);
  auto upstream = [&](EdgeId e) { return oracle_output(g, regs, g.source_of(e)); };
  switch (vx.kind()) {
    case VertexKind::clock_source:
      if (it == regs.end()) return std::nullopt;
      return std::get<Rational>(it->second);
    case VertexKind::selector: {
      const auto& label = std::get<std::string>(it->second);
      const auto& spec = std::get<SelectorSpec>(vx.annotation);
      for (const auto& o : spec.options)
        if (o.label == label)
          for (auto e : g.in_edges(v))
            if (g.edge(e).label == o.edge) return upstream(e);
      return std::nullopt;
    }
    case VertexKind::divider: {
      auto in = upstream(g.in_edges(v).front());
      if (!in) return std::nullopt;
      return *in / Rational::from_unsigned(std::get<std::uint64_t>(it->second));
    }
    default:
      return upstream(g.in_edges(v).front());
  }
}

/// Registers met when tracing every constrained sink back to its source.
inline std::map<std::string, RegisterValue> active_projection(const ClockGraph& g,
                                                              const std::map<std::string, RegisterValue>& regs,
                                                              const std::vector<std::string>& sinks) {
  std::map<std::string, RegisterValue> out;
  for (const auto& s : sinks) {
    VertexId v = g.at(s);
    for (;;) {
      const auto& vx = g.vertex(v);
      auto it = regs.find(vx.name);
      if (vx.has_register() && it != regs.end()) out.emplace(vx.name, it->second);
      if (vx.kind() == VertexKind::clock_source) break;
      std::optional<EdgeId> next;
      if (vx.kind() == VertexKind::selector) {
        if (it == regs.end()) break;
        next = g.option_edge(v, std::get<std::string>(it->second));
      } else {
        next = g.in_edges(v).front();
      }
      if (!next) break;
      v = g.source_of(*next);
    }
  }
  return out;
}

inline std::vector<std::string> constrained_sink_names(const ClockGraph& g) {
  std::vector<std::string> out;
  for (const auto& v : g.vertices())
    if (const auto* s = std::get_if<SinkSpec>(&v.annotation); s && s->constraint) out.push_back(v.name);
  return out;
}

using RegisterMapSet = std::set<std::map<std::string, RegisterValue>>;

struct BruteForceResult {
  RegisterMapSet projected;
  std::size_t points = 0;
  std::size_t oracle_disagreements = 0;  // validator vs direct evaluation
};

/// Every total register assignment, filtered by validate_configuration and
/// projected onto the registers on constrained clock paths.
inline BruteForceResult brute_force_configurations(const ClockGraph& g) {
  struct Dim {
    std::string name;
    std::vector<RegisterValue> values;
  };
  std::vector<Dim> dims;
  for (const auto& v : g.vertices()) {
    Dim d{v.name, {}};
    if (const auto* s = std::get_if<SourceSpec>(&v.annotation))
      for (const auto& f : s->frequencies) d.values.emplace_back(f);
    if (const auto* s = std::get_if<SelectorSpec>(&v.annotation))
      for (const auto& o : s->options) d.values.emplace_back(o.label);
    if (const auto* s = std::get_if<DividerSpec>(&v.annotation)) {
      if (s->range)
        for (auto x = s->range->min; x <= s->range->max; ++x) d.values.emplace_back(x);
      else
        for (auto x : s->divisors) d.values.emplace_back(x);
    }
    if (!d.values.empty()) dims.push_back(std::move(d));
  }
  const auto sinks = constrained_sink_names(g);
  BruteForceResult res;
  std::vector<std::size_t> at(dims.size(), 0);
  for (;;) {
    Configuration cfg;
    for (std::size_t i = 0; i < dims.size(); ++i) cfg.registers.emplace(dims[i].name, dims[i].values[at[i]]);
    ++res.points;
    bool valid = validate_configuration(g, cfg).empty();
    bool direct = true;
    for (const auto& s : sinks) {
      auto f = oracle_output(g, cfg.registers, g.at(s));
      const auto& req = *std::get<SinkSpec>(g.vertex(g.at(s)).annotation).constraint;
      if (!f || !(req.lo <= *f && *f <= req.hi)) direct = false;
    }
    if (valid != direct) ++res.oracle_disagreements;
    if (valid) res.projected.insert(active_projection(g, cfg.registers, sinks));
    std::size_t k = 0;
    while (k < dims.size() && ++at[k] == dims[k].values.size()) at[k++] = 0;
    if (k == dims.size()) break;
  }
  return res;
}

inline RegisterMapSet as_set(const EnumerationResult& r) {
  RegisterMapSet s;
  for (const auto& c : r.configurations) s.insert(c.registers);
  return s;
}

/// Random valid clock graph; about half of the sinks carry a constraint taken
/// from a random total assignment so that most graphs are feasible.
inline ClockGraph random_clock_graph(Rng& rng, const GraphShape& shape = {}) {
  static const std::vector<std::uint64_t> base = {1, 2, 3, 4, 5, 6, 8, 9, 10, 12, 16, 18, 20, 24, 30, 36, 48, 60, 72, 120};
  for (;;) {
    std::vector<ClockVertex> vs;
    std::vector<ClockEdge> es;
    std::vector<std::string> pool;  // vertices that produce a clock
    int edge_id = 0;
    auto connect = [&](const std::string& from, const std::string& to) {
      std::string label = "e" + std::to_string(edge_id++);
      es.push_back({from, to, label});
      return label;
    };

    const auto ns = rng.uniform(shape.sources_min, shape.sources_max);
    for (std::size_t i = 0; i < ns; ++i) {
      SourceSpec s;
      std::set<Rational> fs;
      auto count = rng.uniform(1, 3);
      for (std::size_t j = 0; j < count; ++j) fs.insert(Rational::from_unsigned(rng.pick(base) * 720));
      if (rng.chance(0.25)) fs.insert(Rational(0));
      s.frequencies.assign(fs.begin(), fs.end());
      std::string name = "S" + std::to_string(i);
      vs.push_back({name, s});
      pool.push_back(name);
    }
    const auto ni = rng.uniform(shape.internal_min, shape.internal_max);
    for (std::size_t i = 0; i < ni; ++i) {
      std::string name = "V" + std::to_string(i);
      int kind = static_cast<int>(rng.uniform(0, 2));
      if (i == 0 && ns > 1) kind = 0;  // join every source so the graph is connected
      if (kind == 0) {
        std::vector<std::string> ins;
        if (i == 0 && ns > 1) {
          ins.assign(pool.begin(), pool.end());
        } else {
          auto want = std::min<std::size_t>(rng.uniform(2, 3), pool.size());
          std::vector<std::string> cand = pool;
          while (ins.size() < want) {
            auto k = rng.uniform(0, cand.size() - 1);
            ins.push_back(cand[k]);
            cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(k));
          }
        }
        SelectorSpec sel;
        for (std::size_t j = 0; j < ins.size(); ++j) sel.options.push_back({"opt" + std::to_string(j), connect(ins[j], name)});
        vs.push_back({name, sel});
      } else if (kind == 1) {
        DividerSpec d;
        if (rng.chance(0.3)) {
          auto lo = rng.uniform(1, 3);
          d.range = DivisorRange{lo, lo + rng.uniform(1, 9)};
        } else {
          std::set<std::uint64_t> ds;
          auto count = rng.uniform(1, 4);
          for (std::size_t j = 0; j < count; ++j) ds.insert(rng.uniform(1, 8));
          d.divisors.assign(ds.begin(), ds.end());
        }
        connect(rng.pick(pool), name);
        vs.push_back({name, d});
      } else {
        connect(rng.pick(pool), name);
        vs.push_back({name, RepeaterSpec{}});
      }
      pool.push_back(name);
    }

    // Give every clock producer enough consumers.
    std::map<std::string, std::size_t> outdeg;
    for (const auto& e : es) ++outdeg[e.from];
    std::size_t sink_id = 0;
    for (const auto& v : vs) {
      std::size_t need = v.kind() == VertexKind::repeater ? 2 : 1;
      if (rng.chance(0.2)) ++need;
      for (std::size_t k = outdeg[v.name]; k < need; ++k) {
        std::string name = "T" + std::to_string(sink_id++);
        es.push_back({v.name, name, "out" + std::to_string(edge_id++)});
      }
    }
    for (std::size_t i = 0; i < sink_id; ++i) vs.push_back({"T" + std::to_string(i), SinkSpec{}});

    ClockGraph g("random", "1", vs, es);
    if (!validate_graph(g).empty()) continue;
    if (register_space(g) > shape.max_register_space) continue;

    // Constraints from one random total assignment.
    std::map<std::string, RegisterValue> regs;
    for (const auto& v : g.vertices()) {
      if (const auto* s = std::get_if<SourceSpec>(&v.annotation)) regs.emplace(v.name, rng.pick(s->frequencies));
      if (const auto* s = std::get_if<SelectorSpec>(&v.annotation)) regs.emplace(v.name, rng.pick(s->options).label);
      if (const auto* s = std::get_if<DividerSpec>(&v.annotation))
        regs.emplace(v.name, s->range ? rng.uniform(s->range->min, s->range->max) : rng.pick(s->divisors));
    }
    std::map<std::string, FrequencyRange> cons;
    for (std::size_t i = 0; i < sink_id; ++i) {
      std::string name = "T" + std::to_string(i);
      if (rng.chance(0.45)) continue;
      auto f = oracle_output(g, regs, g.at(name));
      if (rng.chance(0.15) || !f || !f->is_positive()) f = Rational::from_unsigned(rng.pick(base) * 60);
      if (rng.chance(0.1))
        cons[name] = FrequencyRange{*f, *f * Rational(2)};
      else
        cons[name] = FrequencyRange::point(*f);
    }
    return g.with_constraints(cons);
  }
}

}  // namespace testsupport
