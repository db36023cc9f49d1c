#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "clockforge/clockgraph.hpp"
#include "clockforge/clustering.hpp"
#include "clockforge/json_util.hpp"

namespace clockforge {

/// Source: chosen frequency; divider: divisor; selector: option label.
using RegisterValue = std::variant<Rational, std::uint64_t, std::string>;

/// Register values keyed by vertex id, sorted by id.
using Assignment = std::vector<std::pair<VertexId, RegisterValue>>;

inline std::string register_value_str(const RegisterValue& v) {
  if (const auto* r = std::get_if<Rational>(&v)) return r->str();
  if (const auto* d = std::get_if<std::uint64_t>(&v)) return std::to_string(*d);
  return std::get<std::string>(v);
}

/// One partial configuration flowing up the walk: the frequency demanded on a
/// vertex input and the registers fixed below it.
struct ConfigEntry {
  FrequencyRange demanded;
  Assignment registers;
  std::vector<VertexId> covered_sinks;  // constrained sinks served through this vertex

  friend bool operator==(const ConfigEntry&, const ConfigEntry&) = default;
  friend auto operator<=>(const ConfigEntry&, const ConfigEntry&) = default;
};

using ConfigSet = std::vector<ConfigEntry>;

struct FrequencyConstraint {
  std::string sink;
  FrequencyRange required;
  friend bool operator==(const FrequencyConstraint&, const FrequencyConstraint&) = default;
};

struct ConstraintSet {
  std::vector<FrequencyConstraint> constraints;

  std::map<std::string, FrequencyRange> by_sink() const {
    std::map<std::string, FrequencyRange> out;
    for (const auto& c : constraints) {
      if (!c.required.lo.is_positive() || c.required.hi < c.required.lo)
        throw ValidationError("constraint on '" + c.sink + "' must be a positive frequency");
      if (!out.emplace(c.sink, c.required).second)
        throw ValidationError("sink '" + c.sink + "' constrained twice");
    }
    return out;
  }
  bool empty() const { return constraints.empty(); }
  friend bool operator==(const ConstraintSet&, const ConstraintSet&) = default;
};

/// Registers of the vertices that carry a constrained clock. Every other
/// register is listed in dont_care.
struct Configuration {
  std::map<std::string, RegisterValue> registers;
  std::vector<std::string> dont_care;
  friend bool operator==(const Configuration&, const Configuration&) = default;
};

struct EnumerateOptions {
  std::size_t limit = 10000;
  bool use_upper_bound = true;
  std::optional<Rational> max_freq;  // replaces the computed bound
};

struct EnumerationResult {
  std::vector<Configuration> configurations;
  bool truncated = false;
  std::size_t total = 0;  // before truncation
};

struct Violation {
  std::string vertex;
  std::string message;
  std::string str() const { return vertex + ": " + message; }
  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Highest frequency any source can produce.
inline Rational frequency_upper_bound(const ClockGraph& g) {
  std::optional<Rational> best;
  for (const auto& v : g.vertices()) {
    const auto* s = std::get_if<SourceSpec>(&v.annotation);
    if (!s) continue;
    std::vector<Rational> cands = s->frequencies;
    if (s->range) cands.push_back(s->range->hi);
    for (const auto& f : cands)
      if (f.is_positive() && (!best || *best < f)) best = f;
  }
  if (!best) throw ResolutionError("no clock source can produce a positive frequency");
  return *best;
}

namespace detail {

inline std::optional<Assignment> merge_assignments(const Assignment& a, const Assignment& b) {
  Assignment out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first < b[j].first) {
      out.push_back(a[i++]);
    } else if (b[j].first < a[i].first) {
      out.push_back(b[j++]);
    } else {
      if (a[i].second != b[j].second) return std::nullopt;
      out.push_back(a[i++]);
      ++j;
    }
  }
  out.insert(out.end(), a.begin() + i, a.end());
  out.insert(out.end(), b.begin() + j, b.end());
  return out;
}

inline Assignment with_register(Assignment a, VertexId v, RegisterValue value) {
  auto it = std::lower_bound(a.begin(), a.end(), v, [](const auto& p, VertexId x) { return p.first < x; });
  a.insert(it, {v, std::move(value)});
  return a;
}

inline const RegisterValue* find_register(const Assignment& a, VertexId v) {
  auto it = std::lower_bound(a.begin(), a.end(), v, [](const auto& p, VertexId x) { return p.first < x; });
  return it != a.end() && it->first == v ? &it->second : nullptr;
}

inline std::optional<FrequencyRange> intersect(const FrequencyRange& a, const FrequencyRange& b) {
  FrequencyRange r{std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
  if (r.hi < r.lo) return std::nullopt;
  return r;
}

inline std::optional<std::vector<VertexId>> disjoint_union(const std::vector<VertexId>& a,
                                                           const std::vector<VertexId>& b) {
  std::vector<VertexId> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  if (out.size() != a.size() + b.size()) return std::nullopt;
  return out;
}

inline void canonicalize(ConfigSet& s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
}

/// Entries of one branch, indexed by point demand.
struct BranchIndex {
  const ConfigSet* set = nullptr;
  std::map<Rational, std::vector<std::size_t>> points;
  std::vector<std::size_t> intervals;

  explicit BranchIndex(const ConfigSet& s) : set(&s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i].demanded.is_point())
        points[s[i].demanded.lo].push_back(i);
      else
        intervals.push_back(i);
    }
  }
};

struct Partial {
  std::optional<FrequencyRange> demand;
  Assignment registers;
  std::vector<VertexId> covered;
  bool any = false;
};

/// Picks one entry (or nothing, where allowed) from every branch such that the
/// registers agree. With `shared_clock` the demands must also intersect, since
/// one physical clock feeds every branch.
inline ConfigSet combine(const std::vector<ConfigSet>& branches, const std::vector<bool>& may_skip,
                         bool shared_clock) {
  std::vector<BranchIndex> idx;
  idx.reserve(branches.size());
  for (const auto& b : branches) idx.emplace_back(b);
  ConfigSet out;

  auto extend = [&](const Partial& p, const ConfigEntry& e) -> std::optional<Partial> {
    Partial q;
    if (shared_clock && p.demand) {
      q.demand = intersect(*p.demand, e.demanded);
      if (!q.demand) return std::nullopt;
    } else {
      q.demand = e.demanded;
    }
    auto regs = merge_assignments(p.registers, e.registers);
    if (!regs) return std::nullopt;
    auto cov = disjoint_union(p.covered, e.covered_sinks);
    if (!cov) return std::nullopt;
    q.registers = std::move(*regs);
    q.covered = std::move(*cov);
    q.any = true;
    return q;
  };

  auto rec = [&](auto&& self, std::size_t k, const Partial& p) -> void {
    if (k == branches.size()) {
      if (p.any) out.push_back({*p.demand, p.registers, p.covered});
      return;
    }
    if (may_skip[k]) self(self, k + 1, p);
    const auto& bi = idx[k];
    auto try_entry = [&](std::size_t i) {
      if (auto q = extend(p, (*bi.set)[i])) self(self, k + 1, *q);
    };
    if (shared_clock && p.demand && p.demand->is_point()) {
      auto it = bi.points.find(p.demand->lo);
      if (it != bi.points.end())
        for (auto i : it->second) try_entry(i);
      for (auto i : bi.intervals) try_entry(i);
    } else {
      for (std::size_t i = 0; i < bi.set->size(); ++i) try_entry(i);
    }
  };
  rec(rec, 0, Partial{});
  canonicalize(out);
  return out;
}

inline std::vector<VertexId> topological_order(const ClockGraph& g) {
  std::vector<std::size_t> indeg(g.size());
  for (VertexId v = 0; v < g.size(); ++v) indeg[v] = g.in_edges(v).size();
  std::vector<VertexId> order, ready;
  for (VertexId v = g.size(); v-- > 0;)
    if (indeg[v] == 0) ready.push_back(v);
  while (!ready.empty()) {
    auto v = ready.back();
    ready.pop_back();
    order.push_back(v);
    for (auto e : g.out_edges(v))
      if (--indeg[g.target_of(e)] == 0) ready.push_back(g.target_of(e));
  }
  return order;
}

inline std::vector<VertexId> constrained_sinks(const ClockGraph& g) {
  std::vector<VertexId> out;
  for (VertexId v = 0; v < g.size(); ++v)
    if (const auto* s = std::get_if<SinkSpec>(&g.vertex(v).annotation); s && s->constraint) out.push_back(v);
  return out;
}

/// Vertices reachable from any source while `removed` is deleted.
inline std::vector<bool> reachable_from_sources(const ClockGraph& g, std::optional<VertexId> removed) {
  std::vector<bool> seen(g.size(), false);
  std::vector<VertexId> stack;
  for (VertexId v = 0; v < g.size(); ++v)
    if (g.vertex(v).kind() == VertexKind::clock_source && v != removed) {
      seen[v] = true;
      stack.push_back(v);
    }
  while (!stack.empty()) {
    auto v = stack.back();
    stack.pop_back();
    for (auto e : g.out_edges(v)) {
      auto u = g.target_of(e);
      if (u == removed || seen[u]) continue;
      seen[u] = true;
      stack.push_back(u);
    }
  }
  return seen;
}

/// Entries for a source whose output must land in `demand`.
inline void source_entries(const SourceSpec& s, VertexId v, const ConfigEntry& below, ConfigSet& out) {
  auto emit = [&](const Rational& f) {
    out.push_back({FrequencyRange::point(f), with_register(below.registers, v, f), below.covered_sinks});
  };
  if (s.range) {
    // Any frequency in the overlap works; the lowest one is reported.
    auto overlap = intersect(below.demanded, *s.range);
    if (overlap && overlap->lo.is_positive()) emit(overlap->lo);
    return;
  }
  std::set<Rational> seen;
  for (const auto& f : s.frequencies)
    if (f.is_positive() && below.demanded.contains(f) && seen.insert(f).second) emit(f);
}

inline Rational source_total(const ClockGraph& g, const Configuration& c) {
  Rational sum;
  for (const auto& [name, value] : c.registers)
    if (g.vertex(g.at(name)).kind() == VertexKind::clock_source) sum += std::get<Rational>(value);
  return sum;
}

}  // namespace detail

/// Joins the configuration sets of every branch below a repeater. Each branch
/// must contribute an entry; merged entries agree on shared registers and on
/// the demanded frequency.
inline ConfigSet merge_at_repeater(const std::vector<ConfigSet>& branch_sets) {
  if (branch_sets.size() < 2) throw ValidationError("a repeater merges at least two branches");
  return detail::combine(branch_sets, std::vector<bool>(branch_sets.size(), false), true);
}

/// Post-order walk from the constrained sinks up to the sources. Sinks use the
/// constraints stored in `g`.
inline EnumerationResult enumerate_configurations(const ClockGraph& g, const EnumerateOptions& opt = {}) {
  using namespace detail;
  if (opt.limit == 0) throw ValidationError("limit must be at least 1");
  require_valid(g);
  const std::size_t n = g.size();
  const auto targets = constrained_sinks(g);

  std::optional<Rational> bound;
  if (opt.use_upper_bound) {
    if (opt.max_freq) {
      bound = *opt.max_freq;
    } else {
      try {
        bound = frequency_upper_bound(g);
      } catch (const ResolutionError&) {
        bound = Rational(0);
      }
    }
  }

  // Vertices that can reach a constrained sink, with the sinks they reach.
  const auto order = topological_order(g);
  std::vector<std::vector<VertexId>> reach(n);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    auto v = *it;
    std::set<VertexId> r;
    if (std::binary_search(targets.begin(), targets.end(), v)) r.insert(v);
    for (auto e : g.out_edges(v)) r.insert(reach[g.target_of(e)].begin(), reach[g.target_of(e)].end());
    reach[v].assign(r.begin(), r.end());
  }
  // Sinks every clock path to which passes through v.
  std::vector<std::vector<VertexId>> must(n);
  for (VertexId v = 0; v < n; ++v) {
    if (reach[v].empty()) continue;
    auto seen = reachable_from_sources(g, v);
    for (auto t : reach[v])
      if (t != v && !seen[t]) must[v].push_back(t);
    if (std::binary_search(targets.begin(), targets.end(), v)) must[v].insert(must[v].begin(), v);
  }

  std::vector<ConfigSet> entries(n);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const VertexId v = *it;
    if (reach[v].empty()) continue;
    const auto& vx = g.vertex(v);

    if (const auto* sink = std::get_if<SinkSpec>(&vx.annotation)) {
      if (sink->constraint) entries[v].push_back({*sink->constraint, {}, {v}});
      continue;
    }

    std::vector<ConfigSet> branches;
    std::vector<bool> may_skip;
    for (auto e : g.out_edges(v)) {
      auto c = g.target_of(e);
      if (reach[c].empty()) continue;
      if (g.vertex(c).kind() == VertexKind::selector) {
        // Only entries where the selector routes this edge.
        const auto& opts = std::get<SelectorSpec>(g.vertex(c).annotation).options;
        auto o = std::find_if(opts.begin(), opts.end(), [&](const SelectorOption& x) { return x.edge == g.edge(e).label; });
        ConfigSet usable;
        for (const auto& en : entries[c]) {
          const auto* chosen = find_register(en.registers, c);
          if (chosen && std::get<std::string>(*chosen) == o->label) usable.push_back(en);
        }
        branches.push_back(std::move(usable));
        may_skip.push_back(true);
      } else {
        branches.push_back(entries[c]);
        may_skip.push_back(must[c].empty());
      }
    }
    auto below = combine(branches, may_skip, true);

    ConfigSet here;
    std::visit(
        [&](const auto& spec) {
          using T = std::decay_t<decltype(spec)>;
          if constexpr (std::is_same_v<T, RepeaterSpec>) {
            here = std::move(below);
          } else if constexpr (std::is_same_v<T, SelectorSpec>) {
            for (const auto& b : below)
              for (const auto& o : spec.options)
                here.push_back({b.demanded, with_register(b.registers, v, o.label), b.covered_sinks});
          } else if constexpr (std::is_same_v<T, DividerSpec>) {
            for (const auto& b : below) {
              auto add = [&](std::uint64_t d) {
                Rational k = Rational::from_unsigned(d);
                here.push_back({{b.demanded.lo * k, b.demanded.hi * k}, with_register(b.registers, v, d), b.covered_sinks});
              };
              auto fits = [&](std::uint64_t d) { return !bound || !(*bound < b.demanded.lo * Rational::from_unsigned(d)); };
              if (spec.range) {
                for (std::uint64_t d = spec.range->min; d <= spec.range->max && fits(d); ++d) add(d);
              } else {
                std::set<std::uint64_t> ds(spec.divisors.begin(), spec.divisors.end());
                for (auto d : ds)
                  if (fits(d)) add(d);
              }
            }
          } else if constexpr (std::is_same_v<T, SourceSpec>) {
            for (const auto& b : below) source_entries(spec, v, b, here);
          }
        },
        vx.annotation);

    ConfigSet kept;
    for (auto& en : here) {
      if (bound && *bound < en.demanded.lo) continue;
      if (!std::includes(en.covered_sinks.begin(), en.covered_sinks.end(), must[v].begin(), must[v].end())) continue;
      kept.push_back(std::move(en));
    }
    canonicalize(kept);
    entries[v] = std::move(kept);
  }

  // Sources run independently; together they must serve every constrained sink.
  std::vector<ConfigSet> tops;
  std::vector<bool> may_skip;
  for (VertexId v = 0; v < n; ++v) {
    if (g.vertex(v).kind() != VertexKind::clock_source || reach[v].empty()) continue;
    tops.push_back(entries[v]);
    may_skip.push_back(must[v].empty());
  }
  std::vector<Assignment> found;
  if (targets.empty()) {
    found.emplace_back();
  } else {
    for (const auto& c : combine(tops, may_skip, false))
      if (c.covered_sinks == targets) found.push_back(c.registers);
    std::sort(found.begin(), found.end());
    found.erase(std::unique(found.begin(), found.end()), found.end());
  }

  EnumerationResult res;
  for (const auto& a : found) {
    Configuration c;
    for (const auto& [v, value] : a) c.registers.emplace(g.vertex(v).name, value);
    for (VertexId v = 0; v < n; ++v)
      if (g.vertex(v).has_register() && !find_register(a, v)) c.dont_care.push_back(g.vertex(v).name);
    res.configurations.push_back(std::move(c));
  }
  std::vector<std::pair<Rational, std::size_t>> keys;
  for (std::size_t i = 0; i < res.configurations.size(); ++i)
    keys.emplace_back(source_total(g, res.configurations[i]), i);
  std::sort(keys.begin(), keys.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return res.configurations[a.second].registers < res.configurations[b.second].registers;
  });
  std::vector<Configuration> sorted;
  for (const auto& k : keys) sorted.push_back(std::move(res.configurations[k.second]));
  res.configurations = std::move(sorted);
  res.total = res.configurations.size();
  if (res.total > opt.limit) {
    res.configurations.resize(opt.limit);
    res.truncated = true;
  }
  return res;
}

/// Constraints in `c` override those stored on the sinks.
inline EnumerationResult enumerate_configurations(const ClockGraph& g, const ConstraintSet& c,
                                                  const EnumerateOptions& opt = {}) {
  return enumerate_configurations(g.with_constraints(c.by_sink()), opt);
}

// ---------------------------------------------------------------------------
// Validation

namespace detail {

inline std::optional<std::string> domain_error(const ClockVertex& vx, const RegisterValue& value) {
  return std::visit(
      [&](const auto& spec) -> std::optional<std::string> {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, SourceSpec>) {
          const auto* f = std::get_if<Rational>(&value);
          if (!f) return "source register needs a frequency";
          bool ok = spec.range ? spec.range->contains(*f)
                               : std::find(spec.frequencies.begin(), spec.frequencies.end(), *f) != spec.frequencies.end();
          if (!ok) return "frequency " + f->str() + " Hz is not allowed";
        } else if constexpr (std::is_same_v<T, SelectorSpec>) {
          const auto* s = std::get_if<std::string>(&value);
          if (!s) return "selector register needs an option label";
          if (std::none_of(spec.options.begin(), spec.options.end(), [&](const SelectorOption& o) { return o.label == *s; }))
            return "unknown option '" + *s + "'";
        } else if constexpr (std::is_same_v<T, DividerSpec>) {
          const auto* d = std::get_if<std::uint64_t>(&value);
          if (!d) return "divider register needs an integer";
          if (!spec.allows(*d)) return "divisor " + std::to_string(*d) + " is not allowed";
        } else {
          return "vertex holds no register";
        }
        return std::nullopt;
      },
      vx.annotation);
}

/// Frequency leaving `v`, following the selected route upward.
inline std::optional<Rational> output_frequency(const ClockGraph& g, const Configuration& cfg, VertexId v,
                                                std::string* missing) {
  const auto& vx = g.vertex(v);
  auto reg = cfg.registers.find(vx.name);
  auto input = [&]() -> std::optional<Rational> {
    const auto& ins = g.in_edges(v);
    if (ins.empty()) return std::nullopt;
    return output_frequency(g, cfg, g.source_of(ins.front()), missing);
  };
  switch (vx.kind()) {
    case VertexKind::clock_source:
      if (reg == cfg.registers.end() || !std::holds_alternative<Rational>(reg->second)) break;
      return std::get<Rational>(reg->second);
    case VertexKind::selector: {
      if (reg == cfg.registers.end() || !std::holds_alternative<std::string>(reg->second)) break;
      auto e = g.option_edge(v, std::get<std::string>(reg->second));
      if (!e) break;
      return output_frequency(g, cfg, g.source_of(*e), missing);
    }
    case VertexKind::divider: {
      if (reg == cfg.registers.end() || !std::holds_alternative<std::uint64_t>(reg->second)) break;
      auto d = std::get<std::uint64_t>(reg->second);
      if (d == 0) break;
      auto in = input();
      if (!in) return std::nullopt;
      return *in / Rational::from_unsigned(d);
    }
    case VertexKind::repeater:
    case VertexKind::sink:
      return input();
  }
  if (missing && missing->empty()) *missing = vx.name;
  return std::nullopt;
}

}  // namespace detail

/// Frequency on every edge, or nullopt where the configuration leaves it open.
inline std::vector<std::optional<Rational>> propagate_frequencies(const ClockGraph& g, const Configuration& cfg) {
  std::vector<std::optional<Rational>> out;
  for (EdgeId e = 0; e < g.edges().size(); ++e) out.push_back(detail::output_frequency(g, cfg, g.source_of(e), nullptr));
  return out;
}

/// Checks register domains, then the frequency reaching every constrained sink.
inline std::vector<Violation> validate_configuration(const ClockGraph& g, const Configuration& cfg) {
  std::vector<Violation> out;
  for (const auto& [name, value] : cfg.registers) {
    auto v = g.find(name);
    if (!v) {
      out.push_back({name, "no such vertex"});
      continue;
    }
    if (auto err = detail::domain_error(g.vertex(*v), value)) out.push_back({name, *err});
  }
  std::set<std::string> reported;
  for (auto t : detail::constrained_sinks(g)) {
    const auto& req = *std::get<SinkSpec>(g.vertex(t).annotation).constraint;
    std::string missing;
    auto f = detail::output_frequency(g, cfg, t, &missing);
    const auto& name = g.vertex(t).name;
    if (!f) {
      if (reported.insert(missing).second)
        out.push_back({missing, "register is unset or invalid on the clock path of '" + name + "'"});
      continue;
    }
    if (!req.contains(*f)) {
      std::ostringstream os;
      os << "receives " << *f << " Hz, requires " << req << " Hz";
      out.push_back({name, os.str()});
    }
  }
  return out;
}

inline std::vector<Violation> validate_configuration(const ClockGraph& g, const ConstraintSet& c,
                                                     const Configuration& cfg) {
  return validate_configuration(g.with_constraints(c.by_sink()), cfg);
}

/// Cluster i's frequency becomes the requirement of sink_names[i].
inline ConstraintSet allocation_to_constraints(const AllocationResult& a, const std::vector<std::string>& sink_names) {
  if (a.clusters.size() > sink_names.size())
    throw CapacityError(std::to_string(a.clusters.size()) + " timer clusters but only " +
                        std::to_string(sink_names.size()) + " timer sinks");
  ConstraintSet c;
  for (std::size_t i = 0; i < a.clusters.size(); ++i)
    c.constraints.push_back({sink_names[i], FrequencyRange::point(a.clusters[i].frequency_hz)});
  return c;
}

// ---------------------------------------------------------------------------
// JSON

inline ConstraintSet parse_constraint_set(const nlohmann::json& doc) {
  using detail::require_keys;
  if (!doc.is_object()) throw ValidationError("/: constraint file must be a JSON object");
  require_keys(doc, "", {"constraints"}, {"constraints"});
  const auto& cs = doc["constraints"];
  if (!cs.is_array()) throw ValidationError("/constraints: expected an array");
  ConstraintSet out;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const auto where = "/constraints/" + std::to_string(i);
    const auto& c = cs[i];
    if (!c.is_object()) throw ValidationError(where + ": expected an object");
    require_keys(c, where, {"sink", "frequency_hz"}, {"sink", "frequency_hz"});
    if (!c["sink"].is_string()) throw ValidationError(where + "/sink: expected a string");
    const auto& f = c["frequency_hz"];
    FrequencyRange req;
    if (f.is_object() && (f.contains("min") || f.contains("max"))) {
      require_keys(f, where + "/frequency_hz", {"min", "max"}, {"min", "max"});
      req = {detail::rational_from_json(f["min"], where + "/frequency_hz/min"),
             detail::rational_from_json(f["max"], where + "/frequency_hz/max")};
    } else {
      req = FrequencyRange::point(detail::rational_from_json(f, where + "/frequency_hz"));
    }
    if (!req.lo.is_positive() || req.hi < req.lo)
      throw ValidationError(where + "/frequency_hz: required frequency must be positive");
    out.constraints.push_back({c["sink"].get<std::string>(), req});
  }
  out.by_sink();  // duplicate check
  return out;
}

template <Text T>
inline ConstraintSet parse_constraint_set(const T& text) { return parse_constraint_set(detail::parse_json(text)); }

inline nlohmann::ordered_json to_json(const ConstraintSet& c) {
  nlohmann::ordered_json doc;
  doc["constraints"] = nlohmann::ordered_json::array();
  for (const auto& x : c.constraints) {
    nlohmann::ordered_json o;
    o["sink"] = x.sink;
    if (x.required.is_point()) {
      o["frequency_hz"] = detail::compact_rational_to_json(x.required.lo);
    } else {
      o["frequency_hz"] = {{"min", detail::compact_rational_to_json(x.required.lo)},
                           {"max", detail::compact_rational_to_json(x.required.hi)}};
    }
    doc["constraints"].push_back(std::move(o));
  }
  return doc;
}

inline nlohmann::ordered_json register_value_to_json(const RegisterValue& v) {
  if (const auto* r = std::get_if<Rational>(&v)) return detail::compact_rational_to_json(*r);
  if (const auto* d = std::get_if<std::uint64_t>(&v)) return *d;
  return std::get<std::string>(v);
}

/// `{"registers": {...}, "dont_care": [...], "source_frequencies_hz": {...}}`
inline nlohmann::ordered_json to_json(const ClockGraph& g, const Configuration& c) {
  nlohmann::ordered_json o;
  o["registers"] = nlohmann::ordered_json::object();
  nlohmann::ordered_json sources = nlohmann::ordered_json::object();
  for (const auto& [name, value] : c.registers) {
    o["registers"][name] = register_value_to_json(value);
    auto v = g.find(name);
    if (v && g.vertex(*v).kind() == VertexKind::clock_source) sources[name] = register_value_to_json(value);
  }
  o["dont_care"] = c.dont_care;
  o["source_frequencies_hz"] = std::move(sources);
  return o;
}

/// Reads one configuration; value types follow the vertex kinds of `g`.
inline Configuration parse_configuration(const ClockGraph& g, const nlohmann::json& doc) {
  using detail::require_keys;
  if (!doc.is_object()) throw ValidationError("/: configuration must be a JSON object");
  require_keys(doc, "", {"registers", "dont_care", "source_frequencies_hz"}, {"registers"});
  if (!doc["registers"].is_object()) throw ValidationError("/registers: expected an object");
  Configuration c;
  for (auto it = doc["registers"].begin(); it != doc["registers"].end(); ++it) {
    const auto where = "/registers/" + it.key();
    auto v = g.find(it.key());
    if (!v) throw ValidationError(where + ": no vertex named '" + it.key() + "'");
    const auto& j = it.value();
    switch (g.vertex(*v).kind()) {
      case VertexKind::clock_source:
        c.registers.emplace(it.key(), detail::rational_from_json(j, where));
        break;
      case VertexKind::divider:
        if (!j.is_number_unsigned()) throw ValidationError(where + ": divisor must be a non-negative integer");
        c.registers.emplace(it.key(), j.get<std::uint64_t>());
        break;
      case VertexKind::selector:
        if (!j.is_string()) throw ValidationError(where + ": selector value must be an option label");
        c.registers.emplace(it.key(), j.get<std::string>());
        break;
      default:
        throw ValidationError(where + ": '" + it.key() + "' holds no register");
    }
  }
  if (doc.contains("dont_care")) {
    const auto& dc = doc["dont_care"];
    if (!dc.is_array()) throw ValidationError("/dont_care: expected an array");
    for (std::size_t i = 0; i < dc.size(); ++i) {
      if (!dc[i].is_string()) throw ValidationError("/dont_care/" + std::to_string(i) + ": expected a string");
      c.dont_care.push_back(dc[i].get<std::string>());
    }
  }
  if (doc.contains("source_frequencies_hz")) {
    const auto& sf = doc["source_frequencies_hz"];
    if (!sf.is_object()) throw ValidationError("/source_frequencies_hz: expected an object");
    for (auto it = sf.begin(); it != sf.end(); ++it) {
      auto where = "/source_frequencies_hz/" + it.key();
      auto f = detail::rational_from_json(it.value(), where);
      auto reg = c.registers.find(it.key());
      if (reg == c.registers.end() || !std::holds_alternative<Rational>(reg->second) ||
          std::get<Rational>(reg->second) != f)
        throw ValidationError(where + ": disagrees with the register value");
    }
  }
  return c;
}

template <Text T>
inline Configuration parse_configuration(const ClockGraph& g, const T& text) {
  return parse_configuration(g, detail::parse_json(text));
}

}  // namespace clockforge
