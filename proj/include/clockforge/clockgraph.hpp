#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "clockforge/error.hpp"
#include "clockforge/rational.hpp"

namespace clockforge {

enum class VertexKind { clock_source, selector, divider, repeater, sink };

inline std::string_view to_string(VertexKind k) {
  switch (k) {
    case VertexKind::clock_source: return "clock_source";
    case VertexKind::selector: return "selector";
    case VertexKind::divider: return "divider";
    case VertexKind::repeater: return "repeater";
    case VertexKind::sink: return "sink";
  }
  return "sink";
}

/// Oscillator: a finite set of frequencies (0 = off) or a closed interval.
struct SourceSpec {
  std::vector<Rational> frequencies;
  std::optional<FrequencyRange> range;
  friend bool operator==(const SourceSpec&, const SourceSpec&) = default;
};

struct SelectorOption {
  std::string label;  // register value
  std::string edge;   // label of the input edge it selects
  friend bool operator==(const SelectorOption&, const SelectorOption&) = default;
};

/// Clock multiplexer.
struct SelectorSpec {
  std::vector<SelectorOption> options;
  friend bool operator==(const SelectorSpec&, const SelectorSpec&) = default;
};

struct DivisorRange {
  std::uint64_t min = 1;
  std::uint64_t max = 1;
  friend bool operator==(const DivisorRange&, const DivisorRange&) = default;
};

/// Prescaler or compare register: a finite divisor set or an integer interval.
struct DividerSpec {
  std::vector<std::uint64_t> divisors;
  std::optional<DivisorRange> range;

  bool allows(std::uint64_t d) const {
    if (range) return d >= range->min && d <= range->max;
    return std::find(divisors.begin(), divisors.end(), d) != divisors.end();
  }
  friend bool operator==(const DividerSpec&, const DividerSpec&) = default;
};

/// Fans one clock out to several consumers.
struct RepeaterSpec {
  friend bool operator==(const RepeaterSpec&, const RepeaterSpec&) = default;
};

/// Clock consumer, optionally demanding an exact frequency or an interval.
struct SinkSpec {
  std::optional<FrequencyRange> constraint;
  friend bool operator==(const SinkSpec&, const SinkSpec&) = default;
};

/// Alternative order matches VertexKind.
using VertexAnnotation = std::variant<SourceSpec, SelectorSpec, DividerSpec, RepeaterSpec, SinkSpec>;

struct ClockVertex {
  std::string name;
  VertexAnnotation annotation;

  VertexKind kind() const { return static_cast<VertexKind>(annotation.index()); }
  /// Sources, selectors and dividers hold a configuration register.
  bool has_register() const {
    auto k = kind();
    return k == VertexKind::clock_source || k == VertexKind::selector || k == VertexKind::divider;
  }
  friend bool operator==(const ClockVertex&, const ClockVertex&) = default;
};

struct ClockEdge {
  std::string from;
  std::string to;
  std::string label;  // clock signal name, e.g. "ACLK"
  friend bool operator==(const ClockEdge&, const ClockEdge&) = default;
};

using VertexId = std::size_t;
using EdgeId = std::size_t;

/// Frequency optimisation graph: registers are vertices, clocks are edges.
/// Construction never fails; validate_graph() reports structural problems.
class ClockGraph {
public:
  ClockGraph() = default;
  ClockGraph(std::string device, std::string version, std::vector<ClockVertex> vertices,
             std::vector<ClockEdge> edges)
      : device_(std::move(device)),
        version_(std::move(version)),
        vertices_(std::move(vertices)),
        edges_(std::move(edges)) {
    index();
  }

  const std::string& device() const { return device_; }
  const std::string& version() const { return version_; }
  const std::vector<ClockVertex>& vertices() const { return vertices_; }
  const std::vector<ClockEdge>& edges() const { return edges_; }
  const ClockVertex& vertex(VertexId v) const { return vertices_.at(v); }
  const ClockEdge& edge(EdgeId e) const { return edges_.at(e); }
  std::size_t size() const { return vertices_.size(); }

  std::optional<VertexId> find(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
  }
  VertexId at(std::string_view name) const {
    auto v = find(name);
    if (!v) throw ValidationError("no vertex named '" + std::string(name) + "'");
    return *v;
  }

  /// Edges with both endpoints declared, in document order.
  const std::vector<EdgeId>& in_edges(VertexId v) const { return in_.at(v); }
  const std::vector<EdgeId>& out_edges(VertexId v) const { return out_.at(v); }
  VertexId source_of(EdgeId e) const { return *find(edges_[e].from); }
  VertexId target_of(EdgeId e) const { return *find(edges_[e].to); }

  /// Input edge a selector option routes through.
  std::optional<EdgeId> option_edge(VertexId selector, std::string_view option) const {
    const auto* spec = std::get_if<SelectorSpec>(&vertices_.at(selector).annotation);
    if (!spec) return std::nullopt;
    for (const auto& o : spec->options) {
      if (o.label != option) continue;
      for (auto e : in_.at(selector))
        if (edges_[e].label == o.edge) return e;
    }
    return std::nullopt;
  }

  /// Same topology with every sink's constraint replaced by `constraints`
  /// (sink name -> required frequency); unlisted sinks keep theirs.
  ClockGraph with_constraints(const std::map<std::string, FrequencyRange>& constraints) const {
    ClockGraph g = *this;
    for (const auto& [name, req] : constraints) {
      auto v = g.find(name);
      if (!v) throw ValidationError("constraint names unknown sink '" + name + "'");
      auto* sink = std::get_if<SinkSpec>(&g.vertices_[*v].annotation);
      if (!sink) throw ValidationError("constraint target '" + name + "' is not a sink");
      sink->constraint = req;
    }
    return g;
  }

  friend bool operator==(const ClockGraph& a, const ClockGraph& b) {
    return a.device_ == b.device_ && a.version_ == b.version_ && a.vertices_ == b.vertices_ &&
           a.edges_ == b.edges_;
  }

private:
  void index() {
    by_name_.clear();
    for (VertexId v = 0; v < vertices_.size(); ++v) by_name_.emplace(vertices_[v].name, v);
    in_.assign(vertices_.size(), {});
    out_.assign(vertices_.size(), {});
    for (EdgeId e = 0; e < edges_.size(); ++e) {
      auto f = find(edges_[e].from);
      auto t = find(edges_[e].to);
      if (!f || !t) continue;
      out_[*f].push_back(e);
      in_[*t].push_back(e);
    }
  }

  std::string device_;
  std::string version_;
  std::vector<ClockVertex> vertices_;
  std::vector<ClockEdge> edges_;
  std::map<std::string, VertexId> by_name_;
  std::vector<std::vector<EdgeId>> in_;
  std::vector<std::vector<EdgeId>> out_;
};

// ---------------------------------------------------------------------------
// Structural validation

enum class DiagnosticCode {
  schema_violation,
  unknown_vertex_kind,
  duplicate_name,
  dangling_endpoint,
  cycle,
  disconnected,
  arity,
  invalid_annotation,
  selector_binding,
  empty_graph,
};

inline std::string_view to_string(DiagnosticCode c) {
  switch (c) {
    case DiagnosticCode::schema_violation: return "schema_violation";
    case DiagnosticCode::unknown_vertex_kind: return "unknown_vertex_kind";
    case DiagnosticCode::duplicate_name: return "duplicate_name";
    case DiagnosticCode::dangling_endpoint: return "dangling_endpoint";
    case DiagnosticCode::cycle: return "cycle";
    case DiagnosticCode::disconnected: return "disconnected";
    case DiagnosticCode::arity: return "arity";
    case DiagnosticCode::invalid_annotation: return "invalid_annotation";
    case DiagnosticCode::selector_binding: return "selector_binding";
    case DiagnosticCode::empty_graph: return "empty_graph";
  }
  return "schema_violation";
}

struct Diagnostic {
  DiagnosticCode code;
  std::string location;  // JSON pointer into the description document
  std::string message;

  std::string str() const {
    return std::string(to_string(code)) + " at " + (location.empty() ? "/" : location) + ": " + message;
  }
  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

/// Thrown by parse_description; carries every diagnostic found.
class DescriptionError : public ValidationError {
public:
  explicit DescriptionError(std::vector<Diagnostic> diags)
      : ValidationError(diags.empty() ? "invalid description" : diags.front().str()),
        diagnostics_(std::move(diags)) {}
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }
  DiagnosticCode code() const { return diagnostics_.front().code; }

private:
  std::vector<Diagnostic> diagnostics_;
};

namespace detail {

inline std::string vloc(VertexId v) { return "/vertices/" + std::to_string(v); }
inline std::string eloc(EdgeId e) { return "/edges/" + std::to_string(e); }

inline void check_annotation(const ClockGraph& g, VertexId v, std::vector<Diagnostic>& out) {
  const auto& vx = g.vertex(v);
  auto bad = [&](std::string msg) {
    out.push_back({DiagnosticCode::invalid_annotation, vloc(v), "'" + vx.name + "': " + std::move(msg)});
  };
  std::visit(
      [&](const auto& spec) {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, SourceSpec>) {
          if (spec.range) {
            if (!spec.frequencies.empty()) bad("both a frequency set and a range");
            if (spec.range->lo.sign() < 0 || spec.range->hi < spec.range->lo) bad("invalid frequency range");
          }
          for (const auto& f : spec.frequencies)
            if (f.sign() < 0) bad("negative frequency " + f.str());
        } else if constexpr (std::is_same_v<T, DividerSpec>) {
          if (spec.range) {
            if (!spec.divisors.empty()) bad("both a divisor set and a range");
            if (spec.range->min < 1 || spec.range->max < spec.range->min) bad("invalid divisor range");
          } else if (spec.divisors.empty()) {
            bad("empty divisor set");
          }
          for (auto d : spec.divisors)
            if (d < 1) bad("divisor must be >= 1");
        } else if constexpr (std::is_same_v<T, SinkSpec>) {
          if (spec.constraint && (!spec.constraint->lo.is_positive() || spec.constraint->hi < spec.constraint->lo))
            bad("constraint must be a positive frequency or interval");
        }
      },
      vx.annotation);
}

inline void check_selector(const ClockGraph& g, VertexId v, std::vector<Diagnostic>& out) {
  const auto* spec = std::get_if<SelectorSpec>(&g.vertex(v).annotation);
  if (!spec) return;
  const auto& name = g.vertex(v).name;
  auto bad = [&](std::string msg) {
    out.push_back({DiagnosticCode::selector_binding, vloc(v), "selector '" + name + "': " + std::move(msg)});
  };
  const auto& ins = g.in_edges(v);
  if (spec->options.size() != ins.size())
    bad(std::to_string(spec->options.size()) + " options for " + std::to_string(ins.size()) + " input edges");
  std::map<std::string, int> option_labels;
  std::map<std::string, int> bound;
  for (const auto& o : spec->options) {
    if (++option_labels[o.label] > 1) bad("duplicate option '" + o.label + "'");
    int matches = 0;
    for (auto e : ins)
      if (g.edge(e).label == o.edge) ++matches;
    if (matches != 1)
      bad("option '" + o.label + "' must name exactly one input edge, '" + o.edge + "' matches " +
          std::to_string(matches));
    ++bound[o.edge];
  }
  for (auto e : ins)
    if (bound[g.edge(e).label] != 1) bad("input edge '" + g.edge(e).label + "' is not bound to exactly one option");
}

inline void check_arity(const ClockGraph& g, VertexId v, std::vector<Diagnostic>& out) {
  const auto in = g.in_edges(v).size();
  const auto outd = g.out_edges(v).size();
  const auto& name = g.vertex(v).name;
  auto bad = [&](std::string msg) {
    out.push_back({DiagnosticCode::arity, vloc(v),
                   std::string(to_string(g.vertex(v).kind())) + " '" + name + "' " + std::move(msg)});
  };
  switch (g.vertex(v).kind()) {
    case VertexKind::clock_source:
      if (in != 0) bad("must have no inputs, has " + std::to_string(in));
      if (outd < 1) bad("must have at least one output");
      break;
    case VertexKind::selector:
      if (in < 1) bad("needs at least one input");
      if (outd < 1) bad("must have at least one output");
      break;
    case VertexKind::divider:
      if (in != 1) bad("needs exactly one input, has " + std::to_string(in));
      if (outd < 1) bad("must have at least one output");
      break;
    case VertexKind::repeater:
      if (in != 1) bad("needs exactly one input, has " + std::to_string(in));
      if (outd < 2) bad("needs at least two outputs, has " + std::to_string(outd));
      break;
    case VertexKind::sink:
      if (in != 1) bad("needs exactly one input, has " + std::to_string(in));
      if (outd != 0) bad("must have no outputs, has " + std::to_string(outd));
      break;
  }
}

}  // namespace detail

/// Every violated structural invariant, one diagnostic each. Empty iff valid.
inline std::vector<Diagnostic> validate_graph(const ClockGraph& g) {
  std::vector<Diagnostic> out;
  if (g.vertices().empty()) {
    out.push_back({DiagnosticCode::empty_graph, "/vertices", "graph has no vertices"});
    return out;
  }
  std::map<std::string, VertexId> first;
  for (VertexId v = 0; v < g.size(); ++v) {
    auto [it, fresh] = first.emplace(g.vertex(v).name, v);
    if (!fresh)
      out.push_back({DiagnosticCode::duplicate_name, detail::vloc(v),
                     "vertex name '" + g.vertex(v).name + "' already used at " + detail::vloc(it->second)});
  }
  for (EdgeId e = 0; e < g.edges().size(); ++e) {
    const auto& ed = g.edge(e);
    if (!g.find(ed.from))
      out.push_back({DiagnosticCode::dangling_endpoint, detail::eloc(e) + "/from", "unknown vertex '" + ed.from + "'"});
    if (!g.find(ed.to))
      out.push_back({DiagnosticCode::dangling_endpoint, detail::eloc(e) + "/to", "unknown vertex '" + ed.to + "'"});
    if (ed.from == ed.to)
      out.push_back({DiagnosticCode::cycle, detail::eloc(e), "self-loop on '" + ed.from + "'"});
  }

  // Kahn's algorithm; whatever is never released sits on or behind a cycle.
  const std::size_t n = g.size();
  std::vector<std::size_t> indeg(n, 0);
  for (VertexId v = 0; v < n; ++v) indeg[v] = g.in_edges(v).size();
  std::vector<VertexId> ready;
  for (VertexId v = 0; v < n; ++v)
    if (indeg[v] == 0) ready.push_back(v);
  std::size_t released = 0;
  while (!ready.empty()) {
    auto v = ready.back();
    ready.pop_back();
    ++released;
    for (auto e : g.out_edges(v))
      if (--indeg[g.target_of(e)] == 0) ready.push_back(g.target_of(e));
  }
  bool self_loop = std::any_of(g.edges().begin(), g.edges().end(), [](const ClockEdge& e) { return e.from == e.to; });
  if (released != n && !self_loop) {
    for (VertexId v = 0; v < n; ++v)
      if (indeg[v] != 0) {
        out.push_back({DiagnosticCode::cycle, detail::vloc(v), "'" + g.vertex(v).name + "' lies on a cycle"});
        break;
      }
  }

  // Weak connectivity.
  std::vector<int> comp(n, -1);
  int comps = 0;
  for (VertexId s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    if (comps > 0)
      out.push_back({DiagnosticCode::disconnected, detail::vloc(s),
                     "'" + g.vertex(s).name + "' is not connected to '" + g.vertex(0).name + "'"});
    std::vector<VertexId> stack{s};
    comp[s] = comps;
    while (!stack.empty()) {
      auto v = stack.back();
      stack.pop_back();
      auto visit = [&](VertexId u) {
        if (comp[u] < 0) {
          comp[u] = comps;
          stack.push_back(u);
        }
      };
      for (auto e : g.out_edges(v)) visit(g.target_of(e));
      for (auto e : g.in_edges(v)) visit(g.source_of(e));
    }
    ++comps;
  }

  for (VertexId v = 0; v < n; ++v) {
    detail::check_arity(g, v, out);
    detail::check_annotation(g, v, out);
    detail::check_selector(g, v, out);
  }
  return out;
}

/// Throws DescriptionError unless the graph is valid.
inline void require_valid(const ClockGraph& g) {
  auto d = validate_graph(g);
  if (!d.empty()) throw DescriptionError(std::move(d));
}

// ---------------------------------------------------------------------------
// DOT export

namespace detail {

inline std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

inline std::string_view dot_shape(VertexKind k) {
  switch (k) {
    case VertexKind::clock_source: return "hexagon";
    case VertexKind::selector: return "invtrapezium";
    case VertexKind::divider: return "invtriangle";
    case VertexKind::repeater: return "circle";
    case VertexKind::sink: return "box";
  }
  return "box";
}

template <class T>
std::string join(const std::vector<T>& xs, std::string_view sep) {
  std::ostringstream os;
  for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? sep : "") << xs[i];
  return os.str();
}

inline std::string annotation_text(const ClockVertex& v) {
  return std::visit(
      [](const auto& spec) -> std::string {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, SourceSpec>) {
          if (spec.range) return "[" + spec.range->lo.str() + ", " + spec.range->hi.str() + "] Hz";
          return "{" + join(spec.frequencies, ", ") + "} Hz";
        } else if constexpr (std::is_same_v<T, SelectorSpec>) {
          std::vector<std::string> parts;
          for (const auto& o : spec.options) parts.push_back(o.label + "<-" + o.edge);
          return join(parts, " | ");
        } else if constexpr (std::is_same_v<T, DividerSpec>) {
          if (spec.range) return "/[" + std::to_string(spec.range->min) + ".." + std::to_string(spec.range->max) + "]";
          return "/{" + join(spec.divisors, ", ") + "}";
        } else if constexpr (std::is_same_v<T, SinkSpec>) {
          if (!spec.constraint) return "";
          if (spec.constraint->is_point()) return "= " + spec.constraint->lo.str() + " Hz";
          return "in [" + spec.constraint->lo.str() + ", " + spec.constraint->hi.str() + "] Hz";
        } else {
          return "";
        }
      },
      v.annotation);
}

}  // namespace detail

/// Graphviz rendering; vertices and edges in document order.
inline std::string export_dot(const ClockGraph& g) {
  std::ostringstream os;
  os << "digraph " << detail::dot_quote(g.device().empty() ? "clock_graph" : g.device()) << " {\n";
  os << "  rankdir=TB;\n";
  for (const auto& v : g.vertices()) {
    std::string label = v.name;
    auto extra = detail::annotation_text(v);
    if (!extra.empty()) label += "\n" + extra;
    std::string escaped;
    for (char c : label) {
      if (c == '\n')
        escaped += "\\n";
      else if (c == '"' || c == '\\')
        escaped += std::string("\\") + c;
      else
        escaped += c;
    }
    os << "  " << detail::dot_quote(v.name) << " [shape=" << detail::dot_shape(v.kind()) << ", label=\""
       << escaped << "\"];\n";
  }
  for (const auto& e : g.edges())
    os << "  " << detail::dot_quote(e.from) << " -> " << detail::dot_quote(e.to)
       << " [label=" << detail::dot_quote(e.label) << "];\n";
  os << "}\n";
  return os.str();
}

}  // namespace clockforge
