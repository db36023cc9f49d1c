#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "clockforge/clockgraph.hpp"
#include "clockforge/json_util.hpp"

namespace clockforge {

namespace detail {

/// Collects schema diagnostics instead of stopping at the first one.
class DescriptionReader {
public:
  std::vector<Diagnostic> diags;

  void fail(DiagnosticCode c, std::string where, std::string msg) {
    diags.push_back({c, std::move(where), std::move(msg)});
  }
  void schema(std::string where, std::string msg) {
    fail(DiagnosticCode::schema_violation, std::move(where), std::move(msg));
  }

  bool keys(const nlohmann::json& obj, const std::string& where, std::initializer_list<std::string_view> allowed,
            std::initializer_list<std::string_view> required) {
    bool ok = true;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool known = false;
      for (auto a : allowed) known = known || it.key() == a;
      if (!known) {
        schema(where + "/" + it.key(), "unknown key '" + it.key() + "'");
        ok = false;
      }
    }
    for (auto r : required)
      if (!obj.contains(r)) {
        schema(where, "missing key '" + std::string(r) + "'");
        ok = false;
      }
    return ok;
  }

  std::optional<std::string> string(const nlohmann::json& j, const std::string& where) {
    if (!j.is_string()) {
      schema(where, "expected a string, got " + j.dump());
      return std::nullopt;
    }
    return j.get<std::string>();
  }

  std::optional<Rational> rational(const nlohmann::json& j, const std::string& where) {
    try {
      return rational_from_json(j, where);
    } catch (const Error& e) {
      schema(where, e.what());
      return std::nullopt;
    }
  }

  std::optional<std::uint64_t> divisor(const nlohmann::json& j, const std::string& where) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer()) {
      fail(DiagnosticCode::invalid_annotation, where, "divisor must be >= 1, got " + j.dump());
      return std::nullopt;
    }
    schema(where, "expected an integer divisor, got " + j.dump());
    return std::nullopt;
  }

  std::optional<FrequencyRange> interval(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object()) {
      schema(where, "expected {\"min\", \"max\"}");
      return std::nullopt;
    }
    if (!keys(j, where, {"min", "max"}, {"min", "max"})) return std::nullopt;
    auto lo = rational(j["min"], where + "/min");
    auto hi = rational(j["max"], where + "/max");
    if (!lo || !hi) return std::nullopt;
    return FrequencyRange{*lo, *hi};
  }

  /// Sink requirement: a frequency or `{"min","max"}`.
  std::optional<FrequencyRange> requirement(const nlohmann::json& j, const std::string& where) {
    if (j.is_object() && (j.contains("min") || j.contains("max"))) return interval(j, where);
    auto f = rational(j, where);
    if (!f) return std::nullopt;
    return FrequencyRange::point(*f);
  }

  std::optional<ClockVertex> vertex(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object()) {
      schema(where, "vertex must be an object");
      return std::nullopt;
    }
    if (!j.contains("name") || !j.contains("kind")) {
      schema(where, "vertex needs 'name' and 'kind'");
      return std::nullopt;
    }
    auto name = string(j["name"], where + "/name");
    auto kind = string(j["kind"], where + "/kind");
    if (!name || !kind) return std::nullopt;
    ClockVertex v{*name, RepeaterSpec{}};
    const auto before = diags.size();

    if (*kind == "clock_source") {
      keys(j, where, {"name", "kind", "frequencies_hz", "range_hz"}, {});
      SourceSpec s;
      if (j.contains("frequencies_hz") == j.contains("range_hz")) {
        schema(where, "clock_source needs exactly one of 'frequencies_hz' or 'range_hz'");
      } else if (j.contains("frequencies_hz")) {
        const auto& fs = j["frequencies_hz"];
        if (!fs.is_array()) {
          schema(where + "/frequencies_hz", "expected an array");
        } else {
          for (std::size_t i = 0; i < fs.size(); ++i)
            if (auto f = rational(fs[i], where + "/frequencies_hz/" + std::to_string(i))) s.frequencies.push_back(*f);
        }
      } else {
        s.range = interval(j["range_hz"], where + "/range_hz");
      }
      v.annotation = std::move(s);
    } else if (*kind == "selector") {
      keys(j, where, {"name", "kind", "options"}, {"options"});
      SelectorSpec s;
      if (j.contains("options")) {
        const auto& os = j["options"];
        if (!os.is_array()) schema(where + "/options", "expected an array");
        for (std::size_t i = 0; os.is_array() && i < os.size(); ++i) {
          auto w = where + "/options/" + std::to_string(i);
          if (!os[i].is_object()) {
            schema(w, "expected {\"label\", \"edge\"}");
            continue;
          }
          if (!keys(os[i], w, {"label", "edge"}, {"label", "edge"})) continue;
          auto label = string(os[i]["label"], w + "/label");
          auto edge = string(os[i]["edge"], w + "/edge");
          if (label && edge) s.options.push_back({*label, *edge});
        }
      }
      v.annotation = std::move(s);
    } else if (*kind == "divider") {
      keys(j, where, {"name", "kind", "divisors", "divisor_range"}, {});
      DividerSpec d;
      if (j.contains("divisors") == j.contains("divisor_range")) {
        schema(where, "divider needs exactly one of 'divisors' or 'divisor_range'");
      } else if (j.contains("divisors")) {
        const auto& ds = j["divisors"];
        if (!ds.is_array()) schema(where + "/divisors", "expected an array");
        for (std::size_t i = 0; ds.is_array() && i < ds.size(); ++i)
          if (auto x = divisor(ds[i], where + "/divisors/" + std::to_string(i))) d.divisors.push_back(*x);
      } else {
        const auto& r = j["divisor_range"];
        auto w = where + "/divisor_range";
        if (!r.is_object()) {
          schema(w, "expected {\"min\", \"max\"}");
        } else if (keys(r, w, {"min", "max"}, {"min", "max"})) {
          auto lo = divisor(r["min"], w + "/min");
          auto hi = divisor(r["max"], w + "/max");
          if (lo && hi) d.range = DivisorRange{*lo, *hi};
        }
      }
      v.annotation = std::move(d);
    } else if (*kind == "repeater") {
      keys(j, where, {"name", "kind"}, {});
      v.annotation = RepeaterSpec{};
    } else if (*kind == "sink") {
      keys(j, where, {"name", "kind", "constraint"}, {});
      SinkSpec s;
      if (j.contains("constraint") && !j["constraint"].is_null()) {
        const auto& c = j["constraint"];
        auto w = where + "/constraint";
        if (!c.is_object()) {
          schema(w, "expected {\"frequency_hz\": ...} or null");
        } else if (keys(c, w, {"frequency_hz"}, {"frequency_hz"})) {
          s.constraint = requirement(c["frequency_hz"], w + "/frequency_hz");
        }
      }
      v.annotation = std::move(s);
    } else {
      fail(DiagnosticCode::unknown_vertex_kind, where + "/kind", "unknown vertex kind '" + *kind + "'");
      return std::nullopt;
    }
    if (diags.size() != before) return std::nullopt;
    return v;
  }
};

}  // namespace detail

/// Parses without structural checks. Throws DescriptionError on schema problems.
inline ClockGraph parse_description_unchecked(const nlohmann::json& doc) {
  detail::DescriptionReader rd;
  if (!doc.is_object()) throw DescriptionError({{DiagnosticCode::schema_violation, "", "expected a JSON object"}});
  rd.keys(doc, "", {"device", "version", "vertices", "edges"}, {"device", "version", "vertices", "edges"});
  std::string device, version;
  if (doc.contains("device"))
    if (auto s = rd.string(doc["device"], "/device")) device = *s;
  if (doc.contains("version"))
    if (auto s = rd.string(doc["version"], "/version")) version = *s;

  std::vector<ClockVertex> vertices;
  if (doc.contains("vertices")) {
    const auto& vs = doc["vertices"];
    if (!vs.is_array()) rd.schema("/vertices", "expected an array");
    for (std::size_t i = 0; vs.is_array() && i < vs.size(); ++i)
      if (auto v = rd.vertex(vs[i], "/vertices/" + std::to_string(i))) vertices.push_back(std::move(*v));
  }
  std::vector<ClockEdge> edges;
  if (doc.contains("edges")) {
    const auto& es = doc["edges"];
    if (!es.is_array()) rd.schema("/edges", "expected an array");
    for (std::size_t i = 0; es.is_array() && i < es.size(); ++i) {
      auto w = "/edges/" + std::to_string(i);
      if (!es[i].is_object()) {
        rd.schema(w, "edge must be an object");
        continue;
      }
      if (!rd.keys(es[i], w, {"from", "to", "label"}, {"from", "to", "label"})) continue;
      auto from = rd.string(es[i]["from"], w + "/from");
      auto to = rd.string(es[i]["to"], w + "/to");
      auto label = rd.string(es[i]["label"], w + "/label");
      if (from && to && label) edges.push_back({*from, *to, *label});
    }
  }
  if (!rd.diags.empty()) throw DescriptionError(std::move(rd.diags));
  return ClockGraph(std::move(device), std::move(version), std::move(vertices), std::move(edges));
}

/// Parses and validates a description document.
inline ClockGraph parse_description(const nlohmann::json& doc) {
  auto g = parse_description_unchecked(doc);
  require_valid(g);
  return g;
}

template <Text T>
inline ClockGraph parse_description(const T& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DescriptionError({{DiagnosticCode::schema_violation, "", std::string("malformed JSON: ") + e.what()}});
  }
  return parse_description(doc);
}

/// Canonical document; parse_description(to_json(g)) == g for valid g.
inline nlohmann::ordered_json to_json(const ClockGraph& g) {
  using nlohmann::ordered_json;
  auto rat = [](const Rational& r) { return ordered_json(detail::compact_rational_to_json(r)); };
  auto interval = [&](const FrequencyRange& r) {
    ordered_json o;
    o["min"] = rat(r.lo);
    o["max"] = rat(r.hi);
    return o;
  };
  ordered_json doc;
  doc["device"] = g.device();
  doc["version"] = g.version();
  doc["vertices"] = ordered_json::array();
  for (const auto& v : g.vertices()) {
    ordered_json o;
    o["name"] = v.name;
    o["kind"] = std::string(to_string(v.kind()));
    std::visit(
        [&](const auto& spec) {
          using T = std::decay_t<decltype(spec)>;
          if constexpr (std::is_same_v<T, SourceSpec>) {
            if (spec.range) {
              o["range_hz"] = interval(*spec.range);
            } else {
              o["frequencies_hz"] = ordered_json::array();
              for (const auto& f : spec.frequencies) o["frequencies_hz"].push_back(rat(f));
            }
          } else if constexpr (std::is_same_v<T, SelectorSpec>) {
            o["options"] = ordered_json::array();
            for (const auto& opt : spec.options) o["options"].push_back({{"label", opt.label}, {"edge", opt.edge}});
          } else if constexpr (std::is_same_v<T, DividerSpec>) {
            if (spec.range) {
              o["divisor_range"] = {{"min", spec.range->min}, {"max", spec.range->max}};
            } else {
              o["divisors"] = spec.divisors;
            }
          } else if constexpr (std::is_same_v<T, SinkSpec>) {
            if (!spec.constraint) {
              o["constraint"] = nullptr;
            } else {
              ordered_json c;
              c["frequency_hz"] = spec.constraint->is_point() ? rat(spec.constraint->lo) : interval(*spec.constraint);
              o["constraint"] = c;
            }
          }
        },
        v.annotation);
    doc["vertices"].push_back(std::move(o));
  }
  doc["edges"] = ordered_json::array();
  for (const auto& e : g.edges()) {
    ordered_json o;
    o["from"] = e.from;
    o["to"] = e.to;
    o["label"] = e.label;
    doc["edges"].push_back(std::move(o));
  }
  return doc;
}

inline std::string serialize_description(const ClockGraph& g) { return to_json(g).dump(2) + "\n"; }

}  // namespace clockforge
