#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clockforge/json_util.hpp"
#include "clockforge/timerset.hpp"

namespace clockforge {

/// Contents of a timer-requirements file.
///
/// ```json
/// { "unit": "us", "timers": [ {"period": 128, "label": "mac.backoff"}, ... ] }
/// ```
struct TimerRequirements {
  TimeUnit unit = TimeUnit::us;
  std::vector<std::int64_t> raw_periods;  // as written, in `unit`
  std::vector<std::string> labels;        // parallel to raw_periods, "" when absent

  TimerSet timer_set() const { return normalize_timer_set(raw_periods, unit); }

  /// Labels by normalized period; duplicates keep every label they carried.
  std::map<std::uint64_t, std::vector<std::string>> labels_by_ns() const {
    std::map<std::uint64_t, std::vector<std::string>> out;
    for (std::size_t i = 0; i < raw_periods.size(); ++i) {
      if (labels[i].empty() || raw_periods[i] <= 0) continue;
      out[static_cast<std::uint64_t>(raw_periods[i]) * ns_per(unit)].push_back(labels[i]);
    }
    return out;
  }
};

inline TimerRequirements parse_timer_requirements(const nlohmann::json& doc) {
  using detail::require_keys;
  if (!doc.is_object()) throw ValidationError("/: timer file must be a JSON object");
  require_keys(doc, "", {"unit", "timers"}, {"unit", "timers"});
  if (!doc["unit"].is_string()) throw ValidationError("/unit: expected a string");
  TimerRequirements req;
  req.unit = parse_time_unit(doc["unit"].get<std::string>());
  const auto& timers = doc["timers"];
  if (!timers.is_array()) throw ValidationError("/timers: expected an array");
  for (std::size_t i = 0; i < timers.size(); ++i) {
    const std::string where = "/timers/" + std::to_string(i);
    const auto& t = timers[i];
    if (!t.is_object()) throw ValidationError(where + ": expected an object");
    require_keys(t, where, {"period", "label"}, {"period"});
    const auto& p = t["period"];
    if (p.is_number_unsigned()) {
      auto v = p.get<std::uint64_t>();
      if (v > static_cast<std::uint64_t>(INT64_MAX))
        throw RangeError(where + "/period: " + std::to_string(v) + " is out of range");
      req.raw_periods.push_back(static_cast<std::int64_t>(v));
    } else if (p.is_number_integer()) {
      req.raw_periods.push_back(p.get<std::int64_t>());
    } else {
      throw ValidationError(where + "/period: expected an integer, got " + p.dump());
    }
    if (req.raw_periods.back() <= 0)
      throw ValidationError(where + "/period: timer period must be positive, got " +
                            std::to_string(req.raw_periods.back()));
    std::string label;
    if (t.contains("label")) {
      if (!t["label"].is_string()) throw ValidationError(where + "/label: expected a string");
      label = t["label"].get<std::string>();
    }
    req.labels.push_back(std::move(label));
  }
  return req;
}

template <Text T>
inline TimerRequirements parse_timer_requirements(const T& text) {
  return parse_timer_requirements(detail::parse_json(text));
}

}  // namespace clockforge
