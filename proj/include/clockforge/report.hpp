#pragma once

#include <iomanip>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "clockforge/clustering.hpp"
#include "clockforge/json_util.hpp"
#include "clockforge/timerset.hpp"

namespace clockforge {

/// Period in the file's unit when it divides evenly, else in ns.
inline std::string format_period(TimerPeriod p, TimeUnit unit) {
  const auto k = ns_per(unit);
  if (p.ns() % k == 0) return std::to_string(p.ns() / k) + " " + std::string(to_string(unit));
  return std::to_string(p.ns()) + " ns";
}

/// Human-readable frequency with an SI prefix, e.g. "15.625 kHz".
/// Exact values stay in the JSON output; this is for tables only.
inline std::string format_hz(const Rational& f) {
  static const char* prefixes[] = {"", "k", "M", "G"};
  const double x = f.to_double();
  int p = 0;
  double y = x;
  while (p < 3 && std::abs(y) >= 1000.0) {
    y /= 1000.0;
    ++p;
  }
  std::ostringstream os;
  os << std::setprecision(6) << y << " " << prefixes[p] << "Hz";
  return os.str();
}

inline nlohmann::ordered_json to_json(const MultiplesPartition& part, TimeUnit unit) {
  nlohmann::ordered_json doc;
  doc["unit"] = std::string(to_string(unit));
  doc["groups"] = nlohmann::ordered_json::array();
  for (const auto& g : part.groups) {
    nlohmann::ordered_json o;
    o["minimum_ns"] = g.minimum.ns();
    o["members_ns"] = nlohmann::ordered_json::array();
    for (auto m : g.members) o["members_ns"].push_back(m.ns());
    doc["groups"].push_back(std::move(o));
  }
  return doc;
}

inline nlohmann::ordered_json to_json(const AllocationResult& a) {
  nlohmann::ordered_json doc;
  doc["algorithm"] = std::string(to_string(a.algorithm));
  doc["clusters"] = nlohmann::ordered_json::array();
  for (const auto& c : a.clusters) {
    nlohmann::ordered_json o;
    o["gcd_ns"] = c.gcd.ns();
    o["frequency_hz"] = detail::rational_to_json(c.frequency_hz);
    o["members_ns"] = nlohmann::ordered_json::array();
    for (auto m : c.members) o["members_ns"].push_back(m.ns());
    doc["clusters"].push_back(std::move(o));
  }
  doc["weight_hz"] = detail::rational_to_json(a.weight);
  doc["hw_count"] = a.hw_count;
  doc["unused_hw"] = a.unused_hw;
  return doc;
}

}  // namespace clockforge
