#pragma once

#include <concepts>
#include <initializer_list>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "clockforge/error.hpp"
#include "clockforge/rational.hpp"

namespace clockforge {

// JSON text, as opposed to an already parsed document.
template <class T>
concept Text = std::convertible_to<const T&, std::string_view> && !std::same_as<T, nlohmann::json>;

}  // namespace clockforge

namespace clockforge::detail {

inline nlohmann::json parse_json(std::string_view text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
}

/// Rejects keys outside `allowed` and requires every key in `required`.
inline void require_keys(const nlohmann::json& obj, const std::string& where,
                         std::initializer_list<std::string_view> allowed,
                         std::initializer_list<std::string_view> required) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (auto a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ValidationError(where + "/" + it.key() + ": unknown key");
  }
  for (auto r : required)
    if (!obj.contains(r)) throw ValidationError(where + ": missing key '" + std::string(r) + "'");
}

/// Big integers are written as JSON numbers when they fit 64 bits, else as
/// decimal strings.
inline nlohmann::json int_to_json(const Rational::Int& v) {
  if (v >= 0 && v <= Rational::Int(UINT64_MAX)) return static_cast<std::uint64_t>(v);
  if (v < 0 && v >= Rational::Int(INT64_MIN)) return static_cast<std::int64_t>(v);
  return v.str();
}

inline Rational::Int int_from_json(const nlohmann::json& j, const std::string& where) {
  if (j.is_number_unsigned()) return Rational::Int(j.get<std::uint64_t>());
  if (j.is_number_integer()) return Rational::Int(j.get<std::int64_t>());
  if (j.is_string()) {
    auto s = j.get<std::string>();
    auto r = Rational::parse(s);
    if (!r.is_integer()) throw ValidationError(where + ": expected an integer, got \"" + s + "\"");
    return r.num();
  }
  throw ValidationError(where + ": expected an integer, got " + j.dump());
}

/// `{"num": n, "den": d}`.
inline nlohmann::json rational_to_json(const Rational& r) {
  return {{"num", int_to_json(r.num())}, {"den", int_to_json(r.den())}};
}

/// Accepts an integer or `{"num": n, "den": d}`.
inline Rational rational_from_json(const nlohmann::json& j, const std::string& where) {
  if (j.is_object()) {
    require_keys(j, where, {"num", "den"}, {"num", "den"});
    auto d = int_from_json(j["den"], where + "/den");
    if (d <= 0) throw ValidationError(where + "/den: denominator must be positive");
    return Rational(int_from_json(j["num"], where + "/num"), d);
  }
  return Rational(int_from_json(j, where), 1);
}

/// Integers stay plain JSON integers, fractions become `{"num","den"}`.
inline nlohmann::json compact_rational_to_json(const Rational& r) {
  if (r.is_integer()) return int_to_json(r.num());
  return rational_to_json(r);
}

}  // namespace clockforge::detail
