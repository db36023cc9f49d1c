#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clockforge/error.hpp"

namespace clockforge {

/// Unit a timer file declares its periods in. Internally everything is ns.
enum class TimeUnit { ns, us, ms, s };

inline std::uint64_t ns_per(TimeUnit u) {
  switch (u) {
    case TimeUnit::ns: return 1;
    case TimeUnit::us: return 1'000;
    case TimeUnit::ms: return 1'000'000;
    case TimeUnit::s: return 1'000'000'000;
  }
  return 1;
}

inline std::string_view to_string(TimeUnit u) {
  switch (u) {
    case TimeUnit::ns: return "ns";
    case TimeUnit::us: return "us";
    case TimeUnit::ms: return "ms";
    case TimeUnit::s: return "s";
  }
  return "ns";
}

inline TimeUnit parse_time_unit(std::string_view tag) {
  if (tag == "ns") return TimeUnit::ns;
  if (tag == "us" || tag == "\xC2\xB5s" || tag == "\xCE\xBCs") return TimeUnit::us;
  if (tag == "ms") return TimeUnit::ms;
  if (tag == "s") return TimeUnit::s;
  throw ValidationError("unknown time unit '" + std::string(tag) + "' (expected ns, us, ms or s)");
}

namespace detail {

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r))
    throw RangeError(std::to_string(a) + " * " + std::to_string(b) + " overflows 64 bits");
  return r;
}

}  // namespace detail

/// A software-timer period in integer nanoseconds. Never zero.
class TimerPeriod {
public:
  explicit TimerPeriod(std::uint64_t ns) : ns_(ns) {
    if (ns == 0) throw ValidationError("timer period must be >= 1 ns, got 0");
  }

  std::uint64_t ns() const { return ns_; }

  bool divides(TimerPeriod other) const { return other.ns_ % ns_ == 0; }

  friend auto operator<=>(TimerPeriod, TimerPeriod) = default;
  friend std::ostream& operator<<(std::ostream& os, TimerPeriod p) { return os << p.ns_ << "ns"; }

private:
  std::uint64_t ns_;
};

/// Sorted, duplicate-free set of periods.
class TimerSet {
public:
  TimerSet() = default;

  /// Sorts and deduplicates `periods`.
  explicit TimerSet(std::vector<TimerPeriod> periods, TimeUnit unit = TimeUnit::ns)
      : periods_(std::move(periods)), unit_(unit) {
    std::sort(periods_.begin(), periods_.end());
    periods_.erase(std::unique(periods_.begin(), periods_.end()), periods_.end());
  }

  static TimerSet from_ns(std::initializer_list<std::uint64_t> ns) {
    std::vector<TimerPeriod> v;
    for (auto x : ns) v.emplace_back(x);
    return TimerSet(std::move(v));
  }

  const std::vector<TimerPeriod>& periods() const { return periods_; }
  TimeUnit unit_declared() const { return unit_; }
  std::size_t size() const { return periods_.size(); }
  bool empty() const { return periods_.empty(); }
  TimerPeriod operator[](std::size_t i) const { return periods_[i]; }
  auto begin() const { return periods_.begin(); }
  auto end() const { return periods_.end(); }

  std::vector<std::uint64_t> ns_values() const {
    std::vector<std::uint64_t> out;
    out.reserve(periods_.size());
    for (auto p : periods_) out.push_back(p.ns());
    return out;
  }

  /// Every period multiplied by k (checked).
  TimerSet scaled(std::uint64_t k) const {
    std::vector<TimerPeriod> v;
    v.reserve(periods_.size());
    for (auto p : periods_) v.emplace_back(detail::checked_mul(p.ns(), k));
    return TimerSet(std::move(v), unit_);
  }

  friend bool operator==(const TimerSet& a, const TimerSet& b) { return a.periods_ == b.periods_; }

private:
  std::vector<TimerPeriod> periods_;
  TimeUnit unit_ = TimeUnit::ns;
};

/// Converts raw periods in `unit` to a normalized TimerSet.
inline TimerSet normalize_timer_set(std::span<const std::int64_t> raw, TimeUnit unit) {
  std::vector<TimerPeriod> v;
  v.reserve(raw.size());
  const std::uint64_t scale = ns_per(unit);
  for (auto x : raw) {
    if (x <= 0)
      throw ValidationError("timer period must be positive, got " + std::to_string(x) + " " +
                            std::string(to_string(unit)));
    v.emplace_back(detail::checked_mul(static_cast<std::uint64_t>(x), scale));
  }
  return TimerSet(std::move(v), unit);
}

/// Exact GCD of a non-empty collection.
inline TimerPeriod gcd_of(std::span<const TimerPeriod> periods) {
  if (periods.empty()) throw ValidationError("gcd of an empty set of periods");
  std::uint64_t g = 0;
  for (auto p : periods) g = std::gcd(g, p.ns());
  return TimerPeriod(g);
}

inline TimerPeriod gcd_of(const TimerSet& ts) { return gcd_of(std::span(ts.periods())); }

/// One set of multiples: `members` are exact multiples of `minimum`.
struct MultiplesGroup {
  TimerPeriod minimum;
  std::vector<TimerPeriod> members;  // ascending, minimum excluded

  friend bool operator==(const MultiplesGroup&, const MultiplesGroup&) = default;
};

struct MultiplesPartition {
  std::vector<MultiplesGroup> groups;  // minima ascending

  friend bool operator==(const MultiplesPartition&, const MultiplesPartition&) = default;
};

/// Separates timers into sets of multiples.
///
/// Repeatedly takes the smallest remaining period and moves every remaining
/// period it divides into its group. Since minima are taken in ascending order,
/// a later group can never contain a multiple of an earlier minimum.
inline MultiplesPartition separate_into_multiples(const TimerSet& ts) {
  if (ts.empty()) throw ValidationError("cannot separate an empty timer set");
  std::vector<TimerPeriod> remaining = ts.periods();  // ascending
  MultiplesPartition out;
  while (!remaining.empty()) {
    const TimerPeriod m = remaining.front();
    MultiplesGroup group{m, {}};
    std::vector<TimerPeriod> rest;
    for (std::size_t j = 1; j < remaining.size(); ++j) {
      if (m.divides(remaining[j]))
        group.members.push_back(remaining[j]);
      else
        rest.push_back(remaining[j]);
    }
    out.groups.push_back(std::move(group));
    remaining = std::move(rest);
  }
  return out;
}

/// The group minima: the only timers that compete for hardware.
inline TimerSet reduced_set(const MultiplesPartition& mp) {
  std::vector<TimerPeriod> v;
  v.reserve(mp.groups.size());
  for (const auto& g : mp.groups) v.push_back(g.minimum);
  return TimerSet(std::move(v));
}

/// True when no element divides another (what reduced_set produces).
inline bool is_antichain(const TimerSet& ts) {
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (std::size_t j = i + 1; j < ts.size(); ++j)
      if (ts[i].divides(ts[j])) return false;
  return true;
}

}  // namespace clockforge
