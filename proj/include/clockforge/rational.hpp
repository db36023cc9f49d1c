#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

#include "clockforge/error.hpp"

namespace clockforge {

/// Exact rational number, always in lowest terms with a positive denominator.
///
/// Every frequency (Hz) and every objective value is a Rational. Floating point
/// only appears in to_double(), which exists for human-readable rendering.
class Rational {
public:
  using Int = boost::multiprecision::cpp_int;

  Rational() : num_(0), den_(1) {}
  Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT(implicit)
  Rational(Int n, Int d) : num_(std::move(n)), den_(std::move(d)) { normalize(); }

  static Rational from_unsigned(std::uint64_t n) { return Rational(Int(n), Int(1)); }

  /// Parses "n" or "n/d" (optional leading '-').
  static Rational parse(std::string_view text) {
    auto parse_int = [&](std::string_view s) -> Int {
      if (s.empty()) throw ValidationError("invalid rational '" + std::string(text) + "'");
      std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
      if (i == s.size()) throw ValidationError("invalid rational '" + std::string(text) + "'");
      for (std::size_t k = i; k < s.size(); ++k)
        if (s[k] < '0' || s[k] > '9')
          throw ValidationError("invalid rational '" + std::string(text) + "'");
      return Int(std::string(s));
    };
    auto slash = text.find('/');
    if (slash == std::string_view::npos) return Rational(parse_int(text), Int(1));
    Int d = parse_int(text.substr(slash + 1));
    if (d == 0) throw ValidationError("zero denominator in '" + std::string(text) + "'");
    return Rational(parse_int(text.substr(0, slash)), std::move(d));
  }

  const Int& num() const { return num_; }
  const Int& den() const { return den_; }

  bool is_integer() const { return den_ == 1; }
  bool is_zero() const { return num_ == 0; }
  bool is_positive() const { return num_ > 0; }
  int sign() const { return num_ > 0 ? 1 : (num_ < 0 ? -1 : 0); }

  double to_double() const {
    return static_cast<double>(boost::multiprecision::cpp_rational(num_, den_));
  }

  /// "n" for integers, "n/d" otherwise.
  std::string str() const {
    return is_integer() ? num_.str() : num_.str() + "/" + den_.str();
  }

  Rational& operator+=(const Rational& o) {
    if (den_ == o.den_) {
      num_ += o.num_;
    } else {
      num_ = num_ * o.den_ + o.num_ * den_;
      den_ *= o.den_;
    }
    normalize();
    return *this;
  }
  Rational& operator-=(const Rational& o) { return *this += -o; }
  Rational& operator*=(const Rational& o) {
    num_ *= o.num_;
    den_ *= o.den_;
    normalize();
    return *this;
  }
  Rational& operator/=(const Rational& o) {
    if (o.num_ == 0) throw RangeError("division by zero");
    num_ *= o.den_;
    den_ *= o.num_;
    normalize();
    return *this;
  }

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
  Rational operator-() const {
    Rational r = *this;
    r.num_ = -r.num_;
    return r;
  }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    if (a.den_ == b.den_) return cmp(a.num_, b.num_);
    return cmp(a.num_ * b.den_, b.num_ * a.den_);
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

  std::size_t hash() const {
    std::size_t h = std::hash<std::string>{}(num_.str());
    return h ^ (std::hash<std::string>{}(den_.str()) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  }

private:
  static std::strong_ordering cmp(const Int& a, const Int& b) {
    int c = a.compare(b);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  void normalize() {
    if (den_ == 0) throw RangeError("rational with zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    if (num_ == 0) {
      den_ = 1;
      return;
    }
    Int g = boost::multiprecision::gcd(num_, den_);
    if (g < 0) g = -g;
    if (g != 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  Int num_;
  Int den_;
};

/// Closed interval of frequencies; a point when lo == hi.
struct FrequencyRange {
  Rational lo;
  Rational hi;

  static FrequencyRange point(Rational f) { return {f, f}; }
  bool is_point() const { return lo == hi; }
  bool contains(const Rational& f) const { return lo <= f && f <= hi; }

  friend bool operator==(const FrequencyRange&, const FrequencyRange&) = default;
  friend std::strong_ordering operator<=>(const FrequencyRange& a, const FrequencyRange& b) {
    if (auto c = a.lo <=> b.lo; c != 0) return c;
    return a.hi <=> b.hi;
  }
};

inline std::ostream& operator<<(std::ostream& os, const FrequencyRange& r) {
  if (r.is_point()) return os << r.lo;
  return os << '[' << r.lo << ", " << r.hi << ']';
}

}  // namespace clockforge

template <>
struct std::hash<clockforge::Rational> {
  std::size_t operator()(const clockforge::Rational& r) const { return r.hash(); }
};
