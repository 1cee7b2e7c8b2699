#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace posmg {

// Exact rational on int64 numerator/denominator, always normalized
// (den > 0, gcd(|num|, den) == 1). Goals and reward rates stay exact so
// the threshold comparison in the risk indicator never depends on float
// round-off. Intermediates run in 128 bits; a result that does not reduce
// back into 64 bits throws std::overflow_error.
class Rational {
 public:
  constexpr Rational() : num_(0), den_(1) {}
  Rational(std::int64_t value) : num_(value), den_(1) {}  // NOLINT: implicit
  Rational(std::int64_t num, std::int64_t den) { *this = make(num, den); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  Rational operator-() const {
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
  }

  Rational operator+(const Rational& o) const {
    return make(i128(num_) * o.den_ + i128(o.num_) * den_, i128(den_) * o.den_);
  }
  Rational operator-(const Rational& o) const {
    return make(i128(num_) * o.den_ - i128(o.num_) * den_, i128(den_) * o.den_);
  }
  Rational operator*(const Rational& o) const {
    return make(i128(num_) * o.num_, i128(den_) * o.den_);
  }
  Rational operator/(const Rational& o) const {
    if (o.num_ == 0) throw std::domain_error("rational: division by zero");
    return make(i128(num_) * o.den_, i128(den_) * o.num_);
  }

  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }

  bool operator==(const Rational& o) const {
    return num_ == o.num_ && den_ == o.den_;
  }
  std::strong_ordering operator<=>(const Rational& o) const {
    const i128 lhs = i128(num_) * o.den_;
    const i128 rhs = i128(o.num_) * den_;
    if (lhs < rhs) return std::strong_ordering::less;
    if (lhs > rhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  // Canonical "num/den" rendering, e.g. "3/1", "-5/2".
  std::string str() const {
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  // Accepts "p/q" (q > 0) or a bare integer string. No whitespace.
  static std::optional<Rational> parse(std::string_view text);

 private:
  using i128 = __int128;

  static i128 abs128(i128 v) { return v < 0 ? -v : v; }

  static i128 gcd128(i128 a, i128 b) {
    a = abs128(a);
    b = abs128(b);
    while (b != 0) {
      i128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  static Rational make(i128 num, i128 den) {
    if (den == 0) throw std::domain_error("rational: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    if (num == 0) den = 1;
    const i128 g = gcd128(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    constexpr i128 lo = std::numeric_limits<std::int64_t>::min();
    constexpr i128 hi = std::numeric_limits<std::int64_t>::max();
    if (num < lo || num > hi || den > hi)
      throw std::overflow_error("rational: value does not fit in 64 bits");
    Rational r;
    r.num_ = static_cast<std::int64_t>(num);
    r.den_ = static_cast<std::int64_t>(den);
    return r;
  }

  std::int64_t num_;
  std::int64_t den_;
};

inline std::optional<Rational> Rational::parse(std::string_view text) {
  auto parse_int = [](std::string_view s, std::int64_t& out) -> bool {
    if (s.empty()) return false;
    bool neg = false;
    std::size_t i = 0;
    if (s[0] == '-') {
      neg = true;
      i = 1;
      if (s.size() == 1) return false;
    }
    i128 acc = 0;
    for (; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') return false;
      acc = acc * 10 + (s[i] - '0');
      if (acc > i128(std::numeric_limits<std::int64_t>::max()) + 1) return false;
    }
    if (neg) acc = -acc;
    if (acc > std::numeric_limits<std::int64_t>::max() ||
        acc < std::numeric_limits<std::int64_t>::min())
      return false;
    out = static_cast<std::int64_t>(acc);
    return true;
  };

  const auto slash = text.find('/');
  std::int64_t num = 0;
  std::int64_t den = 1;
  if (slash == std::string_view::npos) {
    if (!parse_int(text, num)) return std::nullopt;
  } else {
    if (!parse_int(text.substr(0, slash), num)) return std::nullopt;
    if (!parse_int(text.substr(slash + 1), den)) return std::nullopt;
    if (den <= 0) return std::nullopt;
  }
  try {
    return Rational(num, den);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace posmg
