#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace subplan {

// Exact rational arithmetic on int64 with 128-bit intermediates.
// Keeping times exact makes boundary tests (s(a) == e(b)) decidable.
class Rational {
public:
  Rational() = default;
  Rational(int64_t value) : num_(value), den_(1) {}
  Rational(int64_t num, int64_t den) : num_(num), den_(den) { normalize(); }

  int64_t num() const { return num_; }
  int64_t den() const { return den_; }

  bool is_integer() const { return den_ == 1; }

  Rational operator-() const { return Rational(-num_, den_); }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return from128(i128(a.num_) * b.den_ + i128(b.num_) * a.den_,
                   i128(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return from128(i128(a.num_) * b.den_ - i128(b.num_) * a.den_,
                   i128(a.den_) * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return from128(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("rational division by zero");
    return from128(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
  }

  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
  }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

  // "p/q" for non-integers, plain integer otherwise; parse accepts both.
  std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  static Rational parse(const std::string& text) {
    size_t slash = text.find('/');
    try {
      if (slash == std::string::npos) {
        size_t dot = text.find('.');
        if (dot != std::string::npos) return parse_decimal(text, dot);
        return Rational(std::stoll(text));
      }
      return Rational(std::stoll(text.substr(0, slash)),
                      std::stoll(text.substr(slash + 1)));
    } catch (const std::invalid_argument&) {
      throw std::domain_error("bad rational literal: " + text);
    } catch (const std::out_of_range&) {
      throw std::domain_error("rational literal out of range: " + text);
    }
  }

  size_t hash() const {
    size_t h = std::hash<int64_t>{}(num_);
    return h ^ (std::hash<int64_t>{}(den_) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  }

private:
  using i128 = __int128;

  static Rational parse_decimal(const std::string& text, size_t dot) {
    std::string whole = text.substr(0, dot), frac = text.substr(dot + 1);
    if (frac.empty()) return Rational(std::stoll(whole.empty() ? "0" : whole));
    int64_t den = 1;
    for (size_t i = 0; i < frac.size(); ++i) {
      if (den > INT64_MAX / 10) throw std::domain_error("decimal too long: " + text);
      den *= 10;
    }
    bool neg = !whole.empty() && whole[0] == '-';
    int64_t w = (whole.empty() || whole == "-") ? 0 : std::stoll(whole);
    int64_t f = std::stoll(frac);
    Rational r = Rational(w < 0 ? -w : w) + Rational(f, den);
    if (neg || w < 0) r = -r;
    return r;
  }

  static Rational from128(i128 num, i128 den) {
    if (den == 0) throw std::domain_error("rational division by zero");
    if (den < 0) { num = -num; den = -den; }
    i128 a = num < 0 ? -num : num, b = den;
    while (b) { i128 t = a % b; a = b; b = t; }
    if (a > 1) { num /= a; den /= a; }
    if (num > INT64_MAX || num < INT64_MIN || den > INT64_MAX)
      throw std::overflow_error("rational overflow");
    Rational r;
    r.num_ = static_cast<int64_t>(num);
    r.den_ = static_cast<int64_t>(den);
    return r;
  }

  void normalize() {
    if (den_ == 0) throw std::domain_error("rational with zero denominator");
    if (den_ < 0) { num_ = -num_; den_ = -den_; }
    int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) { num_ /= g; den_ /= g; }
  }

  int64_t num_ = 0;
  int64_t den_ = 1;
};

}  // namespace subplan
