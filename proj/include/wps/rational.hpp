#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace wps {

/// Exact rational with 64-bit numerator/denominator. Arithmetic that would
/// leave the 64-bit range throws std::overflow_error; division by zero throws
/// DivisionByZero.
class Rational {
 public:
  constexpr Rational() noexcept = default;
  Rational(std::int64_t numerator, std::int64_t denominator = 1);

  /// Parses "16", "3.5", "1,000", "-2" or "7/2".
  static std::optional<Rational> parse(std::string_view text);

  std::int64_t numerator() const noexcept { return num_; }
  std::int64_t denominator() const noexcept { return den_; }
  bool is_zero() const noexcept { return num_ == 0; }
  bool is_integer() const noexcept { return den_ == 1; }
  double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

  /// Decimal when the expansion terminates ("3.5"), otherwise "a/b".
  std::string to_string() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  friend Rational abs(const Rational& r) { return r.num_ < 0 ? Rational(-r.num_, r.den_) : r; }

  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

 private:
  static Rational from_wide(__int128 num, __int128 den);

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace wps
