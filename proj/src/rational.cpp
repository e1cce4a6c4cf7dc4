#include "wps/rational.hpp"

#include <charconv>
#include <limits>
#include <stdexcept>

#include "wps/errors.hpp"

namespace wps {

namespace {

__int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

bool fits(__int128 v) {
  return v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max();
}

}  // namespace

Rational::Rational(std::int64_t numerator, std::int64_t denominator) {
  if (denominator == 0) throw DivisionByZero();
  *this = from_wide(numerator, denominator);
}

Rational Rational::from_wide(__int128 num, __int128 den) {
  if (den == 0) throw DivisionByZero();
  if (den < 0) {
    num = -num;
    den = -den;
  }
  __int128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (!fits(num) || !fits(den)) throw std::overflow_error("rational overflow");
  Rational r;
  r.num_ = static_cast<std::int64_t>(num);
  r.den_ = static_cast<std::int64_t>(den);
  return r;
}

std::optional<Rational> Rational::parse(std::string_view text) {
  std::string digits;
  digits.reserve(text.size());
  for (char c : text)
    if (c != ',') digits.push_back(c);
  if (digits.empty()) return std::nullopt;

  if (auto slash = digits.find('/'); slash != std::string::npos) {
    auto n = parse(std::string_view(digits).substr(0, slash));
    auto d = parse(std::string_view(digits).substr(slash + 1));
    if (!n || !d || d->is_zero()) return std::nullopt;
    return *n / *d;
  }

  bool negative = digits.front() == '-';
  std::string_view body(digits);
  if (negative) body.remove_prefix(1);
  auto dot = body.find('.');
  std::string_view whole = body.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : body.substr(dot + 1);
  if (whole.empty() && frac.empty()) return std::nullopt;
  if (frac.size() > 18) return std::nullopt;

  __int128 num = 0;
  for (std::string_view part : {whole, frac}) {
    for (char c : part) {
      if (c < '0' || c > '9') return std::nullopt;
      num = num * 10 + (c - '0');
      if (!fits(num)) return std::nullopt;
    }
  }
  __int128 den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  if (negative) num = -num;
  return from_wide(num, den);
}

std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  // Terminating decimal iff the denominator has no prime factors other than 2 and 5.
  std::int64_t d = den_;
  int twos = 0, fives = 0;
  while (d % 2 == 0) d /= 2, ++twos;
  while (d % 5 == 0) d /= 5, ++fives;
  if (d != 1 || std::max(twos, fives) > 18) return std::to_string(num_) + "/" + std::to_string(den_);

  int places = std::max(twos, fives);
  __int128 scale = 1;
  for (int i = 0; i < places; ++i) scale *= 10;
  __int128 scaled = static_cast<__int128>(num_) * (scale / den_);
  bool negative = scaled < 0;
  if (negative) scaled = -scaled;
  __int128 ip = scaled / scale, fp = scaled % scale;
  std::string frac(places, '0');
  for (int i = places - 1; i >= 0; --i) {
    frac[i] = static_cast<char>('0' + static_cast<int>(fp % 10));
    fp /= 10;
  }
  return (negative ? "-" : "") + std::to_string(static_cast<std::int64_t>(ip)) + "." + frac;
}

Rational operator+(const Rational& a, const Rational& b) {
  return Rational::from_wide(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                             static_cast<__int128>(a.den_) * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) {
  return Rational::from_wide(static_cast<__int128>(a.num_) * b.den_ - static_cast<__int128>(b.num_) * a.den_,
                             static_cast<__int128>(a.den_) * b.den_);
}

Rational operator*(const Rational& a, const Rational& b) {
  return Rational::from_wide(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.num_ == 0) throw DivisionByZero();
  return Rational::from_wide(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  return static_cast<__int128>(a.num_) * b.den_ <=> static_cast<__int128>(b.num_) * a.den_;
}

ReachabilityError::ReachabilityError(std::vector<std::string> nodes)
    : std::runtime_error([&] {
        std::string msg = "unexplainable gold nodes:";
        for (const auto& n : nodes) msg += " " + n;
        return msg;
      }()),
      nodes_(std::move(nodes)) {}

ParseError::ParseError(const std::string& what, std::size_t line)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

}  // namespace wps
