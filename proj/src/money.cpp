#include "plancache/money.hpp"

#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace plancache {

namespace {

__int128 pow10(int n) {
  __int128 v = 1;
  for (int i = 0; i < n; ++i) v *= 10;
  return v;
}

std::string digits_of(__int128 v) {
  if (v == 0) return "0";
  std::string out;
  while (v > 0) {
    out.insert(out.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  return out;
}

}  // namespace

__int128 divide_half_even(__int128 num, __int128 den) {
  if (den <= 0) throw std::invalid_argument("divide_half_even: non-positive denominator");
  const bool negative = num < 0;
  if (negative) num = -num;
  __int128 q = num / den;
  const __int128 r = num % den;
  const __int128 twice = r * 2;
  if (twice > den || (twice == den && (q % 2) == 1)) ++q;
  return negative ? -q : q;
}

Usd Usd::parse(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty decimal");
  bool negative = false;
  std::size_t i = 0;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    ++i;
  }
  __int128 whole = 0;
  __int128 frac = 0;
  int frac_digits = 0;
  bool seen_dot = false;
  bool seen_digit = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '.') {
      if (seen_dot) throw std::invalid_argument("decimal has two points: " + std::string(text));
      seen_dot = true;
      continue;
    }
    if (c < '0' || c > '9') throw std::invalid_argument("not a decimal: " + std::string(text));
    seen_digit = true;
    if (seen_dot) {
      if (++frac_digits > kScale) {
        throw std::invalid_argument("more than 12 decimals: " + std::string(text));
      }
      frac = frac * 10 + (c - '0');
    } else {
      whole = whole * 10 + (c - '0');
      if (whole > std::numeric_limits<std::int64_t>::max() / kUnitsPerDollar) {
        throw std::invalid_argument("decimal out of range: " + std::string(text));
      }
    }
  }
  if (!seen_digit) throw std::invalid_argument("not a decimal: " + std::string(text));
  const __int128 units = whole * kUnitsPerDollar + frac * pow10(kScale - frac_digits);
  return from_units(static_cast<std::int64_t>(negative ? -units : units));
}

std::string Usd::to_string(int decimals) const {
  if (decimals < 0 || decimals > kScale) throw std::invalid_argument("decimals out of range");
  const __int128 scaled = divide_half_even(units_, pow10(kScale - decimals));
  const bool negative = scaled < 0;
  const __int128 mag = negative ? -scaled : scaled;
  const __int128 base = pow10(decimals);
  std::string out = negative ? "-" : "";
  out += digits_of(mag / base);
  if (decimals > 0) {
    std::string frac = digits_of(mag % base);
    out += '.';
    out += std::string(static_cast<std::size_t>(decimals) - frac.size(), '0');
    out += frac;
  }
  return out;
}

std::int64_t percent_hundredths(Usd part, Usd whole) {
  if (whole.units() == 0) return 0;
  return static_cast<std::int64_t>(
      divide_half_even(static_cast<__int128>(part.units()) * 10000, whole.units()));
}

std::string format_percent(Usd part, Usd whole) {
  const std::int64_t h = percent_hundredths(part, whole);
  return Usd::from_units(h * (Usd::kUnitsPerDollar / 100)).to_string(2);
}

}  // namespace plancache
