#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace plancache {

/// Exact fixed-point dollar amount with 12 fractional digits.
///
/// Per-token prices in the pricing tables are quoted per million tokens with
/// at most six decimals, so every per-call cost is an exact multiple of 1e-12
/// and ledger sums never drift.
class Usd {
 public:
  static constexpr int kScale = 12;
  static constexpr std::int64_t kUnitsPerDollar = 1'000'000'000'000;

  constexpr Usd() = default;

  static constexpr Usd from_units(std::int64_t units) {
    Usd u;
    u.units_ = units;
    return u;
  }

  /// Parses a plain decimal literal such as "2.50" or "-0.0075".
  /// Throws std::invalid_argument on malformed input or more than 12 decimals.
  static Usd parse(std::string_view text);

  constexpr std::int64_t units() const { return units_; }
  double to_double() const { return static_cast<double>(units_) / kUnitsPerDollar; }

  /// Rounds half-to-even at `decimals` places (0..12).
  std::string to_string(int decimals = kScale) const;

  constexpr Usd& operator+=(Usd other) {
    units_ += other.units_;
    return *this;
  }
  constexpr Usd& operator-=(Usd other) {
    units_ -= other.units_;
    return *this;
  }
  friend constexpr Usd operator+(Usd a, Usd b) { return a += b; }
  friend constexpr Usd operator-(Usd a, Usd b) { return a -= b; }
  friend constexpr auto operator<=>(Usd, Usd) = default;

 private:
  std::int64_t units_ = 0;
};

/// Integer division of num by den, rounded half-to-even. den must be positive.
__int128 divide_half_even(__int128 num, __int128 den);

/// part / whole as a percentage in hundredths of a percent, rounded
/// half-to-even (9417 means 94.17%). Zero when whole is zero.
std::int64_t percent_hundredths(Usd part, Usd whole);

/// Formats percent_hundredths as "94.17".
std::string format_percent(Usd part, Usd whole);

}  // namespace plancache
