#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace lambada::sim {

/// Exact fixed-point US dollars with 24 fractional decimal digits.
///
/// Request prices ($/million) and worker prices ($/GiB-second with up to
/// eight decimals) are integral at this scale even after dividing down to
/// per-request and per-MiB-microsecond units, so every charge is an exact
/// integer addition and ledger totals can be recomputed digit for digit.
class Usd {
 public:
  using Rep = __int128;
  static constexpr int kDigits = 24;

  constexpr Usd() = default;
  static constexpr Usd from_units(Rep units) {
    Usd u;
    u.units_ = units;
    return u;
  }
  /// Parses "0.4", "5", "1.65e-5", "3.3E-05". Throws Error(kConfigError) on
  /// malformed input or when the value is not representable exactly.
  static Usd parse(std::string_view text);
  /// Nearest representable value; for human-entered constants in code.
  static Usd from_double(double usd);

  constexpr Rep units() const noexcept { return units_; }
  double to_double() const noexcept;
  /// Decimal rendering with `frac_digits` fractional digits (truncated toward zero).
  std::string to_string(int frac_digits = 12) const;
  /// Exact decimal rendering without trailing zeros.
  std::string to_plain_string() const;

  friend constexpr Usd operator+(Usd a, Usd b) { return from_units(a.units_ + b.units_); }
  friend constexpr Usd operator-(Usd a, Usd b) { return from_units(a.units_ - b.units_); }
  friend constexpr Usd operator*(Usd a, std::int64_t k) { return from_units(a.units_ * k); }
  friend constexpr Usd operator*(Usd a, Rep k) { return from_units(a.units_ * k); }
  constexpr Usd& operator+=(Usd o) {
    units_ += o.units_;
    return *this;
  }
  friend constexpr auto operator<=>(Usd, Usd) = default;
  friend constexpr bool operator==(Usd, Usd) = default;

  /// Exact division; throws Error(kConfigError) if not divisible.
  Usd divide_exact(Rep divisor) const;

 private:
  Rep units_ = 0;
};

}  // namespace lambada::sim
