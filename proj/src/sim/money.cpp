#include "lambada/sim/money.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <string>

#include "lambada/sim/error.hpp"

namespace lambada::sim {

namespace {

Usd::Rep pow10(int n) {
  Usd::Rep r = 1;
  for (int i = 0; i < n; ++i) r *= 10;
  return r;
}

[[noreturn]] void bad(std::string_view text, const char* why) {
  throw Error(ErrorKind::kConfigError, "cannot parse amount '" + std::string(text) + "': " + why);
}

}  // namespace

Usd Usd::parse(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  bool negative = false;
  if (i < text.size() && (text[i] == '-' || text[i] == '+')) negative = text[i++] == '-';

  Rep mantissa = 0;
  int frac_digits = 0;
  bool any_digit = false, in_frac = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      any_digit = true;
      if (mantissa > pow10(30)) bad(text, "too many digits");
      mantissa = mantissa * 10 + (c - '0');
      if (in_frac) ++frac_digits;
    } else if (c == '.' && !in_frac) {
      in_frac = true;
    } else {
      break;
    }
  }
  if (!any_digit) bad(text, "no digits");

  int exponent = 0;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    bool exp_neg = false;
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) exp_neg = text[i++] == '-';
    if (i >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i]))) bad(text, "bad exponent");
    for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
      exponent = exponent * 10 + (text[i] - '0');
      if (exponent > 60) bad(text, "exponent out of range");
    }
    if (exp_neg) exponent = -exponent;
  }
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  if (i != text.size()) bad(text, "trailing characters");

  // value = mantissa * 10^(exponent - frac_digits); scale to 10^kDigits
  int shift = kDigits + exponent - frac_digits;
  while (shift < 0 && mantissa % 10 == 0 && mantissa != 0) {
    mantissa /= 10;
    ++shift;
  }
  if (mantissa == 0) return Usd{};
  if (shift < 0) bad(text, "more than 24 fractional digits");
  if (shift > 36) bad(text, "too large");
  Rep units = mantissa * pow10(shift);
  return from_units(negative ? -units : units);
}

Usd Usd::from_double(double usd) {
  // 17 significant digits round-trip any double; parse keeps it exact when possible
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15e", usd);
  return parse(buf);
}

double Usd::to_double() const noexcept {
  const Rep scale = pow10(kDigits);
  const Rep whole = units_ / scale;
  const Rep frac = units_ % scale;
  return static_cast<double>(whole) + static_cast<double>(frac) / static_cast<double>(scale);
}

std::string Usd::to_string(int frac_digits) const {
  Rep v = units_;
  const bool negative = v < 0;
  if (negative) v = -v;
  const Rep scale = pow10(kDigits);
  Rep whole = v / scale;
  Rep frac = v % scale;
  std::string w;
  do {
    w.insert(w.begin(), static_cast<char>('0' + static_cast<int>(whole % 10)));
    whole /= 10;
  } while (whole > 0);
  std::string f(kDigits, '0');
  for (int k = kDigits - 1; k >= 0; --k) {
    f[static_cast<std::size_t>(k)] = static_cast<char>('0' + static_cast<int>(frac % 10));
    frac /= 10;
  }
  std::string out = negative ? "-" + w : w;
  if (frac_digits > 0) out += "." + f.substr(0, static_cast<std::size_t>(std::min(frac_digits, kDigits)));
  return out;
}

std::string Usd::to_plain_string() const {
  std::string s = to_string(kDigits);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

Usd Usd::divide_exact(Rep divisor) const {
  if (divisor == 0 || units_ % divisor != 0)
    throw Error(ErrorKind::kConfigError, "price is not exactly representable after unit conversion");
  return from_units(units_ / divisor);
}

}  // namespace lambada::sim
