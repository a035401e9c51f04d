#include <algorithm>
#include <bit>
#include <cmath>

#include "lambada/kernels/kernels.hpp"
#include "variants.hpp"

namespace lambada::kernels::scalar {

MinMax<std::int64_t> min_max_i64(std::span<const std::int64_t> v) {
  MinMax<std::int64_t> r{v[0], v[0]};
  for (auto x : v) {
    r.min = std::min(r.min, x);
    r.max = std::max(r.max, x);
  }
  return r;
}

namespace {
// Total order on non-NaN doubles with -0.0 < +0.0, so every variant reports
// the same bit pattern for the extrema.
bool total_less(double a, double b) {
  return a < b || (a == b && std::signbit(a) && !std::signbit(b));
}
}  // namespace

MinMax<double> min_max_f64(std::span<const double> v) {
  MinMax<double> r{v[0], v[0]};
  for (auto x : v) {
    if (total_less(x, r.min)) r.min = x;
    if (total_less(r.max, x)) r.max = x;
  }
  return r;
}

void filter_range_i64(std::span<const std::int64_t> v, std::int64_t lo, std::int64_t hi,
                      std::span<std::uint64_t> out) {
  std::fill(out.begin(), out.end(), 0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] >= lo && v[i] <= hi) out[i / 64] |= std::uint64_t{1} << (i % 64);
  }
}

void filter_range_f64(std::span<const double> v, double lo, double hi, std::span<std::uint64_t> out) {
  std::fill(out.begin(), out.end(), 0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] >= lo && v[i] <= hi) out[i / 64] |= std::uint64_t{1} << (i % 64);
  }
}

std::int64_t masked_sum_i64(std::span<const std::int64_t> v, std::span<const std::uint64_t> sel) {
  std::uint64_t acc = 0;
  for (std::size_t w = 0; w < sel.size(); ++w) {
    std::uint64_t bits = sel[w];
    while (bits) {
      const int b = std::countr_zero(bits);
      acc += static_cast<std::uint64_t>(v[w * 64 + b]);
      bits &= bits - 1;
    }
  }
  return static_cast<std::int64_t>(acc);
}

}  // namespace lambada::kernels::scalar
