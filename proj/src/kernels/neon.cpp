#include "lambada/kernels/kernels.hpp"
#include "variants.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

#include <algorithm>
#include <cstring>

namespace lambada::kernels {
namespace {

// NEON is mandatory on aarch64, so no runtime probe is needed. Only the
// filters are vectorized; the remaining entries reuse the scalar kernels.

void filter_range_i64(std::span<const std::int64_t> v, std::int64_t lo, std::int64_t hi,
                      std::span<std::uint64_t> out) {
  std::fill(out.begin(), out.end(), 0);
  const int64x2_t vlo = vdupq_n_s64(lo);
  const int64x2_t vhi = vdupq_n_s64(hi);
  std::size_t i = 0;
  for (; i + 2 <= v.size(); i += 2) {
    const int64x2_t x = vld1q_s64(v.data() + i);
    const uint64x2_t in = vandq_u64(vcgeq_s64(x, vlo), vcleq_s64(x, vhi));
    const std::uint64_t bits = (vgetq_lane_u64(in, 0) & 1) | ((vgetq_lane_u64(in, 1) & 1) << 1);
    out[i / 64] |= bits << (i % 64);
  }
  for (; i < v.size(); ++i)
    if (v[i] >= lo && v[i] <= hi) out[i / 64] |= std::uint64_t{1} << (i % 64);
}

void filter_range_f64(std::span<const double> v, double lo, double hi, std::span<std::uint64_t> out) {
  std::fill(out.begin(), out.end(), 0);
  const float64x2_t vlo = vdupq_n_f64(lo);
  const float64x2_t vhi = vdupq_n_f64(hi);
  std::size_t i = 0;
  for (; i + 2 <= v.size(); i += 2) {
    const float64x2_t x = vld1q_f64(v.data() + i);
    const uint64x2_t in = vandq_u64(vcgeq_f64(x, vlo), vcleq_f64(x, vhi));
    const std::uint64_t bits = (vgetq_lane_u64(in, 0) & 1) | ((vgetq_lane_u64(in, 1) & 1) << 1);
    out[i / 64] |= bits << (i % 64);
  }
  for (; i < v.size(); ++i)
    if (v[i] >= lo && v[i] <= hi) out[i / 64] |= std::uint64_t{1} << (i % 64);
}

}  // namespace

const KernelTable* make_neon_table() {
  static const KernelTable table{Isa::kNeon,      scalar::min_max_i64, scalar::min_max_f64, filter_range_i64,
                                 filter_range_f64, scalar::masked_sum_i64};
  return &table;
}

}  // namespace lambada::kernels

#else

namespace lambada::kernels {
const KernelTable* make_neon_table() { return nullptr; }
}  // namespace lambada::kernels

#endif
