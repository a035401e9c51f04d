#include "lambada/kernels/kernels.hpp"
#include "variants.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>

#define LAMBADA_AVX2 __attribute__((target("avx2")))

namespace lambada::kernels {
namespace {

// Order-preserving map from non-NaN doubles to int64 (-0.0 sorts below +0.0).
inline std::int64_t double_key(double d) {
  std::int64_t bits;
  std::memcpy(&bits, &d, sizeof bits);
  return bits ^ ((bits >> 63) & 0x7fffffffffffffffLL);
}

inline double key_double(std::int64_t key) {
  const std::int64_t bits = key ^ ((key >> 63) & 0x7fffffffffffffffLL);
  double d;
  std::memcpy(&d, &bits, sizeof d);
  return d;
}

LAMBADA_AVX2 inline __m256i min_epi64(__m256i a, __m256i b) {
  return _mm256_blendv_epi8(a, b, _mm256_cmpgt_epi64(a, b));
}

LAMBADA_AVX2 inline __m256i max_epi64(__m256i a, __m256i b) {
  return _mm256_blendv_epi8(b, a, _mm256_cmpgt_epi64(a, b));
}

LAMBADA_AVX2 inline __m256i double_keys(__m256i bits) {
  // arithmetic shift of 64-bit lanes is AVX-512 only; derive the sign mask by comparison
  const __m256i sign = _mm256_cmpgt_epi64(_mm256_setzero_si256(), bits);
  return _mm256_xor_si256(bits, _mm256_and_si256(sign, _mm256_set1_epi64x(0x7fffffffffffffffLL)));
}

template <bool kDoubleKeys>
LAMBADA_AVX2 MinMax<std::int64_t> min_max_keys(const std::int64_t* data, std::size_t n) {
  std::int64_t first = data[0];
  if constexpr (kDoubleKeys) {
    double d;
    std::memcpy(&d, &first, sizeof d);
    first = double_key(d);
  }
  __m256i vmin = _mm256_set1_epi64x(first);
  __m256i vmax = vmin;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(data + i));
    if constexpr (kDoubleKeys) x = double_keys(x);
    vmin = min_epi64(vmin, x);
    vmax = max_epi64(vmax, x);
  }
  alignas(32) std::array<std::int64_t, 4> lo{}, hi{};
  _mm256_store_si256(reinterpret_cast<__m256i*>(lo.data()), vmin);
  _mm256_store_si256(reinterpret_cast<__m256i*>(hi.data()), vmax);
  MinMax<std::int64_t> r{*std::min_element(lo.begin(), lo.end()), *std::max_element(hi.begin(), hi.end())};
  for (; i < n; ++i) {
    std::int64_t x = data[i];
    if constexpr (kDoubleKeys) {
      double d;
      std::memcpy(&d, &x, sizeof d);
      x = double_key(d);
    }
    r.min = std::min(r.min, x);
    r.max = std::max(r.max, x);
  }
  return r;
}

LAMBADA_AVX2 MinMax<std::int64_t> min_max_i64(std::span<const std::int64_t> v) {
  return min_max_keys<false>(v.data(), v.size());
}

LAMBADA_AVX2 MinMax<double> min_max_f64(std::span<const double> v) {
  const auto k = min_max_keys<true>(reinterpret_cast<const std::int64_t*>(v.data()), v.size());
  return {key_double(k.min), key_double(k.max)};
}

LAMBADA_AVX2 void filter_range_i64(std::span<const std::int64_t> v, std::int64_t lo, std::int64_t hi,
                                   std::span<std::uint64_t> out) {
  std::fill(out.begin(), out.end(), 0);
  const __m256i vlo = _mm256_set1_epi64x(lo);
  const __m256i vhi = _mm256_set1_epi64x(hi);
  const std::size_t n = v.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(v.data() + i));
    // outside = x < lo || x > hi
    const __m256i outside = _mm256_or_si256(_mm256_cmpgt_epi64(vlo, x), _mm256_cmpgt_epi64(x, vhi));
    const unsigned bits = ~static_cast<unsigned>(_mm256_movemask_pd(_mm256_castsi256_pd(outside))) & 0xFu;
    out[i / 64] |= static_cast<std::uint64_t>(bits) << (i % 64);
  }
  for (; i < n; ++i) {
    if (v[i] >= lo && v[i] <= hi) out[i / 64] |= std::uint64_t{1} << (i % 64);
  }
}

LAMBADA_AVX2 void filter_range_f64(std::span<const double> v, double lo, double hi,
                                   std::span<std::uint64_t> out) {
  std::fill(out.begin(), out.end(), 0);
  const __m256d vlo = _mm256_set1_pd(lo);
  const __m256d vhi = _mm256_set1_pd(hi);
  const std::size_t n = v.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(v.data() + i);
    const __m256d in = _mm256_and_pd(_mm256_cmp_pd(x, vlo, _CMP_GE_OQ), _mm256_cmp_pd(x, vhi, _CMP_LE_OQ));
    const unsigned bits = static_cast<unsigned>(_mm256_movemask_pd(in));
    out[i / 64] |= static_cast<std::uint64_t>(bits) << (i % 64);
  }
  for (; i < n; ++i) {
    if (v[i] >= lo && v[i] <= hi) out[i / 64] |= std::uint64_t{1} << (i % 64);
  }
}

LAMBADA_AVX2 std::int64_t masked_sum_i64(std::span<const std::int64_t> v, std::span<const std::uint64_t> sel) {
  // lane masks for each 4-bit selection nibble
  alignas(32) static constexpr std::array<std::array<std::int64_t, 4>, 16> kLaneMask = [] {
    std::array<std::array<std::int64_t, 4>, 16> m{};
    for (int nib = 0; nib < 16; ++nib)
      for (int lane = 0; lane < 4; ++lane) m[nib][lane] = (nib >> lane) & 1 ? -1 : 0;
    return m;
  }();
  __m256i acc = _mm256_setzero_si256();
  const std::size_t n = v.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const unsigned nib = static_cast<unsigned>(sel[i / 64] >> (i % 64)) & 0xFu;
    if (nib == 0) continue;
    const __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(v.data() + i));
    const __m256i m = _mm256_load_si256(reinterpret_cast<const __m256i*>(kLaneMask[nib].data()));
    acc = _mm256_add_epi64(acc, _mm256_and_si256(x, m));
  }
  alignas(32) std::array<std::uint64_t, 4> lanes{};
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes.data()), acc);
  std::uint64_t total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < n; ++i) {
    if ((sel[i / 64] >> (i % 64)) & 1) total += static_cast<std::uint64_t>(v[i]);
  }
  return static_cast<std::int64_t>(total);
}

}  // namespace

const KernelTable* make_avx2_table() {
  static const KernelTable table{Isa::kAvx2, min_max_i64, min_max_f64, filter_range_i64, filter_range_f64,
                                 masked_sum_i64};
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") ? &table : nullptr;
}

}  // namespace lambada::kernels

#else

namespace lambada::kernels {
const KernelTable* make_avx2_table() { return nullptr; }
}  // namespace lambada::kernels

#endif
