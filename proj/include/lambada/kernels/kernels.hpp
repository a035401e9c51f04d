#pragma once

// Column kernels used by the LCF writer (statistics), the scan operator
// (row-level range filters) and aggregation (masked sums).
//
// Every kernel has a scalar reference implementation. Vectorized variants
// (AVX2 on x86-64, NEON on aarch64) are selected once at runtime and must be
// bit-for-bit equivalent to the scalar path; tests/unit/kernels_test.cpp
// checks that on random and adversarial inputs.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace lambada::kernels {

template <typename T>
struct MinMax {
  T min;
  T max;
};

/// Selection bitmap: bit i of word i/64 is set iff row i qualifies.
using Bitmap = std::vector<std::uint64_t>;

inline std::size_t bitmap_words(std::size_t rows) { return (rows + 63) / 64; }

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view isa_name(Isa isa);

/// Function table for one instruction set.
struct KernelTable {
  Isa isa;
  // Inputs are non-empty. Doubles must not contain NaN.
  MinMax<std::int64_t> (*min_max_i64)(std::span<const std::int64_t>);
  MinMax<double> (*min_max_f64)(std::span<const double>);
  // out has bitmap_words(values.size()) words; bits past the end are zero.
  // Closed interval [lo, hi].
  void (*filter_range_i64)(std::span<const std::int64_t> values, std::int64_t lo, std::int64_t hi,
                           std::span<std::uint64_t> out);
  void (*filter_range_f64)(std::span<const double> values, double lo, double hi,
                           std::span<std::uint64_t> out);
  // Wrapping two's-complement sum of values whose selection bit is set.
  std::int64_t (*masked_sum_i64)(std::span<const std::int64_t> values,
                                 std::span<const std::uint64_t> selection);
};

const KernelTable& scalar_table();
/// nullptr when not compiled for this target or not supported by the CPU.
const KernelTable* avx2_table();
const KernelTable* neon_table();

/// Best table for the running CPU. LAMBADA_KERNELS=scalar forces the reference path.
const KernelTable& active();

/// All tables usable on this machine, scalar first.
std::vector<const KernelTable*> available_tables();

inline MinMax<std::int64_t> min_max(std::span<const std::int64_t> v) { return active().min_max_i64(v); }
inline MinMax<double> min_max(std::span<const double> v) { return active().min_max_f64(v); }

inline Bitmap filter_range(std::span<const std::int64_t> v, std::int64_t lo, std::int64_t hi) {
  Bitmap out(bitmap_words(v.size()));
  active().filter_range_i64(v, lo, hi, out);
  return out;
}

inline Bitmap filter_range(std::span<const double> v, double lo, double hi) {
  Bitmap out(bitmap_words(v.size()));
  active().filter_range_f64(v, lo, hi, out);
  return out;
}

inline std::int64_t masked_sum(std::span<const std::int64_t> v, std::span<const std::uint64_t> sel) {
  return active().masked_sum_i64(v, sel);
}

/// In-place AND of two bitmaps of equal length.
void bitmap_and(std::span<std::uint64_t> acc, std::span<const std::uint64_t> other);
std::size_t bitmap_count(std::span<const std::uint64_t> bits);
/// Row indices of set bits, ascending.
std::vector<std::uint32_t> bitmap_to_indices(std::span<const std::uint64_t> bits, std::size_t rows);

}  // namespace lambada::kernels
