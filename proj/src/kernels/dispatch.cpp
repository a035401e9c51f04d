#include <bit>
#include <cstdlib>
#include <string_view>

#include "lambada/kernels/kernels.hpp"
#include "variants.hpp"

namespace lambada::kernels {

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
  }
  return "unknown";
}

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::kScalar,           scalar::min_max_i64,      scalar::min_max_f64,
                                 scalar::filter_range_i64, scalar::filter_range_f64, scalar::masked_sum_i64};
  return table;
}

const KernelTable* avx2_table() {
  static const KernelTable* t = make_avx2_table();
  return t;
}

const KernelTable* neon_table() {
  static const KernelTable* t = make_neon_table();
  return t;
}

const KernelTable& active() {
  static const KernelTable& chosen = []() -> const KernelTable& {
    if (const char* env = std::getenv("LAMBADA_KERNELS"); env && std::string_view(env) == "scalar")
      return scalar_table();
    if (const auto* t = avx2_table()) return *t;
    if (const auto* t = neon_table()) return *t;
    return scalar_table();
  }();
  return chosen;
}

std::vector<const KernelTable*> available_tables() {
  std::vector<const KernelTable*> out{&scalar_table()};
  if (const auto* t = avx2_table()) out.push_back(t);
  if (const auto* t = neon_table()) out.push_back(t);
  return out;
}

void bitmap_and(std::span<std::uint64_t> acc, std::span<const std::uint64_t> other) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] &= other[i];
}

std::size_t bitmap_count(std::span<const std::uint64_t> bits) {
  std::size_t n = 0;
  for (auto w : bits) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::vector<std::uint32_t> bitmap_to_indices(std::span<const std::uint64_t> bits, std::size_t rows) {
  std::vector<std::uint32_t> out;
  out.reserve(bitmap_count(bits));
  for (std::size_t w = 0; w < bits.size(); ++w) {
    std::uint64_t word = bits[w];
    while (word) {
      const std::size_t idx = w * 64 + static_cast<std::size_t>(std::countr_zero(word));
      if (idx < rows) out.push_back(static_cast<std::uint32_t>(idx));
      word &= word - 1;
    }
  }
  return out;
}

}  // namespace lambada::kernels
