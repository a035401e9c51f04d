#pragma once

#include "lambada/kernels/kernels.hpp"

namespace lambada::kernels {

namespace scalar {
MinMax<std::int64_t> min_max_i64(std::span<const std::int64_t> v);
MinMax<double> min_max_f64(std::span<const double> v);
void filter_range_i64(std::span<const std::int64_t> v, std::int64_t lo, std::int64_t hi,
                      std::span<std::uint64_t> out);
void filter_range_f64(std::span<const double> v, double lo, double hi, std::span<std::uint64_t> out);
std::int64_t masked_sum_i64(std::span<const std::int64_t> v, std::span<const std::uint64_t> sel);
}  // namespace scalar

// Defined only where the ISA is compiled in; each returns nullptr otherwise.
const KernelTable* make_avx2_table();
const KernelTable* make_neon_table();

}  // namespace lambada::kernels
