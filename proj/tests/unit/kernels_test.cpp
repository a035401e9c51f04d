#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <limits>
#include <random>

#include "lambada/kernels/kernels.hpp"

namespace lambada::kernels {
namespace {

std::uint64_t bits_of(double d) { return std::bit_cast<std::uint64_t>(d); }

std::vector<std::int64_t> random_i64(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::int64_t> v(n);
  const int mode = static_cast<int>(rng() % 3);
  for (auto& x : v) {
    if (mode == 0) x = static_cast<std::int64_t>(rng());
    else if (mode == 1) x = static_cast<std::int64_t>(rng() % 21) - 10;
    else x = (rng() % 2) ? std::numeric_limits<std::int64_t>::min() : std::numeric_limits<std::int64_t>::max();
  }
  return v;
}

std::vector<double> random_f64(std::mt19937_64& rng, std::size_t n) {
  static const double specials[] = {0.0, -0.0, std::numeric_limits<double>::infinity(),
                                    -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::denorm_min(),
                                    -std::numeric_limits<double>::denorm_min(), std::numeric_limits<double>::max(),
                                    std::numeric_limits<double>::lowest()};
  std::vector<double> v(n);
  for (auto& x : v) {
    if (rng() % 4 == 0) x = specials[rng() % std::size(specials)];
    else x = std::ldexp(static_cast<double>(static_cast<std::int64_t>(rng() % 2001) - 1000), static_cast<int>(rng() % 40) - 20);
  }
  return v;
}

class KernelEquivalence : public ::testing::TestWithParam<const KernelTable*> {};

TEST_P(KernelEquivalence, MinMaxI64) {
  const KernelTable& t = *GetParam();
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const auto v = random_i64(rng, 1 + rng() % 300);
    const auto want = scalar_table().min_max_i64(v);
    const auto got = t.min_max_i64(v);
    ASSERT_EQ(got.min, want.min);
    ASSERT_EQ(got.max, want.max);
  }
}

TEST_P(KernelEquivalence, MinMaxF64BitExact) {
  const KernelTable& t = *GetParam();
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const auto v = random_f64(rng, 1 + rng() % 300);
    const auto want = scalar_table().min_max_f64(v);
    const auto got = t.min_max_f64(v);
    ASSERT_EQ(bits_of(got.min), bits_of(want.min));
    ASSERT_EQ(bits_of(got.max), bits_of(want.max));
  }
}

TEST_P(KernelEquivalence, FilterRange) {
  const KernelTable& t = *GetParam();
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 500;
    const auto vi = random_i64(rng, n);
    std::int64_t lo = vi[rng() % n], hi = vi[rng() % n];
    if (lo > hi) std::swap(lo, hi);
    Bitmap want(bitmap_words(n), ~0ull), got(bitmap_words(n), ~0ull);
    scalar_table().filter_range_i64(vi, lo, hi, want);
    t.filter_range_i64(vi, lo, hi, got);
    ASSERT_EQ(got, want);

    const auto vf = random_f64(rng, n);
    double dlo = vf[rng() % n], dhi = vf[rng() % n];
    if (dlo > dhi) std::swap(dlo, dhi);
    scalar_table().filter_range_f64(vf, dlo, dhi, want);
    t.filter_range_f64(vf, dlo, dhi, got);
    ASSERT_EQ(got, want);
  }
}

TEST_P(KernelEquivalence, MaskedSumWraps) {
  const KernelTable& t = *GetParam();
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 500;
    const auto v = random_i64(rng, n);
    Bitmap sel(bitmap_words(n));
    for (std::size_t i = 0; i < n; ++i)
      if (rng() % 3) sel[i / 64] |= std::uint64_t{1} << (i % 64);
    ASSERT_EQ(t.masked_sum_i64(v, sel), scalar_table().masked_sum_i64(v, sel));
  }
}

INSTANTIATE_TEST_SUITE_P(Tables, KernelEquivalence, ::testing::ValuesIn(available_tables()),
                         [](const auto& info) { return std::string(isa_name(info.param->isa)); });

TEST(Kernels, ScalarReference) {
  const std::vector<std::int64_t> v{5, -3, 9, 0, 9, -3};
  const auto mm = scalar_table().min_max_i64(v);
  EXPECT_EQ(mm.min, -3);
  EXPECT_EQ(mm.max, 9);
  const Bitmap sel = filter_range(std::span<const std::int64_t>(v), 0, 5);
  EXPECT_EQ(bitmap_to_indices(sel, v.size()), (std::vector<std::uint32_t>{0, 3}));
  EXPECT_EQ(masked_sum(v, sel), 5);
  EXPECT_EQ(bitmap_count(sel), 2u);
}

TEST(Kernels, SignedZeroOrdering) {
  const std::vector<double> v{0.0, -0.0, 0.0};
  const auto mm = min_max(std::span<const double>(v));
  EXPECT_TRUE(std::signbit(mm.min));
  EXPECT_FALSE(std::signbit(mm.max));
}

TEST(Kernels, BitmapAnd) {
  Bitmap a{0b1101, 0xff}, b{0b0111, 0x0f};
  bitmap_and(a, b);
  EXPECT_EQ(a, (Bitmap{0b0101, 0x0f}));
}

}  // namespace
}  // namespace lambada::kernels
