#include "lambada/exchange/grid.hpp"

#include <fmt/format.h>

#include "lambada/sim/error.hpp"

namespace lambada::exchange {

namespace {

// n^k, saturating at limit + 1.
std::uint64_t bounded_pow(std::uint64_t n, int k, std::uint64_t limit) {
  std::uint64_t r = 1;
  for (int i = 0; i < k; ++i) {
    if (n != 0 && r > limit / n) return limit + 1;
    r *= n;
  }
  return r;
}

}  // namespace

std::uint64_t ceil_root(std::uint64_t n, int k) {
  if (k < 1) throw Error(ErrorKind::kInvalidArgument, "root order must be positive");
  if (n <= 1) return n;
  std::uint64_t lo = 1, hi = n;
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (bounded_pow(mid, k, n) >= n) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

Grid::Grid(std::uint64_t workers, int levels, std::uint64_t side) : workers_(workers), levels_(levels) {
  if (workers < 1) throw Error(ErrorKind::kInvalidArgument, "an exchange needs at least one worker");
  if (levels < 1 || levels > 3) throw Error(ErrorKind::kInvalidArgument, fmt::format("levels must be 1..3, got {}", levels));
  side_ = side == 0 ? ceil_root(workers, levels) : side;
  if (levels == 1) side_ = workers;
  if (side_ < 1) throw Error(ErrorKind::kInvalidArgument, "grid side must be positive");
  std::uint64_t stride = 1;
  for (int i = 0; i < levels - 1; ++i) {
    strides_.push_back(stride);
    dims_.push_back(side_);
    if (stride > workers_ * 2) throw Error(ErrorKind::kInvalidArgument, "grid side too large for the worker count");
    stride *= side_;
  }
  strides_.push_back(stride);
  dims_.push_back((workers_ + stride - 1) / stride);
  roles_ = stride * dims_.back();
}

std::vector<std::uint64_t> Grid::coords(std::uint64_t role) const {
  std::vector<std::uint64_t> c;
  for (int i = 0; i < levels_; ++i) c.push_back(digit(role, i));
  return c;
}

std::uint64_t Grid::digit(std::uint64_t role, int level) const {
  const auto i = static_cast<std::size_t>(level);
  return (role / strides_[i]) % dims_[i];
}

std::uint64_t Grid::with_digit(std::uint64_t role, int level, std::uint64_t value) const {
  const auto i = static_cast<std::size_t>(level);
  return role - digit(role, level) * strides_[i] + value * strides_[i];
}

std::uint64_t Grid::group(std::uint64_t role, int level) const {
  const auto i = static_cast<std::size_t>(level);
  const std::uint64_t low = role % strides_[i];
  const std::uint64_t high = role / (strides_[i] * dims_[i]);
  return high * strides_[i] + low;
}

std::vector<std::uint64_t> Grid::members(std::uint64_t role, int level) const {
  std::vector<std::uint64_t> out;
  out.reserve(dim(level));
  for (std::uint64_t d = 0; d < dim(level); ++d) out.push_back(with_digit(role, level, d));
  return out;
}

std::vector<std::uint64_t> Grid::roles_of(std::uint64_t worker) const {
  std::vector<std::uint64_t> out;
  for (std::uint64_t r = worker; r < roles_; r += workers_) out.push_back(r);
  return out;
}

}  // namespace lambada::exchange
