#pragma once

#include <cstdint>
#include <vector>

namespace lambada::exchange {

/// Smallest s with s^k >= n.
std::uint64_t ceil_root(std::uint64_t n, int k);

/// Mixed-radix grid over the exchange roles. Digit i of a role id is
/// (id / s^i) mod s for all but the last dimension, which takes whatever
/// remains, so the grid has ceil(P / s^(k-1)) cells along it. Cells past the
/// last worker are virtual roles hosted by worker (role mod P).
class Grid {
 public:
  Grid(std::uint64_t workers, int levels, std::uint64_t side = 0);

  std::uint64_t workers() const noexcept { return workers_; }
  int levels() const noexcept { return levels_; }
  std::uint64_t side() const noexcept { return side_; }
  std::uint64_t dim(int level) const { return dims_.at(static_cast<std::size_t>(level)); }
  std::uint64_t stride(int level) const { return strides_.at(static_cast<std::size_t>(level)); }
  std::uint64_t roles() const noexcept { return roles_; }
  bool exact() const noexcept { return roles_ == workers_; }

  std::vector<std::uint64_t> coords(std::uint64_t role) const;
  std::uint64_t digit(std::uint64_t role, int level) const;
  std::uint64_t with_digit(std::uint64_t role, int level, std::uint64_t value) const;
  /// Index of the group `role` belongs to at `level`: the id with that digit removed.
  std::uint64_t group(std::uint64_t role, int level) const;
  /// Roles of the group of `role` at `level`, ordered by their digit.
  std::vector<std::uint64_t> members(std::uint64_t role, int level) const;

  std::uint64_t host(std::uint64_t role) const { return role % workers_; }
  /// Roles run by `worker`: itself first, then the virtual roles it hosts.
  std::vector<std::uint64_t> roles_of(std::uint64_t worker) const;

 private:
  std::uint64_t workers_;
  int levels_;
  std::uint64_t side_;
  std::vector<std::uint64_t> dims_;
  std::vector<std::uint64_t> strides_;
  std::uint64_t roles_;
};

}  // namespace lambada::exchange
