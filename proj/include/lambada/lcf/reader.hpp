#pragma once

#include <cstdint>
#include <string>

#include "lambada/lcf/format.hpp"
#include "lambada/sim/object_store.hpp"

namespace lambada::lcf {

inline constexpr std::uint64_t kFooterTailWindow = 64 * 1024;

struct FooterFetch {
  FileFooter footer;
  std::uint64_t file_size = 0;
  int requests = 0;
  std::uint64_t bytes = 0;  // logical
};

/// Scale for storing `file` so that its chunks stand for `factor` times their
/// size while the footer and trailer count once.
sim::Scale file_scale(std::span<const std::uint8_t> file, std::uint32_t factor);

/// Reads the footer of an object with one suffix GET of `tail_window` logical bytes,
/// plus one ranged GET for the rest when the footer does not fit.
sim::Task<FooterFetch> fetch_footer(sim::ObjectStore& store, sim::Node& node, std::string bucket, std::string key,
                                    std::uint64_t tail_window = kFooterTailWindow);

}  // namespace lambada::lcf
