#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lambada/lcf/format.hpp"
#include "lambada/sim/object_store.hpp"

namespace lambada::bench {

/// Numeric stand-in for the LINEITEM relation. Money columns are in cents,
/// discount and tax in percent, dates in days since 1992-01-01, and the flag
/// columns are small codes (returnflag A=0 N=1 R=2, linestatus F=0 O=1).
const lcf::Schema& lineitem_schema();

namespace day {
inline constexpr std::int64_t k1994_01_01 = 731;
inline constexpr std::int64_t k1995_01_01 = 1096;
inline constexpr std::int64_t k1995_06_17 = 1263;
inline constexpr std::int64_t k1998_09_02 = 2436;
}  // namespace day

struct GenSpec {
  /// Logical uncompressed size of the base dataset; sets the row count
  /// unless rows_per_file is given.
  std::uint64_t target_bytes = 256ULL * 1024 * 1024;
  std::uint64_t files = 32;
  std::uint64_t rows_per_file = 0;
  std::uint64_t groups_per_file = 4;
  std::string sort_key = "shipdate";
  /// Each base file is stored this many times under distinct keys.
  std::uint32_t replication = 1;
  /// Logical bytes per stored chunk byte of every object.
  std::uint32_t object_scale = 8;
  lcf::EncodingPolicy encoding{lcf::EncodingPolicy::Mode::kCodec, lcf::encoding::kZlib, {}};
  std::string bucket = "lineitem";
  std::string prefix = "lineitem/";

  /// Throws Error(kConfigError).
  void validate() const;
  std::uint64_t base_rows() const;
};

/// `rows` rows from `seed`, sorted by `sort_key`.
lcf::Table lineitem_rows(std::uint64_t rows, std::uint64_t seed, const std::string& sort_key = "shipdate");

struct Dataset {
  std::string bucket;
  std::vector<std::string> keys;  // replicas follow their base file
  std::uint64_t rows = 0;         // including replicas
  std::uint64_t stored_bytes = 0;
  std::uint64_t logical_bytes = 0;
};

/// The encoded base files, split evenly and contiguously from one globally sorted table.
std::vector<sim::Bytes> lineitem_files(const GenSpec& spec, std::uint64_t seed);

/// Writes the dataset into `store` (without time or billing).
Dataset generate(sim::ObjectStore& store, const GenSpec& spec, std::uint64_t seed);
/// As generate, from files built by lineitem_files.
Dataset install(sim::ObjectStore& store, const GenSpec& spec, const std::vector<sim::Bytes>& files);

/// Decodes every object of `dataset` from the store.
std::vector<lcf::Table> read_dataset(const sim::ObjectStore& store, const Dataset& dataset);

}  // namespace lambada::bench
