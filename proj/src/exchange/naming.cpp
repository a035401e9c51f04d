#include "lambada/exchange/naming.hpp"

#include <charconv>

#include <fmt/format.h>

#include "lambada/sim/error.hpp"
#include "lambada/sim/object_store.hpp"

namespace lambada::exchange {

namespace {

std::uint64_t spread(std::uint64_t group, std::uint64_t width, std::uint64_t digit, std::uint32_t buckets) {
  return (group * width + digit) % buckets;
}

constexpr std::string_view kOffSuffix = "-off";

}  // namespace

std::string NamingScheme::bucket(std::uint64_t index) const { return fmt::format("{}-{}", bucket_prefix, index); }

std::vector<std::string> NamingScheme::all_buckets() const {
  std::vector<std::string> out;
  for (std::uint32_t i = 0; i < buckets; ++i) out.push_back(bucket(i));
  return out;
}

std::string NamingScheme::group_prefix(int level, std::uint64_t group) const {
  return fmt::format("x{}/l{}/g{}/", exchange_id, level, group);
}

ObjectName NamingScheme::partition(int level, std::uint64_t group, std::uint64_t width, std::uint64_t sender,
                                   std::uint64_t receiver, std::uint64_t receiver_digit) const {
  return {bucket(spread(group, width, receiver_digit, buckets)),
          fmt::format("{}snd{}/rcv{}", group_prefix(level, group), sender, receiver)};
}

ObjectName NamingScheme::combined(int level, std::uint64_t group, std::uint64_t width, std::uint64_t sender,
                                  std::uint64_t sender_digit) const {
  return {bucket(spread(group, width, sender_digit, buckets)),
          fmt::format("{}snd{}/data", group_prefix(level, group), sender)};
}

ObjectName NamingScheme::offsets(int level, std::uint64_t group, std::uint64_t width, std::uint64_t sender,
                                 std::uint64_t sender_digit) const {
  return {bucket(spread(group, width, sender_digit, buckets)),
          fmt::format("{}snd{}/offsets", group_prefix(level, group), sender)};
}

std::string NamingScheme::named_bucket(std::uint64_t group) const { return bucket(group % buckets); }

ObjectName NamingScheme::combined_with_offsets(int level, std::uint64_t group, std::uint64_t sender,
                                               const std::vector<std::uint64_t>& offsets) const {
  std::string key = fmt::format("{}snd{}/{}", group_prefix(level, group), sender, encode_offsets(offsets));
  if (key.size() > sim::kMaxKeyBytes) {
    throw Error(ErrorKind::kKeyTooLong,
                fmt::format("{} offsets need a {}-byte key; use an offsets file instead", offsets.size(), key.size()));
  }
  return {named_bucket(group), std::move(key)};
}

std::string encode_offsets(const std::vector<std::uint64_t>& offsets) {
  return fmt::format("{}{}", fmt::join(offsets, "_"), kOffSuffix);
}

std::optional<std::vector<std::uint64_t>> decode_offsets(const std::string& text) {
  if (text.size() <= kOffSuffix.size() || text.compare(text.size() - kOffSuffix.size(), kOffSuffix.size(), kOffSuffix) != 0) {
    return std::nullopt;
  }
  std::vector<std::uint64_t> out;
  const char* p = text.data();
  const char* end = text.data() + text.size() - kOffSuffix.size();
  while (true) {
    std::uint64_t v = 0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc{} || next == p) return std::nullopt;
    out.push_back(v);
    if (next == end) break;
    if (*next != '_') return std::nullopt;
    p = next + 1;
  }
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i] < out[i - 1]) return std::nullopt;
  }
  return out;
}

std::optional<NamedFile> parse_named_key(const std::string& key, const std::string& group_prefix) {
  if (key.compare(0, group_prefix.size(), group_prefix) != 0) return std::nullopt;
  std::string_view rest(key);
  rest.remove_prefix(group_prefix.size());
  if (rest.substr(0, 3) != "snd") return std::nullopt;
  rest.remove_prefix(3);
  const auto slash = rest.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  NamedFile f;
  auto [next, ec] = std::from_chars(rest.data(), rest.data() + slash, f.sender);
  if (ec != std::errc{} || next != rest.data() + slash) return std::nullopt;
  auto offsets = decode_offsets(std::string(rest.substr(slash + 1)));
  if (!offsets) return std::nullopt;
  f.offsets = std::move(*offsets);
  return f;
}

std::vector<std::uint64_t> part_offsets(const std::vector<std::uint64_t>& sizes) {
  std::vector<std::uint64_t> out{0};
  for (auto s : sizes) out.push_back(out.back() + s);
  return out;
}

}  // namespace lambada::exchange
