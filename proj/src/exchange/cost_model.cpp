#include "lambada/exchange/cost_model.hpp"

#include <fmt/format.h>

#include "lambada/exchange/grid.hpp"
#include "lambada/sim/error.hpp"

namespace lambada::exchange {

std::string ExchangeVariant::name() const {
  switch (write_combining) {
    case WriteCombining::kOff: return fmt::format("{}l", levels);
    case WriteCombining::kOffsetsInName: return fmt::format("{}l-wc", levels);
    case WriteCombining::kOffsetsFile: return fmt::format("{}l-wcf", levels);
  }
  return "?";
}

ExchangeVariant ExchangeVariant::parse(std::string_view text) {
  ExchangeVariant v;
  if (text.size() < 2 || text[0] < '1' || text[0] > '3' || text[1] != 'l') {
    throw Error(ErrorKind::kConfigError, fmt::format("unknown exchange variant '{}'", text));
  }
  v.levels = text[0] - '0';
  const auto rest = text.substr(2);
  if (rest.empty()) {
    v.write_combining = WriteCombining::kOff;
  } else if (rest == "-wc") {
    v.write_combining = WriteCombining::kOffsetsInName;
  } else if (rest == "-wcf") {
    v.write_combining = WriteCombining::kOffsetsFile;
  } else {
    throw Error(ErrorKind::kConfigError, fmt::format("unknown exchange variant '{}'", text));
  }
  return v;
}

std::vector<ExchangeVariant> ExchangeVariant::table() {
  std::vector<ExchangeVariant> out;
  for (int k = 1; k <= 3; ++k) {
    out.push_back({k, WriteCombining::kOff});
    out.push_back({k, WriteCombining::kOffsetsInName});
  }
  return out;
}

CostModelRow exchange_cost(std::uint64_t workers, ExchangeVariant variant, const sim::PriceSheet& prices,
                           std::uint64_t side) {
  const Grid grid(workers, variant.levels, side);
  CostModelRow row;
  row.scans = variant.levels;
  for (int l = 0; l < variant.levels; ++l) {
    const std::uint64_t parts = grid.roles() * grid.dim(l);
    switch (variant.write_combining) {
      case WriteCombining::kOff:
        row.reads += parts;
        row.writes += parts;
        break;
      case WriteCombining::kOffsetsFile:
        row.reads += 2 * parts;
        row.writes += 2 * grid.roles();
        break;
      case WriteCombining::kOffsetsInName:
        row.reads += parts;
        row.writes += grid.roles();
        row.lists += grid.roles();
        break;
    }
  }
  row.request_usd = prices.per_read() * static_cast<std::int64_t>(row.reads) +
                    prices.per_write() * static_cast<std::int64_t>(row.writes) +
                    prices.per_list() * static_cast<std::int64_t>(row.lists);
  return row;
}

double exchange_worker_seconds(double bytes_per_worker, int scans, double mib_per_s) {
  return scans * 2.0 * bytes_per_worker / (1024.0 * 1024.0) / mib_per_s;
}

double exchange_worker_usd(double total_bytes, std::uint64_t workers, int scans, double mib_per_s,
                           double usd_per_second) {
  const double per_worker = total_bytes / static_cast<double>(workers);
  return static_cast<double>(workers) * exchange_worker_seconds(per_worker, scans, mib_per_s) * usd_per_second;
}

double per_bucket_rate(std::uint64_t workers, std::uint64_t side, std::uint32_t buckets) {
  if (buckets < 1) throw Error(ErrorKind::kInvalidArgument, "at least one bucket is required");
  return static_cast<double>(workers) * static_cast<double>(side) / buckets;
}

}  // namespace lambada::exchange
