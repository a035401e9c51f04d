#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lambada::econ {

enum class ResourceKind { kVm, kFaas };

/// A kind of compute unit rented for the duration of one job.
struct ResourceProfile {
  std::string name;
  ResourceKind kind = ResourceKind::kFaas;
  double startup_s = 4.0;
  double bytes_per_s = 90.0 * 1024 * 1024;  // scan bandwidth of one unit
  double usd_per_s = 0.0;                   // price of one unit
  std::uint64_t min_units = 1;
  std::uint64_t max_units = 1;

  /// Throws Error(kConfigError) on negative startup, non-positive price or bandwidth, or an empty unit range.
  void validate() const;
  /// Latency approached as units grow.
  double asymptote_s() const { return startup_s; }
};

ResourceProfile default_vm_profile();
ResourceProfile default_faas_profile();

struct CurvePoint {
  std::uint64_t units = 0;
  double latency_s = 0;
  double cost_usd = 0;
};

/// Latency = startup + data / (units * bandwidth); cost = units * latency * price,
/// every unit being billed from launch to finish. Throws Error(kInvalidArgument) for units < 1.
CurvePoint job_scoped_point(double data_bytes, const ResourceProfile& profile, std::uint64_t units);
std::vector<CurvePoint> job_scoped_curve(double data_bytes, const ResourceProfile& profile,
                                         const std::vector<std::uint64_t>& units);
/// lo, 2 lo, 4 lo, ... up to hi (inclusive when hi is reached exactly, always ending at hi).
std::vector<std::uint64_t> doubling_units(std::uint64_t lo, std::uint64_t hi);
/// Points not dominated in both latency and cost, by increasing latency.
std::vector<CurvePoint> pareto_front(const std::vector<CurvePoint>& curve);
CurvePoint min_cost(const std::vector<CurvePoint>& curve);
/// Fewest units meeting `latency_s`, or none.
std::optional<CurvePoint> cheapest_meeting(double data_bytes, const ResourceProfile& profile, double latency_s);

/// Resources kept running: a fixed number of instances.
struct AlwaysOnConfig {
  std::string name;
  std::string instance;
  std::uint64_t count = 1;
  double usd_per_instance_hour = 0;

  double hourly_usd() const { return static_cast<double>(count) * usd_per_instance_hour; }
};

/// A usage-priced service.
struct PerUseService {
  std::string name;
  double usd_per_query = 0;

  double hourly_usd(double queries_per_hour) const { return usd_per_query * queries_per_hour; }
};

struct Crossover {
  std::string always_on;
  std::string per_use;
  double queries_per_hour = 0;
};

/// Query rate at which each per-use service costs as much per hour as each
/// always-on configuration. Throws Error(kInvalidArgument) without always-on
/// configurations or Error(kDegenerateInput) for a per-query cost of zero.
std::vector<Crossover> always_on_crossover(const std::vector<AlwaysOnConfig>& always_on,
                                           const std::vector<PerUseService>& per_use);

enum class CountingRule { kFullColumns, kSelectedRows };

struct QaaSPricing {
  double usd_per_tib = 5.0;
  CountingRule rule = CountingRule::kFullColumns;
};

/// Price of one query reading the given columns. Throws Error(kInvalidArgument)
/// when selectivity is outside [0, 1].
double qaas_query_cost(const std::vector<std::uint64_t>& bytes_per_used_column, double selectivity,
                       const QaaSPricing& pricing);

/// Workload and resource assumptions for the job-scoped and always-on comparisons.
struct Presets {
  double data_bytes = 1e12;
  double latency_target_s = 10;
  ResourceProfile vm = default_vm_profile();
  ResourceProfile faas = default_faas_profile();
  std::vector<AlwaysOnConfig> always_on;
  QaaSPricing qaas;

  /// Per-query cost of FaaS at the fewest units meeting the latency target, and
  /// of QaaS scanning the whole input.
  std::vector<PerUseService> per_use() const;
};

Presets default_presets();
/// INI sections [workload], [vm], [faas], [qaas] and one [always_on:NAME] per
/// configuration. Throws Error(kConfigError).
Presets parse_presets(const std::string& ini_text);
Presets load_presets(const std::string& path);

/// units,latency_s,cost_usd per profile.
std::string job_scoped_csv(const Presets& presets);
/// queries_per_hour,configuration,hourly_usd.
std::string always_on_csv(const Presets& presets, const std::vector<double>& rates);
/// always_on,per_use,queries_per_hour.
std::string crossover_csv(const Presets& presets);

}  // namespace lambada::econ
