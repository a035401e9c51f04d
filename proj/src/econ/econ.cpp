#include "lambada/econ/econ.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "lambada/sim/error.hpp"

namespace lambada::econ {

namespace pt = boost::property_tree;

namespace {

constexpr double kMiB = 1024.0 * 1024.0;
constexpr double kTiB = 1024.0 * 1024.0 * 1024.0 * 1024.0;

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::kConfigError, msg); }

double number(const pt::ptree& section, const std::string& where, const std::string& key, double fallback) {
  auto v = section.get_optional<std::string>(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    double d = std::stod(*v, &used);
    if (used != v->size()) throw std::invalid_argument(*v);
    return d;
  } catch (const std::exception&) {
    config_error(fmt::format("[{}] {}: not a number: '{}'", where, key, *v));
  }
}

void check_keys(const pt::ptree& section, const std::string& where, std::set<std::string> allowed) {
  for (const auto& [key, value] : section)
    if (!allowed.count(key)) config_error(fmt::format("unknown key [{}] {}", where, key));
}

void read_profile(const pt::ptree& section, const std::string& where, ResourceProfile& p) {
  check_keys(section, where,
             {"instance", "startup_s", "bandwidth_mib_per_s", "usd_per_hour", "min_units", "max_units"});
  p.name = section.get<std::string>("instance", p.name);
  p.startup_s = number(section, where, "startup_s", p.startup_s);
  p.bytes_per_s = number(section, where, "bandwidth_mib_per_s", p.bytes_per_s / kMiB) * kMiB;
  p.usd_per_s = number(section, where, "usd_per_hour", p.usd_per_s * 3600) / 3600;
  p.min_units = static_cast<std::uint64_t>(number(section, where, "min_units", static_cast<double>(p.min_units)));
  p.max_units = static_cast<std::uint64_t>(number(section, where, "max_units", static_cast<double>(p.max_units)));
}

}  // namespace

void ResourceProfile::validate() const {
  if (startup_s < 0) config_error(fmt::format("{}: negative startup time", name));
  if (!(usd_per_s > 0)) config_error(fmt::format("{}: price must be positive", name));
  if (!(bytes_per_s > 0)) config_error(fmt::format("{}: bandwidth must be positive", name));
  if (min_units < 1 || max_units < min_units) config_error(fmt::format("{}: empty unit range", name));
}

// Placeholder figures; see config/econ.ini.
ResourceProfile default_vm_profile() {
  ResourceProfile p;
  p.name = "c5n.xlarge";
  p.kind = ResourceKind::kVm;
  p.startup_s = 120;
  p.bytes_per_s = 25e9 / 8;  // 25 Gbit/s
  p.usd_per_s = 0.216 / 3600;
  p.min_units = 1;
  p.max_units = 256;
  return p;
}

ResourceProfile default_faas_profile() {
  ResourceProfile p;
  p.name = "faas-2048";
  p.kind = ResourceKind::kFaas;
  p.startup_s = 4;
  p.bytes_per_s = 90 * kMiB;
  p.usd_per_s = 2 * 0.0000166667;
  p.min_units = 8;
  p.max_units = 4096;
  return p;
}

CurvePoint job_scoped_point(double data_bytes, const ResourceProfile& profile, std::uint64_t units) {
  if (units < 1) throw Error(ErrorKind::kInvalidArgument, "units must be at least 1");
  const double n = static_cast<double>(units);
  CurvePoint p;
  p.units = units;
  p.latency_s = profile.startup_s + data_bytes / (n * profile.bytes_per_s);
  p.cost_usd = n * p.latency_s * profile.usd_per_s;
  return p;
}

std::vector<CurvePoint> job_scoped_curve(double data_bytes, const ResourceProfile& profile,
                                         const std::vector<std::uint64_t>& units) {
  std::vector<CurvePoint> out;
  out.reserve(units.size());
  for (auto u : units) out.push_back(job_scoped_point(data_bytes, profile, u));
  return out;
}

std::vector<std::uint64_t> doubling_units(std::uint64_t lo, std::uint64_t hi) {
  if (lo < 1 || hi < lo) throw Error(ErrorKind::kInvalidArgument, "unit range must satisfy 1 <= lo <= hi");
  std::vector<std::uint64_t> out;
  for (std::uint64_t u = lo; u < hi; u *= 2) out.push_back(u);
  out.push_back(hi);
  return out;
}

std::vector<CurvePoint> pareto_front(const std::vector<CurvePoint>& curve) {
  std::vector<CurvePoint> sorted = curve;
  std::sort(sorted.begin(), sorted.end(), [](const CurvePoint& a, const CurvePoint& b) {
    return a.latency_s != b.latency_s ? a.latency_s < b.latency_s : a.cost_usd < b.cost_usd;
  });
  std::vector<CurvePoint> front;
  for (const auto& p : sorted)
    if (front.empty() || p.cost_usd < front.back().cost_usd) front.push_back(p);
  return front;
}

CurvePoint min_cost(const std::vector<CurvePoint>& curve) {
  if (curve.empty()) throw Error(ErrorKind::kInvalidArgument, "empty curve");
  return *std::min_element(curve.begin(), curve.end(),
                           [](const CurvePoint& a, const CurvePoint& b) { return a.cost_usd < b.cost_usd; });
}

std::optional<CurvePoint> cheapest_meeting(double data_bytes, const ResourceProfile& profile, double latency_s) {
  const double scan_s = latency_s - profile.startup_s;
  if (scan_s <= 0) return std::nullopt;
  auto units = static_cast<std::uint64_t>(std::ceil(data_bytes / (scan_s * profile.bytes_per_s)));
  units = std::max(units, profile.min_units);
  // Guard against rounding putting the point just above the target.
  while (job_scoped_point(data_bytes, profile, units).latency_s > latency_s) ++units;
  if (units > profile.max_units) return std::nullopt;
  return job_scoped_point(data_bytes, profile, units);
}

std::vector<Crossover> always_on_crossover(const std::vector<AlwaysOnConfig>& always_on,
                                           const std::vector<PerUseService>& per_use) {
  if (always_on.empty()) throw Error(ErrorKind::kInvalidArgument, "no always-on configuration");
  std::vector<Crossover> out;
  for (const auto& s : per_use) {
    if (!(s.usd_per_query > 0))
      throw Error(ErrorKind::kDegenerateInput, fmt::format("{}: per-query cost must be positive", s.name));
    for (const auto& c : always_on) {
      if (!(c.hourly_usd() > 0))
        throw Error(ErrorKind::kDegenerateInput, fmt::format("{}: hourly cost must be positive", c.name));
      out.push_back({c.name, s.name, c.hourly_usd() / s.usd_per_query});
    }
  }
  return out;
}

double qaas_query_cost(const std::vector<std::uint64_t>& bytes_per_used_column, double selectivity,
                       const QaaSPricing& pricing) {
  if (!(selectivity >= 0 && selectivity <= 1))
    throw Error(ErrorKind::kInvalidArgument, fmt::format("selectivity {} outside [0, 1]", selectivity));
  double bytes = 0;
  for (auto b : bytes_per_used_column) bytes += static_cast<double>(b);
  if (pricing.rule == CountingRule::kSelectedRows) bytes *= selectivity;
  return bytes / kTiB * pricing.usd_per_tib;
}

std::vector<PerUseService> Presets::per_use() const {
  std::vector<PerUseService> out;
  if (auto p = cheapest_meeting(data_bytes, faas, latency_target_s)) out.push_back({"faas", p->cost_usd});
  QaaSPricing full = qaas;
  full.rule = CountingRule::kFullColumns;
  out.push_back({"qaas", qaas_query_cost({static_cast<std::uint64_t>(data_bytes)}, 1.0, full)});
  return out;
}

Presets default_presets() {
  Presets p;
  p.always_on = {{"dram", "r5.12xlarge", 3, 3.024}, {"nvme", "i3.16xlarge", 7, 4.992}, {"s3", "c5n.18xlarge", 13, 3.888}};
  return p;
}

Presets parse_presets(const std::string& ini_text) {
  pt::ptree root;
  std::istringstream in(ini_text);
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    config_error(e.what());
  }
  Presets p = default_presets();
  bool custom_always_on = false;
  for (const auto& [name, section] : root) {
    if (name == "workload") {
      check_keys(section, name, {"data_bytes", "latency_target_s"});
      p.data_bytes = number(section, name, "data_bytes", p.data_bytes);
      p.latency_target_s = number(section, name, "latency_target_s", p.latency_target_s);
    } else if (name == "vm") {
      read_profile(section, name, p.vm);
    } else if (name == "faas") {
      read_profile(section, name, p.faas);
    } else if (name == "qaas") {
      check_keys(section, name, {"usd_per_tib", "rule"});
      p.qaas.usd_per_tib = number(section, name, "usd_per_tib", p.qaas.usd_per_tib);
      if (auto r = section.get_optional<std::string>("rule")) {
        if (*r == "full_columns") p.qaas.rule = CountingRule::kFullColumns;
        else if (*r == "selected_rows") p.qaas.rule = CountingRule::kSelectedRows;
        else config_error("[qaas] rule: full_columns|selected_rows");
      }
    } else if (name.rfind("always_on:", 0) == 0) {
      if (!custom_always_on) p.always_on.clear();
      custom_always_on = true;
      check_keys(section, name, {"instance", "count", "usd_per_hour"});
      AlwaysOnConfig c;
      c.name = name.substr(10);
      c.instance = section.get<std::string>("instance", c.name);
      c.count = static_cast<std::uint64_t>(number(section, name, "count", 1));
      c.usd_per_instance_hour = number(section, name, "usd_per_hour", 0);
      if (c.count < 1 || !(c.usd_per_instance_hour > 0)) config_error(fmt::format("[{}] needs count and price", name));
      p.always_on.push_back(c);
    } else {
      config_error(fmt::format("unknown section [{}]", name));
    }
  }
  p.vm.validate();
  p.faas.validate();
  if (!(p.data_bytes > 0) || !(p.latency_target_s > 0)) config_error("[workload] values must be positive");
  return p;
}

Presets load_presets(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error(fmt::format("cannot open presets '{}'", path));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_presets(buf.str());
}

std::string job_scoped_csv(const Presets& presets) {
  std::string out = "profile,units,latency_s,cost_usd\n";
  for (const auto* prof : {&presets.vm, &presets.faas})
    for (const auto& pt : job_scoped_curve(presets.data_bytes, *prof, doubling_units(prof->min_units, prof->max_units)))
      out += fmt::format("{},{},{:.6f},{:.6f}\n", prof->name, pt.units, pt.latency_s, pt.cost_usd);
  return out;
}

std::string always_on_csv(const Presets& presets, const std::vector<double>& rates) {
  std::string out = "queries_per_hour,configuration,hourly_usd\n";
  const auto per_use = presets.per_use();
  for (double r : rates) {
    for (const auto& c : presets.always_on) out += fmt::format("{},{},{:.6f}\n", r, c.name, c.hourly_usd());
    for (const auto& s : per_use) out += fmt::format("{},{},{:.6f}\n", r, s.name, s.hourly_usd(r));
  }
  return out;
}

std::string crossover_csv(const Presets& presets) {
  std::string out = "always_on,per_use,queries_per_hour\n";
  for (const auto& c : always_on_crossover(presets.always_on, presets.per_use()))
    out += fmt::format("{},{},{:.6f}\n", c.always_on, c.per_use, c.queries_per_hour);
  return out;
}

}  // namespace lambada::econ
