#include "lambada/sim/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "lambada/sim/error.hpp"

namespace lambada::sim {

namespace pt = boost::property_tree;

void CloudConfig::validate() const {
  prices.validate();
  store.validate();
  faas.validate();
  driver_network.validate();
  if (driver_memory_mib < 1) throw Error(ErrorKind::kConfigError, "driver memory must be positive");
}

StoreConfig historic_limits(StoreConfig base) {
  base.read_limit_per_s = 800;
  base.write_limit_per_s = 300;
  return base;
}

namespace {

class Section {
 public:
  Section(const pt::ptree& root, std::string name) : name_(std::move(name)) {
    if (auto child = root.get_child_optional(name_)) tree_ = *child;
    for (const auto& [key, value] : tree_) (void)value, unused_.insert(key);
  }
  ~Section() noexcept(false) {
    if (!unused_.empty() && std::uncaught_exceptions() == 0)
      throw Error(ErrorKind::kConfigError, fmt::format("unknown key [{}] {}", name_, *unused_.begin()));
  }

  std::optional<std::string> text(const std::string& key) {
    unused_.erase(key);
    if (auto v = tree_.get_optional<std::string>(key)) return *v;
    return std::nullopt;
  }
  void number(const std::string& key, double& out) {
    if (auto v = text(key)) out = parse_double(key, *v);
  }
  void integer(const std::string& key, std::int64_t& out) {
    if (auto v = text(key)) out = static_cast<std::int64_t>(parse_double(key, *v));
  }
  void integer(const std::string& key, int& out) {
    if (auto v = text(key)) out = static_cast<int>(parse_double(key, *v));
  }
  void size(const std::string& key, std::size_t& out, std::size_t unit = 1) {
    if (auto v = text(key)) out = static_cast<std::size_t>(parse_double(key, *v)) * unit;
  }
  void millis(const std::string& key, Duration& out) {
    if (auto v = text(key)) out = from_seconds(parse_double(key, *v) / 1000.0);
  }
  void money(const std::string& key, Usd& out) {
    if (auto v = text(key)) out = Usd::parse(*v);
  }

 private:
  double parse_double(const std::string& key, const std::string& v) const {
    try {
      std::size_t used = 0;
      double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw Error(ErrorKind::kConfigError, fmt::format("[{}] {}: not a number: '{}'", name_, key, v));
    }
  }

  std::string name_;
  pt::ptree tree_;
  std::set<std::string> unused_;
};

void read_shaper(Section& s, ShaperConfig& c) {
  s.number("steady_mib_per_s", c.steady_mib_per_s);
  s.number("burst_cap_mib_per_s", c.burst_cap_mib_per_s);
  s.number("burst_credit_mib", c.burst_credit_mib);
  s.number("per_connection_mib_per_s", c.per_connection_mib_per_s);
  s.millis("first_byte_latency_ms", c.first_byte_latency);
}

CloudConfig from_tree(const pt::ptree& root) {
  CloudConfig c;
  {
    Section s(root, "prices");
    s.money("read_per_million", c.prices.read_per_million);
    s.money("write_per_million", c.prices.write_per_million);
    s.money("list_per_million", c.prices.list_per_million);
    s.money("worker_per_gib_second", c.prices.worker_per_gib_second);
  }
  {
    Section s(root, "store");
    if (auto preset = s.text("limits")) {
      if (*preset == "historic") c.store = historic_limits(c.store);
      else if (*preset != "current") throw Error(ErrorKind::kConfigError, "[store] limits: current|historic");
    }
    s.integer("read_limit_per_s", c.store.read_limit_per_s);
    s.integer("write_limit_per_s", c.store.write_limit_per_s);
    if (auto b = s.text("throttle")) {
      if (*b == "retry") c.store.throttle = ThrottleBehavior::kRetry;
      else if (*b == "reject") c.store.throttle = ThrottleBehavior::kReject;
      else throw Error(ErrorKind::kConfigError, "[store] throttle: retry|reject");
    }
    s.millis("retry_delay_ms", c.store.retry_delay);
    s.integer("max_retries", c.store.max_retries);
    s.size("max_keys_per_list", c.store.max_keys_per_list);
  }
  {
    Section s(root, "network");
    read_shaper(s, c.faas.worker_ingress);
    bool egress_burst = false;
    if (auto v = s.text("egress_burst")) egress_burst = (*v == "true" || *v == "1");
    c.faas.worker_egress = egress_burst ? c.faas.worker_ingress : c.faas.worker_ingress.without_burst();
  }
  {
    Section s(root, "faas");
    if (auto region = s.text("region")) c.faas.invocation = region_preset(*region);
    s.millis("driver_latency_ms", c.faas.invocation.driver_latency);
    s.number("driver_rate_per_s", c.faas.invocation.driver_rate_per_s);
    s.millis("worker_latency_ms", c.faas.invocation.worker_latency);
    s.number("worker_rate_per_s", c.faas.invocation.worker_rate_per_s);
    s.integer("concurrency_limit", c.faas.concurrency_limit);
    if (auto o = s.text("over_limit")) {
      if (*o == "queue") c.faas.over_limit = OverLimit::kQueue;
      else if (*o == "reject") c.faas.over_limit = OverLimit::kReject;
      else throw Error(ErrorKind::kConfigError, "[faas] over_limit: queue|reject");
    }
    s.size("max_payload_kib", c.faas.max_payload_bytes, 1024);
    s.millis("billing_granularity_ms", c.faas.billing_granularity);
    s.number("memory_budget_fraction", c.faas.memory_budget_fraction);
  }
  {
    Section s(root, "queue");
    s.millis("send_latency_ms", c.queue.send_latency);
    s.millis("poll_latency_ms", c.queue.poll_latency);
    s.size("max_batch", c.queue.max_batch);
    s.size("max_message_kib", c.queue.max_message_bytes, 1024);
  }
  {
    Section s(root, "driver");
    s.integer("memory_mib", c.driver_memory_mib);
    read_shaper(s, c.driver_network);
  }
  c.validate();
  return c;
}

}  // namespace

CloudConfig parse_cloud_config(const std::string& ini_text) {
  pt::ptree root;
  std::istringstream in(ini_text);
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::kConfigError, e.what());
  }
  return from_tree(root);
}

CloudConfig load_cloud_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kConfigError, fmt::format("cannot open config '{}'", path));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_cloud_config(buf.str());
}

std::optional<std::string> resolve_config_path(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return flag;
  if (const char* env = std::getenv("LAMBADA_LAB_CONFIG"); env && *env) return std::string(env);
  return std::nullopt;
}

}  // namespace lambada::sim
