#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "lambada/bench/benchmarks.hpp"
#include "lambada/lcf/reader.hpp"
#include "lambada/sim/error.hpp"

using namespace lambada;
namespace fs = std::filesystem;

namespace {

struct DataFlags {
  std::string preset = "desk";
  std::optional<std::uint64_t> files, rows_per_file, groups, target_bytes, scale;
  std::uint32_t replication = 1;
  std::uint64_t seed = 1;

  void add(CLI::App& app) {
    app.add_option("--preset", preset, "Dataset preset: desk or paper")->capture_default_str();
    app.add_option("--files", files, "Base files");
    app.add_option("--rows-per-file", rows_per_file, "Stored rows per file (overrides --bytes)");
    app.add_option("--groups", groups, "Row groups per file");
    app.add_option("--bytes", target_bytes, "Logical uncompressed size of the base data");
    app.add_option("--object-scale", scale, "Logical bytes per stored byte");
    app.add_option("--replication", replication, "Copies of every base file")->capture_default_str();
    app.add_option("--seed", seed, "Generator seed")->capture_default_str();
  }

  bench::GenSpec spec() const {
    auto s = bench::preset(preset);
    if (files) s.files = *files;
    if (rows_per_file) s.rows_per_file = *rows_per_file;
    if (groups) s.groups_per_file = *groups;
    if (target_bytes) s.target_bytes = *target_bytes;
    if (scale) s.object_scale = static_cast<std::uint32_t>(*scale);
    s.replication = replication;
    s.validate();
    return s;
  }
};

void emit(const std::optional<std::string>& out_dir, const std::map<std::string, std::string>& csvs,
          const std::string& main) {
  if (!out_dir) {
    std::cout << csvs.at(main);
    return;
  }
  fs::create_directories(*out_dir);
  for (const auto& [name, text] : csvs) {
    std::ofstream f(fs::path(*out_dir) / name, std::ios::binary);
    f << text;
    if (!f) throw Error(ErrorKind::kConfigError, fmt::format("cannot write {}/{}", *out_dir, name));
  }
  std::cerr << fmt::format("wrote {} file(s) to {}\n", csvs.size(), *out_dir);
}

std::vector<std::int64_t> parse_memories(const std::vector<std::int64_t>& m) {
  for (auto v : m)
    if (v < 128) throw Error(ErrorKind::kConfigError, fmt::format("memory {} MiB is below 128", v));
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serverless analytics lab: dataset generation and benchmarks on the simulated cloud"};
  app.require_subcommand(1);
  std::optional<std::string> config_flag, out_dir;
  app.add_option("--config", config_flag, "Cloud INI file (else $LAMBADA_LAB_CONFIG)");
  app.add_option("--out", out_dir, "Write CSV files to this directory instead of stdout");

  auto* gen = app.add_subcommand("gen", "Generate the lineitem dataset and list its objects");
  DataFlags gen_data;
  gen_data.add(*gen);
  std::optional<std::string> write_files;
  gen->add_option("--write-files", write_files, "Also write the .lcf objects to this directory");

  auto* bench_cmd = app.add_subcommand("bench", "Run one experiment");
  bench_cmd->require_subcommand(1);

  DataFlags query_data;
  std::vector<std::int64_t> memories{512, 1024, 1792, 2048, 3008};
  std::vector<std::uint64_t> files_per_worker{1};
  std::string strategy = "two-level";
  std::vector<CLI::App*> query_cmds;
  for (const char* q : {"q1", "q6"}) {
    auto* cmd = bench_cmd->add_subcommand(q, fmt::format("TPC-H {} analog over M and F, cold and hot", q));
    query_data.add(*cmd);
    cmd->add_option("--memory", memories, "Worker memory sizes in MiB")->delimiter(',')->capture_default_str();
    cmd->add_option("--files-per-worker", files_per_worker, "Values of F")->delimiter(',')->capture_default_str();
    cmd->add_option("--strategy", strategy, "Invocation: two-level or direct")->capture_default_str();
    query_cmds.push_back(cmd);
  }

  bench::ExchangeBenchConfig xchg;
  bool no_invocation = false;
  auto* xchg_cmd = bench_cmd->add_subcommand("exchange", "Repartition a dataset through the object store");
  xchg_cmd->add_option("--bytes", xchg.data_bytes, "Logical data size")->capture_default_str();
  xchg_cmd->add_option("--workers", xchg.workers, "Worker counts")->delimiter(',')->capture_default_str();
  xchg_cmd->add_option("--variant", xchg.variant, "1l, 2l, 3l with -wc or -wcf")->capture_default_str();
  xchg_cmd->add_option("--buckets", xchg.buckets, "Buckets to spread objects over")->capture_default_str();
  xchg_cmd->add_option("--memory", xchg.memory_mib, "Worker memory in MiB")->capture_default_str();
  xchg_cmd->add_option("--records", xchg.records_per_worker, "Stored records per worker")->capture_default_str();
  xchg_cmd->add_option("--seed", xchg.seed, "Key seed")->capture_default_str();
  xchg_cmd->add_flag("--no-invocation", no_invocation, "Start every worker at time zero");

  bench::InvokeBenchConfig inv;
  std::vector<std::string> strategies{"two-level", "direct"};
  auto* inv_cmd = bench_cmd->add_subcommand("invoke", "Start P workers directly and through a two-level tree");
  inv_cmd->add_option("--workers", inv.workers, "P")->capture_default_str();
  inv_cmd->add_option("--strategy", strategies, "Strategies to run")->delimiter(',')->capture_default_str();

  bench::ScanSweepConfig sweep;
  auto* sweep_cmd = bench_cmd->add_subcommand("scan-sweep", "Download bandwidth over chunk size and connections");
  sweep_cmd->add_option("--bytes", sweep.object_bytes, "Object size (multiple of 1 MiB)")->capture_default_str();
  sweep_cmd->add_option("--chunk-mib", sweep.chunk_mib, "Chunk sizes")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--connections", sweep.connections, "Connection counts")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--memory", sweep.memory_mib, "Worker memory in MiB")->capture_default_str();

  std::optional<std::string> presets_path;
  auto* econ_cmd = bench_cmd->add_subcommand("econ", "Job-scoped and always-on cost curves");
  econ_cmd->add_option("--presets", presets_path, "Economics INI (see config/econ.ini)");

  DataFlags suite_data;
  auto* all_cmd = bench_cmd->add_subcommand("all", "Every experiment with default parameters");
  suite_data.add(*all_cmd);
  all_cmd->add_option("--presets", presets_path, "Economics INI");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto config_path = sim::resolve_config_path(config_flag);
    const sim::CloudConfig cloud = config_path ? sim::load_cloud_config(*config_path) : sim::CloudConfig{};

    if (*gen) {
      const auto spec = gen_data.spec();
      const auto files = bench::lineitem_files(spec, gen_data.seed);
      sim::Cloud c(cloud);
      const auto data = bench::install(c.store(), spec, files);
      std::string csv = "key,rows,row_groups,stored_bytes,logical_bytes\n";
      for (std::size_t i = 0; i < data.keys.size(); ++i) {
        const auto& bytes = files[i / spec.replication];
        const auto footer = lcf::read_footer(bytes);
        const auto scale = lcf::file_scale(bytes, spec.object_scale);
        csv += fmt::format("{},{},{},{},{}\n", data.keys[i], footer.total_rows(), footer.row_groups.size(),
                           bytes.size(), scale.logical(bytes.size()));
        if (write_files) {
          const auto path = fs::path(*write_files) / data.keys[i];
          fs::create_directories(path.parent_path());
          std::ofstream f(path, std::ios::binary);
          f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        }
      }
      emit(out_dir, {{"gen.csv", csv}}, "gen.csv");
      return 0;
    }

    for (std::size_t i = 0; i < query_cmds.size(); ++i) {
      if (!*query_cmds[i]) continue;
      bench::QuerySweepConfig q;
      q.query = bench::parse_query(query_cmds[i]->get_name());
      q.data = query_data.spec();
      q.seed = query_data.seed;
      q.memories = parse_memories(memories);
      q.files_per_worker = files_per_worker;
      q.strategy = invoke::parse_strategy(strategy);
      q.cloud = cloud;
      const auto result = bench::run_query_sweep(q);
      std::string workers;
      for (const auto& r : result.runs) {
        std::string w = r.report.workers_csv();
        const auto nl = w.find('\n');
        if (workers.empty()) workers = "memory_mib,files_per_worker,run," + w.substr(0, nl + 1);
        for (std::size_t pos = nl + 1; pos < w.size();) {
          const auto end = w.find('\n', pos);
          workers += fmt::format("{},{},{},{}\n", r.memory_mib, r.files_per_worker, r.hot ? "hot" : "cold",
                                 w.substr(pos, end - pos));
          pos = end + 1;
        }
      }
      const std::string name(bench::query_name(q.query));
      emit(out_dir, {{name + ".csv", result.csv()}, {name + "-workers.csv", workers}}, name + ".csv");
      return 0;
    }

    if (*xchg_cmd) {
      xchg.include_invocation = !no_invocation;
      xchg.cloud = cloud;
      const auto result = bench::run_exchange_bench(xchg);
      std::map<std::string, std::string> csvs{{"exchange.csv", result.csv()}};
      for (const auto& r : result.runs) {
        csvs[fmt::format("exchange-w{}-workers.csv", r.workers)] = r.result.workers_csv();
        csvs[fmt::format("exchange-w{}-trace.csv", r.workers)] = r.result.trace_csv();
      }
      emit(out_dir, csvs, "exchange.csv");
      return 0;
    }

    if (*inv_cmd) {
      if (config_path) inv.cloud = cloud;
      inv.strategies.clear();
      for (const auto& s : strategies) inv.strategies.push_back(invoke::parse_strategy(s));
      const auto result = bench::run_invoke_bench(inv);
      emit(out_dir, {{"invoke.csv", result.summary_csv()}, {"invoke-phases.csv", result.phases_csv()}}, "invoke.csv");
      return 0;
    }

    if (*sweep_cmd) {
      sweep.cloud = cloud;
      emit(out_dir, {{"scan-sweep.csv", bench::run_scan_sweep(sweep).csv()}}, "scan-sweep.csv");
      return 0;
    }

    const auto presets = presets_path ? econ::load_presets(*presets_path) : econ::default_presets();
    if (*econ_cmd) {
      const auto r = bench::run_econ(presets);
      emit(out_dir,
           {{"econ-job-scoped.csv", r.job_scoped}, {"econ-always-on.csv", r.always_on},
            {"econ-crossover.csv", r.crossover}},
           "econ-job-scoped.csv");
      return 0;
    }

    if (*all_cmd) {
      bench::SuiteConfig suite;
      suite.data = suite_data.spec();
      suite.seed = suite_data.seed;
      suite.cloud = cloud;
      suite.econ = presets;
      const auto csvs = bench::run_suite(suite);
      if (!out_dir) {
        for (const auto& [name, text] : csvs) std::cout << "# " << name << '\n' << text;
        return 0;
      }
      emit(out_dir, csvs, "");
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "lambada-lab: " << e.what() << '\n';
    return e.kind() == ErrorKind::kConfigError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "lambada-lab: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
