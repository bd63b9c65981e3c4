#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ddc/config.hpp"
#include "ddc/report.hpp"
#include "ddc/simulation.hpp"
#include "ddc/workload.hpp"

namespace fs = std::filesystem;

namespace {

struct GenOptions {
  ddc::SyntheticSpec spec;
  std::string out_path;
};

int cmd_gen(const GenOptions& opt) {
  auto workload = ddc::gen_synthetic(opt.spec);
  ddc::write_workload_csv(opt.out_path, workload);
  std::cout << "wrote " << workload.size() << " requests to " << opt.out_path
            << "\n";
  return 0;
}

struct RunOptions {
  std::string preset = "table1";
  std::string config_path;
  std::vector<std::string> algos;
  std::string workload_path;
  bool synthetic = false;
  uint64_t seed = 0;
  int64_t count = 2500;
  int64_t take = -1;
  std::string out_dir = ".";
  double time_unit_seconds = -1.0;
  int jobs = 1;
};

int cmd_run(const RunOptions& opt) {
  ddc::ExperimentConfig cfg = opt.config_path.empty()
                                  ? ddc::preset_config(opt.preset)
                                  : ddc::load_config_file(opt.config_path);
  if (opt.time_unit_seconds > 0)
    cfg.energy.time_unit_seconds = opt.time_unit_seconds;

  std::vector<ddc::Algorithm> algos;
  if (opt.algos.empty()) {
    algos.assign(ddc::kAllAlgorithms.begin(), ddc::kAllAlgorithms.end());
  } else {
    for (const std::string& name : opt.algos) {
      auto a = ddc::parse_algorithm(name);
      if (!a)
        throw ddc::ConfigError(
            "unknown algorithm '" + name +
            "' (valid names: nulb, nalb, risa, risa-bf)");
      algos.push_back(*a);
    }
  }

  std::vector<ddc::VmRequest> workload;
  if (opt.synthetic) {
    ddc::SyntheticSpec spec;
    spec.rng_seed = opt.seed;
    spec.vm_count = opt.count;
    workload = ddc::gen_synthetic(spec);
  } else if (!opt.workload_path.empty()) {
    workload = ddc::load_trace(opt.workload_path, &cfg.ddc);
  } else {
    throw ddc::ConfigError("no workload: pass --workload FILE or --synthetic");
  }
  if (opt.take >= 0)
    workload = ddc::take_prefix(std::move(workload),
                                static_cast<size_t>(opt.take));

  fs::create_directories(opt.out_dir);

  auto one_run = [&](ddc::Algorithm algo) {
    auto [state, fabric] = ddc::instantiate(cfg);
    return ddc::run_simulation(std::move(state), std::move(fabric), algo,
                               workload, cfg.energy);
  };

  std::vector<ddc::RunResult> results(algos.size());
  if (opt.jobs > 1) {
    std::vector<std::future<ddc::RunResult>> futs;
    futs.reserve(algos.size());
    for (auto algo : algos)
      futs.push_back(std::async(std::launch::async, one_run, algo));
    for (size_t i = 0; i < futs.size(); ++i) results[i] = futs[i].get();
  } else {
    for (size_t i = 0; i < algos.size(); ++i) results[i] = one_run(algos[i]);
  }

  std::vector<ddc::Metrics> all_metrics;
  for (size_t i = 0; i < algos.size(); ++i) {
    const char* name = ddc::algorithm_name(algos[i]);
    fs::path mpath = fs::path(opt.out_dir) / (std::string("metrics_") + name + ".json");
    std::ofstream mf(mpath, std::ios::binary);
    if (!mf) throw ddc::ReportError("cannot write " + mpath.string());
    mf << ddc::metrics_to_json(results[i].metrics).dump(2) << "\n";

    fs::path ppath =
        fs::path(opt.out_dir) / (std::string("placements_") + name + ".csv");
    std::ofstream pf(ppath, std::ios::binary);
    if (!pf) throw ddc::ReportError("cannot write " + ppath.string());
    ddc::write_placement_csv(pf, cfg.ddc, name, results[i].log);

    all_metrics.push_back(results[i].metrics);
  }

  std::string table = ddc::merge_reports(all_metrics);
  std::ofstream sf(fs::path(opt.out_dir) / "summary.csv", std::ios::binary);
  sf << table;
  std::cout << table;
  return 0;
}

struct ReportOptions {
  std::vector<std::string> inputs;
  std::string out_path;
};

int cmd_report(const ReportOptions& opt) {
  std::vector<ddc::Metrics> rows;
  for (const std::string& path : opt.inputs)
    rows.push_back(ddc::load_metrics_file(path));
  std::string table = ddc::merge_reports(rows);
  if (opt.out_path.empty()) {
    std::cout << table;
  } else {
    std::ofstream f(opt.out_path, std::ios::binary);
    if (!f) throw ddc::ReportError("cannot write " + opt.out_path);
    f << table;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "ddcsim: VM placement simulator for optically switched disaggregated "
      "datacenters (NULB / NALB / RISA / RISA-BF)"};
  app.require_subcommand(1);

  GenOptions gen;
  CLI::App* g = app.add_subcommand("gen", "generate a synthetic workload CSV");
  g->add_option("--seed", gen.spec.rng_seed, "RNG seed");
  g->add_option("--count", gen.spec.vm_count, "number of VMs");
  g->add_option("--mean-interarrival", gen.spec.mean_interarrival,
                "mean Poisson interarrival (time units)");
  g->add_option("--base-lifetime", gen.spec.base_lifetime,
                "lifetime of the first 100 requests");
  g->add_option("--lifetime-step", gen.spec.lifetime_step,
                "lifetime increment per 100 requests");
  g->add_option("--out", gen.out_path, "output CSV path")->required();

  RunOptions run;
  CLI::App* r = app.add_subcommand("run", "run one or more algorithms");
  auto* preset_opt =
      r->add_option("--preset", run.preset, "named preset: table1 | toy");
  r->add_option("--config", run.config_path, "JSON config file")
      ->excludes(preset_opt);
  r->add_option("--algo", run.algos,
                "algorithm (repeatable): nulb | nalb | risa | risa-bf; "
                "default all four");
  r->add_option("--workload", run.workload_path, "workload CSV");
  r->add_flag("--synthetic", run.synthetic, "generate the workload in-process");
  r->add_option("--seed", run.seed, "synthetic workload seed");
  r->add_option("--count", run.count, "synthetic workload size");
  r->add_option("--take", run.take, "use only the first N requests");
  r->add_option("--out", run.out_dir, "output directory");
  r->add_option("--time-unit-seconds", run.time_unit_seconds,
                "seconds per simulation time unit");
  r->add_option("--jobs", run.jobs, "run algorithms concurrently");

  ReportOptions rep;
  CLI::App* p = app.add_subcommand(
      "report", "merge metrics JSON files into a comparison CSV");
  p->add_option("inputs", rep.inputs, "metrics JSON files")->required();
  p->add_option("--out", rep.out_path, "output CSV (default stdout)");

  try {
    app.parse(argc, argv);
    if (g->parsed()) return cmd_gen(gen);
    if (r->parsed()) return cmd_run(run);
    if (p->parsed()) return cmd_report(rep);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ddc::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ddc::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
