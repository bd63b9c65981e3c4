#include <catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "ddc/config.hpp"
#include "ddc/report.hpp"

using namespace ddc;

namespace {

Metrics sample_metrics(const char* algo) {
  Metrics m;
  m.algorithm = algo;
  m.requests = 100;
  m.placed_count = 98;
  m.dropped_count = 2;
  m.inter_rack_count = 10;
  m.avg_cpu_ram_rtt_ns = 132.4;
  m.utilization = PerKind<double>{{0.5, 0.6, 0.3}};
  m.net_util_intra = 0.12;
  m.net_util_inter = 0.03;
  m.energy.switch_energy_j = 1000.0;
  m.energy.transceiver_energy_j = 500.0;
  m.average_power_w = 42.0;
  m.span_time_units = 1234.0;
  m.sched_wall_s = 0.25;
  return m;
}

}  // namespace

TEST_CASE("metrics survive a json round-trip") {
  Metrics m = sample_metrics("risa");
  Metrics back = metrics_from_json(metrics_to_json(m));
  REQUIRE(back.algorithm == "risa");
  REQUIRE(back.placed_count == 98);
  REQUIRE(back.inter_rack_count == 10);
  REQUIRE(back.avg_cpu_ram_rtt_ns == m.avg_cpu_ram_rtt_ns);
  REQUIRE(back.energy.switch_energy_j == 1000.0);
  REQUIRE(back.net_util_intra == 0.12);

  m.avg_cpu_ram_rtt_ns.reset();
  back = metrics_from_json(metrics_to_json(m));
  REQUIRE_FALSE(back.avg_cpu_ram_rtt_ns.has_value());
}

TEST_CASE("merged report has one row per metrics document") {
  SECTION("single input") {
    std::string csv = merge_reports({sample_metrics("nulb")});
    std::istringstream is(csv);
    std::string line;
    int rows = 0;
    while (std::getline(is, line))
      if (!line.empty()) ++rows;
    REQUIRE(rows == 2);  // header + 1
    REQUIRE(csv.find("nulb,100,98,2,10,10,") != std::string::npos);
  }
  SECTION("four inputs share the column set") {
    std::vector<Metrics> rows;
    for (const char* a : {"nulb", "nalb", "risa", "risa-bf"})
      rows.push_back(sample_metrics(a));
    std::string csv = merge_reports(rows);
    std::istringstream is(csv);
    std::string header;
    std::getline(is, header);
    size_t cols = std::count(header.begin(), header.end(), ',') + 1;
    REQUIRE(cols == report_columns().size());
    std::string line;
    int n = 0;
    while (std::getline(is, line))
      if (!line.empty()) {
        REQUIRE(std::count(line.begin(), line.end(), ',') + 1 == cols);
        ++n;
      }
    REQUIRE(n == 4);
  }
}

TEST_CASE("a metrics file missing fields is rejected by name") {
  std::string path = "bad_metrics_test.json";
  {
    std::ofstream f(path);
    f << "{\"algorithm\": \"nulb\"}\n";
  }
  REQUIRE_THROWS_WITH(load_metrics_file(path),
                      Catch::Matchers::ContainsSubstring(path));
  std::remove(path.c_str());
}

TEST_CASE("placement csv carries per-kind box ids and drop flags") {
  auto cfg = preset_config("toy");
  DdcConfig& ddc = cfg.ddc;

  std::vector<PlacementRecord> log(2);
  log[0].request.vm_id = 0;
  log[0].placed = true;
  log[0].placement.emplace();
  log[0].placement->box_of[ResourceKind::Cpu] =
      ddc.box_id(1, ResourceKind::Cpu, 0);
  log[0].placement->box_of[ResourceKind::Ram] =
      ddc.box_id(1, ResourceKind::Ram, 0);
  log[0].placement->box_of[ResourceKind::Sto] =
      ddc.box_id(1, ResourceKind::Sto, 0);
  log[0].placement->span = Span::IntraRack;
  NetPath p;
  p.links = {3, 9};
  p.gbps = 10;
  log[0].placement->path_cpu_ram = p;
  log[1].request.vm_id = 1;
  log[1].placed = false;

  std::ostringstream os;
  write_placement_csv(os, ddc, "risa", log);
  std::string out = os.str();
  REQUIRE(out.find(kPlacementCsvHeader) == 0);
  REQUIRE(out.find("0,risa,2,2,2,intra_rack,3|9,,0") != std::string::npos);
  REQUIRE(out.find("1,risa,,,,,,,1") != std::string::npos);
}

TEST_CASE("config json round-trips including fixtures") {
  ExperimentConfig cfg = preset_config("toy");
  nlohmann::json j = config_to_json(cfg);
  ExperimentConfig back = config_from_json(j);
  REQUIRE(back.ddc.racks == 2);
  REQUIRE(back.ddc.unit_size[ResourceKind::Sto] == 32);
  REQUIRE(back.fixture.size() == cfg.fixture.size());
  REQUIRE(back.energy.p_trimcell_w == cfg.energy.p_trimcell_w);

  SECTION("unknown keys are reported") {
    j["topology"]["rackz"] = 3;
    REQUIRE_THROWS_WITH(config_from_json(j),
                        Catch::Matchers::ContainsSubstring("rackz"));
  }
  SECTION("energy units convert from milli/pico/micro") {
    nlohmann::json e = {{"energy", {{"p_swcell_mw", 13.75}}}};
    REQUIRE(config_from_json(e).energy.p_swcell_w == 13.75e-3);
  }
  SECTION("unknown preset name") {
    REQUIRE_THROWS_AS(preset_config("table9"), ConfigError);
  }
}
