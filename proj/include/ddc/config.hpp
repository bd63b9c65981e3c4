#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ddc/energy.hpp"
#include "ddc/errors.hpp"
#include "ddc/topology.hpp"
#include "ddc/types.hpp"

namespace ddc {

/// One availability override: the idx-th box of `kind` in `rack` starts the
/// run with `avail_units` free units instead of full capacity.
struct FixtureEntry {
  ResourceKind kind = ResourceKind::Cpu;
  int rack = 0;
  int index = 0;
  int64_t avail_units = 0;
};

struct ExperimentConfig {
  DdcConfig ddc;
  EnergyParams energy;
  std::vector<FixtureEntry> fixture;

  void validate() const {
    ddc.validate();
    energy.validate();
    for (const FixtureEntry& e : fixture) {
      if (e.rack < 0 || e.rack >= ddc.racks)
        throw ConfigError("fixture rack " + std::to_string(e.rack) +
                          " out of range");
      if (e.index < 0 || e.index >= ddc.layout[e.kind])
        throw ConfigError("fixture box index " + std::to_string(e.index) +
                          " out of range for kind " + kind_name(e.kind));
      if (e.avail_units < 0 || e.avail_units > ddc.units_per_box())
        throw ConfigError("fixture availability " +
                          std::to_string(e.avail_units) + " out of range");
    }
  }
};

inline void apply_fixture(ClusterState& state,
                          const std::vector<FixtureEntry>& fixture) {
  for (const FixtureEntry& e : fixture)
    state.set_available(state.config().box_id(e.rack, e.kind, e.index),
                        e.avail_units);
}

namespace detail {

using nlohmann::json;

inline void check_keys(const json& j, std::initializer_list<const char*> ok,
                       const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : ok)
      if (it.key() == k) known = true;
    if (!known)
      throw ConfigError(std::string("unknown key '") + it.key() + "' in " +
                        where);
  }
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline void parse_per_kind_int(const json& j, const char* key,
                               PerKind<int>& out) {
  if (!j.contains(key)) return;
  const json& m = j.at(key);
  check_keys(m, {"cpu", "ram", "sto"}, key);
  for (auto k : kAllKinds) maybe(m, kind_name(k), out[k]);
}

inline void parse_per_kind_i64(const json& j, const char* key,
                               PerKind<int64_t>& out) {
  if (!j.contains(key)) return;
  const json& m = j.at(key);
  check_keys(m, {"cpu", "ram", "sto"}, key);
  for (auto k : kAllKinds) maybe(m, kind_name(k), out[k]);
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using detail::check_keys;
  using detail::maybe;
  ExperimentConfig cfg;
  check_keys(j, {"topology", "network", "energy", "fixture"}, "config");

  if (j.contains("topology")) {
    const auto& t = j.at("topology");
    check_keys(t,
               {"racks", "boxes_per_rack", "layout", "bricks_per_box",
                "units_per_brick", "unit_size"},
               "topology");
    maybe(t, "racks", cfg.ddc.racks);
    maybe(t, "boxes_per_rack", cfg.ddc.boxes_per_rack);
    detail::parse_per_kind_int(t, "layout", cfg.ddc.layout);
    maybe(t, "bricks_per_box", cfg.ddc.bricks_per_box);
    maybe(t, "units_per_brick", cfg.ddc.units_per_brick);
    detail::parse_per_kind_i64(t, "unit_size", cfg.ddc.unit_size);
  }

  if (j.contains("network")) {
    const auto& n = j.at("network");
    check_keys(n,
               {"link_capacity_gbps", "uplinks_per_box", "uplinks_per_rack",
                "switch_ports", "bandwidth_per_unit"},
               "network");
    maybe(n, "link_capacity_gbps", cfg.ddc.link_capacity_gbps);
    maybe(n, "uplinks_per_box", cfg.ddc.uplinks_per_box);
    maybe(n, "uplinks_per_rack", cfg.ddc.uplinks_per_rack);
    if (n.contains("switch_ports")) {
      const auto& p = n.at("switch_ports");
      check_keys(p, {"box", "rack", "inter"}, "switch_ports");
      maybe(p, "box", cfg.ddc.switch_ports.box);
      maybe(p, "rack", cfg.ddc.switch_ports.rack);
      maybe(p, "inter", cfg.ddc.switch_ports.inter);
    }
    if (n.contains("bandwidth_per_unit")) {
      const auto& b = n.at("bandwidth_per_unit");
      check_keys(b, {"cpu_ram", "ram_sto"}, "bandwidth_per_unit");
      maybe(b, "cpu_ram", cfg.ddc.bandwidth_per_unit.cpu_ram);
      maybe(b, "ram_sto", cfg.ddc.bandwidth_per_unit.ram_sto);
    }
  }

  if (j.contains("energy")) {
    const auto& e = j.at("energy");
    check_keys(e,
               {"p_swcell_mw", "p_trimcell_mw", "alpha", "e_tx_pj_per_bit",
                "lat_sw_us", "time_unit_seconds"},
               "energy");
    if (e.contains("p_swcell_mw"))
      cfg.energy.p_swcell_w = e.at("p_swcell_mw").get<double>() * 1e-3;
    if (e.contains("p_trimcell_mw"))
      cfg.energy.p_trimcell_w = e.at("p_trimcell_mw").get<double>() * 1e-3;
    maybe(e, "alpha", cfg.energy.alpha);
    if (e.contains("e_tx_pj_per_bit"))
      cfg.energy.e_tx_j_per_bit = e.at("e_tx_pj_per_bit").get<double>() * 1e-12;
    if (e.contains("lat_sw_us")) {
      const auto& l = e.at("lat_sw_us");
      check_keys(l, {"box", "rack", "inter"}, "lat_sw_us");
      const char* names[3] = {"box", "rack", "inter"};
      for (size_t i = 0; i < 3; ++i)
        if (l.contains(names[i]))
          cfg.energy.lat_sw_s[i] = l.at(names[i]).get<double>() * 1e-6;
    }
    maybe(e, "time_unit_seconds", cfg.energy.time_unit_seconds);
  }

  if (j.contains("fixture")) {
    const auto& f = j.at("fixture");
    check_keys(f, {"availability"}, "fixture");
    if (f.contains("availability")) {
      for (const auto& row : f.at("availability")) {
        check_keys(row, {"kind", "rack", "index", "avail_units"},
                   "fixture.availability");
        FixtureEntry e;
        e.kind = parse_kind(row.at("kind").get<std::string>());
        e.rack = row.at("rack").get<int>();
        e.index = row.at("index").get<int>();
        e.avail_units = row.at("avail_units").get<int64_t>();
        cfg.fixture.push_back(e);
      }
    }
  }

  cfg.validate();
  return cfg;
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["topology"] = {
      {"racks", cfg.ddc.racks},
      {"boxes_per_rack", cfg.ddc.boxes_per_rack},
      {"layout",
       {{"cpu", cfg.ddc.layout[ResourceKind::Cpu]},
        {"ram", cfg.ddc.layout[ResourceKind::Ram]},
        {"sto", cfg.ddc.layout[ResourceKind::Sto]}}},
      {"bricks_per_box", cfg.ddc.bricks_per_box},
      {"units_per_brick", cfg.ddc.units_per_brick},
      {"unit_size",
       {{"cpu", cfg.ddc.unit_size[ResourceKind::Cpu]},
        {"ram", cfg.ddc.unit_size[ResourceKind::Ram]},
        {"sto", cfg.ddc.unit_size[ResourceKind::Sto]}}}};
  j["network"] = {
      {"link_capacity_gbps", cfg.ddc.link_capacity_gbps},
      {"uplinks_per_box", cfg.ddc.uplinks_per_box},
      {"uplinks_per_rack", cfg.ddc.uplinks_per_rack},
      {"switch_ports",
       {{"box", cfg.ddc.switch_ports.box},
        {"rack", cfg.ddc.switch_ports.rack},
        {"inter", cfg.ddc.switch_ports.inter}}},
      {"bandwidth_per_unit",
       {{"cpu_ram", cfg.ddc.bandwidth_per_unit.cpu_ram},
        {"ram_sto", cfg.ddc.bandwidth_per_unit.ram_sto}}}};
  j["energy"] = {{"p_swcell_mw", cfg.energy.p_swcell_w * 1e3},
                 {"p_trimcell_mw", cfg.energy.p_trimcell_w * 1e3},
                 {"alpha", cfg.energy.alpha},
                 {"e_tx_pj_per_bit", cfg.energy.e_tx_j_per_bit * 1e12},
                 {"lat_sw_us",
                  {{"box", cfg.energy.lat_sw_s[0] * 1e6},
                   {"rack", cfg.energy.lat_sw_s[1] * 1e6},
                   {"inter", cfg.energy.lat_sw_s[2] * 1e6}}},
                 {"time_unit_seconds", cfg.energy.time_unit_seconds}};
  if (!cfg.fixture.empty()) {
    nlohmann::json rows = nlohmann::json::array();
    for (const FixtureEntry& e : cfg.fixture)
      rows.push_back({{"kind", kind_name(e.kind)},
                      {"rack", e.rack},
                      {"index", e.index},
                      {"avail_units", e.avail_units}});
    j["fixture"] = {{"availability", rows}};
  }
  return j;
}

/// "table1": the 18-rack reference cluster, everything at full availability.
/// "toy": the two-rack example cluster (64-core / 64 GB / 512 GB boxes) with
/// its partially drained availability table.
inline ExperimentConfig preset_config(const std::string& name) {
  if (name == "table1") return ExperimentConfig{};
  if (name == "toy") {
    ExperimentConfig cfg;
    cfg.ddc.racks = 2;
    cfg.ddc.bricks_per_box = 4;
    cfg.ddc.units_per_brick = 4;  // 16 units per box
    cfg.ddc.unit_size = PerKind<int64_t>{{4, 4, 32}};
    using K = ResourceKind;
    cfg.fixture = {
        {K::Cpu, 0, 0, 0},  {K::Cpu, 0, 1, 0},
        {K::Cpu, 1, 0, 16}, {K::Cpu, 1, 1, 8},
        {K::Ram, 0, 0, 0},  {K::Ram, 0, 1, 4},
        {K::Ram, 1, 0, 8},  {K::Ram, 1, 1, 4},
        {K::Sto, 0, 0, 0},  {K::Sto, 0, 1, 0},
        {K::Sto, 1, 0, 8},  {K::Sto, 1, 1, 16},
    };
    return cfg;
  }
  throw ConfigError("unknown preset '" + name +
                    "' (available: table1, toy)");
}

inline ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("config " + path + ": " + e.what());
  }
  return config_from_json(j);
}

/// Builds the initial cluster/fabric pair for a run.
inline std::pair<ClusterState, Fabric> instantiate(
    const ExperimentConfig& cfg) {
  ClusterState state(cfg.ddc);
  apply_fixture(state, cfg.fixture);
  return {std::move(state), Fabric(cfg.ddc, cfg.energy.lat_sw_s)};
}

}  // namespace ddc
