#include <catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "ddc/config.hpp"
#include "ddc/fabric.hpp"

using namespace ddc;

namespace {

DdcConfig toy_ddc() { return preset_config("toy").ddc; }

VmRequest vm(int64_t cpu, int64_t ram, int64_t sto) {
  VmRequest r;
  r.cpu_cores = cpu;
  r.ram_gb = ram;
  r.sto_gb = sto;
  r.lifetime = 1.0;
  return r;
}

// Exhaustive joint-routing oracle for one rack: tries every assignment of
// the CPU<->RAM flow to a (cpu uplink, ram box, ram uplink) and the RAM<->STO
// flow to a (ram uplink of the same box, sto uplink).
bool feasible_oracle(const Fabric& f, const DdcConfig& cfg, int rack,
                     const VmRequest& req) {
  FlowDemands d = bandwidth_demands(req, cfg);
  if (d.cpu_ram_gbps <= 0 && d.ram_sto_gbps <= 0) return true;

  auto fits = [&](uint32_t id, double need) {
    return f.link(id).available_gbps() + Fabric::kSlack >= need;
  };
  bool cpu_ok = d.cpu_ram_gbps <= 0;
  if (!cpu_ok)
    for (int i = 0; i < cfg.layout[ResourceKind::Cpu] && !cpu_ok; ++i) {
      auto [a, b] = f.box_uplinks(cfg.box_id(rack, ResourceKind::Cpu, i));
      for (uint32_t id = a; id < b; ++id) cpu_ok = cpu_ok || fits(id, d.cpu_ram_gbps);
    }
  bool sto_ok = d.ram_sto_gbps <= 0;
  if (!sto_ok)
    for (int i = 0; i < cfg.layout[ResourceKind::Sto] && !sto_ok; ++i) {
      auto [a, b] = f.box_uplinks(cfg.box_id(rack, ResourceKind::Sto, i));
      for (uint32_t id = a; id < b; ++id) sto_ok = sto_ok || fits(id, d.ram_sto_gbps);
    }
  if (!cpu_ok || !sto_ok) return false;

  for (int i = 0; i < cfg.layout[ResourceKind::Ram]; ++i) {
    auto [a, b] = f.box_uplinks(cfg.box_id(rack, ResourceKind::Ram, i));
    for (uint32_t u1 = a; u1 < b; ++u1) {
      if (d.cpu_ram_gbps > 0 && !fits(u1, d.cpu_ram_gbps)) continue;
      if (d.ram_sto_gbps <= 0) return true;
      for (uint32_t u2 = a; u2 < b; ++u2) {
        double need = d.ram_sto_gbps + (u1 == u2 ? d.cpu_ram_gbps : 0.0);
        if (fits(u2, need)) return true;
      }
    }
  }
  return d.cpu_ram_gbps <= 0 && d.ram_sto_gbps <= 0;
}

}  // namespace

TEST_CASE("benes path cell counts") {
  REQUIRE(benes_path_cells(64) == 11);
  REQUIRE(benes_path_cells(512) == 17);
  REQUIRE(benes_path_cells(2) == 1);
  REQUIRE_THROWS_AS(benes_path_cells(100), ConfigError);
}

TEST_CASE("build_fabric wires every box and rack") {
  DdcConfig cfg;
  Fabric f(cfg);
  REQUIRE(f.links().size() ==
          static_cast<size_t>(cfg.total_boxes() * cfg.uplinks_per_box +
                              cfg.racks * cfg.uplinks_per_rack));
  for (const Link& l : f.links()) {
    REQUIRE(l.allocated_gbps == 0.0);
    REQUIRE(l.capacity_gbps == 200.0);
  }
  REQUIRE(f.spec(SwitchClass::Box).path_cell_count == 11);
  REQUIRE(f.spec(SwitchClass::Rack).path_cell_count == 15);
  REQUIRE(f.spec(SwitchClass::InterRack).path_cell_count == 17);
}

TEST_CASE("bandwidth demands follow per-unit rates") {
  DdcConfig cfg;  // table1 units
  auto d = bandwidth_demands(vm(8, 16, 128), cfg);
  REQUIRE(d.cpu_ram_gbps == 10.0);  // 2 cpu units x 5
  REQUIRE(d.ram_sto_gbps == 2.0);   // 2 sto units x 1

  auto zero = bandwidth_demands(vm(0, 0, 0), cfg);
  REQUIRE(zero.cpu_ram_gbps == 0.0);
  REQUIRE(zero.ram_sto_gbps == 0.0);

  auto big = bandwidth_demands(vm(32, 32, 128), cfg);
  REQUIRE(big.cpu_ram_gbps == 40.0);  // 8 cpu units x 5
  REQUIRE(big.ram_sto_gbps == 2.0);
}

TEST_CASE("first-fit routing picks the lowest feasible link per hop") {
  DdcConfig cfg = toy_ddc();
  Fabric f(cfg);
  int cpu0 = cfg.box_id(0, ResourceKind::Cpu, 0);
  int ram0 = cfg.box_id(0, ResourceKind::Ram, 0);

  auto p = find_path_first_fit(f, cpu0, ram0, 10.0);
  REQUIRE(p);
  REQUIRE(p->span == Span::IntraRack);
  REQUIRE(p->links ==
          std::vector<uint32_t>{f.box_uplinks(cpu0).first,
                                f.box_uplinks(ram0).first});

  SECTION("a nearly full first link is skipped") {
    NetPath squat;
    squat.links = {f.box_uplinks(cpu0).first};
    squat.gbps = 195.0;
    f.reserve(squat);
    auto q = find_path_first_fit(f, cpu0, ram0, 10.0);
    REQUIRE(q);
    // independently: first uplink with >= 10 free is uplink #1
    REQUIRE(q->links[0] == f.box_uplinks(cpu0).first + 1);
  }
  SECTION("a saturated hop kills the path") {
    auto [a, b] = f.box_uplinks(cpu0);
    for (uint32_t id = a; id < b; ++id) {
      NetPath squat;
      squat.links = {id};
      squat.gbps = 195.0;
      f.reserve(squat);
    }
    REQUIRE_FALSE(find_path_first_fit(f, cpu0, ram0, 10.0));
  }
}

TEST_CASE("max-avail routing picks the emptiest link per hop") {
  DdcConfig cfg = toy_ddc();
  Fabric f(cfg);
  int cpu0 = cfg.box_id(0, ResourceKind::Cpu, 0);
  int ram0 = cfg.box_id(0, ResourceKind::Ram, 0);
  auto [a, b] = f.box_uplinks(cpu0);

  SECTION("load (190, 150, 0...) prefers the least-allocated link") {
    NetPath l0, l1;
    l0.links = {a};
    l0.gbps = 190.0;
    l1.links = {a + 1};
    l1.gbps = 150.0;
    f.reserve(l0);
    f.reserve(l1);
    // remaining uplinks are empty; with only two uplinks configured this
    // degenerates, so force the others full
    for (uint32_t id = a + 2; id < b; ++id) {
      NetPath full;
      full.links = {id};
      full.gbps = 200.0;
      f.reserve(full);
    }
    auto p = find_path_max_avail(f, cpu0, ram0, 10.0);
    REQUIRE(p);
    REQUIRE(p->links[0] == a + 1);
  }
  SECTION("all equal breaks ties to the lowest id") {
    auto p = find_path_max_avail(f, cpu0, ram0, 10.0);
    REQUIRE(p);
    REQUIRE(p->links[0] == a);
  }
  SECTION("nothing fits, no path") {
    for (uint32_t id = a; id < b; ++id) {
      NetPath full;
      full.links = {id};
      full.gbps = 195.0;
      f.reserve(full);
    }
    REQUIRE_FALSE(find_path_max_avail(f, cpu0, ram0, 10.0));
  }
}

TEST_CASE("inter-rack paths traverse five switches, intra three") {
  DdcConfig cfg = toy_ddc();
  Fabric f(cfg);
  int cpu_r0 = cfg.box_id(0, ResourceKind::Cpu, 0);
  int ram_r0 = cfg.box_id(0, ResourceKind::Ram, 0);
  int ram_r1 = cfg.box_id(1, ResourceKind::Ram, 0);

  auto intra = find_path_first_fit(f, cpu_r0, ram_r0, 1.0);
  REQUIRE(intra->switches_traversed() == 3);
  REQUIRE(intra->links.size() == 2);

  auto inter = find_path_first_fit(f, cpu_r0, ram_r1, 1.0);
  REQUIRE(inter->span == Span::InterRack);
  REQUIRE(inter->switches_traversed() == 5);
  REQUIRE(inter->links.size() == 4);
  REQUIRE(f.link(inter->links[1]).tier == LinkTier::Inter);
  REQUIRE(f.link(inter->links[2]).tier == LinkTier::Inter);
}

TEST_CASE("reserve and release are exact inverses") {
  DdcConfig cfg = toy_ddc();
  Fabric f(cfg);
  Fabric fresh = f;
  std::mt19937_64 rng(5);
  std::vector<NetPath> held;

  for (int i = 0; i < 200; ++i) {
    int src = static_cast<int>(rng() % cfg.total_boxes());
    int dst = static_cast<int>(rng() % cfg.total_boxes());
    if (src == dst) continue;
    double gbps = 1.0 + static_cast<double>(rng() % 20);
    auto p = find_path_first_fit(f, src, dst, gbps);
    if (!p) continue;
    f.reserve(*p);
    held.push_back(*p);
  }
  REQUIRE_FALSE(f == fresh);
  for (const NetPath& p : held) f.release(p);
  REQUIRE(f == fresh);
}

TEST_CASE("reservation beyond capacity and double release fail") {
  DdcConfig cfg = toy_ddc();
  Fabric f(cfg);
  NetPath p;
  p.links = {0};
  p.gbps = 150.0;
  f.reserve(p);
  REQUIRE_THROWS_AS(f.reserve(p), AllocationError);  // 300 > 200
  f.release(p);
  REQUIRE_THROWS_AS(f.release(p), IntegrityError);
}

TEST_CASE("two paths sharing a link accumulate both reservations") {
  DdcConfig cfg = toy_ddc();
  Fabric f(cfg);
  NetPath p1, p2;
  p1.links = {0, 4};
  p1.gbps = 30.0;
  p2.links = {0, 8};
  p2.gbps = 50.0;
  f.reserve(p1);
  f.reserve(p2);
  // summation oracle over the reserved paths
  double expect = 0.0;
  for (const NetPath* p : {&p1, &p2})
    for (uint32_t id : p->links)
      if (id == 0) expect += p->gbps;
  REQUIRE(f.link(0).allocated_gbps == expect);
  REQUIRE(f.link(4).allocated_gbps == 30.0);
  REQUIRE(f.link(8).allocated_gbps == 50.0);
}

TEST_CASE("utilization is allocation over capacity per tier") {
  DdcConfig cfg = toy_ddc();
  Fabric f(cfg);
  auto [i0, e0] = f.utilization();
  REQUIRE(i0 == 0.0);
  REQUIRE(e0 == 0.0);

  SECTION("one tier fully saturated reads 1.0") {
    for (const Link& l : f.links())
      if (l.tier == LinkTier::Inter) {
        NetPath p;
        p.links = {l.link_id};
        p.gbps = l.capacity_gbps;
        f.reserve(p);
      }
    auto [i1, e1] = f.utilization();
    REQUIRE(i1 == 0.0);
    REQUIRE_THAT(e1, Catch::Matchers::WithinAbs(1.0, 1e-12));
  }
  SECTION("mixed reservations match a manual sum") {
    std::mt19937_64 rng(17);
    double alloc[2] = {0, 0}, cap[2] = {0, 0};
    for (const Link& l : f.links())
      cap[static_cast<size_t>(l.tier)] += l.capacity_gbps;
    for (int i = 0; i < 50; ++i) {
      uint32_t id = static_cast<uint32_t>(rng() % f.links().size());
      double gbps = static_cast<double>(rng() % 40);
      if (f.link(id).available_gbps() < gbps) continue;
      NetPath p;
      p.links = {id};
      p.gbps = gbps;
      f.reserve(p);
      alloc[static_cast<size_t>(f.link(id).tier)] += gbps;
    }
    auto [i1, e1] = f.utilization();
    REQUIRE_THAT(i1, Catch::Matchers::WithinAbs(alloc[0] / cap[0], 1e-12));
    REQUIRE_THAT(e1, Catch::Matchers::WithinAbs(alloc[1] / cap[1], 1e-12));
  }
}

TEST_CASE("max-avail never routes through a hop with a fuller sibling") {
  DdcConfig cfg = toy_ddc();
  Fabric f(cfg);
  std::mt19937_64 rng(23);
  // random background load
  for (int i = 0; i < 150; ++i) {
    uint32_t id = static_cast<uint32_t>(rng() % f.links().size());
    double gbps = static_cast<double>(rng() % 60);
    if (f.link(id).available_gbps() < gbps) continue;
    NetPath p;
    p.links = {id};
    p.gbps = gbps;
    f.reserve(p);
  }
  for (int trial = 0; trial < 100; ++trial) {
    int src = static_cast<int>(rng() % cfg.total_boxes());
    int dst = static_cast<int>(rng() % cfg.total_boxes());
    if (src == dst) continue;
    auto p = find_path_max_avail(f, src, dst, 5.0);
    if (!p) continue;
    for (uint32_t chosen : p->links) {
      // identify the hop group of this link and compare with siblings
      auto [a, b] = f.link(chosen).tier == LinkTier::Intra
                        ? f.box_uplinks(f.link(chosen).endpoint_a)
                        : f.rack_uplinks(f.link(chosen).endpoint_a);
      for (uint32_t id = a; id < b; ++id)
        REQUIRE(f.link(id).available_gbps() <=
                f.link(chosen).available_gbps() + 1e-12);
    }
  }
}

TEST_CASE("intra-rack feasibility on a fresh fabric") {
  DdcConfig cfg = toy_ddc();
  Fabric f(cfg);
  REQUIRE(intra_rack_feasible(f, cfg, 0, vm(8, 16, 128)));
  REQUIRE(intra_rack_feasible(f, cfg, 1, vm(8, 16, 128)));
}

TEST_CASE("saturated RAM uplinks make a rack infeasible") {
  DdcConfig cfg = toy_ddc();
  Fabric f(cfg);
  for (int i = 0; i < cfg.layout[ResourceKind::Ram]; ++i) {
    auto [a, b] = f.box_uplinks(cfg.box_id(0, ResourceKind::Ram, i));
    for (uint32_t id = a; id < b; ++id) {
      NetPath p;
      p.links = {id};
      p.gbps = 200.0;
      f.reserve(p);
    }
  }
  REQUIRE_FALSE(intra_rack_feasible(f, cfg, 0, vm(8, 16, 128)));
  REQUIRE(intra_rack_feasible(f, cfg, 1, vm(8, 16, 128)));
}

TEST_CASE("flows sharing one RAM uplink need the summed bandwidth") {
  // demands (10, 2); a single RAM uplink with 11 free fails, 13 free works
  DdcConfig cfg;  // 4-core cpu units, 64 GB sto units
  cfg.racks = 2;
  cfg.uplinks_per_box = 1;
  cfg.validate();

  for (double free_gbps : {11.0, 13.0}) {
    Fabric f(cfg);
    for (int i = 0; i < cfg.layout[ResourceKind::Ram]; ++i) {
      auto [a, b] = f.box_uplinks(cfg.box_id(0, ResourceKind::Ram, i));
      NetPath p;
      p.links = {a};
      p.gbps = 200.0 - free_gbps;
      f.reserve(p);
    }
    VmRequest req = vm(8, 16, 128);  // flows (10, 2)
    REQUIRE(bandwidth_demands(req, cfg).cpu_ram_gbps == 10.0);
    REQUIRE(bandwidth_demands(req, cfg).ram_sto_gbps == 2.0);
    bool got = intra_rack_feasible(f, cfg, 0, req);
    REQUIRE(got == (free_gbps >= 12.0));
    REQUIRE(got == feasible_oracle(f, cfg, 0, req));
  }
}

TEST_CASE("greedy feasibility agrees with the joint oracle on random load") {
  DdcConfig cfg = toy_ddc();
  std::mt19937_64 rng(41);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    Fabric f(cfg);
    for (const Link& l : f.links()) {
      NetPath p;
      p.links = {l.link_id};
      p.gbps = static_cast<double>(rng() % 201);
      f.reserve(p);
    }
    VmRequest req = vm(static_cast<int64_t>(rng() % 64),
                       static_cast<int64_t>(rng() % 64),
                       static_cast<int64_t>(rng() % 512));
    bool greedy = intra_rack_feasible(f, cfg, 0, req);
    bool oracle = feasible_oracle(f, cfg, 0, req);
    // greedy is sound: it never claims feasibility the oracle rejects
    if (greedy) REQUIRE(oracle);
    if (greedy == oracle) ++checked;
  }
  REQUIRE(checked > 250);  // and almost always exact
}
