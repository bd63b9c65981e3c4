#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ddc/fabric.hpp"
#include "ddc/topology.hpp"
#include "ddc/types.hpp"

namespace ddc {

enum class Algorithm : uint8_t { Nulb = 0, Nalb = 1, Risa = 2, RisaBf = 3 };

inline constexpr std::array<Algorithm, 4> kAllAlgorithms = {
    Algorithm::Nulb, Algorithm::Nalb, Algorithm::Risa, Algorithm::RisaBf};

inline const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::Nulb: return "nulb";
    case Algorithm::Nalb: return "nalb";
    case Algorithm::Risa: return "risa";
    case Algorithm::RisaBf: return "risa-bf";
  }
  return "?";
}

inline std::optional<Algorithm> parse_algorithm(const std::string& s) {
  for (auto a : kAllAlgorithms)
    if (s == algorithm_name(a)) return a;
  return std::nullopt;
}

enum class FitRule : uint8_t { FirstFit = 0, BestFit = 1 };

/// A committed VM assignment: one box per kind, the allocated units, and the
/// reserved routes of the two flows (absent when a flow has zero bandwidth).
struct Placement {
  int64_t vm_id = 0;
  PerKind<int> box_of{};
  PerKind<int64_t> units{};
  std::optional<NetPath> path_cpu_ram;
  std::optional<NetPath> path_ram_sto;
  Span span = Span::IntraRack;
};

/// Rack-level round-robin position, persisted across requests in one run.
struct RoundRobinCursor {
  std::optional<int> last_rack_index;
};

/// Per-run scheduler state: the rack cursor plus, for every (rack, kind),
/// the kind-local index of the box that last received an allocation. The
/// first-fit scan starts at that box and wraps, so racks fill box by box
/// instead of re-probing drained low-id boxes on every request.
/// Per-kind lists of racks owning at least one box that could hold the
/// request's demand of that kind alone.
struct SuperRack {
  PerKind<std::vector<int>> racks;
};

struct SchedulerContext {
  RoundRobinCursor cursor;
  std::vector<int> next_fit_box;
  SuperRack all_racks;  // standalone NULB/NALB search the whole cluster

  SchedulerContext() = default;
  explicit SchedulerContext(const DdcConfig& cfg)
      : next_fit_box(static_cast<size_t>(cfg.racks) * kKindCount, 0) {
    for (auto k : kAllKinds) {
      all_racks.racks[k].resize(cfg.racks);
      for (int r = 0; r < cfg.racks; ++r) all_racks.racks[k][r] = r;
    }
  }

  int& nf(int rack, ResourceKind k) {
    return next_fit_box[rack * kKindCount + static_cast<size_t>(k)];
  }
};

/// Racks able to host the entire VM: every kind's fullest box has enough
/// free units. Ascending rack id.
inline std::vector<int> build_intra_rack_pool(const ClusterState& state,
                                              const VmRequest& req) {
  const DdcConfig& cfg = state.config();
  PerKind<int64_t> need = units_required(req, cfg);
  std::vector<int> pool;
  for (int r = 0; r < cfg.racks; ++r) {
    bool ok = true;
    for (auto k : kAllKinds)
      if (state.box(state.rack_max_box(r, k)).available_units < need[k]) {
        ok = false;
        break;
      }
    if (ok) pool.push_back(r);
  }
  return pool;
}

inline SuperRack build_super_rack(const ClusterState& state,
                                  const VmRequest& req) {
  const DdcConfig& cfg = state.config();
  PerKind<int64_t> need = units_required(req, cfg);
  SuperRack sr;
  for (int r = 0; r < cfg.racks; ++r)
    for (auto k : kAllKinds)
      if (state.box(state.rack_max_box(r, k)).available_units >= need[k])
        sr.racks[k].push_back(r);
  return sr;
}

namespace detail {

/// Scarcest kind by contention ratio; ties resolve CPU > RAM > STO.
inline ResourceKind most_contended(const ClusterState& state,
                                   const VmRequest& req) {
  PerKind<double> cr = contention_ratios(state, req);
  ResourceKind best = ResourceKind::Cpu;
  for (auto k : kAllKinds)
    if (cr[k] > cr[best]) best = k;
  return best;
}

inline double box_uplink_avail(const Fabric& f, int box_id) {
  auto [first, last] = f.box_uplinks(box_id);
  double sum = 0.0;
  for (uint32_t id = first; id < last; ++id)
    sum += f.link(id).available_gbps();
  return sum;
}

/// First box of `kind` in `rack` with enough units, in ascending id order
/// (network-unaware) or by descending free uplink bandwidth (network-aware).
inline std::optional<int> probe_rack(const ClusterState& state,
                                     const Fabric& fabric, int rack,
                                     ResourceKind kind, int64_t need,
                                     bool bandwidth_order) {
  const DdcConfig& cfg = state.config();
  if (!bandwidth_order) {
    for (int i = 0; i < cfg.layout[kind]; ++i) {
      int b = cfg.box_id(rack, kind, i);
      if (state.box(b).available_units >= need) return b;
    }
    return std::nullopt;
  }
  std::optional<int> best;
  double best_bw = -1.0;
  for (int i = 0; i < cfg.layout[kind]; ++i) {
    int b = cfg.box_id(rack, kind, i);
    if (state.box(b).available_units < need) continue;
    double bw = box_uplink_avail(fabric, b);
    if (bw > best_bw) {
      best_bw = bw;
      best = b;
    }
  }
  return best;
}

/// Reserves the two flows of a placement, CPU<->RAM first. Returns false and
/// leaves the fabric untouched when either flow cannot be routed.
inline bool reserve_flows(Fabric& fabric, const FlowDemands& d,
                          const PerKind<int>& box_of, PathPolicy policy,
                          std::optional<NetPath>& cpu_ram,
                          std::optional<NetPath>& ram_sto) {
  cpu_ram.reset();
  ram_sto.reset();
  if (d.cpu_ram_gbps > 0) {
    cpu_ram = find_path(fabric, box_of[ResourceKind::Cpu],
                        box_of[ResourceKind::Ram], d.cpu_ram_gbps, policy);
    if (!cpu_ram) return false;
    fabric.reserve(*cpu_ram);
  }
  if (d.ram_sto_gbps > 0) {
    ram_sto = find_path(fabric, box_of[ResourceKind::Ram],
                        box_of[ResourceKind::Sto], d.ram_sto_gbps, policy);
    if (!ram_sto) {
      if (cpu_ram) fabric.release(*cpu_ram);
      cpu_ram.reset();
      return false;
    }
    fabric.reserve(*ram_sto);
  }
  return true;
}

inline Span span_of(const DdcConfig& cfg, const PerKind<int>& box_of) {
  int r0 = cfg.rack_of_box(box_of[ResourceKind::Cpu]);
  for (auto k : kAllKinds)
    if (cfg.rack_of_box(box_of[k]) != r0) return Span::InterRack;
  return Span::IntraRack;
}

inline Placement commit(ClusterState& state, const VmRequest& req,
                        const PerKind<int>& box_of,
                        const PerKind<int64_t>& need,
                        std::optional<NetPath> cpu_ram,
                        std::optional<NetPath> ram_sto) {
  for (auto k : kAllKinds) state.allocate(box_of[k], need[k]);
  Placement p;
  p.vm_id = req.vm_id;
  p.box_of = box_of;
  p.units = need;
  p.path_cpu_ram = std::move(cpu_ram);
  p.path_ram_sto = std::move(ram_sto);
  p.span = span_of(state.config(), box_of);
  return p;
}

}  // namespace detail

/// Locality-based baseline. Picks the scarcest kind's first available box,
/// then breadth-first for the remaining kinds: the scarce box's own rack
/// first, then the other candidate racks in ascending order. The
/// network-aware variant (NALB) reorders boxes at each frontier by
/// descending free uplink bandwidth and routes on the fullest links.
/// Returns nothing -- and changes nothing -- when compute or network
/// allocation fails.
inline std::optional<Placement> nulb(ClusterState& state, Fabric& fabric,
                                     const SuperRack& candidates,
                                     const VmRequest& req, PathPolicy policy) {
  const DdcConfig& cfg = state.config();
  PerKind<int64_t> need = units_required(req, cfg);
  bool network_aware = policy == PathPolicy::MaxAvail;
  ResourceKind res_max = detail::most_contended(state, req);

  std::optional<int> home;
  for (int r : candidates.racks[res_max]) {
    for (int i = 0; i < cfg.layout[res_max]; ++i) {
      int b = cfg.box_id(r, res_max, i);
      if (state.box(b).available_units >= need[res_max]) {
        home = b;
        break;
      }
    }
    if (home) break;
  }
  if (!home) return std::nullopt;

  int home_rack = cfg.rack_of_box(*home);
  PerKind<int> box_of{};
  box_of[res_max] = *home;
  for (auto k : kAllKinds) {
    if (k == res_max) continue;
    std::optional<int> got = detail::probe_rack(state, fabric, home_rack, k,
                                                need[k], network_aware);
    if (!got) {
      for (int r : candidates.racks[k]) {
        if (r == home_rack) continue;
        got = detail::probe_rack(state, fabric, r, k, need[k], network_aware);
        if (got) break;
      }
    }
    if (!got) return std::nullopt;
    box_of[k] = *got;
  }

  FlowDemands d = bandwidth_demands(req, cfg);
  std::optional<NetPath> cpu_ram, ram_sto;
  if (!detail::reserve_flows(fabric, d, box_of, policy, cpu_ram, ram_sto))
    return std::nullopt;
  return detail::commit(state, req, box_of, need, std::move(cpu_ram),
                        std::move(ram_sto));
}

/// Round-robin intra-rack-friendly scheduler. Builds the pool of racks able
/// to host the whole VM, visits them round-robin from the cursor, and places
/// all three boxes inside the first rack whose uplinks can carry both flows.
/// Box choice inside the rack: first-fit resumes from the box that last
/// received an allocation (wrapping); best-fit takes the fullest box that
/// still fits. When the pool is empty or no pool rack can route the flows,
/// falls back to NULB over the per-kind SUPER_RACK lists, which may go
/// inter-rack.
inline std::optional<Placement> risa(ClusterState& state, Fabric& fabric,
                                     SchedulerContext& ctx,
                                     const VmRequest& req, FitRule fit) {
  const DdcConfig& cfg = state.config();
  PerKind<int64_t> need = units_required(req, cfg);
  FlowDemands d = bandwidth_demands(req, cfg);

  // Round-robin over the pool without materializing it: racks are visited in
  // id order starting after the cursor, and the pool-membership test
  // (every kind's fullest box holds the demand) is applied per rack. A rack
  // whose picked boxes cannot route both flows counts as failing the
  // network check and the walk moves on.
  int start = ctx.cursor.last_rack_index ? *ctx.cursor.last_rack_index + 1 : 0;
  for (int step = 0; step < cfg.racks; ++step) {
    int r = (start + step) % cfg.racks;
    bool fits = true;
    for (auto k : kAllKinds)
      if (state.box(state.rack_max_box(r, k)).available_units < need[k]) {
        fits = false;
        break;
      }
    if (!fits) continue;

    PerKind<int> box_of{};
    PerKind<int> local{};
    for (auto k : kAllKinds) {
      int n = cfg.layout[k];
      int pick = 0;
      if (fit == FitRule::FirstFit) {
        int c = ctx.nf(r, k) % n;
        for (int off = 0; off < n; ++off) {
          int j = (c + off) % n;
          if (state.box(cfg.box_id(r, k, j)).available_units >= need[k]) {
            pick = j;
            break;
          }
        }
      } else {
        int64_t best_avail = -1;
        for (int j = 0; j < n; ++j) {
          int64_t avail = state.box(cfg.box_id(r, k, j)).available_units;
          if (avail >= need[k] && (best_avail < 0 || avail < best_avail)) {
            best_avail = avail;
            pick = j;
          }
        }
      }
      local[k] = pick;
      box_of[k] = cfg.box_id(r, k, pick);
    }

    std::optional<NetPath> cpu_ram, ram_sto;
    if (!detail::reserve_flows(fabric, d, box_of, PathPolicy::FirstFit,
                               cpu_ram, ram_sto))
      continue;  // this rack cannot route the flows; try the next one

    if (fit == FitRule::FirstFit)
      for (auto k : kAllKinds) ctx.nf(r, k) = local[k];
    ctx.cursor.last_rack_index = r;
    return detail::commit(state, req, box_of, need, std::move(cpu_ram),
                          std::move(ram_sto));
  }

  SuperRack sr = build_super_rack(state, req);
  return nulb(state, fabric, sr, req, PathPolicy::FirstFit);
}

/// Entry point used by the event loop.
inline std::optional<Placement> schedule_vm(Algorithm algo, ClusterState& state,
                                            Fabric& fabric,
                                            SchedulerContext& ctx,
                                            const VmRequest& req) {
  switch (algo) {
    case Algorithm::Nulb:
      return nulb(state, fabric, ctx.all_racks, req, PathPolicy::FirstFit);
    case Algorithm::Nalb:
      return nulb(state, fabric, ctx.all_racks, req, PathPolicy::MaxAvail);
    case Algorithm::Risa:
      return risa(state, fabric, ctx, req, FitRule::FirstFit);
    case Algorithm::RisaBf:
      return risa(state, fabric, ctx, req, FitRule::BestFit);
  }
  return std::nullopt;
}

}  // namespace ddc
