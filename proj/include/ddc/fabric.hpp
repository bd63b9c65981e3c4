#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ddc/errors.hpp"
#include "ddc/topology.hpp"
#include "ddc/types.hpp"

namespace ddc {

enum class LinkTier : uint8_t { Intra = 0, Inter = 1 };
enum class SwitchClass : uint8_t { Box = 0, Rack = 1, InterRack = 2 };
enum class Span : uint8_t { IntraRack = 0, InterRack = 1 };

inline const char* span_name(Span s) {
  return s == Span::IntraRack ? "intra_rack" : "inter_rack";
}

/// One optical link. Intra tier: box <-> rack switch (endpoint_a = box id,
/// endpoint_b = rack id). Inter tier: rack switch <-> inter-rack switch
/// (endpoint_a = rack id, endpoint_b = 0).
struct Link {
  uint32_t link_id = 0;
  LinkTier tier = LinkTier::Intra;
  int endpoint_a = 0;
  int endpoint_b = 0;
  double capacity_gbps = 200.0;
  double allocated_gbps = 0.0;

  double available_gbps() const { return capacity_gbps - allocated_gbps; }
};

/// Benes path length: one 2x2 cell per stage, 2*log2(ports) - 1 stages.
inline int benes_path_cells(int port_count) {
  if (port_count < 2 || (port_count & (port_count - 1)) != 0)
    throw ConfigError("switch port count must be a power of two, got " +
                      std::to_string(port_count));
  int stages = 0;
  for (int p = port_count; p > 1; p >>= 1) ++stages;
  return 2 * stages - 1;
}

struct SwitchSpec {
  SwitchClass switch_class = SwitchClass::Box;
  int port_count = 0;
  int path_cell_count = 0;  // cells crossed by one path through the switch
  double switch_latency_s = 0.0;
};

/// An allocated route: ordered link ids plus the reserved rate. The switch
/// sequence is implied by the span (box,rack,box intra; box,rack,inter,rack,
/// box across racks) and an empty link list short-circuits same-box flows.
struct NetPath {
  std::vector<uint32_t> links;
  Span span = Span::IntraRack;
  double gbps = 0.0;

  int switches_traversed() const {
    if (links.empty()) return 0;
    return span == Span::IntraRack ? 3 : 5;
  }
};

/// Per-VM bandwidth of the two flows: CPU<->RAM scales with CPU units,
/// RAM<->STO with storage units.
struct FlowDemands {
  double cpu_ram_gbps = 0.0;
  double ram_sto_gbps = 0.0;
};

inline FlowDemands bandwidth_demands(const VmRequest& req,
                                     const DdcConfig& cfg) {
  FlowDemands d;
  d.cpu_ram_gbps = cfg.bandwidth_per_unit.cpu_ram *
                   static_cast<double>(units_required(req.cpu_cores,
                                                      ResourceKind::Cpu, cfg));
  d.ram_sto_gbps = cfg.bandwidth_per_unit.ram_sto *
                   static_cast<double>(units_required(req.sto_gb,
                                                      ResourceKind::Sto, cfg));
  return d;
}

enum class PathPolicy : uint8_t { FirstFit = 0, MaxAvail = 1 };

/// Two-tier optical fabric with per-link bandwidth accounting. Link ids are
/// dense: box uplinks first (box-major), then rack-to-inter uplinks.
class Fabric {
 public:
  Fabric() = default;

  explicit Fabric(const DdcConfig& cfg,
                  std::array<double, 3> lat_sw_s = {1.0e-6, 1.5e-6, 2.0e-6})
      : racks_(cfg.racks),
        boxes_(cfg.total_boxes()),
        uplinks_per_box_(cfg.uplinks_per_box),
        uplinks_per_rack_(cfg.uplinks_per_rack),
        boxes_per_rack_(cfg.boxes_per_rack) {
    specs_[0] = {SwitchClass::Box, cfg.switch_ports.box,
                 benes_path_cells(cfg.switch_ports.box), lat_sw_s[0]};
    specs_[1] = {SwitchClass::Rack, cfg.switch_ports.rack,
                 benes_path_cells(cfg.switch_ports.rack), lat_sw_s[1]};
    specs_[2] = {SwitchClass::InterRack, cfg.switch_ports.inter,
                 benes_path_cells(cfg.switch_ports.inter), lat_sw_s[2]};

    first_inter_link_ = boxes_ * uplinks_per_box_;
    links_.reserve(first_inter_link_ + racks_ * uplinks_per_rack_);
    for (int b = 0; b < boxes_; ++b)
      for (int u = 0; u < uplinks_per_box_; ++u)
        links_.push_back(Link{static_cast<uint32_t>(links_.size()),
                              LinkTier::Intra, b, b / boxes_per_rack_,
                              cfg.link_capacity_gbps, 0.0});
    for (int r = 0; r < racks_; ++r)
      for (int u = 0; u < uplinks_per_rack_; ++u)
        links_.push_back(Link{static_cast<uint32_t>(links_.size()),
                              LinkTier::Inter, r, 0, cfg.link_capacity_gbps,
                              0.0});
  }

  const std::vector<Link>& links() const { return links_; }
  const Link& link(uint32_t id) const { return links_.at(id); }
  const SwitchSpec& spec(SwitchClass c) const {
    return specs_[static_cast<size_t>(c)];
  }
  void set_switch_latency(SwitchClass c, double seconds) {
    specs_[static_cast<size_t>(c)].switch_latency_s = seconds;
  }

  int rack_of_box(int box_id) const { return box_id / boxes_per_rack_; }

  std::pair<uint32_t, uint32_t> box_uplinks(int box_id) const {
    uint32_t first = static_cast<uint32_t>(box_id) * uplinks_per_box_;
    return {first, first + uplinks_per_box_};
  }
  std::pair<uint32_t, uint32_t> rack_uplinks(int rack_id) const {
    uint32_t first =
        first_inter_link_ + static_cast<uint32_t>(rack_id) * uplinks_per_rack_;
    return {first, first + uplinks_per_rack_};
  }

  void reserve(const NetPath& path) {
    for (uint32_t id : path.links) {
      Link& l = links_.at(id);
      if (l.allocated_gbps + path.gbps > l.capacity_gbps + kSlack)
        throw AllocationError("link " + std::to_string(id) +
                              " over capacity: " +
                              std::to_string(l.allocated_gbps + path.gbps));
    }
    for (uint32_t id : path.links) links_[id].allocated_gbps += path.gbps;
  }

  void release(const NetPath& path) {
    for (uint32_t id : path.links) {
      const Link& l = links_.at(id);
      if (l.allocated_gbps < path.gbps - kSlack)
        throw IntegrityError("releasing " + std::to_string(path.gbps) +
                             " Gb/s from link " + std::to_string(id) +
                             " holding " + std::to_string(l.allocated_gbps));
    }
    for (uint32_t id : path.links) {
      links_[id].allocated_gbps -= path.gbps;
      if (links_[id].allocated_gbps < 0 && links_[id].allocated_gbps > -kSlack)
        links_[id].allocated_gbps = 0.0;  // absorb rounding dust
    }
  }

  /// (intra fraction, inter fraction): sum of allocation over sum of
  /// capacity per tier, instantaneous.
  std::pair<double, double> utilization() const {
    double alloc[2] = {0, 0}, cap[2] = {0, 0};
    for (const Link& l : links_) {
      alloc[static_cast<size_t>(l.tier)] += l.allocated_gbps;
      cap[static_cast<size_t>(l.tier)] += l.capacity_gbps;
    }
    return {cap[0] > 0 ? alloc[0] / cap[0] : 0.0,
            cap[1] > 0 ? alloc[1] / cap[1] : 0.0};
  }

  bool operator==(const Fabric& o) const {
    if (links_.size() != o.links_.size()) return false;
    for (size_t i = 0; i < links_.size(); ++i)
      if (links_[i].allocated_gbps != o.links_[i].allocated_gbps) return false;
    return true;
  }

  static constexpr double kSlack = 1e-9;

 private:
  int racks_ = 0;
  int boxes_ = 0;
  int uplinks_per_box_ = 0;
  int uplinks_per_rack_ = 0;
  int boxes_per_rack_ = 0;
  uint32_t first_inter_link_ = 0;
  std::vector<Link> links_;
  SwitchSpec specs_[3];
};

namespace detail {

inline std::optional<uint32_t> pick_link(const Fabric& f, uint32_t first,
                                         uint32_t last, double gbps,
                                         PathPolicy policy) {
  if (policy == PathPolicy::FirstFit) {
    for (uint32_t id = first; id < last; ++id)
      if (f.link(id).available_gbps() + Fabric::kSlack >= gbps) return id;
    return std::nullopt;
  }
  // max available, ties to the lowest id
  std::optional<uint32_t> best;
  double best_avail = -1.0;
  for (uint32_t id = first; id < last; ++id) {
    double a = f.link(id).available_gbps();
    if (a > best_avail) {
      best_avail = a;
      best = id;
    }
  }
  if (!best || best_avail + Fabric::kSlack < gbps) return std::nullopt;
  return best;
}

}  // namespace detail

/// Builds a route from src_box to dst_box choosing one link per hop. Intra
/// rack the hops are the two box uplinks; across racks the two rack-to-inter
/// uplinks sit in between. Same-box flows yield an empty (link-free) path.
inline std::optional<NetPath> find_path(const Fabric& f, int src_box,
                                        int dst_box, double gbps,
                                        PathPolicy policy) {
  NetPath path;
  path.gbps = gbps;
  if (src_box == dst_box) {
    path.span = Span::IntraRack;
    return path;
  }
  int src_rack = f.rack_of_box(src_box);
  int dst_rack = f.rack_of_box(dst_box);
  path.span = src_rack == dst_rack ? Span::IntraRack : Span::InterRack;

  std::vector<std::pair<uint32_t, uint32_t>> hops;
  hops.push_back(f.box_uplinks(src_box));
  if (src_rack != dst_rack) {
    hops.push_back(f.rack_uplinks(src_rack));
    hops.push_back(f.rack_uplinks(dst_rack));
  }
  hops.push_back(f.box_uplinks(dst_box));

  for (auto [first, last] : hops) {
    auto id = detail::pick_link(f, first, last, gbps, policy);
    if (!id) return std::nullopt;
    path.links.push_back(*id);
  }
  return path;
}

inline std::optional<NetPath> find_path_first_fit(const Fabric& f, int src_box,
                                                  int dst_box, double gbps) {
  return find_path(f, src_box, dst_box, gbps, PathPolicy::FirstFit);
}

inline std::optional<NetPath> find_path_max_avail(const Fabric& f, int src_box,
                                                  int dst_box, double gbps) {
  return find_path(f, src_box, dst_box, gbps, PathPolicy::MaxAvail);
}

/// Box-agnostic check that a whole VM could be routed inside `rack_id` with
/// the uplinks it has left: some CPU-box uplink carries the CPU<->RAM flow,
/// some STO-box uplink the RAM<->STO flow, and one RAM box carries both
/// (sharing an uplink when a single one has room for the sum). Greedy in
/// flow order; the exhaustive joint search lives in the test oracle.
inline bool intra_rack_feasible(const Fabric& f, const DdcConfig& cfg,
                                int rack_id, const VmRequest& req) {
  FlowDemands d = bandwidth_demands(req, cfg);
  const double slack = Fabric::kSlack;

  auto any_uplink_fits = [&](ResourceKind kind, double gbps) {
    for (int i = 0; i < cfg.layout[kind]; ++i) {
      auto [first, last] = f.box_uplinks(cfg.box_id(rack_id, kind, i));
      for (uint32_t id = first; id < last; ++id)
        if (f.link(id).available_gbps() + slack >= gbps) return true;
    }
    return false;
  };

  if (d.cpu_ram_gbps > 0 && !any_uplink_fits(ResourceKind::Cpu, d.cpu_ram_gbps))
    return false;
  if (d.ram_sto_gbps > 0 && !any_uplink_fits(ResourceKind::Sto, d.ram_sto_gbps))
    return false;
  if (d.cpu_ram_gbps <= 0 && d.ram_sto_gbps <= 0) return true;

  // RAM side: both flows terminate at the same RAM box.
  for (int i = 0; i < cfg.layout[ResourceKind::Ram]; ++i) {
    auto [first, last] =
        f.box_uplinks(cfg.box_id(rack_id, ResourceKind::Ram, i));
    double taken_from = -1.0;
    uint32_t taken_id = 0;
    bool first_ok = d.cpu_ram_gbps <= 0;
    if (!first_ok) {
      for (uint32_t id = first; id < last; ++id)
        if (f.link(id).available_gbps() + slack >= d.cpu_ram_gbps) {
          first_ok = true;
          taken_id = id;
          taken_from = f.link(id).available_gbps() - d.cpu_ram_gbps;
          break;
        }
    }
    if (!first_ok) continue;
    if (d.ram_sto_gbps <= 0) return true;
    for (uint32_t id = first; id < last; ++id) {
      double avail = (taken_from >= 0 && id == taken_id)
                         ? taken_from
                         : f.link(id).available_gbps();
      if (avail + slack >= d.ram_sto_gbps) return true;
    }
  }
  return false;
}

}  // namespace ddc
