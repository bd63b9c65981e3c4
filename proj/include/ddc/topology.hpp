#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "ddc/errors.hpp"
#include "ddc/types.hpp"

namespace ddc {

struct SwitchPorts {
  int box = 64;
  int rack = 256;
  int inter = 512;
};

/// Per-unit line rates of the two flows every VM establishes (Gb/s per unit).
struct FlowRates {
  double cpu_ram = 5.0;
  double ram_sto = 1.0;
};

/// Cluster shape and sizing. Defaults follow the 18-rack reference
/// configuration: 6 boxes/rack split 2/2/2, 8 bricks/box x 16 units/brick,
/// units of 4 cores / 4 GB RAM / 64 GB storage.
struct DdcConfig {
  int racks = 18;
  int boxes_per_rack = 6;
  PerKind<int> layout{{2, 2, 2}};  // boxes of each kind per rack
  int bricks_per_box = 8;
  int units_per_brick = 16;
  PerKind<int64_t> unit_size{{4, 4, 64}};  // cores, GB, GB

  // A RAM box carries the CPU<->RAM flows of every resident VM, which scale
  // with the residents' CPU units rather than the RAM units the box fills
  // by; 8 uplinks keep that concentration comfortably under capacity.
  double link_capacity_gbps = 200.0;
  int uplinks_per_box = 8;
  int uplinks_per_rack = 8;
  SwitchPorts switch_ports;
  FlowRates bandwidth_per_unit;

  int64_t units_per_box() const {
    return int64_t{1} * bricks_per_box * units_per_brick;
  }
  int total_boxes() const { return racks * boxes_per_rack; }

  void validate() const {
    if (racks < 1) throw ConfigError("racks must be >= 1");
    if (boxes_per_rack < 1) throw ConfigError("boxes_per_rack must be >= 1");
    if (bricks_per_box < 1) throw ConfigError("bricks_per_box must be >= 1");
    if (units_per_brick < 1) throw ConfigError("units_per_brick must be >= 1");
    int sum = 0;
    for (auto k : kAllKinds) {
      if (layout[k] < 1)
        throw ConfigError(std::string("layout[") + kind_name(k) +
                          "] must be >= 1");
      if (unit_size[k] < 1)
        throw ConfigError(std::string("unit_size[") + kind_name(k) +
                          "] must be >= 1");
      sum += layout[k];
    }
    if (sum != boxes_per_rack)
      throw ConfigError("layout sums to " + std::to_string(sum) +
                        ", expected boxes_per_rack = " +
                        std::to_string(boxes_per_rack));
    if (link_capacity_gbps <= 0) throw ConfigError("link capacity must be > 0");
    if (uplinks_per_box < 1) throw ConfigError("uplinks_per_box must be >= 1");
    if (uplinks_per_rack < 1)
      throw ConfigError("uplinks_per_rack must be >= 1");
    if (bandwidth_per_unit.cpu_ram < 0 || bandwidth_per_unit.ram_sto < 0)
      throw ConfigError("bandwidth per unit must be >= 0");
  }

  // Boxes are numbered rack-major; inside a rack all CPU boxes come first,
  // then RAM, then STO.
  int rack_of_box(int box_id) const { return box_id / boxes_per_rack; }

  ResourceKind kind_of_box(int box_id) const {
    int off = box_id % boxes_per_rack;
    for (auto k : kAllKinds) {
      if (off < layout[k]) return k;
      off -= layout[k];
    }
    return ResourceKind::Sto;  // unreachable for validated configs
  }

  /// Global id of the idx-th box of `kind` in `rack` (idx < layout[kind]).
  int box_id(int rack, ResourceKind kind, int idx) const {
    int off = 0;
    for (auto k : kAllKinds) {
      if (k == kind) break;
      off += layout[k];
    }
    return rack * boxes_per_rack + off + idx;
  }

  /// Id of a box within its own kind (0-based across the cluster), the
  /// numbering used when reporting placements.
  int kind_index_of_box(int box_id) const {
    ResourceKind k = kind_of_box(box_id);
    int rack = rack_of_box(box_id);
    int first = this->box_id(rack, k, 0);
    return rack * layout[k] + (box_id - first);
  }
};

/// Unit-level book-keeping for one box.
struct BoxState {
  int box_id = 0;
  int rack_id = 0;
  ResourceKind kind = ResourceKind::Cpu;
  int64_t capacity_units = 0;
  int64_t available_units = 0;
};

inline int64_t units_required(int64_t demand, ResourceKind kind,
                              const DdcConfig& cfg) {
  if (demand <= 0) return 0;
  int64_t us = cfg.unit_size[kind];
  return (demand + us - 1) / us;
}

inline PerKind<int64_t> units_required(const VmRequest& req,
                                       const DdcConfig& cfg) {
  PerKind<int64_t> u;
  for (auto k : kAllKinds) u[k] = units_required(req.demand(k), k, cfg);
  return u;
}

/// Whole-cluster compute state: per-box availability plus, for each
/// (rack, kind), the box currently holding the most free units. rack_max is
/// maintained incrementally on every allocate/release and is what makes the
/// rack-pool construction a per-rack O(1) lookup.
class ClusterState {
 public:
  ClusterState() = default;

  explicit ClusterState(const DdcConfig& cfg) : config_(cfg) {
    cfg.validate();
    boxes_.reserve(cfg.total_boxes());
    for (int b = 0; b < cfg.total_boxes(); ++b) {
      BoxState s;
      s.box_id = b;
      s.rack_id = cfg.rack_of_box(b);
      s.kind = cfg.kind_of_box(b);
      s.capacity_units = cfg.units_per_box();
      s.available_units = s.capacity_units;
      boxes_.push_back(s);
    }
    for (auto k : kAllKinds) {
      total_available_[k] = cfg.units_per_box() * cfg.layout[k] * cfg.racks;
      total_capacity_[k] = total_available_[k];
    }
    rack_max_.assign(static_cast<size_t>(cfg.racks) * kKindCount, 0);
    for (int r = 0; r < cfg.racks; ++r)
      for (auto k : kAllKinds) refresh_rack_max(r, k);
  }

  const DdcConfig& config() const { return config_; }
  const std::vector<BoxState>& boxes() const { return boxes_; }
  const BoxState& box(int box_id) const { return boxes_.at(box_id); }

  int64_t total_available(ResourceKind k) const { return total_available_[k]; }
  int64_t total_capacity(ResourceKind k) const { return total_capacity_[k]; }

  /// Box with the most free units of `kind` in `rack` (lowest id on ties).
  int rack_max_box(int rack, ResourceKind kind) const {
    return rack_max_[rack * kKindCount + static_cast<size_t>(kind)];
  }

  void allocate(int box_id, int64_t units) {
    if (units < 0) throw AllocationError("negative allocation");
    if (units == 0) return;
    BoxState& b = boxes_.at(box_id);
    if (units > b.available_units)
      throw AllocationError("box " + std::to_string(box_id) + " has " +
                            std::to_string(b.available_units) +
                            " units, asked for " + std::to_string(units));
    b.available_units -= units;
    total_available_[b.kind] -= units;
    refresh_rack_max(b.rack_id, b.kind);
  }

  void release(int box_id, int64_t units) {
    if (units < 0) throw IntegrityError("negative release");
    if (units == 0) return;
    BoxState& b = boxes_.at(box_id);
    if (b.available_units + units > b.capacity_units)
      throw IntegrityError("release of " + std::to_string(units) +
                           " units overflows box " + std::to_string(box_id));
    b.available_units += units;
    total_available_[b.kind] += units;
    refresh_rack_max(b.rack_id, b.kind);
  }

  /// Overrides one box's availability (fixture loading / test setup).
  void set_available(int box_id, int64_t units) {
    BoxState& b = boxes_.at(box_id);
    if (units < 0 || units > b.capacity_units)
      throw ConfigError("fixture availability " + std::to_string(units) +
                        " out of range for box " + std::to_string(box_id));
    total_available_[b.kind] += units - b.available_units;
    b.available_units = units;
    refresh_rack_max(b.rack_id, b.kind);
  }

  bool operator==(const ClusterState& o) const {
    if (boxes_.size() != o.boxes_.size()) return false;
    for (size_t i = 0; i < boxes_.size(); ++i)
      if (boxes_[i].available_units != o.boxes_[i].available_units)
        return false;
    return true;
  }

 private:
  void refresh_rack_max(int rack, ResourceKind kind) {
    int best = -1;
    int64_t best_avail = -1;
    for (int i = 0; i < config_.layout[kind]; ++i) {
      int b = config_.box_id(rack, kind, i);
      if (boxes_[b].available_units > best_avail) {
        best_avail = boxes_[b].available_units;
        best = b;
      }
    }
    rack_max_[rack * kKindCount + static_cast<size_t>(kind)] = best;
  }

  DdcConfig config_;
  std::vector<BoxState> boxes_;
  std::vector<int> rack_max_;
  PerKind<int64_t> total_available_{};
  PerKind<int64_t> total_capacity_{};
};

inline ClusterState new_cluster(const DdcConfig& cfg) {
  return ClusterState(cfg);
}

/// Requested quantity over total currently-available quantity, per kind, in
/// physical units. An exhausted kind with nonzero demand yields +inf.
inline PerKind<double> contention_ratios(const ClusterState& state,
                                         const VmRequest& req) {
  PerKind<double> cr;
  for (auto k : kAllKinds) {
    int64_t want = req.demand(k);
    if (want <= 0) {
      cr[k] = 0.0;
      continue;
    }
    int64_t avail =
        state.total_available(k) * state.config().unit_size[k];
    cr[k] = avail > 0 ? static_cast<double>(want) / static_cast<double>(avail)
                      : std::numeric_limits<double>::infinity();
  }
  return cr;
}

}  // namespace ddc
