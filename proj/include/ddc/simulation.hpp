#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "ddc/energy.hpp"
#include "ddc/errors.hpp"
#include "ddc/fabric.hpp"
#include "ddc/schedulers.hpp"
#include "ddc/topology.hpp"
#include "ddc/workload.hpp"

namespace ddc {

inline constexpr double kIntraRackRttNs = 110.0;
inline constexpr double kInterRackRttNs = 330.0;

struct Metrics {
  std::string algorithm;
  int64_t requests = 0;
  int64_t placed_count = 0;
  int64_t dropped_count = 0;
  int64_t inter_rack_count = 0;
  std::optional<double> avg_cpu_ram_rtt_ns;
  PerKind<double> utilization{};        // time-weighted unit occupancy
  double net_util_intra = 0.0;          // time-weighted
  double net_util_inter = 0.0;
  EnergyReport energy;
  double average_power_w = 0.0;
  double span_time_units = 0.0;
  double sched_wall_s = 0.0;
};

struct PlacementRecord {
  VmRequest request;
  bool placed = false;
  std::optional<Placement> placement;
};

struct RunResult {
  Metrics metrics;
  std::vector<PlacementRecord> log;
  ClusterState final_state;
  Fabric final_fabric;
};

/// Mean CPU-RAM round-trip latency over the placed VMs; absent when nothing
/// was placed.
inline std::optional<double> latency_metric(
    const std::vector<PlacementRecord>& log) {
  int64_t placed = 0, inter = 0;
  for (const auto& rec : log) {
    if (!rec.placed) continue;
    ++placed;
    if (rec.placement->span == Span::InterRack) ++inter;
  }
  if (placed == 0) return std::nullopt;
  return (kIntraRackRttNs * static_cast<double>(placed - inter) +
          kInterRackRttNs * static_cast<double>(inter)) /
         static_cast<double>(placed);
}

/// Integrates piecewise-constant samples over time; finalize divides by the
/// covered span.
class TimeWeightedMean {
 public:
  void sample(double t, double value) {
    if (has_prev_) integral_ += prev_value_ * (t - prev_t_);
    else start_ = t;
    prev_t_ = t;
    prev_value_ = value;
    has_prev_ = true;
  }

  double mean() const {
    double span = prev_t_ - start_;
    return span > 0 ? integral_ / span : 0.0;
  }

 private:
  bool has_prev_ = false;
  double start_ = 0.0, prev_t_ = 0.0, prev_value_ = 0.0, integral_ = 0.0;
};

namespace detail {

struct Event {
  double time = 0.0;
  bool departure = false;
  int64_t seq = 0;
  int64_t index = 0;  // workload index or log index of the placement

  // Min-heap order: earliest first; at equal times departures free
  // resources before arrivals claim them; stable by sequence number.
  bool operator>(const Event& o) const {
    if (time != o.time) return time > o.time;
    if (departure != o.departure) return !departure;
    return seq > o.seq;
  }
};

class InvariantChecker {
 public:
  InvariantChecker(const ClusterState& state, const Fabric& fabric)
      : state_(state), fabric_(fabric) {
    // Fixtures may pre-drain boxes; account against the starting state.
    for (auto k : kAllKinds)
      baseline_used_[k] = state.total_capacity(k) - state.total_available(k);
    for (const Link& l : fabric.links()) baseline_gbps_ += l.allocated_gbps;
  }

  void on_place(const Placement& p) {
    for (auto k : kAllKinds) live_units_[k] += p.units[k];
    live_gbps_ += path_gbps(p.path_cpu_ram) + path_gbps(p.path_ram_sto);
  }

  void on_release(const Placement& p) {
    for (auto k : kAllKinds) live_units_[k] -= p.units[k];
    live_gbps_ -= path_gbps(p.path_cpu_ram) + path_gbps(p.path_ram_sto);
  }

  void verify(double now) const {
    for (auto k : kAllKinds) {
      int64_t used = state_.total_capacity(k) - state_.total_available(k) -
                     baseline_used_[k];
      if (used != live_units_[k])
        fail(now, std::string(kind_name(k)) + " units used " +
                      std::to_string(used) + " != live placements " +
                      std::to_string(live_units_[k]));
    }
    double fabric_alloc = -baseline_gbps_;
    for (const Link& l : fabric_.links()) {
      if (l.allocated_gbps < -Fabric::kSlack ||
          l.allocated_gbps > l.capacity_gbps + Fabric::kSlack)
        fail(now, "link " + std::to_string(l.link_id) + " allocation " +
                      std::to_string(l.allocated_gbps) + " out of [0, " +
                      std::to_string(l.capacity_gbps) + "]");
      fabric_alloc += l.allocated_gbps;
    }
    if (std::abs(fabric_alloc - live_gbps_) > 1e-6 * (1.0 + live_gbps_))
      fail(now, "fabric allocation " + std::to_string(fabric_alloc) +
                    " != live reservations " + std::to_string(live_gbps_));
  }

 private:
  static double path_gbps(const std::optional<NetPath>& p) {
    return p ? p->gbps * static_cast<double>(p->links.size()) : 0.0;
  }

  [[noreturn]] void fail(double now, const std::string& what) const {
    std::ostringstream os;
    os << "invariant violation at t=" << now << ": " << what << "\n";
    os << "state dump: per-kind available/capacity:";
    for (auto k : kAllKinds)
      os << ' ' << kind_name(k) << '=' << state_.total_available(k) << '/'
         << state_.total_capacity(k);
    auto [intra, inter] = fabric_.utilization();
    os << "; net util intra=" << intra << " inter=" << inter;
    throw IntegrityError(os.str());
  }

  const ClusterState& state_;
  const Fabric& fabric_;
  PerKind<int64_t> baseline_used_{};
  double baseline_gbps_ = 0.0;
  PerKind<int64_t> live_units_{};
  double live_gbps_ = 0.0;
};

}  // namespace detail

/// Discrete-event run over an explicit initial state (fixtures welcome).
/// Arrivals invoke the scheduler once -- a failure is a drop, never a retry
/// -- and departures return every unit and every reserved path. Consistency
/// between cluster, fabric, and the live-placement ledger is re-verified
/// after every event.
inline RunResult run_simulation(ClusterState state, Fabric fabric,
                                Algorithm algo,
                                const std::vector<VmRequest>& workload,
                                const EnergyParams& energy = {}) {
  energy.validate();
  const DdcConfig& cfg = state.config();

  std::vector<VmRequest> arrivals = workload;
  std::stable_sort(arrivals.begin(), arrivals.end(),
                   [](const VmRequest& a, const VmRequest& b) {
                     return a.arrival_time < b.arrival_time;
                   });

  RunResult out;
  Metrics& m = out.metrics;
  m.algorithm = algorithm_name(algo);
  m.requests = static_cast<int64_t>(arrivals.size());
  out.log.reserve(arrivals.size());

  SchedulerContext ctx(cfg);
  detail::InvariantChecker checker(state, fabric);

  std::priority_queue<detail::Event, std::vector<detail::Event>,
                      std::greater<detail::Event>>
      queue;
  int64_t seq = 0;
  for (size_t i = 0; i < arrivals.size(); ++i)
    queue.push({arrivals[i].arrival_time, false, seq++,
                static_cast<int64_t>(i)});

  TimeWeightedMean util[kKindCount], net_intra, net_inter;
  auto record_samples = [&](double t) {
    for (auto k : kAllKinds) {
      double cap = static_cast<double>(state.total_capacity(k));
      double used =
          static_cast<double>(state.total_capacity(k) - state.total_available(k));
      util[static_cast<size_t>(k)].sample(t, cap > 0 ? used / cap : 0.0);
    }
    auto [fi, fe] = fabric.utilization();
    net_intra.sample(t, fi);
    net_inter.sample(t, fe);
  };

  double first_time = 0.0, last_time = 0.0;
  bool any_event = false;
  std::chrono::steady_clock::duration sched_time{};

  while (!queue.empty()) {
    detail::Event ev = queue.top();
    queue.pop();
    if (!any_event) first_time = ev.time;
    any_event = true;
    last_time = ev.time;

    if (ev.departure) {
      const Placement& p = *out.log[ev.index].placement;
      for (auto k : kAllKinds) state.release(p.box_of[k], p.units[k]);
      if (p.path_cpu_ram) fabric.release(*p.path_cpu_ram);
      if (p.path_ram_sto) fabric.release(*p.path_ram_sto);
      checker.on_release(p);
    } else {
      const VmRequest& req = arrivals[ev.index];
      auto t0 = std::chrono::steady_clock::now();
      std::optional<Placement> placed = schedule_vm(algo, state, fabric, ctx, req);
      sched_time += std::chrono::steady_clock::now() - t0;

      PlacementRecord rec;
      rec.request = req;
      rec.placed = placed.has_value();
      if (placed) {
        ++m.placed_count;
        if (placed->span == Span::InterRack) ++m.inter_rack_count;
        double lifetime_s = req.lifetime * energy.time_unit_seconds;
        m.energy += vm_network_energy(*placed, lifetime_s, fabric, energy);
        checker.on_place(*placed);
        rec.placement = std::move(placed);
        out.log.push_back(std::move(rec));
        queue.push({req.arrival_time + req.lifetime, true, seq++,
                    static_cast<int64_t>(out.log.size()) - 1});
      } else {
        ++m.dropped_count;
        out.log.push_back(std::move(rec));
      }
    }
    checker.verify(ev.time);
    // the value holding from this instant forward is the post-event one
    record_samples(ev.time);
  }

  m.span_time_units = any_event ? last_time - first_time : 0.0;
  for (auto k : kAllKinds)
    m.utilization[k] = util[static_cast<size_t>(k)].mean();
  m.net_util_intra = net_intra.mean();
  m.net_util_inter = net_inter.mean();
  m.avg_cpu_ram_rtt_ns = latency_metric(out.log);
  double span_s = m.span_time_units * energy.time_unit_seconds;
  m.average_power_w =
      span_s > 0 ? aggregate_power(m.energy.total_j(), span_s) : 0.0;
  m.sched_wall_s = std::chrono::duration<double>(sched_time).count();

  out.final_state = std::move(state);
  out.final_fabric = std::move(fabric);
  return out;
}

/// Fresh-cluster convenience wrapper.
inline RunResult run_simulation(const DdcConfig& cfg, Algorithm algo,
                                const std::vector<VmRequest>& workload,
                                const EnergyParams& energy = {}) {
  return run_simulation(ClusterState(cfg), Fabric(cfg, energy.lat_sw_s), algo,
                        workload, energy);
}

}  // namespace ddc
