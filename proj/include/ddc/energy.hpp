#pragma once

#include <array>
#include <cstdint>

#include "ddc/errors.hpp"
#include "ddc/fabric.hpp"

namespace ddc {

/// Optical component parameters. Cell powers follow MRR-based switch
/// measurements; alpha accounts for cell sharing between paths (0.5 = every
/// cell shared, 1 = none). Switch latencies are size-dependent placeholders;
/// at second-scale lifetimes the switching term is ~1e-6 of the trimming
/// term, so results are insensitive to them.
struct EnergyParams {
  double p_swcell_w = 13.75e-3;
  double p_trimcell_w = 22.67e-3;
  double alpha = 0.9;
  double e_tx_j_per_bit = 22.5e-12;
  std::array<double, 3> lat_sw_s = {1.0e-6, 1.5e-6, 2.0e-6};  // box,rack,inter
  double time_unit_seconds = 1.0;

  double lat(SwitchClass c) const { return lat_sw_s[static_cast<size_t>(c)]; }

  void validate() const {
    if (alpha < 0.5 || alpha > 1.0)
      throw ConfigError("alpha must be within [0.5, 1]");
    if (p_swcell_w <= 0 || p_trimcell_w <= 0 || e_tx_j_per_bit <= 0)
      throw ConfigError("cell powers and transceiver energy must be > 0");
    for (double l : lat_sw_s)
      if (l <= 0) throw ConfigError("switch latency must be > 0");
    if (time_unit_seconds <= 0)
      throw ConfigError("time_unit_seconds must be > 0");
  }
};

struct EnergyReport {
  double switch_energy_j = 0.0;
  double transceiver_energy_j = 0.0;

  double total_j() const { return switch_energy_j + transceiver_energy_j; }

  EnergyReport& operator+=(const EnergyReport& o) {
    switch_energy_j += o.switch_energy_j;
    transceiver_energy_j += o.transceiver_energy_j;
    return *this;
  }
};

/// Energy one switch spends on one path held for `lifetime_s`:
/// n/2 cells reconfigure at p_swcell for lat_sw, and all n cells trim for the
/// path's lifetime, discounted by the sharing factor alpha.
inline double switch_energy(int n_cells, double lat_sw_s, double lifetime_s,
                            const EnergyParams& p) {
  return (n_cells / 2.0) * p.p_swcell_w * lat_sw_s +
         p.alpha * n_cells * p.p_trimcell_w * lifetime_s;
}

namespace detail {

inline double path_switch_energy(const NetPath& path, const Fabric& f,
                                 double lifetime_s, const EnergyParams& p) {
  if (path.links.empty()) return 0.0;
  auto one = [&](SwitchClass c) {
    const SwitchSpec& s = f.spec(c);
    return switch_energy(s.path_cell_count, s.switch_latency_s, lifetime_s, p);
  };
  double e = 2 * one(SwitchClass::Box) + one(SwitchClass::Rack);
  if (path.span == Span::InterRack)
    e += one(SwitchClass::Rack) + one(SwitchClass::InterRack);
  return e;
}

inline double path_transceiver_energy(const NetPath& path, double lifetime_s,
                                      const EnergyParams& p) {
  if (path.gbps <= 0) return 0.0;
  double bits = path.gbps * 1e9 * lifetime_s;
  // every link segment terminates in a module on both ends
  return 2.0 * p.e_tx_j_per_bit * bits * static_cast<double>(path.links.size());
}

}  // namespace detail

/// Optical energy one placed VM consumes over its lifetime: Benes cell
/// switching plus trimming on every switch its two flows traverse, plus
/// transceiver energy at both ends of every link segment.
template <typename PlacementT>
EnergyReport vm_network_energy(const PlacementT& placement, double lifetime_s,
                               const Fabric& fabric, const EnergyParams& p) {
  EnergyReport r;
  auto add = [&](const std::optional<NetPath>& path) {
    if (!path) return;
    r.switch_energy_j += detail::path_switch_energy(*path, fabric, lifetime_s, p);
    r.transceiver_energy_j += detail::path_transceiver_energy(*path, lifetime_s, p);
  };
  add(placement.path_cpu_ram);
  add(placement.path_ram_sto);
  return r;
}

inline double aggregate_power(double total_energy_j, double span_s) {
  if (span_s <= 0) throw ReportError("cannot average power over a zero span");
  return total_energy_j / span_s;
}

}  // namespace ddc
