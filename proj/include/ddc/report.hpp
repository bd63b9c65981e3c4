#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ddc/errors.hpp"
#include "ddc/simulation.hpp"

namespace ddc {

inline nlohmann::json metrics_to_json(const Metrics& m) {
  nlohmann::json j;
  j["algorithm"] = m.algorithm;
  j["requests"] = m.requests;
  j["placed"] = m.placed_count;
  j["dropped"] = m.dropped_count;
  j["inter_rack"] = m.inter_rack_count;
  j["utilization"] = {{"cpu", m.utilization[ResourceKind::Cpu]},
                      {"ram", m.utilization[ResourceKind::Ram]},
                      {"sto", m.utilization[ResourceKind::Sto]}};
  j["network_utilization"] = {{"intra", m.net_util_intra},
                              {"inter", m.net_util_inter}};
  j["energy"] = {{"switch_j", m.energy.switch_energy_j},
                 {"transceiver_j", m.energy.transceiver_energy_j},
                 {"total_j", m.energy.total_j()},
                 {"average_power_w", m.average_power_w}};
  if (m.avg_cpu_ram_rtt_ns)
    j["avg_cpu_ram_rtt_ns"] = *m.avg_cpu_ram_rtt_ns;
  else
    j["avg_cpu_ram_rtt_ns"] = nullptr;
  j["span_time_units"] = m.span_time_units;
  j["sched_wall_s"] = m.sched_wall_s;
  return j;
}

inline Metrics metrics_from_json(const nlohmann::json& j) {
  Metrics m;
  try {
    m.algorithm = j.at("algorithm").get<std::string>();
    m.requests = j.at("requests").get<int64_t>();
    m.placed_count = j.at("placed").get<int64_t>();
    m.dropped_count = j.at("dropped").get<int64_t>();
    m.inter_rack_count = j.at("inter_rack").get<int64_t>();
    const auto& u = j.at("utilization");
    m.utilization[ResourceKind::Cpu] = u.at("cpu").get<double>();
    m.utilization[ResourceKind::Ram] = u.at("ram").get<double>();
    m.utilization[ResourceKind::Sto] = u.at("sto").get<double>();
    const auto& n = j.at("network_utilization");
    m.net_util_intra = n.at("intra").get<double>();
    m.net_util_inter = n.at("inter").get<double>();
    const auto& e = j.at("energy");
    m.energy.switch_energy_j = e.at("switch_j").get<double>();
    m.energy.transceiver_energy_j = e.at("transceiver_j").get<double>();
    m.average_power_w = e.at("average_power_w").get<double>();
    if (!j.at("avg_cpu_ram_rtt_ns").is_null())
      m.avg_cpu_ram_rtt_ns = j.at("avg_cpu_ram_rtt_ns").get<double>();
    m.span_time_units = j.at("span_time_units").get<double>();
    m.sched_wall_s = j.at("sched_wall_s").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ReportError(std::string("metrics document: ") + e.what());
  }
  return m;
}

inline constexpr const char* kPlacementCsvHeader =
    "vm_id,algorithm,cpu_box,ram_box,sto_box,span,cpu_ram_path,ram_sto_path,"
    "dropped";

namespace detail {

inline std::string join_links(const std::optional<NetPath>& p) {
  if (!p) return "";
  std::string s;
  for (size_t i = 0; i < p->links.size(); ++i) {
    if (i) s += '|';
    s += std::to_string(p->links[i]);
  }
  return s;
}

}  // namespace detail

/// One row per request; box columns carry per-kind box ids (the numbering
/// used throughout the availability tables). Dropped rows keep only the id
/// and the flag.
inline void write_placement_csv(std::ostream& os, const DdcConfig& cfg,
                                const std::string& algorithm,
                                const std::vector<PlacementRecord>& log) {
  os << kPlacementCsvHeader << "\n";
  for (const PlacementRecord& rec : log) {
    os << rec.request.vm_id << ',' << algorithm << ',';
    if (rec.placed) {
      const Placement& p = *rec.placement;
      os << cfg.kind_index_of_box(p.box_of[ResourceKind::Cpu]) << ','
         << cfg.kind_index_of_box(p.box_of[ResourceKind::Ram]) << ','
         << cfg.kind_index_of_box(p.box_of[ResourceKind::Sto]) << ','
         << span_name(p.span) << ',' << detail::join_links(p.path_cpu_ram)
         << ',' << detail::join_links(p.path_ram_sto) << ",0\n";
    } else {
      os << ",,,,,,1\n";
    }
  }
}

inline const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols = {
      "algorithm",       "requests",       "placed",
      "dropped",         "inter_rack",     "inter_rack_pct",
      "cpu_util",        "ram_util",       "sto_util",
      "intra_net_util",  "inter_net_util", "switch_energy_j",
      "transceiver_energy_j", "total_energy_j", "avg_power_w",
      "avg_cpu_ram_rtt_ns", "sched_wall_s"};
  return cols;
}

/// Merges per-algorithm metrics documents into one comparison table, one row
/// per document, columns covering inter-rack share, utilizations, optical
/// energy/power, latency, and scheduler time.
inline std::string merge_reports(const std::vector<Metrics>& rows) {
  std::ostringstream os;
  const auto& cols = report_columns();
  for (size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << "\n";
  for (const Metrics& m : rows) {
    double inter_pct = m.requests > 0 ? 100.0 * static_cast<double>(m.inter_rack_count) /
                                            static_cast<double>(m.requests)
                                      : 0.0;
    os << m.algorithm << ',' << m.requests << ',' << m.placed_count << ','
       << m.dropped_count << ',' << m.inter_rack_count << ','
       << detail::format_double(inter_pct) << ','
       << detail::format_double(m.utilization[ResourceKind::Cpu]) << ','
       << detail::format_double(m.utilization[ResourceKind::Ram]) << ','
       << detail::format_double(m.utilization[ResourceKind::Sto]) << ','
       << detail::format_double(m.net_util_intra) << ','
       << detail::format_double(m.net_util_inter) << ','
       << detail::format_double(m.energy.switch_energy_j) << ','
       << detail::format_double(m.energy.transceiver_energy_j) << ','
       << detail::format_double(m.energy.total_j()) << ','
       << detail::format_double(m.average_power_w) << ','
       << (m.avg_cpu_ram_rtt_ns ? detail::format_double(*m.avg_cpu_ram_rtt_ns)
                                : std::string())
       << ',' << detail::format_double(m.sched_wall_s) << "\n";
  }
  return os.str();
}

inline Metrics load_metrics_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ReportError("cannot open metrics file " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ReportError("metrics " + path + ": " + e.what());
  }
  try {
    return metrics_from_json(j);
  } catch (const ReportError& e) {
    throw ReportError(path + ": " + e.what());
  }
}

}  // namespace ddc
