#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ddc/errors.hpp"
#include "ddc/topology.hpp"
#include "ddc/types.hpp"

namespace ddc {

/// Synthetic workload parameters: uniform CPU/RAM demands, fixed storage,
/// Poisson arrivals, and a lifetime staircase that steps every 100 requests.
struct SyntheticSpec {
  int64_t vm_count = 2500;
  int64_t cpu_min = 1, cpu_max = 32;   // cores
  int64_t ram_min = 1, ram_max = 32;   // GB
  int64_t sto_fixed = 128;             // GB
  double mean_interarrival = 10.0;     // time units
  double base_lifetime = 6300.0;       // time units
  double lifetime_step = 360.0;        // added per 100 requests
  uint64_t rng_seed = 0;

  void validate() const {
    if (vm_count < 0) throw ConfigError("vm_count must be >= 0");
    if (cpu_min < 0 || cpu_max < cpu_min || ram_min < 0 || ram_max < ram_min)
      throw ConfigError("demand ranges must be non-empty and non-negative");
    if (sto_fixed < 0) throw ConfigError("sto_fixed must be >= 0");
    if (mean_interarrival <= 0 || base_lifetime <= 0 || lifetime_step < 0)
      throw ConfigError("interarrival and lifetime parameters must be positive");
  }
};

// The generator identity is part of the reproducibility contract: mt19937_64
// drives everything; uniform integers come from `lo + next() % width`, and
// exponentials from -mean * log(1 - u) with u = (next() >> 11) * 2^-53.
// Per VM the draw order is: interarrival, cpu, ram.
namespace rng {

inline double unit_double(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline int64_t uniform_int(std::mt19937_64& g, int64_t lo, int64_t hi) {
  uint64_t width = static_cast<uint64_t>(hi - lo) + 1;
  return lo + static_cast<int64_t>(g() % width);
}

inline double exponential(std::mt19937_64& g, double mean) {
  return -mean * std::log(1.0 - unit_double(g));
}

}  // namespace rng

inline std::vector<VmRequest> gen_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 g(spec.rng_seed);
  std::vector<VmRequest> out;
  out.reserve(spec.vm_count);
  double t = 0.0;
  for (int64_t i = 0; i < spec.vm_count; ++i) {
    t += rng::exponential(g, spec.mean_interarrival);
    VmRequest r;
    r.vm_id = i;
    r.arrival_time = t;
    r.lifetime = spec.base_lifetime + spec.lifetime_step *
                                          static_cast<double>(i / 100);
    r.cpu_cores = rng::uniform_int(g, spec.cpu_min, spec.cpu_max);
    r.ram_gb = rng::uniform_int(g, spec.ram_min, spec.ram_max);
    r.sto_gb = spec.sto_fixed;
    out.push_back(r);
  }
  return out;
}

inline std::vector<VmRequest> take_prefix(std::vector<VmRequest> seq,
                                          size_t n) {
  if (n < seq.size()) seq.resize(n);
  return seq;
}

inline constexpr const char* kWorkloadCsvHeader =
    "vm_id,cpu_cores,ram_gb,sto_gb,arrival,lifetime";

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

inline std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

template <typename T>
T parse_number(const std::string& s, int line_no, const char* field) {
  T v{};
  auto first = s.data();
  auto last = s.data() + s.size();
  auto [p, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || p != last)
    throw ParseError("line " + std::to_string(line_no) + ": bad " + field +
                     " value '" + s + "'");
  return v;
}

}  // namespace detail

inline void write_workload_csv(std::ostream& os,
                               const std::vector<VmRequest>& seq) {
  os << kWorkloadCsvHeader << "\n";
  for (const VmRequest& r : seq)
    os << r.vm_id << ',' << r.cpu_cores << ',' << r.ram_gb << ',' << r.sto_gb
       << ',' << detail::format_double(r.arrival_time) << ','
       << detail::format_double(r.lifetime) << "\n";
}

inline void write_workload_csv(const std::string& path,
                               const std::vector<VmRequest>& seq) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open " + path + " for writing");
  write_workload_csv(f, seq);
}

/// Parses the normalized workload CSV. An empty sto_gb falls back to 128 GB.
/// When a config is given, each demand is checked against one box's
/// capacity in that kind.
inline std::vector<VmRequest> load_trace(std::istream& is,
                                         const DdcConfig* cfg = nullptr) {
  std::vector<VmRequest> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || (line_no == 1 && line.rfind("vm_id", 0) == 0))
      continue;
    auto f = detail::split_csv_row(line);
    if (f.size() != 6)
      throw ParseError("line " + std::to_string(line_no) + ": expected 6 " +
                       "fields, got " + std::to_string(f.size()));
    VmRequest r;
    r.vm_id = detail::parse_number<int64_t>(f[0], line_no, "vm_id");
    r.cpu_cores = detail::parse_number<int64_t>(f[1], line_no, "cpu_cores");
    r.ram_gb = detail::parse_number<int64_t>(f[2], line_no, "ram_gb");
    r.sto_gb = f[3].empty()
                   ? 128
                   : detail::parse_number<int64_t>(f[3], line_no, "sto_gb");
    r.arrival_time = detail::parse_number<double>(f[4], line_no, "arrival");
    r.lifetime = detail::parse_number<double>(f[5], line_no, "lifetime");
    if (r.cpu_cores < 0 || r.ram_gb < 0 || r.sto_gb < 0 || r.lifetime <= 0)
      throw ParseError("line " + std::to_string(line_no) +
                       ": demands must be >= 0 and lifetime > 0");
    if (cfg) {
      for (auto k : kAllKinds)
        if (units_required(r.demand(k), k, *cfg) > cfg->units_per_box())
          throw ParseError("vm " + std::to_string(r.vm_id) + ": " +
                           kind_name(k) + " demand " +
                           std::to_string(r.demand(k)) +
                           " exceeds one box's capacity");
    }
    out.push_back(r);
  }
  return out;
}

inline std::vector<VmRequest> load_trace(const std::string& path,
                                         const DdcConfig* cfg = nullptr) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open trace file " + path);
  return load_trace(f, cfg);
}

}  // namespace ddc
