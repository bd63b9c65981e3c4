#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "ddc/errors.hpp"

namespace ddc {

/// The three pooled resource kinds. Every box holds exactly one kind.
enum class ResourceKind : uint8_t { Cpu = 0, Ram = 1, Sto = 2 };

inline constexpr std::size_t kKindCount = 3;
inline constexpr std::array<ResourceKind, kKindCount> kAllKinds = {
    ResourceKind::Cpu, ResourceKind::Ram, ResourceKind::Sto};

inline const char* kind_name(ResourceKind k) {
  switch (k) {
    case ResourceKind::Cpu: return "cpu";
    case ResourceKind::Ram: return "ram";
    case ResourceKind::Sto: return "sto";
  }
  return "?";
}

inline ResourceKind parse_kind(const std::string& s) {
  if (s == "cpu") return ResourceKind::Cpu;
  if (s == "ram") return ResourceKind::Ram;
  if (s == "sto") return ResourceKind::Sto;
  throw ParseError("unknown resource kind: " + s);
}

/// Small fixed map ResourceKind -> T.
template <typename T>
struct PerKind {
  std::array<T, kKindCount> v{};

  constexpr T& operator[](ResourceKind k) { return v[static_cast<size_t>(k)]; }
  constexpr const T& operator[](ResourceKind k) const {
    return v[static_cast<size_t>(k)];
  }
  constexpr bool operator==(const PerKind&) const = default;
};

/// One VM request: per-kind demands in physical quantities (cores, GB),
/// arrival and lifetime in abstract simulation time units.
struct VmRequest {
  int64_t vm_id = 0;
  int64_t cpu_cores = 0;
  int64_t ram_gb = 0;
  int64_t sto_gb = 0;
  double arrival_time = 0.0;
  double lifetime = 0.0;

  int64_t demand(ResourceKind k) const {
    switch (k) {
      case ResourceKind::Cpu: return cpu_cores;
      case ResourceKind::Ram: return ram_gb;
      case ResourceKind::Sto: return sto_gb;
    }
    return 0;
  }
};

}  // namespace ddc
