#pragma once

#include <stdexcept>
#include <string>

namespace ddc {

/// Invalid or inconsistent configuration (bad layout sums, zero counts, ...).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed external input (CSV rows, JSON documents).
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A request for resources that are not there. Callers are expected to have
/// checked availability first; hitting this is a bug upstream.
struct AllocationError : std::runtime_error {
  explicit AllocationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// State-consistency violation: over-release, double release, broken
/// bookkeeping detected by an invariant check.
struct IntegrityError : std::runtime_error {
  explicit IntegrityError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Reporting/aggregation failure (zero span, schema mismatch).
struct ReportError : std::runtime_error {
  explicit ReportError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ddc
