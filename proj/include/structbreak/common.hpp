#pragma once

// Shared small utilities: error type, version tags, FNV-1a checksum,
// numeric helpers used across the library.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace structbreak {

inline constexpr const char* kLibraryVersion = "1.0.0";
// Version stamp for machine-readable outputs (JSON reports, CV table files).
inline constexpr const char* kReportSchemaVersion = "structbreak-report-v1";
inline constexpr const char* kCvTableVersion = "structbreak-cv-v1";

// All library errors derive from this so callers can catch one type.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Raised by estimate_breaks when the partial-change iteration fails to
// converge; carries the best partition seen so the caller can inspect it.
class convergence_error : public error {
 public:
  convergence_error(const std::string& what, std::vector<int> best,
                    std::vector<double> path)
      : error(what), best_breaks(std::move(best)), ssr_path(std::move(path)) {}
  std::vector<int> best_breaks;
  std::vector<double> ssr_path;
};

// FNV-1a 64-bit, used to checksum the critical-value table payload.
inline std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string fnv1a64_hex(const std::string& data) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t h = fnv1a64(data);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

}  // namespace structbreak
