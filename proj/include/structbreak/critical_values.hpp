#pragma once

// Critical-value table: simulated asymptotic quantiles for the break tests,
// stored in a human-readable TSV with a version line and an FNV-1a checksum
// so a corrupted or hand-edited file is rejected loudly.
//
// Keys: test kind, number of breaking coefficients q, break count s (for
// UDmax/WDmax: the largest break count in the max), trimming, level.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "structbreak/common.hpp"

namespace structbreak {

enum class CvKind {
  SupF,   // sup-F test of 0 vs s breaks
  UDmax,  // unweighted double-maximum over s = 1..smax
  WDmax,  // weighted double-maximum (level-specific weights)
  FNext,  // F(s+1 | s) sequential test
};

inline std::string to_string(CvKind k) {
  switch (k) {
    case CvKind::SupF: return "supF";
    case CvKind::UDmax: return "UDmax";
    case CvKind::WDmax: return "WDmax";
    case CvKind::FNext: return "Fnext";
  }
  return "?";
}

inline CvKind cv_kind_from_string(const std::string& s) {
  if (s == "supF") return CvKind::SupF;
  if (s == "UDmax") return CvKind::UDmax;
  if (s == "WDmax") return CvKind::WDmax;
  if (s == "Fnext") return CvKind::FNext;
  throw error("unknown critical-value kind '" + s + "'");
}

// Trimming and level are keyed as integer percents to keep floating-point
// noise out of map keys.
inline int trimming_percent(double eps) {
  const int pct = static_cast<int>(eps * 100.0 + 0.5);
  if (std::abs(eps * 100.0 - pct) > 1e-6)
    throw error("trimming does not round to a whole percent");
  return pct;
}

struct CvKey {
  CvKind kind;
  int q;
  int s;
  int eps_pct;    // e.g. 15 for trimming 0.15
  int alpha_pct;  // 90, 95, 99 (confidence level of the critical value)
  auto operator<=>(const CvKey&) const = default;
};

struct CvEntry {
  CvKey key;
  double value = 0.0;
  double se = 0.0;  // Monte Carlo standard error of the quantile estimate
  int reps = 0;
  int grid = 0;
  std::uint64_t seed = 0;
};

class CriticalValueTable {
 public:
  CriticalValueTable() = default;

  void insert(const CvEntry& e) {
    auto [it, fresh] = entries_.emplace(e.key, e);
    if (!fresh)
      throw error("duplicate critical-value entry for kind=" +
                  to_string(e.key.kind) + " q=" + std::to_string(e.key.q) +
                  " s=" + std::to_string(e.key.s));
    (void)it;
  }

  std::size_t size() const { return entries_.size(); }
  const std::map<CvKey, CvEntry>& entries() const { return entries_; }

  std::optional<CvEntry> find(CvKind kind, int q, int s, double eps,
                              int alpha_pct) const {
    CvKey key{kind, q, s, trimming_percent(eps), alpha_pct};
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  const CvEntry& at(CvKind kind, int q, int s, double eps,
                    int alpha_pct) const {
    CvKey key{kind, q, s, trimming_percent(eps), alpha_pct};
    auto it = entries_.find(key);
    if (it == entries_.end())
      throw error("no critical value tabulated for kind=" + to_string(kind) +
                  " q=" + std::to_string(q) + " s=" + std::to_string(s) +
                  " trimming=" + std::to_string(key.eps_pct) +
                  "% level=" + std::to_string(alpha_pct) +
                  "%; regenerate the table with the simulate-cv command");
    return it->second;
  }

  // Within fixed (kind, q, s, eps) the critical value must rise with the
  // level; anything else means the table is corrupt.
  void validate() const {
    for (const auto& [key, entry] : entries_) {
      if (key.alpha_pct == 90) continue;
      CvKey prev = key;
      prev.alpha_pct = key.alpha_pct == 99 ? 95 : 90;
      auto it = entries_.find(prev);
      if (it == entries_.end()) continue;
      if (!(entry.value > it->second.value))
        throw error("critical-value table not monotone in level for kind=" +
                    to_string(key.kind) + " q=" + std::to_string(key.q) +
                    " s=" + std::to_string(key.s) +
                    " trimming=" + std::to_string(key.eps_pct) + "%");
    }
  }

  // Canonical data-line serialization; the checksum covers exactly these
  // bytes, so a reloaded table reproduces the checksum of the file it came
  // from.
  std::string body_string() const {
    std::ostringstream body;
    body.setf(std::ios::fixed);
    for (const auto& [key, e] : entries_) {
      body << to_string(key.kind) << '\t' << key.q << '\t' << key.s << '\t'
           << "0." << (key.eps_pct < 10 ? "0" : "") << key.eps_pct << '\t'
           << "0." << key.alpha_pct << '\t';
      body.precision(4);
      body << e.value << '\t' << e.se << '\t' << e.reps << '\t' << e.grid
           << '\t' << e.seed << '\n';
    }
    return body.str();
  }

  std::string checksum() const { return fnv1a64_hex(body_string()); }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw error("cannot write critical-value table to " + path);
    const std::string body = body_string();
    out << "# " << kCvTableVersion << "\n";
    out << "# columns: kind q s trimming level value mc_se reps grid seed\n";
    out << body;
    out << "# checksum fnv1a64 " << fnv1a64_hex(body) << "\n";
  }

  static CriticalValueTable load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error("cannot open critical-value table " + path);
    std::string line;
    bool version_seen = false;
    std::string checksum;
    std::ostringstream body;
    CriticalValueTable table;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (line[0] == '#') {
        if (line.find(kCvTableVersion) != std::string::npos)
          version_seen = true;
        std::istringstream ls(line);
        std::string hash_word, label, hex;
        ls >> hash_word >> label >> hex;
        if (label == "checksum") {
          std::string algo = hex;
          ls >> hex;
          if (algo != "fnv1a64")
            throw error("unknown checksum algorithm in " + path);
          checksum = hex;
        }
        continue;
      }
      body << line << '\n';
      std::istringstream ls(line);
      std::string kind_s;
      double eps = 0.0, alpha = 0.0;
      CvEntry e;
      if (!(ls >> kind_s >> e.key.q >> e.key.s >> eps >> alpha >> e.value >>
            e.se >> e.reps >> e.grid >> e.seed))
        throw error("malformed line in critical-value table: " + line);
      e.key.kind = cv_kind_from_string(kind_s);
      e.key.eps_pct = trimming_percent(eps);
      e.key.alpha_pct = static_cast<int>(alpha * 100.0 + 0.5);
      table.insert(e);
    }
    if (!version_seen)
      throw error("critical-value table " + path +
                  " lacks the version line (# " + std::string(kCvTableVersion) + ")");
    if (checksum.empty())
      throw error("critical-value table " + path + " lacks a checksum line");
    const std::string actual = fnv1a64_hex(body.str());
    if (actual != checksum)
      throw error("critical-value table " + path +
                  " failed its checksum (file corrupted or edited)");
    table.validate();
    return table;
  }

  // Path baked in at configure time; callers may override.
  static std::string default_path() {
#ifdef STRUCTBREAK_DEFAULT_CV_TABLE
    return STRUCTBREAK_DEFAULT_CV_TABLE;
#else
    return "data/critical_values.tsv";
#endif
  }

 private:
  std::map<CvKey, CvEntry> entries_;
};

}  // namespace structbreak
