#pragma once

// ModelSpec: which variables break, which do not, how cross-sectional
// dependence is absorbed, and the deterministic component.  Mirrors the
// regression model
//
//   y_it = x_it' beta_j + w_it' gamma + (factor terms) + deterministic + e_it
//
// on regime j, where the x block shifts at each break and the w block does
// not.  "csa" blocks enter through cross-sectional averages with
// unit-specific loadings; "kfactors"/"nbkfactors" are observed common
// factors with unit-specific loadings (breaking / non-breaking).

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "structbreak/common.hpp"
#include "structbreak/panel_data.hpp"

namespace structbreak {

enum class Deterministic {
  FixedEffects,            // unit intercepts, constant across regimes
  FixedEffectsWithBreaks,  // unit intercepts shifting at every break
  Constant,                // one common intercept
  ConstantWithBreaks,      // common intercept shifting at every break
  None,
};

enum class Vce {
  Ssr,  // homoskedastic: sigma^2 (X'X)^-1
  Hc,   // heteroskedasticity-robust (HC0)
  Hac,  // Newey-West within units, Bartlett kernel
  Np,   // nonparametric across-unit dispersion (experimental, panels only)
};

inline std::string to_string(Deterministic d) {
  switch (d) {
    case Deterministic::FixedEffects: return "fe";
    case Deterministic::FixedEffectsWithBreaks: return "febreak";
    case Deterministic::Constant: return "constant";
    case Deterministic::ConstantWithBreaks: return "constantbreak";
    case Deterministic::None: return "none";
  }
  return "?";
}

inline std::string to_string(Vce v) {
  switch (v) {
    case Vce::Ssr: return "ssr";
    case Vce::Hc: return "hc";
    case Vce::Hac: return "hac";
    case Vce::Np: return "np";
  }
  return "?";
}

inline Deterministic deterministic_from_string(const std::string& s) {
  if (s == "fe") return Deterministic::FixedEffects;
  if (s == "febreak") return Deterministic::FixedEffectsWithBreaks;
  if (s == "constant") return Deterministic::Constant;
  if (s == "constantbreak") return Deterministic::ConstantWithBreaks;
  if (s == "none") return Deterministic::None;
  throw error("unknown deterministic option '" + s +
              "'; expected fe, febreak, constant, constantbreak, or none");
}

inline Vce vce_from_string(const std::string& s) {
  if (s == "ssr") return Vce::Ssr;
  if (s == "hc") return Vce::Hc;
  if (s == "hac") return Vce::Hac;
  if (s == "np") return Vce::Np;
  throw error("unknown vce option '" + s + "'; expected ssr, hc, hac, or np");
}

inline const std::vector<double>& allowed_trimmings() {
  static const std::vector<double> eps = {0.05, 0.10, 0.15, 0.20, 0.25};
  return eps;
}

struct ModelSpec {
  std::string depvar;
  std::vector<std::string> break_vars;    // x: coefficients shift per regime
  std::vector<std::string> nobreak_vars;  // w: coefficients common to regimes
  // Cross-sectional averages of these variables enter with unit-specific
  // loadings (breaking / non-breaking) to absorb common factors:
  std::vector<std::string> csa_break;
  std::vector<std::string> csa_nobreak;
  // Observed common factors with unit-specific loadings:
  std::vector<std::string> kfactors;    // loadings shift at breaks
  std::vector<std::string> nbkfactors;  // loadings constant across regimes
  Deterministic deterministic = Deterministic::FixedEffects;
  double trimming = 0.15;
  Vce vce = Vce::Ssr;
  // Optional Bartlett bandwidth override for vce=hac; <0 means the default
  // floor(4*(T/100)^(2/9)); 0 collapses hac to hc.
  int hac_bandwidth = -1;

  bool trimming_allowed() const {
    for (double e : allowed_trimmings())
      if (std::abs(trimming - e) < 1e-9) return true;
    return false;
  }

  // True when every included component shifts at the breaks, so break-date
  // search is a single dynamic program with no iteration.
  bool pure_change(int n_units) const {
    if (!nobreak_vars.empty() || !nbkfactors.empty()) return false;
    if (n_units > 1 && !csa_nobreak.empty()) return false;
    switch (effective_deterministic(n_units)) {
      case Deterministic::None:
      case Deterministic::ConstantWithBreaks:
      case Deterministic::FixedEffectsWithBreaks:
        return true;
      default:
        return false;
    }
  }

  // With a single unit there are no unit effects to distinguish: fixed
  // effects collapse to a constant (breaking or not).
  Deterministic effective_deterministic(int n_units) const {
    if (n_units == 1) {
      if (deterministic == Deterministic::FixedEffects)
        return Deterministic::Constant;
      if (deterministic == Deterministic::FixedEffectsWithBreaks)
        return Deterministic::ConstantWithBreaks;
    }
    return deterministic;
  }

  bool has_breaking_constant(int n_units) const {
    return effective_deterministic(n_units) ==
           Deterministic::ConstantWithBreaks;
  }

  bool has_common_constant(int n_units) const {
    return effective_deterministic(n_units) == Deterministic::Constant;
  }

  // Number of coefficients per regime whose equality across regimes the
  // break tests restrict.  With one unit, factor loadings are ordinary
  // common coefficients, so kfactors columns count; in panels those blocks
  // are unit-specific nuisance loadings and not part of the tested vector.
  // csa lists never count: with one unit the averages are no-ops, and in
  // panels they carry unit-specific coefficients.
  int q_eff(int n_units) const {
    int q = static_cast<int>(break_vars.size());
    if (has_breaking_constant(n_units)) q += 1;
    if (n_units == 1) q += static_cast<int>(kfactors.size());
    return q;
  }

  void validate(const PanelDataset& data) const {
    if (depvar.empty()) throw error("no dependent variable given");
    if (!data.has_column(depvar))
      throw error("dependent variable '" + depvar + "' not in dataset");
    if (!trimming_allowed())
      throw error(
          "trimming must be one of 0.05, 0.10, 0.15, 0.20, 0.25 (got " +
          std::to_string(trimming) + ")");

    auto check_vars = [&](const std::vector<std::string>& names,
                          const char* role) {
      for (const auto& v : names) {
        if (!data.has_column(v))
          throw error(std::string(role) + " variable '" + v +
                      "' not in dataset");
        if (v == depvar)
          throw error("dependent variable '" + v + "' also listed as " + role);
      }
    };
    check_vars(break_vars, "breaking");
    check_vars(nobreak_vars, "non-breaking");
    check_vars(csa_break, "csa (breaking)");
    check_vars(csa_nobreak, "csa (non-breaking)");
    check_vars(kfactors, "breaking factor");
    check_vars(nbkfactors, "non-breaking factor");

    // A variable cannot appear in two roles: the design would be collinear
    // by construction.
    std::vector<std::pair<const std::vector<std::string>*, const char*>>
        groups = {{&break_vars, "breaking"},
                  {&nobreak_vars, "non-breaking"},
                  {&kfactors, "breaking factor"},
                  {&nbkfactors, "non-breaking factor"}};
    std::set<std::string> seen;
    for (auto& [vars, role] : groups) {
      for (const auto& v : *vars) {
        if (!seen.insert(v).second)
          throw error("variable '" + v + "' listed in more than one role");
      }
    }
    // The two csa lists may repeat regressor names (averaging is a distinct
    // construction) but not each other.
    std::set<std::string> csa_seen;
    for (const auto& v : csa_break)
      if (!csa_seen.insert(v).second)
        throw error("variable '" + v + "' repeated in csa lists");
    for (const auto& v : csa_nobreak)
      if (!csa_seen.insert(v).second)
        throw error("variable '" + v + "' repeated in csa lists");

    const int n = data.n_units();
    // csa options are silently inert when N = 1: the average of one unit is
    // the series itself and would only duplicate existing columns.
    if (vce == Vce::Np && n == 1)
      throw error("vce=np requires panel data (more than one unit)");

    // There must be something whose stability is at stake.
    if (q_eff(n) == 0 && effective_deterministic(n) !=
                             Deterministic::FixedEffectsWithBreaks)
      throw error(
          "model has no breaking coefficients: add breaking regressors or a "
          "breaking deterministic component");

    if (hac_bandwidth >= 0 && vce != Vce::Hac)
      throw error("a hac bandwidth was given but vce is not hac");
  }
};

}  // namespace structbreak
