#pragma once
// Batch front end: a RunConfig mirroring the command-line surface, the verb
// dispatcher producing a versioned JSON report, a text rendering of that
// report, and the postestimation emitters fed by a persisted state file.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "structbreak/confidence.hpp"
#include "structbreak/csv_io.hpp"
#include "structbreak/hypothesis.hpp"
#include "structbreak/simulate.hpp"

namespace structbreak {

using nlohmann::json;

struct RunConfig {
  std::string verb;  // auto test estimate indicator split scatter-data simulate-cv
  std::string input;

  // Column roles and model options.
  std::string unit, time, depvar;
  std::vector<std::string> breakvars, nobreakvars, csa, csanobreak, kfactors,
      nbkfactors;
  std::string deterministic = "fe";
  double trimming = 0.15;
  std::string vce = "ssr";
  int hac_bandwidth = -1;

  // Test / estimate options.
  std::vector<int> breaks;  // one value, or lower and upper bound
  int hypothesis = 0;       // 1, 2, 3; 0 = not set
  std::vector<std::string> breakpoints;
  bool index_mode = false;  // breakpoints are 1-based positions
  std::string fmt;          // accepted for familiarity; labels match verbatim
  bool wdmax = false;
  int level = 95;
  bool sequential = false;
  bool showindex = false;
  bool regime_moments = false;  // regime-specific CI moments

  // Output and reproducibility.
  std::uint64_t seed = 123456789;
  std::string out;            // report (or table / postestimation) path
  std::string format = "text";
  std::string cv_table;       // override the built-in table path
  std::string state_file;     // override the estimate-state sidecar path
  std::vector<std::string> varlist;  // split / scatter-data variables

  // simulate-cv parameters (trimming, breaks, seed, out are shared).
  int sim_q = 1;
  int sim_reps = 5000;
  int sim_grid = 1000;
};

namespace detail {

inline json config_to_json(const RunConfig& c) {
  return json{{"verb", c.verb},
              {"input", c.input},
              {"unit", c.unit},
              {"time", c.time},
              {"depvar", c.depvar},
              {"breakvars", c.breakvars},
              {"nobreakvars", c.nobreakvars},
              {"csa", c.csa},
              {"csanobreak", c.csanobreak},
              {"kfactors", c.kfactors},
              {"nbkfactors", c.nbkfactors},
              {"deterministic", c.deterministic},
              {"trimming", c.trimming},
              {"vce", c.vce},
              {"hac_bandwidth", c.hac_bandwidth},
              {"breaks", c.breaks},
              {"hypothesis", c.hypothesis},
              {"breakpoints", c.breakpoints},
              {"index", c.index_mode},
              {"fmt", c.fmt},
              {"wdmax", c.wdmax},
              {"level", c.level},
              {"sequential", c.sequential},
              {"showindex", c.showindex},
              {"regime_moments", c.regime_moments},
              {"seed", c.seed},
              {"out", c.out},
              {"format", c.format},
              {"cv_table", c.cv_table},
              {"state_file", c.state_file},
              {"varlist", c.varlist},
              {"sim_q", c.sim_q},
              {"sim_reps", c.sim_reps},
              {"sim_grid", c.sim_grid}};
}

inline RunConfig config_from_json(const json& j) {
  RunConfig c;
  c.verb = j.value("verb", "");
  c.input = j.value("input", "");
  c.unit = j.value("unit", "");
  c.time = j.value("time", "");
  c.depvar = j.value("depvar", "");
  c.breakvars = j.value("breakvars", std::vector<std::string>{});
  c.nobreakvars = j.value("nobreakvars", std::vector<std::string>{});
  c.csa = j.value("csa", std::vector<std::string>{});
  c.csanobreak = j.value("csanobreak", std::vector<std::string>{});
  c.kfactors = j.value("kfactors", std::vector<std::string>{});
  c.nbkfactors = j.value("nbkfactors", std::vector<std::string>{});
  c.deterministic = j.value("deterministic", "fe");
  c.trimming = j.value("trimming", 0.15);
  c.vce = j.value("vce", "ssr");
  c.hac_bandwidth = j.value("hac_bandwidth", -1);
  c.breaks = j.value("breaks", std::vector<int>{});
  c.hypothesis = j.value("hypothesis", 0);
  c.breakpoints = j.value("breakpoints", std::vector<std::string>{});
  c.index_mode = j.value("index", false);
  c.fmt = j.value("fmt", "");
  c.wdmax = j.value("wdmax", false);
  c.level = j.value("level", 95);
  c.sequential = j.value("sequential", false);
  c.showindex = j.value("showindex", false);
  c.regime_moments = j.value("regime_moments", false);
  c.seed = j.value("seed", std::uint64_t{123456789});
  c.out = j.value("out", "");
  c.format = j.value("format", "text");
  c.cv_table = j.value("cv_table", "");
  c.state_file = j.value("state_file", "");
  c.varlist = j.value("varlist", std::vector<std::string>{});
  c.sim_q = j.value("sim_q", 1);
  c.sim_reps = j.value("sim_reps", 5000);
  c.sim_grid = j.value("sim_grid", 1000);
  return c;
}

inline ModelSpec spec_from_config(const RunConfig& c) {
  ModelSpec spec;
  spec.depvar = c.depvar;
  spec.break_vars = c.breakvars;
  spec.nobreak_vars = c.nobreakvars;
  spec.csa_break = c.csa;
  spec.csa_nobreak = c.csanobreak;
  spec.kfactors = c.kfactors;
  spec.nbkfactors = c.nbkfactors;
  spec.deterministic = deterministic_from_string(c.deterministic);
  spec.trimming = c.trimming;
  spec.vce = vce_from_string(c.vce);
  spec.hac_bandwidth = c.hac_bandwidth;
  return spec;
}

inline json test_to_json(const TestOutcome& t,
                         const std::vector<std::string>& labels) {
  json j;
  j["hypothesis"] = t.hypothesis;
  j["statistic"] = t.statistic;
  if (t.has_criticals) {
    j["criticals"] = {{"c90", t.c90}, {"c95", t.c95}, {"c99", t.c99}};
    j["reject"] = {{"r90", t.reject90}, {"r95", t.reject95},
                   {"r99", t.reject99}};
  }
  if (t.has_p) {
    j["p_value"] = t.p_value;
    j["df_num"] = t.df_num;
    j["df_den"] = t.df_den;
    j["df_num_stated"] = t.df_num_stated;
    j["p_value_stated"] = t.p_value_stated;
  }
  if (t.has_attained) {
    json breaks = json::array();
    for (int b : t.attained.breaks())
      breaks.push_back(json{{"index", b},
                            {"label", labels[static_cast<size_t>(b) - 1]}});
    j["attained_breaks"] = breaks;
  }
  if (!t.supf_by_s.empty()) {
    j["supf_by_s"] = t.supf_by_s;
    j["max_at_s"] = t.max_at_s;
  }
  if (t.max_at_tau > 0) j["max_at_tau"] = t.max_at_tau;
  if (!t.notes.empty()) j["notes"] = t.notes;
  return j;
}

inline json intervals_to_json(const std::vector<BreakInterval>& cis) {
  json arr = json::array();
  for (const auto& ci : cis) {
    json j{{"break_index", ci.break_index},
           {"break_label", ci.break_label},
           {"lower_index", ci.lower},
           {"upper_index", ci.upper},
           {"lower_label", ci.lower_label},
           {"upper_label", ci.upper_label},
           {"level", ci.level},
           {"degenerate", ci.degenerate}};
    if (!ci.note.empty()) j["note"] = ci.note;
    arr.push_back(std::move(j));
  }
  return arr;
}

inline json estimates_to_json(const PanelDataset& data,
                              const BreakEstimates& est,
                              const std::vector<BreakInterval>& cis) {
  const auto& labels = data.time_labels();
  json j;
  j["n_breaks"] = est.partition.n_breaks();
  json breaks = json::array();
  for (int b : est.partition.breaks())
    breaks.push_back(json{{"index", b},
                          {"label", labels[static_cast<size_t>(b) - 1]}});
  j["breaks"] = breaks;
  j["confidence_intervals"] = intervals_to_json(cis);
  json coefs = json::array();
  for (size_t k = 0; k < est.system.column_map.size(); ++k) {
    const auto& info = est.system.column_map[k];
    coefs.push_back(json{{"name", info.name},
                         {"role", info.role},
                         {"regime", info.regime},
                         {"unit", info.unit},
                         {"display", info.display()},
                         {"value", est.fit.coefficients[static_cast<Eigen::Index>(k)]}});
  }
  j["coefficients"] = coefs;
  j["ssr"] = est.fit.ssr;
  j["dof_resid"] = est.fit.dof_resid;
  j["iterations"] = est.iterations;
  j["converged"] = est.converged;
  if (est.ssr_path.size() > 1) j["ssr_path"] = est.ssr_path;
  return j;
}

// Loads the critical-value table if one is reachable; tests fall back to
// reporting statistics without critical values.
inline std::optional<CriticalValueTable> try_load_table(const RunConfig& c,
                                                        std::string* path_out,
                                                        std::string* err) {
  const std::string path =
      c.cv_table.empty() ? CriticalValueTable::default_path() : c.cv_table;
  *path_out = path;
  try {
    return CriticalValueTable::load(path);
  } catch (const error& e) {
    *err = e.what();
    return std::nullopt;
  }
}

inline std::string state_path(const RunConfig& c) {
  if (!c.state_file.empty()) return c.state_file;
  if (!c.out.empty()) return c.out + ".state.json";
  return "structbreak_state.json";
}

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream out(path);
  if (!out) throw error("cannot write " + path);
  out << content;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Text rendering.  The JSON report is the source of truth; this prints the
// same numbers in a human layout.

inline std::string render_text(const json& r) {
  std::ostringstream os;
  auto num = [](const json& v) {
    std::ostringstream s;
    s << std::setprecision(6) << v.get<double>();
    return s.str();
  };
  os << "structbreak " << r.value("library_version", "") << "  verb="
     << r.value("verb", "") << "\n";
  if (r.contains("data")) {
    const auto& d = r["data"];
    os << "data: " << d.value("input", "") << "  N=" << d["n_units"]
       << "  T=" << d["n_periods"] << "\n";
  }
  if (r.contains("cv_table"))
    os << "critical values: " << r["cv_table"].value("path", "")
       << " (checksum " << r["cv_table"].value("checksum", "") << ")\n";

  auto print_test = [&](const json& t, const char* indent) {
    os << indent << t.value("hypothesis", "") << ": statistic "
       << num(t["statistic"]);
    if (t.contains("criticals")) {
      const auto& cv = t["criticals"];
      const auto& rj = t["reject"];
      os << "  c90 " << num(cv["c90"]) << (rj["r90"].get<bool>() ? "*" : " ")
         << " c95 " << num(cv["c95"]) << (rj["r95"].get<bool>() ? "*" : " ")
         << " c99 " << num(cv["c99"]) << (rj["r99"].get<bool>() ? "*" : " ");
    }
    if (t.contains("p_value"))
      os << "  p " << num(t["p_value"]) << " (df " << t["df_num"] << ", "
         << t["df_den"] << "); stated-df p " << num(t["p_value_stated"])
         << " (df " << t["df_num_stated"] << ")";
    os << "\n";
    if (t.contains("attained_breaks")) {
      os << indent << "  dates:";
      for (const auto& b : t["attained_breaks"])
        os << " " << b["index"] << " (" << b.value("label", "") << ")";
      os << "\n";
    }
    if (t.contains("notes"))
      os << indent << "  note: " << t.value("notes", "") << "\n";
  };

  if (r.contains("tests"))
    for (const auto& t : r["tests"]) print_test(t, "");
  if (r.contains("sequential")) {
    const auto& seq = r["sequential"];
    os << "sequential trace (decisions at " << seq["level"] << "%):\n";
    for (const auto& t : seq["trace"]) print_test(t, "  ");
    os << "selected number of breaks: " << seq["n_breaks"] << "\n";
  }
  if (r.contains("estimates")) {
    const auto& e = r["estimates"];
    os << "breaks (" << e["n_breaks"] << "):";
    for (const auto& b : e["breaks"])
      os << " " << b["index"] << " (" << b.value("label", "") << ")";
    os << "\n";
    const bool show_index = r.contains("config") &&
                            r["config"].value("showindex", false);
    for (const auto& ci : e["confidence_intervals"]) {
      os << "  ci " << static_cast<int>(ci["level"].get<double>() * 100 + 0.5)
         << "% for " << ci["break_index"] << ": ";
      if (show_index)
        os << "[" << ci["lower_index"] << ", " << ci["upper_index"] << "]";
      else
        os << "[" << ci.value("lower_label", "") << ", "
           << ci.value("upper_label", "") << "]";
      if (ci["degenerate"].get<bool>()) os << "  (degenerate)";
      os << "\n";
    }
    os << "coefficients:\n";
    for (const auto& cf : e["coefficients"]) {
      if (cf["unit"].get<int>() >= 0) continue;  // unit blocks stay in JSON
      os << "  " << cf.value("display", "") << " = " << num(cf["value"])
         << "\n";
    }
    os << "ssr " << num(e["ssr"]) << "  iterations " << e["iterations"]
       << (e["converged"].get<bool>() ? "" : "  (not converged)") << "\n";
  }
  if (r.contains("table")) {
    const auto& t = r["table"];
    os << "critical-value table: " << t.value("path", "") << "  ("
       << t["entries"] << " entries, checksum " << t.value("checksum", "")
       << ")\n";
  }
  if (r.contains("postestimation")) {
    const auto& p = r["postestimation"];
    os << p.value("kind", "") << " written to " << p.value("path", "");
    if (p.contains("files")) {
      os << ":";
      for (const auto& f : p["files"]) os << " " << f.get<std::string>();
    }
    if (p.contains("created"))
      for (const auto& f : p["created"])
        os << "\n  created " << f.get<std::string>();
    os << "\n";
  }
  if (r.contains("notes"))
    for (const auto& n : r["notes"])
      os << "note: " << n.get<std::string>() << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Verb implementations.

namespace detail {

inline int default_smax(const ModelSpec& spec) {
  return max_breaks(spec.trimming);
}

// --breaks carries one value (upper bound; lower bound defaults) or two.
inline std::pair<int, int> breaks_range(const RunConfig& c, int lower_default,
                                        int upper_default) {
  if (c.breaks.empty()) return {lower_default, upper_default};
  if (c.breaks.size() == 1) return {lower_default, c.breaks[0]};
  if (c.breaks.size() == 2) return {c.breaks[0], c.breaks[1]};
  throw error("--breaks takes one or two integers");
}

inline int breaks_single(const RunConfig& c, const char* what) {
  if (c.breaks.size() != 1)
    throw error(std::string(what) + " needs --breaks with a single integer");
  return c.breaks[0];
}

inline json run_estimation(const RunConfig& c, const PanelDataset& data,
                           const ModelSpec& spec, json& report, int s) {
  BreakEstimates est = estimate_breaks(data, spec, s);
  std::vector<BreakInterval> cis;
  if (est.partition.n_breaks() > 0 && spec.q_eff(data.n_units()) >= 1)
    cis = break_ci(data, spec, est.partition, c.level / 100.0,
                   c.regime_moments);
  report["estimates"] = estimates_to_json(data, est, cis);
  json state{{"schema", "structbreak-state-v1"},
             {"config", config_to_json(c)},
             {"breaks", est.partition.breaks()},
             {"n_periods", data.n_periods()}};
  write_text_file(state_path(c), state.dump(2) + "\n");
  report["state_file"] = state_path(c);
  return report;
}

inline json run_test(const RunConfig& c, const PanelDataset& data,
                     const ModelSpec& spec, json& report,
                     const CriticalValueTable* table) {
  const auto& labels = data.time_labels();
  json tests = json::array();

  if (!c.breakpoints.empty()) {
    if (c.hypothesis != 0)
      throw error("--breakpoints tests known dates; it cannot be combined "
                  "with --hypothesis");
    BreakPartition part = parse_breakpoints(
        c.breakpoints,
        c.index_mode ? BreakpointMode::Index : BreakpointMode::Label, data,
        spec.trimming);
    tests.push_back(test_to_json(chow_f(data, spec, part), labels));
    report["tests"] = tests;
    return report;
  }

  if (c.sequential) {
    if (table == nullptr)
      throw error("the sequential test needs a critical-value table; run the "
                  "simulate-cv command first");
    const int smax = c.breaks.empty() ? default_smax(spec)
                                      : breaks_single(c, "--sequential");
    SequentialResult seq =
        sequential_count(data, spec, smax, c.level, *table);
    json trace = json::array();
    for (const auto& t : seq.trace) trace.push_back(test_to_json(t, labels));
    report["sequential"] = json{{"n_breaks", seq.n_breaks},
                                {"level", seq.level_pct},
                                {"trace", trace}};
    return report;
  }

  switch (c.hypothesis) {
    case 1: {
      const int s = breaks_single(c, "hypothesis 1 (sup-F)");
      tests.push_back(test_to_json(sup_f(data, spec, s, table), labels));
      break;
    }
    case 2: {
      const auto [lo, hi] = breaks_range(c, 1, default_smax(spec));
      tests.push_back(test_to_json(
          double_max(data, spec, lo, hi, c.wdmax, c.level, table), labels));
      break;
    }
    case 3: {
      if (c.breaks.empty())
        throw error("hypothesis 3 tests s against s+1 breaks and needs "
                    "--breaks with the null break count");
      const int s = breaks_single(c, "hypothesis 3 (F(s+1|s))");
      tests.push_back(test_to_json(f_next(data, spec, s, table), labels));
      break;
    }
    default:
      throw error("the test verb needs --hypothesis 1|2|3, --sequential, or "
                  "--breakpoints");
  }
  report["tests"] = tests;
  return report;
}

inline json load_state(const RunConfig& c) {
  const std::string path = state_path(c);
  std::ifstream in(path);
  if (!in)
    throw error("no prior estimate found at " + path +
                "; run the auto or estimate verb first (or pass --state)");
  json state;
  try {
    in >> state;
  } catch (const std::exception& e) {
    throw error("cannot parse state file " + path + ": " + e.what());
  }
  if (state.value("schema", "") != "structbreak-state-v1")
    throw error(path + " is not a structbreak state file");
  return state;
}

inline json run_postestimation(const RunConfig& c, json& report) {
  json state = load_state(c);
  RunConfig prior = config_from_json(state["config"]);
  PanelDataset data = load_csv(c.input.empty() ? prior.input : c.input,
                               CsvRoles{prior.unit, prior.time});
  const int T = data.n_periods();
  if (state.value("n_periods", T) != T)
    throw error("the data set no longer matches the stored estimate (" +
                std::to_string(T) + " periods now, " +
                std::to_string(state.value("n_periods", 0)) + " stored)");
  BreakPartition part(state["breaks"].get<std::vector<int>>(), T);
  const std::vector<int> regime = part.regime_indicator();
  const auto& labels = data.time_labels();
  const auto& units = data.unit_ids();
  const int N = data.n_units();

  json post{{"kind", c.verb}};
  std::ostringstream body;
  // Written values must survive a round trip back into a regression.
  body << std::setprecision(17);

  if (c.verb == "indicator") {
    const std::string path = c.out.empty() ? "indicator.csv" : c.out;
    body << "unit,time,regime\n";
    for (int i = 0; i < N; ++i)
      for (int t = 0; t < T; ++t)
        body << units[static_cast<size_t>(i)] << ','
             << labels[static_cast<size_t>(t)] << ','
             << regime[static_cast<size_t>(t)] << '\n';
    write_text_file(path, body.str());
    post["path"] = path;
  } else if (c.verb == "split") {
    if (c.varlist.empty())
      throw error("split needs --varlist with at least one variable");
    const std::string path = c.out.empty() ? "split.csv" : c.out;
    const int R = part.n_regimes();
    json created = json::array();
    body << "unit,time";
    for (const auto& v : c.varlist) {
      data.column(v);  // fail early on unknown variables
      for (int j = 1; j <= R; ++j) {
        body << ',' << v << '_' << j;
        created.push_back(v + "_" + std::to_string(j));
      }
    }
    body << '\n';
    for (int i = 0; i < N; ++i)
      for (int t = 0; t < T; ++t) {
        body << units[static_cast<size_t>(i)] << ','
             << labels[static_cast<size_t>(t)];
        for (const auto& v : c.varlist) {
          const auto& col = data.column(v);
          for (int j = 1; j <= R; ++j)
            body << ','
                 << (regime[static_cast<size_t>(t)] == j ? col(i, t) : 0.0);
        }
        body << '\n';
      }
    write_text_file(path, body.str());
    post["path"] = path;
    post["created"] = created;
  } else {  // scatter-data
    const std::string xvar =
        !c.varlist.empty()
            ? c.varlist.front()
            : (!prior.breakvars.empty() ? prior.breakvars.front() : "");
    if (xvar.empty())
      throw error("scatter-data needs --varlist with the x variable");
    const auto& x = data.column(xvar);
    const auto& y = data.column(prior.depvar);
    const std::string prefix = c.out.empty() ? "scatter" : c.out;
    json files = json::array();
    for (int j = 1; j <= part.n_regimes(); ++j) {
      std::ostringstream fb;
      fb << std::setprecision(17);
      fb << "unit,time," << xvar << ',' << prior.depvar << '\n';
      for (int i = 0; i < N; ++i)
        for (int t = 0; t < T; ++t)
          if (regime[static_cast<size_t>(t)] == j)
            fb << units[static_cast<size_t>(i)] << ','
               << labels[static_cast<size_t>(t)] << ',' << x(i, t) << ','
               << y(i, t) << '\n';
      const std::string path = prefix + "_regime" + std::to_string(j) + ".csv";
      write_text_file(path, fb.str());
      files.push_back(path);
    }
    post["path"] = prefix;
    post["files"] = files;
  }
  report["postestimation"] = post;
  return report;
}

inline json run_simulate_cv(const RunConfig& c, json& report) {
  const double eps = c.trimming;
  const int smax =
      c.breaks.empty() ? max_breaks(eps) : breaks_single(c, "simulate-cv");
  auto rows = simulate_cv_batch(c.sim_q, eps, smax, c.sim_reps, c.sim_grid,
                                c.seed);
  const std::string path =
      c.out.empty() ? CriticalValueTable::default_path() : c.out;
  CriticalValueTable table;
  {
    std::ifstream probe(path);
    if (probe) {
      table = CriticalValueTable::load(path);
    }
  }
  // Fresh rows replace any stale entries for the same keys.
  CriticalValueTable merged;
  for (const auto& [key, e] : table.entries()) {
    bool replaced = false;
    for (const auto& r : rows)
      if (r.key == key) {
        replaced = true;
        break;
      }
    if (!replaced) merged.insert(e);
  }
  for (const auto& r : rows) merged.insert(r);
  merged.validate();
  merged.save(path);
  report["table"] = json{{"path", path},
                         {"entries", merged.size()},
                         {"new_entries", rows.size()},
                         {"checksum", merged.checksum()}};
  return report;
}

}  // namespace detail

// Dispatch a full run.  Returns the JSON report; postestimation CSVs, the
// state sidecar, and table files are written as side effects.  The report
// deliberately contains no timestamps or environment detail: re-running the
// embedded config must reproduce it byte for byte.
inline json run(const RunConfig& c) {
  json report{{"schema", kReportSchemaVersion},
              {"library_version", kLibraryVersion},
              {"verb", c.verb},
              {"config", detail::config_to_json(c)},
              {"seed", c.seed}};
  json notes = json::array();
  if (!c.fmt.empty())
    notes.push_back("--fmt is accepted for familiarity, but time labels are "
                    "matched verbatim against the grid");

  if (c.verb == "simulate-cv") {
    detail::run_simulate_cv(c, report);
    if (!notes.empty()) report["notes"] = notes;
    return report;
  }
  if (c.verb == "indicator" || c.verb == "split" || c.verb == "scatter-data") {
    detail::run_postestimation(c, report);
    if (!notes.empty()) report["notes"] = notes;
    return report;
  }

  if (c.input.empty()) throw error("an input CSV is required (positional)");
  if (c.depvar.empty()) throw error("--depvar is required");
  PanelDataset data = load_csv(c.input, CsvRoles{c.unit, c.time});
  ModelSpec spec = detail::spec_from_config(c);
  spec.validate(data);
  report["data"] = json{{"input", c.input},
                        {"n_units", data.n_units()},
                        {"n_periods", data.n_periods()}};

  std::string table_path, table_err;
  auto table = detail::try_load_table(c, &table_path, &table_err);
  if (table)
    report["cv_table"] = json{{"path", table_path},
                              {"checksum", table->checksum()}};
  else
    notes.push_back("critical-value table unavailable (" + table_err +
                    "); statistics are reported without critical values");

  if (c.verb == "test") {
    detail::run_test(c, data, spec, report, table ? &*table : nullptr);
  } else if (c.verb == "estimate") {
    const int s = detail::breaks_single(c, "estimate");
    detail::run_estimation(c, data, spec, report, s);
  } else if (c.verb == "auto") {
    if (!table)
      throw error("the auto verb needs a critical-value table; run the "
                  "simulate-cv command first (" + table_err + ")");
    const int smax = c.breaks.empty() ? detail::default_smax(spec)
                                      : detail::breaks_single(c, "auto");
    SequentialResult seq =
        sequential_count(data, spec, smax, c.level, *table);
    json trace = json::array();
    for (const auto& t : seq.trace)
      trace.push_back(detail::test_to_json(t, data.time_labels()));
    report["sequential"] = json{{"n_breaks", seq.n_breaks},
                                {"level", seq.level_pct},
                                {"trace", trace}};
    detail::run_estimation(c, data, spec, report, seq.n_breaks);
  } else {
    throw error("unknown verb '" + c.verb + "'");
  }
  if (!notes.empty()) report["notes"] = notes;
  return report;
}

}  // namespace structbreak
