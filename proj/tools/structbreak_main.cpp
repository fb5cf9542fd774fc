// Command-line front end: verbs auto / test / estimate for analysis,
// indicator / split / scatter-data for postestimation output, and
// simulate-cv for regenerating the critical-value table.

#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <structbreak/structbreak.hpp>

namespace {

using structbreak::RunConfig;

void add_output_options(CLI::App* sub, RunConfig* cfg) {
  sub->add_option("--seed", cfg->seed, "RNG seed recorded in the report");
  sub->add_option("--out", cfg->out, "output path (report, table, or CSV)");
  sub->add_option("--format", cfg->format, "stdout rendering: text or json")
      ->check(CLI::IsMember({"text", "json"}));
}

void add_data_options(CLI::App* sub, RunConfig* cfg) {
  sub->add_option("input", cfg->input, "CSV file with a header row")
      ->required();
  sub->add_option("--unit", cfg->unit,
                  "unit id column; omit for a single time series");
  sub->add_option("--time", cfg->time, "time column (regular grid)")
      ->required();
  sub->add_option("--depvar", cfg->depvar, "dependent variable")->required();
  sub->add_option("--breakvars", cfg->breakvars,
                  "regressors whose coefficients shift at breaks");
  sub->add_option("--nobreakvars", cfg->nobreakvars,
                  "regressors with regime-constant coefficients");
  sub->add_option("--csa", cfg->csa,
                  "variables whose cross-sectional averages enter with "
                  "breaking unit-specific loadings");
  sub->add_option("--csanobreak", cfg->csanobreak,
                  "cross-sectional averages with non-breaking loadings");
  sub->add_option("--kfactors", cfg->kfactors,
                  "observed common factors with breaking loadings");
  sub->add_option("--nbkfactors", cfg->nbkfactors,
                  "observed common factors with non-breaking loadings");
  sub->add_option("--deterministic", cfg->deterministic,
                  "fe | febreak | constant | constantbreak | none");
  sub->add_option("--trimming", cfg->trimming,
                  "minimum regime share: 0.05 0.10 0.15 0.20 0.25");
  sub->add_option("--vce", cfg->vce, "ssr | hc | hac | np");
  sub->add_option("--hacbw", cfg->hac_bandwidth,
                  "bartlett bandwidth override for --vce hac");
  sub->add_option("--level", cfg->level,
                  "confidence level in percent (90, 95, or 99 for decisions)");
  sub->add_option("--cvtable", cfg->cv_table,
                  "critical-value table path (defaults to the built-in)");
  sub->add_option("--state", cfg->state_file,
                  "estimate-state sidecar path override");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"structural breaks in time-series and panel regressions: "
               "tests, dating, and confidence intervals"};
  app.require_subcommand(1);
  RunConfig cfg;

  CLI::App* v_auto = app.add_subcommand(
      "auto", "pick the number of breaks sequentially, then date them");
  add_data_options(v_auto, &cfg);
  v_auto->add_option("--breaks", cfg.breaks,
                     "largest break count to consider")
      ->expected(1);
  v_auto->add_flag("--showindex", cfg.showindex,
                   "print confidence intervals as positions, not labels");
  v_auto->add_flag("--regime-moments", cfg.regime_moments,
                   "estimate interval moments per regime");
  add_output_options(v_auto, &cfg);

  CLI::App* v_test = app.add_subcommand(
      "test", "test for breaks: known dates, sup-F, double maximum, or "
              "sequential");
  add_data_options(v_test, &cfg);
  v_test->add_option("--breaks", cfg.breaks,
                     "break count, or lower and upper bound")
      ->expected(1, 2);
  v_test->add_option("--hypothesis", cfg.hypothesis,
                     "1 sup-F | 2 double maximum | 3 F(s+1|s)")
      ->check(CLI::Range(1, 3));
  v_test->add_option("--breakpoints", cfg.breakpoints,
                     "known break dates (labels, or positions with --index)");
  v_test->add_flag("--index", cfg.index_mode,
                   "read --breakpoints as 1-based positions");
  v_test->add_option("--fmt", cfg.fmt,
                     "date format tag; labels are matched verbatim");
  v_test->add_flag("--wdmax", cfg.wdmax,
                   "weighted double maximum (with --hypothesis 2)");
  v_test->add_flag("--sequential", cfg.sequential,
                   "run the full sequential trace");
  add_output_options(v_test, &cfg);

  CLI::App* v_est = app.add_subcommand(
      "estimate", "date a given number of breaks and build intervals");
  add_data_options(v_est, &cfg);
  v_est->add_option("--breaks", cfg.breaks, "number of breaks")
      ->expected(1)
      ->required();
  v_est->add_flag("--showindex", cfg.showindex,
                  "print confidence intervals as positions, not labels");
  v_est->add_flag("--regime-moments", cfg.regime_moments,
                  "estimate interval moments per regime");
  add_output_options(v_est, &cfg);

  CLI::App* v_ind = app.add_subcommand(
      "indicator", "write the regime id of every observation");
  CLI::App* v_split = app.add_subcommand(
      "split", "split variables into per-regime columns");
  CLI::App* v_scat = app.add_subcommand(
      "scatter-data", "per-regime (x, y) files for plotting");
  for (CLI::App* sub : {v_ind, v_split, v_scat}) {
    sub->add_option("input", cfg.input,
                    "CSV file (defaults to the stored estimate's input)");
    sub->add_option("--state", cfg.state_file,
                    "estimate-state file (defaults next to the report)");
    sub->add_option("--varlist", cfg.varlist, "variables to process");
    add_output_options(sub, &cfg);
  }

  CLI::App* v_sim = app.add_subcommand(
      "simulate-cv", "simulate critical values and merge them into a table");
  v_sim->add_option("--q", cfg.sim_q, "number of breaking coefficients")
      ->required();
  v_sim->add_option("--trimming", cfg.trimming,
                    "minimum regime share: 0.05 0.10 0.15 0.20 0.25");
  v_sim->add_option("--breaks", cfg.breaks,
                    "largest break count to tabulate")
      ->expected(1);
  v_sim->add_option("--reps", cfg.sim_reps, "Monte Carlo replications");
  v_sim->add_option("--grid", cfg.sim_grid, "partial-sum grid size");
  add_output_options(v_sim, &cfg);

  CLI11_PARSE(app, argc, argv);
  cfg.verb = app.get_subcommands().front()->get_name();

  try {
    const nlohmann::json report = structbreak::run(cfg);
    if (cfg.format == "json")
      std::cout << report.dump(2) << "\n";
    else
      std::cout << structbreak::render_text(report);
    const bool report_verb =
        cfg.verb == "auto" || cfg.verb == "test" || cfg.verb == "estimate";
    if (report_verb && !cfg.out.empty()) {
      std::ofstream f(cfg.out);
      if (!f) throw structbreak::error("cannot write report to " + cfg.out);
      f << report.dump(2) << "\n";
    }
  } catch (const structbreak::convergence_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cerr << "best break dates before stopping:";
    for (int b : e.best_breaks) std::cerr << " " << b;
    std::cerr << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
