#include "hwiloc/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "hwiloc/checks.hpp"
#include "hwiloc/config.hpp"
#include "hwiloc/harness.hpp"

namespace hwiloc {

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string sweep;
  std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonOptions& o, bool outputs) {
  cmd->add_option("--config", o.config, "config file (defaults to the built-in reference profile)");
  if (!outputs) return;
  cmd->add_option("--seed", o.seed, "master seed, overrides [experiment] seed");
  cmd->add_option("--out", o.out, "output CSV path (stdout when omitted)");
  cmd->add_option("--sweep", o.sweep, "sweep axis, optionally with values: axis=v1,v2,...");
  cmd->add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv"}));
}

ExperimentSpec resolve(const CommonOptions& o) {
  ExperimentSpec spec = o.config.empty() ? ExperimentSpec{} : load_config(o.config);
  if (o.seed) spec.seed = *o.seed;
  if (!o.sweep.empty()) {
    const auto eq = o.sweep.find('=');
    const SweepAxis axis = parse_axis(o.sweep.substr(0, eq));
    if (eq != std::string::npos) {
      // reuse the config parser for the value list
      spec = parse_config_string("[experiment]\nvalues=" + o.sweep.substr(eq + 1) + "\n", spec);
    } else if (axis != spec.axis) {
      spec.values = default_sweep_values(axis);
    }
    spec.axis = axis;
    spec.validate();
  }
  return spec;
}

int emit(const SweepResult& result, const CommonOptions& o, std::ostream& out, std::ostream& err) {
  for (const auto& d : result.diagnostics) err << "diagnostic: " << d << "\n";
  if (result.rows.empty() && !result.diagnostics.empty()) {
    err << "error: every sweep point failed\n";
    return 2;
  }
  if (o.out.empty()) {
    write_csv(out, result.rows);
    return 0;
  }
  std::ofstream file(o.out, std::ios::binary);
  if (!file) {
    err << "error: cannot write '" << o.out << "'\n";
    return 1;
  }
  write_csv(file, result.rows);
  return file ? 0 : 1;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hardware-impaired OFDM uplink localization: bounds and estimator sweeps", "hwiloc"};
  app.require_subcommand(1);
  CommonOptions bounds_opt, estimate_opt, show_opt;
  CLI::App* bounds = app.add_subcommand("bounds", "CRB-M2, CRB-M1 and LB sweep");
  CLI::App* estimate = app.add_subcommand("estimate", "Monte-Carlo MMLE / MLE-M1 RMSE sweep");
  CLI::App* validate = app.add_subcommand("validate", "run the invariant and oracle suite");
  CLI::App* show = app.add_subcommand("show-config", "print the resolved config");
  add_common(bounds, bounds_opt, true);
  add_common(estimate, estimate_opt, true);
  add_common(show, show_opt, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 1;
  }

  try {
    if (*bounds) return emit(run_bounds_sweep(resolve(bounds_opt)), bounds_opt, out, err);
    if (*estimate) return emit(run_estimator_trials(resolve(estimate_opt)), estimate_opt, out, err);
    if (*show) {
      out << render_config(resolve(show_opt));
      return 0;
    }
    if (*validate) {
      bool ok = true;
      for (const auto& c : run_validation_suite()) {
        out << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
        ok = ok && c.passed;
      }
      return ok ? 0 : 2;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace hwiloc
