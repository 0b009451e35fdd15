// dnpsim: polarization-by-measurement simulator front end.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime signal
// (annihilated state or terminated protocol).

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dnp/exact_sim.hpp"
#include "dnp/harness.hpp"

namespace {

using namespace dnp;
using namespace dnp::harness;

// Flags shared by the run-style subcommands; each maps to a config key.
struct CommonFlags {
  std::string config_file;
  std::map<std::string, std::string> values;

  void attach(CLI::App* cmd, bool with_scenario = true) {
    cmd->add_option("-c,--config", config_file, "key/value config file");
    auto flag = [&](const std::string& name, const std::string& key, const std::string& help) {
      cmd->add_option_function<std::string>(
          name, [this, key](const std::string& v) { values[key] = v; }, help);
    };
    if (with_scenario) flag("--scenario", "scenario", "NV1, NV2, QD1, QD2 or Custom");
    flag("--M", "M", "bath size");
    flag("--delta-ratio", "delta_ratio", "detuning Delta / omega0");
    flag("--g-ratio", "g_ratio", "coupling g / omega0");
    flag("--beta-omega1", "beta_omega1", "beta hbar omega1 (direct)");
    flag("--temperature-K", "temperature_K", "bath temperature in kelvin");
    flag("--omega0-MHz", "omega0_MHz", "central-spin frequency in MHz");
    flag("--angular-convention", "angular_convention",
         "true: omega0_MHz is angular (1e6 rad/s); false: ordinary (2 pi f)");
    flag("--calibration-target", "calibration_target", "thermal polarization to match");
    flag("--calibration-M", "calibration_M", "bath size for the calibration target");
    flag("--strategy", "strategy", "equal, unequal or numeric");
    flag("--L", "L", "update rate of the unequal strategy");
    flag("--rule", "rule", "unequal update rule: numeric or analytic");
    flag("--N", "N", "number of measurement rounds");
    flag("--interaction", "interaction", "XY, XX or XYZ");
    flag("--basis", "basis", "dicke or product (exact only)");
    flag("-o,--output", "output", "CSV output path (stdout when absent)");
  }

  RunConfig resolve() const {
    RunConfig config = config_file.empty() ? RunConfig{} : load_config_file(config_file);
    for (const auto& [key, value] : values) apply_setting(config, key, value);
    return config;
  }
};

void emit(const CsvTable& table, const std::string& output) {
  if (output.empty()) {
    write_csv(table, std::cout);
  } else {
    write_csv(table, std::filesystem::path(output));
    std::fprintf(stderr, "wrote %s\n", output.c_str());
  }
}

void report(const ProtocolTrace& trace) {
  const auto& last = trace.rounds.back();
  std::fprintf(stderr, "P_th=%.6f  P(%d)=%.6f  S=%.4g  success=%.4g%s%s\n",
               trace.initial_polarization, last.index, last.polarization, last.entropy,
               last.cumulative_probability, trace.stop_reason.empty() ? "" : "  stop=",
               trace.stop_reason.c_str());
}

int run_collective(const RunConfig& config) {
  const ResolvedRun run = resolve_run(config);
  if (config.interaction != Interaction::XY) {
    throw ConfigError("collective runs model the XY interaction; use 'exact' for XX/XYZ");
  }
  const ProtocolTrace trace = run_protocol(run.params, run.strategy, config.N);
  emit(trace_table(trace, describe_run(run)), config.output);
  report(trace);
  return 0;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Dynamic nuclear polarization by repeated central-spin measurement"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("dnpsim ") + kVersion);

  // coeffs
  CommonFlags coeffs_flags;
  double coeffs_tau = 0.03;
  auto* coeffs = app.add_subcommand("coeffs", "survival factors |alpha_m|^2 and |alpha_m|^(2N)");
  coeffs_flags.attach(coeffs);
  coeffs->add_option("--tau", coeffs_tau, "measurement interval (1/omega0)")->required();

  // sweep-tau
  CommonFlags sweep_flags;
  std::optional<double> sweep_max;
  int sweep_points = 2000;
  auto* sweep = app.add_subcommand("sweep-tau", "one-round polarization against tau");
  sweep_flags.attach(sweep);
  sweep->add_option("--tau-max", sweep_max, "upper end (default 5 x analytic interval)");
  sweep->add_option("--points", sweep_points, "grid points")->check(CLI::PositiveNumber);

  // run
  CommonFlags run_flags;
  auto* run = app.add_subcommand("run", "collective-bath protocol run");
  run_flags.attach(run);

  // scenario <name>
  CommonFlags scenario_flags;
  std::string scenario_name;
  auto* scenario = app.add_subcommand("scenario", "protocol run on a named preset");
  scenario->add_option("name", scenario_name, "NV1, NV2, QD1 or QD2")->required();
  scenario_flags.attach(scenario, false);

  // exact
  CommonFlags exact_flags;
  int exact_grid = 2000;
  auto* exact_cmd = app.add_subcommand("exact", "dense simulation (XY, XX, XYZ; Dicke or product)");
  exact_flags.attach(exact_cmd);
  exact_cmd->add_option("--grid", exact_grid, "look-ahead grid points")
      ->check(CLI::Range(3, 1000000));

  // figure <id>
  std::string figure_id;
  FigureOptions figure_options;
  std::optional<double> figure_beta;
  auto* figure = app.add_subcommand("figure", "regenerate the data behind a figure");
  figure->add_option("id", figure_id, "fig2 .. fig9")->required();
  figure->add_option("--output-dir", figure_options.output_dir, "directory for CSVs");
  figure->add_option("--beta-omega1", figure_beta,
                     "beta omega1 at omega1 = 108 MHz instead of the calibration");
  figure->add_option("--grid", figure_options.exact_grid_points, "exact look-ahead grid")
      ->check(CLI::Range(3, 1000000));
  figure->add_option("--budget-seconds", figure_options.budget_seconds,
                     "flag sub-runs slower than this");

  // calibrate
  double cal_target = CalibrationReference{}.polarization;
  int cal_M = CalibrationReference{}.M;
  std::optional<double> cal_omega1;
  auto* calibrate = app.add_subcommand("calibrate", "beta omega1 matching a thermal polarization");
  calibrate->add_option("--target", cal_target, "thermal polarization");
  calibrate->add_option("--M", cal_M, "bath size");
  calibrate->add_option("--omega1-MHz", cal_omega1,
                        "also report the shared-scale value at this bath frequency");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (*coeffs) {
    const RunConfig config = coeffs_flags.resolve();
    const ResolvedRun r = resolve_run(config);
    const auto one = coefficient_profile(r.params, coeffs_tau, 1);
    const auto many = coefficient_profile(r.params, coeffs_tau, config.N);
    CsvTable table;
    table.metadata = describe_run(r);
    table.metadata.emplace_back("tau", format_number(coeffs_tau));
    table.metadata.emplace_back("N", std::to_string(config.N));
    table.columns = {"m", "alpha_sq", "alpha_sq_N"};
    for (std::size_t m = 0; m < one.values.size(); ++m) {
      table.rows.push_back({static_cast<double>(m), one.values[m], many.values[m]});
    }
    emit(table, config.output);
    return 0;
  }
  if (*sweep) {
    const RunConfig config = sweep_flags.resolve();
    const ResolvedRun r = resolve_run(config);
    const double pth = exact_thermal_polarization(r.params.M, r.params.beta_omega1);
    const double analytic = tau_opt_analytic(r.params.g, r.params.M, pth);
    const double upper = sweep_max.value_or(5.0 * analytic);
    std::vector<double> grid(static_cast<std::size_t>(sweep_points));
    for (int i = 0; i < sweep_points; ++i) grid[i] = upper * (i + 1) / sweep_points;
    CsvTable table;
    table.metadata = describe_run(r);
    table.metadata.emplace_back("thermal_polarization", format_number(pth));
    table.metadata.emplace_back("tau_opt_analytic", format_number(analytic));
    table.metadata.emplace_back(
        "tau_opt_numeric", format_number(tau_opt_numeric(thermal_populations(r.params), r.params)));
    table.columns = {"tau", "polarization"};
    for (const auto& s : sweep_tau(r.params, grid)) table.rows.push_back({s.tau, s.polarization});
    emit(table, config.output);
    return 0;
  }
  if (*run) return run_collective(run_flags.resolve());
  if (*scenario) {
    RunConfig config = scenario_flags.resolve();
    preset(scenario_name);  // presets only
    config.scenario = scenario_name;
    return run_collective(config);
  }
  if (*exact_cmd) {
    const RunConfig config = exact_flags.resolve();
    const ResolvedRun r = resolve_run(config);
    const auto spec = exact::HamiltonianSpec::natural(r.params, config.basis);
    Strategy strategy = r.strategy;
    strategy.search.grid_points = exact_grid;
    const ProtocolTrace trace = exact::run_exact_protocol(spec, strategy, config.N);
    emit(trace_table(trace, describe_run(r)), config.output);
    report(trace);
    return 0;
  }
  if (*figure) {
    figure_options.workers = worker_count();
    figure_options.beta_omega1 = figure_beta;
    const FigureResult result = run_figure(figure_id, figure_options);
    for (const auto& note : result.notes) std::printf("%s\n", note.c_str());
    for (const auto& file : result.files) std::printf("wrote %s\n", file.string().c_str());
    return 0;
  }
  if (*calibrate) {
    const double beta = calibrate_beta(cal_M, cal_target);
    std::printf("beta_omega1=%.12g  # P_th(M=%d)=%.12g\n", beta, cal_M,
                exact_thermal_polarization(cal_M, beta));
    if (cal_omega1) {
      std::printf("beta_omega1(omega1=%g MHz)=%.12g\n", *cal_omega1,
                  beta * *cal_omega1 / CalibrationReference{}.omega1_MHz);
    }
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const dnp::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const dnp::RuntimeSignal& e) {
    std::fprintf(stderr, "runtime signal (%s): %s\n",
                 std::string(to_string(e.kind())).c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
