#pragma once

// Scenario presets, run configuration, CSV emission and figure drivers for
// the dnpsim command-line tool.

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dnp/exact_sim.hpp"
#include "dnp/scheduler.hpp"

namespace dnp::harness {

inline constexpr const char* kVersion = "1.0.0";

struct ScenarioPreset {
  const char* name;
  int M;
  double field_gauss;
  double omega0_MHz;
  double delta_ratio;
  double g_ratio;
};

// Table of experimental NV-center and quantum-dot parameters.
inline constexpr std::array<ScenarioPreset, 4> kPresets{{
    {"NV1", 500, 1000.0, 120.0, 0.1, 0.03},
    {"NV2", 500, 900.0, 400.0, 0.95, 0.03},
    {"QD1", 2000, 379.0, 5000.0, 0.999, 0.016},
    {"QD2", 2000, 758.0, 10000.0, 0.999, 0.008},
}};

// Throws ConfigError for unknown names. "Custom" is not a preset.
const ScenarioPreset& preset(std::string_view name);

// Default beta source: the exact thermal polarization 0.257 at M = 700 for a
// bath frequency omega1 = 108 MHz. Other baths share the same temperature,
// so beta_omega1 scales linearly with omega1.
struct CalibrationReference {
  int M = 700;
  double polarization = 0.257;
  double omega1_MHz = 108.0;
};

/// beta_omega1 with exact_thermal_polarization(M, beta) == target to 1e-10.
/// Throws ConfigError unless 0 < target < 1.
double calibrate_beta(int M, double target);

/// Calibrated beta at the reference, scaled to a bath frequency omega1_MHz.
double shared_calibration_beta(double omega1_MHz,
                               const CalibrationReference& ref = {});

struct RunConfig {
  std::string scenario = "NV1";
  std::optional<int> M;
  std::optional<double> delta_ratio;
  std::optional<double> g_ratio;
  std::optional<double> omega0_MHz;

  // beta sources; at most one of the three groups may be set.
  std::optional<double> beta_omega1;
  std::optional<double> temperature_K;
  bool angular_convention = true;  // omega0_MHz is angular (1e6 rad/s)
  std::optional<double> calibration_target;
  std::optional<int> calibration_M;

  std::string strategy = "unequal";  // equal | unequal | numeric
  int L = 1;
  std::string rule = "numeric";      // numeric | analytic
  int N = 20;
  Interaction interaction = Interaction::XY;
  exact::Basis basis = exact::Basis::DickeSubspace;
  std::string output;
};

// Applies one key/value pair; throws ConfigError for unknown keys or bad
// values.
void apply_setting(RunConfig& config, const std::string& key,
                   const std::string& value);

// Flat "key = value" (or "key: value") lines; '#' starts a comment.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::filesystem::path& path);

struct Scenario {
  std::string name;  // preset name, or "Custom" when any value was overridden
  int M = 0;
  double omega0_MHz = 0.0;
  double delta_ratio = 0.0;
  double g_ratio = 0.0;

  double omega1_MHz() const { return omega0_MHz * (1.0 - delta_ratio); }
};

Scenario resolve_scenario(const RunConfig& config);

struct BetaResolution {
  double beta_omega1;
  std::string source;  // "direct", "temperature", "calibration", "shared-calibration"
};

/// Picks beta_omega1 from exactly one source. With none given, uses the
/// shared calibration. Throws ConfigError on conflicting sources.
BetaResolution resolve_beta(const RunConfig& config, const Scenario& scenario);
double resolve_beta(const RunConfig& config);

Strategy resolve_strategy(const RunConfig& config);

struct ResolvedRun {
  Scenario scenario;
  ModelParams params;
  Strategy strategy;
  BetaResolution beta;
};

ResolvedRun resolve_run(const RunConfig& config);

// Resolved parameters as CSV metadata pairs.
std::vector<std::pair<std::string, std::string>> describe_run(const ResolvedRun& run);

// ---------------------------------------------------------------- CSV

std::string format_number(double value);  // %.12g

struct CsvTable {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void write_csv(const CsvTable& table, std::ostream& out);
// Writes to a sibling temporary file and renames it into place.
void write_csv(const CsvTable& table, const std::filesystem::path& path);
CsvTable read_csv(const std::filesystem::path& path);

inline const std::vector<std::string> kTraceColumns{
    "round", "tau", "polarization", "entropy", "round_prob", "cumulative_prob"};

CsvTable trace_table(const ProtocolTrace& trace,
                     std::vector<std::pair<std::string, std::string>> extra = {});

/// Throws ConfigError for a trace without rounds.
void emit_trace_csv(const ProtocolTrace& trace, const std::filesystem::path& path,
                    std::vector<std::pair<std::string, std::string>> extra = {});

struct ParsedTrace {
  std::map<std::string, std::string> metadata;
  std::vector<RoundRecord> rounds;
};

ParsedTrace read_trace_csv(const std::filesystem::path& path);

// ---------------------------------------------------------------- figures

// Worker count from DNP_WORKERS, else hardware concurrency (at least 1).
int worker_count();

struct FigureOptions {
  std::filesystem::path output_dir = "figures";
  int workers = 1;
  // Overrides the shared-calibration reference when set.
  std::optional<double> beta_omega1;
  // Grid for exact look-ahead searches (fig8, fig9).
  int exact_grid_points = 2000;
  // Per sub-run wall-clock budget in seconds; 0 disables the check.
  double budget_seconds = 0.0;
};

inline constexpr std::array<const char*, 8> kFigureIds{
    "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"};

struct FigureResult {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> notes;  // one line per sub-run
};

/// Runs the named figure and writes its CSVs. Throws ConfigError for an
/// unknown id.
FigureResult run_figure(std::string_view id, const FigureOptions& options);

/// Round N in 1..max_round minimizing the spread (max - min) of the curves'
/// polarizations; the point where the curves cross each other.
int curve_crossing(const std::vector<ProtocolTrace>& traces, int max_round);

// Runs independent jobs on up to `workers` threads; results keep job order.
template <class Result, class Job>
std::vector<Result> run_parallel(const std::vector<Job>& jobs, int workers);

}  // namespace dnp::harness

#include "dnp/detail/parallel.hpp"
