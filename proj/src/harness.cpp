#include "dnp/harness.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <system_error>
#include <thread>

namespace dnp::harness {

const ScenarioPreset& preset(std::string_view name) {
  for (const auto& p : kPresets) {
    if (name == p.name) return p;
  }
  throw ConfigError("unknown scenario '" + std::string(name) +
                    "' (expected NV1, NV2, QD1, QD2 or Custom)");
}

double calibrate_beta(int M, double target) {
  if (M < 1) throw ConfigError("calibration needs M >= 1");
  if (!(target > 0.0 && target < 1.0)) {
    throw ConfigError("calibration target must lie in (0, 1)");
  }
  double lo = 0.0;
  double hi = 1e-6;
  while (exact_thermal_polarization(M, hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw ConfigError("calibration target is unattainable");
  }
  for (int i = 0; i < 400 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (exact_thermal_polarization(M, mid) < target ? lo : hi) = mid;
  }
  const double beta = 0.5 * (lo + hi);
  if (std::abs(exact_thermal_polarization(M, beta) - target) > 1e-10) {
    throw ConfigError("calibration did not reach the target to 1e-10");
  }
  return beta;
}

double shared_calibration_beta(double omega1_MHz, const CalibrationReference& ref) {
  if (!(omega1_MHz >= 0.0)) throw ConfigError("bath frequency must be >= 0");
  return calibrate_beta(ref.M, ref.polarization) * omega1_MHz / ref.omega1_MHz;
}

namespace {

std::string trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return std::string(s);
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError("invalid number for '" + key + "': '" + text + "'");
  }
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  int v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("invalid integer for '" + key + "': '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, std::string text) {
  std::transform(text.begin(), text.end(), text.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("invalid boolean for '" + key + "': '" + text + "'");
}

}  // namespace

void apply_setting(RunConfig& c, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "scenario") {
    c.scenario = value;
  } else if (key == "M") {
    c.M = parse_int(key, value);
  } else if (key == "delta_ratio") {
    c.delta_ratio = parse_double(key, value);
  } else if (key == "g_ratio") {
    c.g_ratio = parse_double(key, value);
  } else if (key == "beta_omega1") {
    c.beta_omega1 = parse_double(key, value);
  } else if (key == "temperature_K") {
    c.temperature_K = parse_double(key, value);
  } else if (key == "omega0_MHz") {
    c.omega0_MHz = parse_double(key, value);
  } else if (key == "angular_convention") {
    c.angular_convention = parse_bool(key, value);
  } else if (key == "strategy") {
    if (value != "equal" && value != "unequal" && value != "numeric") {
      throw ConfigError("strategy must be equal, unequal or numeric");
    }
    c.strategy = value;
  } else if (key == "L") {
    c.L = parse_int(key, value);
  } else if (key == "rule") {
    if (value != "numeric" && value != "analytic") {
      throw ConfigError("rule must be numeric or analytic");
    }
    c.rule = value;
  } else if (key == "N") {
    c.N = parse_int(key, value);
  } else if (key == "interaction") {
    c.interaction = parse_interaction(value);
  } else if (key == "basis") {
    c.basis = exact::parse_basis(value);
  } else if (key == "output") {
    c.output = value;
  } else if (key == "calibration_target") {
    c.calibration_target = parse_double(key, value);
  } else if (key == "calibration_M") {
    c.calibration_M = parse_int(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto sep = body.find_first_of("=:");
    if (sep == std::string::npos) {
      throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, sep));
    try {
      apply_setting(config, key, body.substr(sep + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(number) + ": " + e.what());
    }
  }
  return config;
}

RunConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

Scenario resolve_scenario(const RunConfig& c) {
  Scenario s;
  if (c.scenario == "Custom" || c.scenario == "custom") {
    if (!c.M || !c.delta_ratio || !c.g_ratio) {
      throw ConfigError("Custom scenario needs M, delta_ratio and g_ratio");
    }
    s.name = "Custom";
    s.M = *c.M;
    s.delta_ratio = *c.delta_ratio;
    s.g_ratio = *c.g_ratio;
    s.omega0_MHz = c.omega0_MHz.value_or(120.0);
  } else {
    const auto& p = preset(c.scenario);
    s.name = p.name;
    s.M = c.M.value_or(p.M);
    s.delta_ratio = c.delta_ratio.value_or(p.delta_ratio);
    s.g_ratio = c.g_ratio.value_or(p.g_ratio);
    s.omega0_MHz = c.omega0_MHz.value_or(p.omega0_MHz);
    if (s.M != p.M || s.delta_ratio != p.delta_ratio || s.g_ratio != p.g_ratio ||
        s.omega0_MHz != p.omega0_MHz) {
      s.name = "Custom";
    }
  }
  if (s.M < 1) throw ConfigError("bath size M must be >= 1");
  if (!(s.g_ratio > 0.0)) throw ConfigError("g_ratio must be > 0");
  if (!(s.omega0_MHz > 0.0)) throw ConfigError("omega0_MHz must be > 0");
  if (!(s.delta_ratio <= 1.0)) throw ConfigError("delta_ratio must be <= 1");
  return s;
}

BetaResolution resolve_beta(const RunConfig& c, const Scenario& s) {
  const bool calibration = c.calibration_target.has_value() || c.calibration_M.has_value();
  const int sources = int(c.beta_omega1.has_value()) + int(c.temperature_K.has_value()) +
                      int(calibration);
  if (sources > 1) {
    throw ConfigError(
        "conflicting beta sources: give only one of beta_omega1, temperature_K "
        "or a calibration target");
  }
  if (c.beta_omega1) {
    if (!(*c.beta_omega1 >= 0.0)) throw ConfigError("beta_omega1 must be >= 0");
    return {*c.beta_omega1, "direct"};
  }
  if (c.temperature_K) {
    const double omega1 = s.omega1_MHz() * 1e6 *
                          (c.angular_convention ? 1.0 : 2.0 * std::numbers::pi);
    return {beta_omega1_from_physical(omega1, *c.temperature_K),
            c.angular_convention ? "temperature (omega in rad/s)"
                                 : "temperature (omega = 2 pi f)"};
  }
  if (calibration) {
    if (!c.calibration_target) throw ConfigError("calibration_M needs calibration_target");
    return {calibrate_beta(c.calibration_M.value_or(s.M), *c.calibration_target),
            "calibration"};
  }
  return {shared_calibration_beta(s.omega1_MHz()), "shared-calibration"};
}

double resolve_beta(const RunConfig& config) {
  return resolve_beta(config, resolve_scenario(config)).beta_omega1;
}

Strategy resolve_strategy(const RunConfig& c) {
  if (c.strategy == "equal") return Strategy::equal_spacing();
  if (c.strategy == "numeric") return Strategy::numeric_optimized();
  if (c.strategy == "unequal") {
    if (c.L < 1) throw ConfigError("update rate L must be >= 1");
    return Strategy::unequal_spacing(
        c.L, c.rule == "analytic" ? UpdateRule::Analytic : UpdateRule::Numeric);
  }
  throw ConfigError("unknown strategy '" + c.strategy + "'");
}

ResolvedRun resolve_run(const RunConfig& config) {
  ResolvedRun run;
  run.scenario = resolve_scenario(config);
  run.beta = resolve_beta(config, run.scenario);
  run.strategy = resolve_strategy(config);
  run.params.M = run.scenario.M;
  run.params.delta = run.scenario.delta_ratio;
  run.params.g = run.scenario.g_ratio;
  run.params.beta_omega1 = run.beta.beta_omega1;
  run.params.interaction = config.interaction;
  run.params.validate();
  if (config.N < 1) throw ConfigError("measurement count N must be >= 1");
  return run;
}

std::vector<std::pair<std::string, std::string>> describe_run(const ResolvedRun& run) {
  return {
      {"generator", std::string("dnpsim ") + kVersion},
      {"scenario", run.scenario.name},
      {"M", std::to_string(run.params.M)},
      {"delta_ratio", format_number(run.params.delta)},
      {"g_ratio", format_number(run.params.g)},
      {"omega0_MHz", format_number(run.scenario.omega0_MHz)},
      {"omega1_MHz", format_number(run.scenario.omega1_MHz())},
      {"beta_omega1", format_number(run.params.beta_omega1)},
      {"beta_source", run.beta.source},
      {"interaction", std::string(to_string(run.params.interaction))},
      {"strategy", run.strategy.describe()},
  };
}

// ---------------------------------------------------------------- CSV

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

void write_csv(const CsvTable& table, std::ostream& out) {
  if (table.columns.empty()) throw ConfigError("CSV table has no columns");
  for (const auto& [key, value] : table.metadata) out << "# " << key << '=' << value << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out << (i ? "," : "") << table.columns[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) {
      throw std::logic_error("CSV row width does not match the header");
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << format_number(row[i]);
    }
    out << '\n';
  }
}

void write_csv(const CsvTable& table, const std::filesystem::path& path) {
  if (table.columns.empty()) throw ConfigError("CSV table has no columns");
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    write_csv(table, out);
    out.flush();
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ConfigError("cannot move " + tmp.string() + " into place: " + ec.message());
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  CsvTable table;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = trim(std::string_view(line).substr(1));
      const auto eq = body.find('=');
      if (eq == std::string::npos) {
        table.metadata.emplace_back(body, "");
      } else {
        table.metadata.emplace_back(body.substr(0, eq), body.substr(eq + 1));
      }
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (table.columns.empty()) {
      table.columns = std::move(cells);
      continue;
    }
    if (cells.size() != table.columns.size()) {
      throw ConfigError("malformed CSV row in " + path.string());
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      if (c == "nan" || c == "-nan") {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
      } else {
        row.push_back(parse_double("cell", c));
      }
    }
    table.rows.push_back(std::move(row));
  }
  if (table.columns.empty()) throw ConfigError("no CSV header in " + path.string());
  return table;
}

CsvTable trace_table(const ProtocolTrace& trace,
                     std::vector<std::pair<std::string, std::string>> extra) {
  if (trace.rounds.empty()) throw ConfigError("cannot emit a trace without rounds");
  CsvTable table;
  auto& md = table.metadata;
  md.emplace_back("generator", std::string("dnpsim ") + kVersion);
  md.emplace_back("M", std::to_string(trace.params.M));
  md.emplace_back("delta_ratio", format_number(trace.params.delta));
  md.emplace_back("g_ratio", format_number(trace.params.g));
  md.emplace_back("beta_omega1", format_number(trace.params.beta_omega1));
  md.emplace_back("interaction", std::string(to_string(trace.params.interaction)));
  md.emplace_back("strategy", trace.strategy.describe());
  md.emplace_back("initial_polarization", format_number(trace.initial_polarization));
  md.emplace_back("initial_entropy", format_number(trace.initial_entropy));
  if (!trace.stop_reason.empty()) md.emplace_back("stop_reason", trace.stop_reason);
  // Later sources never repeat a key already written.
  auto add = [&md](const std::pair<std::string, std::string>& kv) {
    for (const auto& existing : md) {
      if (existing.first == kv.first) return;
    }
    md.push_back(kv);
  };
  for (const auto& kv : trace.metadata) add(kv);
  for (const auto& kv : extra) add(kv);
  table.columns = kTraceColumns;
  for (const auto& r : trace.rounds) {
    table.rows.push_back({static_cast<double>(r.index), r.tau, r.polarization, r.entropy,
                          r.round_probability, r.cumulative_probability});
  }
  return table;
}

void emit_trace_csv(const ProtocolTrace& trace, const std::filesystem::path& path,
                    std::vector<std::pair<std::string, std::string>> extra) {
  write_csv(trace_table(trace, std::move(extra)), path);
}

ParsedTrace read_trace_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  if (table.columns != kTraceColumns) {
    throw ConfigError(path.string() + " is not a protocol trace");
  }
  ParsedTrace parsed;
  for (const auto& [k, v] : table.metadata) parsed.metadata[k] = v;
  for (const auto& row : table.rows) {
    parsed.rounds.push_back({static_cast<int>(row[0]), row[1], row[2], row[3], row[4], row[5]});
  }
  return parsed;
}

int worker_count() {
  if (const char* env = std::getenv("DNP_WORKERS"); env != nullptr && *env != '\0') {
    const int n = parse_int("DNP_WORKERS", trim(env));
    if (n < 1) throw ConfigError("DNP_WORKERS must be >= 1");
    return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace dnp::harness
