#include <chrono>
#include <cmath>
#include <functional>
#include <limits>

#include "dnp/harness.hpp"

namespace dnp::harness {

int curve_crossing(const std::vector<ProtocolTrace>& traces, int max_round) {
  if (traces.size() < 2) throw ConfigError("a crossing needs at least two curves");
  if (max_round < 1) throw ConfigError("max_round must be >= 1");
  int best = 1;
  double best_spread = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= max_round; ++n) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& t : traces) {
      lo = std::min(lo, t.polarization_at(n));
      hi = std::max(hi, t.polarization_at(n));
    }
    if (hi - lo < best_spread) {
      best_spread = hi - lo;
      best = n;
    }
  }
  return best;
}

namespace {

using Metadata = std::vector<std::pair<std::string, std::string>>;
namespace fs = std::filesystem;

constexpr CalibrationReference kReference{};
constexpr double kOmega0MHz = 120.0;

struct SubRun {
  std::vector<fs::path> files;
  std::string note;
};

class Figure {
 public:
  explicit Figure(const FigureOptions& options) : options_(options) {
    reference_beta_ = options.beta_omega1
                          ? *options.beta_omega1
                          : calibrate_beta(kReference.M, kReference.polarization);
  }

  // beta at the reference bath frequency, scaled to omega1_MHz.
  double beta_for(double omega1_MHz) const {
    return reference_beta_ * omega1_MHz / kReference.omega1_MHz;
  }

  ModelParams params(int M, double delta, double g,
                     Interaction interaction = Interaction::XY) const {
    ModelParams p;
    p.M = M;
    p.delta = delta;
    p.g = g;
    p.beta_omega1 = beta_for(kOmega0MHz * (1.0 - delta));
    p.interaction = interaction;
    return p;
  }

  Metadata common(std::string_view id) const {
    return {{"figure", std::string(id)},
            {"reference_beta_omega1", format_number(reference_beta_)},
            {"beta_source", options_.beta_omega1 ? "override" : "shared-calibration"},
            {"calibration", "P_th(M=700)=0.257 at omega1=108 MHz"}};
  }

  fs::path path(const std::string& name) const { return options_.output_dir / name; }

  // Times a sub-run and flags it when it exceeds the budget.
  SubRun timed(std::function<SubRun()> job) const {
    const auto start = std::chrono::steady_clock::now();
    SubRun out = job();
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char buf[64];
    std::snprintf(buf, sizeof buf, " [%.1fs]", elapsed);
    out.note += buf;
    if (options_.budget_seconds > 0.0 && elapsed > options_.budget_seconds) {
      out.note += " BUDGET EXCEEDED";
    }
    return out;
  }

  FigureResult collect(std::vector<std::function<SubRun()>> jobs) const {
    std::vector<std::function<SubRun()>> wrapped;
    for (auto& j : jobs) {
      wrapped.push_back([this, j] { return timed(j); });
    }
    FigureResult result;
    for (auto& r : run_parallel<SubRun>(wrapped, options_.workers)) {
      result.files.insert(result.files.end(), r.files.begin(), r.files.end());
      result.notes.push_back(std::move(r.note));
    }
    return result;
  }

  const FigureOptions& options() const { return options_; }
  double reference_beta() const { return reference_beta_; }

 private:
  FigureOptions options_;
  double reference_beta_ = 0.0;
};

std::string note_of(const std::string& label, const ProtocolTrace& t, int N) {
  char buf[200];
  std::snprintf(buf, sizeof buf, "%s: P_th=%.4f P(%d)=%.4f S(%d)=%.4g P_success=%.4g%s%s",
                label.c_str(), t.initial_polarization, N, t.polarization_at(N), N,
                t.entropy_at(N), t.cumulative_probability_at(N),
                t.stop_reason.empty() ? "" : " stop=", t.stop_reason.c_str());
  return buf;
}

FigureResult fig2(const Figure& f) {
  // Coefficient profile at M = 700, Delta = 0.1, g = 0.1, tau = 0.03.
  ModelParams p = f.params(700, 0.1, 0.1);
  const double tau = 0.03;
  const int N = 10;
  return f.collect({[&f, p, tau, N] {
    const auto one = coefficient_profile(p, tau, 1);
    const auto many = coefficient_profile(p, tau, N);
    CsvTable table;
    table.metadata = f.common("fig2");
    table.metadata.emplace_back("M", std::to_string(p.M));
    table.metadata.emplace_back("delta_ratio", format_number(p.delta));
    table.metadata.emplace_back("g_ratio", format_number(p.g));
    table.metadata.emplace_back("tau", format_number(tau));
    table.metadata.emplace_back("N", std::to_string(N));
    table.columns = {"m", "alpha_sq", "alpha_sq_N"};
    for (std::size_t m = 0; m < one.values.size(); ++m) {
      table.rows.push_back({static_cast<double>(m), one.values[m], many.values[m]});
    }
    const auto path = f.path("fig2_coefficients.csv");
    write_csv(table, path);
    return SubRun{{path}, "fig2: M=700 tau=0.03 N=1,10"};
  }});
}

// Numeric optimum of the one-round polarization from the thermal state.
double numeric_first_interval(const ModelParams& p) {
  return tau_opt_numeric(thermal_populations(p), p);
}

FigureResult fig3(const Figure& f) {
  // The analytic interval is compared at the calibration point itself.
  auto params_at = [&f](int M) {
    ModelParams p;
    p.M = M;
    p.delta = 0.1;
    p.g = 0.1;
    p.beta_omega1 = f.reference_beta();
    return p;
  };
  std::vector<std::function<SubRun()>> jobs;
  jobs.push_back([&f, params_at] {
    const ModelParams p = params_at(700);
    const double pth = exact_thermal_polarization(p.M, p.beta_omega1);
    const double analytic = tau_opt_analytic(p.g, p.M, pth);
    const double numeric = numeric_first_interval(p);
    const int points = 2000;
    std::vector<double> grid(points);
    for (int i = 0; i < points; ++i) grid[i] = 5.0 * analytic * (i + 1) / points;
    CsvTable table;
    table.metadata = f.common("fig3");
    table.metadata.emplace_back("M", "700");
    table.metadata.emplace_back("beta_omega1", format_number(p.beta_omega1));
    table.metadata.emplace_back("thermal_polarization", format_number(pth));
    table.metadata.emplace_back("tau_grid", "(0, 5 tau_opt_analytic], 2000 points");
    table.metadata.emplace_back("tau_opt_analytic", format_number(analytic));
    table.metadata.emplace_back("tau_opt_numeric", format_number(numeric));
    table.metadata.emplace_back("relative_error",
                                format_number(std::abs(analytic - numeric) / numeric));
    table.columns = {"tau", "polarization"};
    for (const auto& s : sweep_tau(p, grid)) table.rows.push_back({s.tau, s.polarization});
    const auto path = f.path("fig3_sweep.csv");
    write_csv(table, path);
    char note[160];
    std::snprintf(note, sizeof note,
                  "fig3 sweep: tau_analytic=%.6g tau_numeric=%.6g rel_err=%.2f%%", analytic,
                  numeric, 100.0 * std::abs(analytic - numeric) / numeric);
    return SubRun{{path}, note};
  });
  jobs.push_back([&f, params_at] {
    CsvTable table;
    table.metadata = f.common("fig3-inset");
    table.metadata.emplace_back("beta_omega1", format_number(f.reference_beta()));
    table.columns = {"M", "thermal_polarization", "tau_analytic", "tau_numeric",
                     "relative_error"};
    for (int M = 100; M <= 1000; M += 20) {
      const ModelParams p = params_at(M);
      const double pth = exact_thermal_polarization(M, p.beta_omega1);
      const double analytic = tau_opt_analytic(p.g, M, pth);
      const double numeric = numeric_first_interval(p);
      table.rows.push_back({static_cast<double>(M), pth, analytic, numeric,
                            std::abs(analytic - numeric) / numeric});
    }
    const auto path = f.path("fig3_inset.csv");
    write_csv(table, path);
    return SubRun{{path}, "fig3 inset: M=100..1000 step 20"};
  });
  return f.collect(std::move(jobs));
}

FigureResult fig4(const Figure& f) {
  const std::vector<int> sizes{600, 700, 800, 900};
  const int N = 200;
  std::vector<std::function<SubRun()>> jobs;
  for (int M : sizes) {
    jobs.push_back([&f, M, N] {
      const auto trace = run_protocol(f.params(M, 0.1, 0.03), Strategy::equal_spacing(), N);
      const auto path = f.path("fig4_M" + std::to_string(M) + ".csv");
      emit_trace_csv(trace, path, f.common("fig4"));
      return SubRun{{path}, note_of("fig4 M=" + std::to_string(M), trace, N)};
    });
  }
  // Crossing summary; recomputed from the per-M traces on the same worker.
  jobs.push_back([&f, sizes, N] {
    std::vector<ProtocolTrace> traces;
    for (int M : sizes) {
      traces.push_back(run_protocol(f.params(M, 0.1, 0.03), Strategy::equal_spacing(), N));
    }
    const int crossing = curve_crossing(traces, N);
    CsvTable table;
    table.metadata = f.common("fig4-summary");
    table.metadata.emplace_back("crossing_round", std::to_string(crossing));
    table.columns = {"round", "P_M600", "P_M700", "P_M800", "P_M900", "spread"};
    for (int n = 1; n <= N; ++n) {
      std::vector<double> row{static_cast<double>(n)};
      double lo = 1.0, hi = 0.0;
      for (const auto& t : traces) {
        row.push_back(t.polarization_at(n));
        lo = std::min(lo, row.back());
        hi = std::max(hi, row.back());
      }
      row.push_back(hi - lo);
      table.rows.push_back(std::move(row));
    }
    const auto path = f.path("fig4_summary.csv");
    write_csv(table, path);
    return SubRun{{path}, "fig4: curves cross at N=" + std::to_string(crossing)};
  });
  return f.collect(std::move(jobs));
}

FigureResult fig5(const Figure& f) {
  const int N = 30;
  std::vector<std::function<SubRun()>> jobs;
  for (int L : {0, 10, 5, 2, 1}) {  // 0 stands for L = infinity
    jobs.push_back([&f, L, N] {
      const Strategy s = L == 0 ? Strategy::equal_spacing() : Strategy::unequal_spacing(L);
      const auto trace = run_protocol(f.params(700, 0.1, 0.03), s, N);
      const std::string tag = L == 0 ? "inf" : std::to_string(L);
      const auto path = f.path("fig5_L" + tag + ".csv");
      auto md = f.common("fig5");
      md.emplace_back("L", tag);
      emit_trace_csv(trace, path, md);
      std::string note = note_of("fig5 L=" + tag, trace, 20);
      if (auto first = trace.first_round_above(0.99)) {
        note += " first>0.99 at N=" + std::to_string(*first);
      }
      return SubRun{{path}, note};
    });
  }
  return f.collect(std::move(jobs));
}

FigureResult fig6(const Figure& f) {
  const int N = 20;
  std::vector<std::function<SubRun()>> jobs;
  for (const auto& preset : kPresets) {
    jobs.push_back([&f, &preset, N] {
      ModelParams p;
      p.M = preset.M;
      p.delta = preset.delta_ratio;
      p.g = preset.g_ratio;
      p.beta_omega1 = f.beta_for(preset.omega0_MHz * (1.0 - preset.delta_ratio));
      const auto trace = run_protocol(p, Strategy::numeric_optimized(), N);
      const auto path = f.path(std::string("fig6_") + preset.name + ".csv");
      auto md = f.common("fig6");
      md.emplace_back("scenario", preset.name);
      md.emplace_back("omega0_MHz", format_number(preset.omega0_MHz));
      emit_trace_csv(trace, path, md);
      const int at = preset.M == 500 ? 8 : 10;
      return SubRun{{path}, note_of(std::string("fig6 ") + preset.name, trace, at)};
    });
  }
  return f.collect(std::move(jobs));
}

FigureResult fig7(const Figure& f) {
  std::vector<int> sizes;
  for (int M = 10; M <= 300; M += 10) sizes.push_back(M);
  struct Row {
    double P20e, pol20e, P50e, pol50e, P20u, pol20u, P50u, pol50u;
  };
  std::vector<std::function<Row()>> runs;
  for (int M : sizes) {
    runs.push_back([&f, M] {
      const auto eq = run_protocol(f.params(M, 0.1, 0.03), Strategy::equal_spacing(), 50);
      const auto un = run_protocol(f.params(M, 0.1, 0.03), Strategy::unequal_spacing(1), 50);
      return Row{eq.cumulative_probability_at(20), eq.polarization_at(20),
                 eq.cumulative_probability_at(50), eq.polarization_at(50),
                 un.cumulative_probability_at(20), un.polarization_at(20),
                 un.cumulative_probability_at(50), un.polarization_at(50)};
    });
  }
  const auto rows = run_parallel<Row>(runs, f.options().workers);
  FigureResult result;
  for (int N : {20, 50}) {
    CsvTable table;
    table.metadata = f.common("fig7");
    table.metadata.emplace_back("N", std::to_string(N));
    table.metadata.emplace_back("unequal", "L=1 numeric");
    table.columns = {"M", "success_equal", "polarization_equal", "success_unequal",
                     "polarization_unequal"};
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      const auto& r = rows[i];
      table.rows.push_back({static_cast<double>(sizes[i]), N == 20 ? r.P20e : r.P50e,
                            N == 20 ? r.pol20e : r.pol50e, N == 20 ? r.P20u : r.P50u,
                            N == 20 ? r.pol20u : r.pol50u});
    }
    const auto path = f.path("fig7_N" + std::to_string(N) + ".csv");
    write_csv(table, path);
    result.files.push_back(path);
  }
  const auto& r200 = rows[19];
  char note[200];
  std::snprintf(note, sizeof note,
                "fig7 M=200 equal: P(20)=%.3f%% pol(20)=%.4f P(50)=%.3f%% pol(50)=%.4f",
                100 * r200.P20e, r200.pol20e, 100 * r200.P50e, r200.pol50e);
  result.notes.push_back(note);
  return result;
}

FigureResult fig8(const Figure& f) {
  const int N = 20;
  std::vector<std::function<SubRun()>> jobs;
  for (double delta : {0.1, 0.95}) {
    for (Interaction kind : {Interaction::XY, Interaction::XX, Interaction::XYZ}) {
      jobs.push_back([&f, delta, kind, N] {
        const auto spec = exact::HamiltonianSpec::natural(f.params(500, delta, 0.03, kind));
        Strategy s = Strategy::numeric_optimized();
        s.search.grid_points = f.options().exact_grid_points;
        const auto trace = exact::run_exact_protocol(spec, s, N);
        const std::string tag =
            std::string(to_string(kind)) + "_delta" + (delta < 0.5 ? "0.1" : "0.95");
        const auto path = f.path("fig8_" + tag + ".csv");
        auto md = f.common("fig8");
        md.emplace_back("look_ahead", "exact one-round, every round");
        emit_trace_csv(trace, path, md);
        return SubRun{{path}, note_of("fig8 " + tag, trace, N)};
      });
    }
  }
  return f.collect(std::move(jobs));
}

FigureResult fig9(const Figure& f) {
  const int N = 60;
  std::vector<std::function<SubRun()>> jobs;
  for (auto basis : {exact::Basis::DickeSubspace, exact::Basis::FullProductSpace}) {
    jobs.push_back([&f, basis, N] {
      const ModelParams p = f.params(8, 0.1, 0.03);
      const auto spec = exact::HamiltonianSpec::natural(p, basis);
      Strategy s = Strategy::numeric_optimized();
      s.search.grid_points = f.options().exact_grid_points;
      const auto trace = exact::run_exact_protocol(spec, s, N);
      const std::string tag(exact::to_string(basis));
      const auto path = f.path("fig9_" + tag + ".csv");
      auto md = f.common("fig9");
      md.emplace_back("dark_state_bound",
                      format_number(exact::dark_state_polarization(p.M, p.beta_omega1)));
      emit_trace_csv(trace, path, md);
      std::string note = note_of("fig9 " + tag, trace, N);
      if (auto first = trace.first_round_above(0.99)) {
        note += " first>0.99 at N=" + std::to_string(*first);
      }
      return SubRun{{path}, note};
    });
  }
  return f.collect(std::move(jobs));
}

}  // namespace

FigureResult run_figure(std::string_view id, const FigureOptions& options) {
  const Figure f(options);
  if (id == "fig2") return fig2(f);
  if (id == "fig3") return fig3(f);
  if (id == "fig4") return fig4(f);
  if (id == "fig5") return fig5(f);
  if (id == "fig6") return fig6(f);
  if (id == "fig7") return fig7(f);
  if (id == "fig8") return fig8(f);
  if (id == "fig9") return fig9(f);
  throw ConfigError("unknown figure '" + std::string(id) + "' (expected fig2..fig9)");
}

}  // namespace dnp::harness
