#include "dnp/scheduler.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "dnp/kernels.hpp"

namespace dnp {

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::EqualSpacing:
      return "equal";
    case StrategyKind::UnequalSpacing:
      return "unequal";
    case StrategyKind::NumericOptimized:
      return "numeric";
  }
  return "?";
}

std::string_view to_string(UpdateRule rule) {
  switch (rule) {
    case UpdateRule::Numeric:
      return "numeric";
    case UpdateRule::Analytic:
      return "analytic";
  }
  return "?";
}

bool Strategy::updates_at(int index) const {
  switch (kind) {
    case StrategyKind::EqualSpacing:
      return index == 1;
    case StrategyKind::UnequalSpacing:
      return (index - 1) % update_rate == 0;
    case StrategyKind::NumericOptimized:
      return true;
  }
  return false;
}

std::string Strategy::describe() const {
  std::ostringstream out;
  out << to_string(kind);
  if (kind == StrategyKind::UnequalSpacing) {
    out << " L=" << update_rate << " rule=" << to_string(rule);
  }
  if (kind != StrategyKind::EqualSpacing) {
    out << " W=" << search.window_multiplier << " grid=" << search.grid_points
        << " tol=" << search.rel_tolerance
        << " period_window=" << (search.cover_slowest_period ? "on" : "off");
  }
  return out.str();
}

namespace {

const RoundRecord& record_at(const std::vector<RoundRecord>& rounds, int N) {
  if (rounds.empty()) throw ConfigError("trace has no rounds");
  if (N < 1) throw ConfigError("round index must be >= 1");
  const auto i = static_cast<std::size_t>(N - 1);
  return i < rounds.size() ? rounds[i] : rounds.back();
}

}  // namespace

double ProtocolTrace::polarization_at(int N) const {
  return record_at(rounds, N).polarization;
}

double ProtocolTrace::entropy_at(int N) const {
  return record_at(rounds, N).entropy;
}

double ProtocolTrace::cumulative_probability_at(int N) const {
  return record_at(rounds, N).cumulative_probability;
}

std::optional<int> ProtocolTrace::first_round_above(double level) const {
  for (const auto& r : rounds) {
    if (r.polarization > level) return r.index;
  }
  return std::nullopt;
}

double exact_thermal_polarization(int M, double beta_omega1) {
  ModelParams params;
  params.M = M;
  params.beta_omega1 = beta_omega1;
  return polarization_degree(thermal_populations(params));
}

double thermal_polarization_closed_form(int M, double beta_omega1) {
  if (M < 1) throw ConfigError("bath size M must be >= 1");
  if (!(beta_omega1 > 0.0)) {
    throw ConfigError("closed-form thermal polarization needs beta_omega1 > 0");
  }
  // x / (1 - x) = 1 / expm1(beta omega1)
  return 1.0 - 2.0 / (M * std::expm1(beta_omega1));
}

double tau_opt_analytic(double g, int M, double P) {
  if (!(P > 0.0 && P < 1.0)) {
    throw ConfigError("analytic interval needs 0 < P < 1");
  }
  if (!(g > 0.0) || M < 1) throw ConfigError("analytic interval needs g > 0, M >= 1");
  return 1.0 / (g * M * std::sqrt(2.0 * (1.0 - P) * P));
}

double tau_opt_iterative(double current_polarization, double g, int M) {
  if (1.0 - current_polarization < kConvergedGap) {
    throw RuntimeSignal(RuntimeSignal::Kind::Converged,
                        "polarization within 1e-10 of unity");
  }
  return tau_opt_analytic(g, M, current_polarization);
}

std::optional<double> one_round_polarization(const BathState& state,
                                             const LevelTable& levels,
                                             double tau) {
  const auto moments = kernels::round_moments(state.populations(), levels.rabi,
                                              levels.mixing, tau);
  if (!(moments.weight >= kAnnihilationThreshold)) return std::nullopt;
  const double half = state.M() / 2.0;
  return std::abs(half * moments.weight - moments.first) /
         (half * moments.weight);
}

namespace detail {

double search_window(double polarization, const ModelParams& params,
                     const SearchConfig& config) {
  const double reference = (polarization > 0.0 && polarization < 1.0)
                               ? tau_opt_analytic(params.g, params.M, polarization)
                               : 1.0 / (params.g * params.M);
  double upper = config.window_multiplier * reference;
  if (config.cover_slowest_period) {
    // Omega_1 = Omega_M is the smallest nonzero Rabi frequency.
    upper = std::max(upper, std::numbers::pi / rabi_frequency(1, params).full);
  }
  return upper;
}

}  // namespace detail

double tau_opt_numeric(const BathState& state, const ModelParams& params,
                       const SearchConfig& config) {
  if (state.M() != params.M) throw ConfigError("state size does not match M");
  if (state[0] >= 1.0 - 1e-15) {
    throw RuntimeSignal(RuntimeSignal::Kind::Flat,
                        "state is fully polarized; nothing to optimize");
  }
  const LevelTable levels = LevelTable::build(params);
  const double upper =
      detail::search_window(polarization_degree(state), params, config);
  return detail::maximize_on_window(
      [&](double tau) {
        const auto p = one_round_polarization(state, levels, tau);
        return p ? *p : -std::numeric_limits<double>::infinity();
      },
      upper, config);
}

std::vector<TauSample> sweep_tau(const ModelParams& params,
                                 const std::vector<double>& tau_grid) {
  params.validate();
  for (std::size_t i = 0; i < tau_grid.size(); ++i) {
    if (!(tau_grid[i] > 0.0) || (i > 0 && !(tau_grid[i] > tau_grid[i - 1]))) {
      throw ConfigError("tau grid must be positive and strictly increasing");
    }
  }
  const BathState thermal = thermal_populations(params);
  const LevelTable levels = LevelTable::build(params);
  std::vector<TauSample> out;
  out.reserve(tau_grid.size());
  for (double tau : tau_grid) {
    const auto p = one_round_polarization(thermal, levels, tau);
    out.push_back({tau, p ? *p : std::numeric_limits<double>::quiet_NaN()});
  }
  return out;
}

namespace {

class CollectiveEngine {
 public:
  explicit CollectiveEngine(const ModelParams& params)
      : params_(params),
        levels_(LevelTable::build(params)),
        state_(thermal_populations(params)) {}

  double polarization() const { return polarization_degree(state_); }
  double entropy() const { return dnp::entropy(state_); }
  double numeric_tau(const SearchConfig& config) const {
    return tau_opt_numeric(state_, params_, config);
  }
  double step(double tau) {
    auto [next, probability] = apply_round(state_, tau, levels_);
    state_ = std::move(next);
    return probability;
  }
  BathState take_state() { return std::move(state_); }

 private:
  ModelParams params_;
  LevelTable levels_;
  BathState state_;
};

}  // namespace

ProtocolTrace run_protocol(const ModelParams& params, const Strategy& strategy,
                           int N) {
  params.validate();
  CollectiveEngine engine(params);
  ProtocolTrace trace;
  detail::drive_protocol(engine, params, strategy, N, trace);
  trace.final_state = engine.take_state();
  return trace;
}

}  // namespace dnp
