#pragma once

#include <optional>
#include <string>

namespace dnp::detail {

// Shared round loop for the collective and exact simulators. Engine provides
//   double polarization() const;
//   double entropy() const;
//   double numeric_tau(const SearchConfig&);   // look-ahead maximizer
//   double step(double tau);                   // evolve + measure, returns P
// The seed round of equal/unequal schedules uses the analytic interval.
template <class Engine>
void drive_protocol(Engine& engine, const ModelParams& params,
                    const Strategy& strategy, int N, ProtocolTrace& trace) {
  if (N < 1) throw ConfigError("measurement count N must be >= 1");
  if (strategy.kind == StrategyKind::UnequalSpacing && strategy.update_rate < 1) {
    throw ConfigError("update rate L must be >= 1");
  }
  trace.params = params;
  trace.strategy = strategy;
  trace.initial_polarization = engine.polarization();
  trace.initial_entropy = engine.entropy();

  double tau = 0.0;
  double cumulative = 1.0;
  std::optional<RuntimeSignal::Kind> stopped;
  for (int index = 1; index <= N; ++index) {
    const double current = engine.polarization();
    try {
      if (strategy.updates_at(index)) {
        const bool seed_round =
            index == 1 && strategy.kind != StrategyKind::NumericOptimized;
        const bool numeric = strategy.kind == StrategyKind::NumericOptimized ||
                             (!seed_round && strategy.rule == UpdateRule::Numeric);
        if (numeric) {
          if (1.0 - current < kConvergedGap) {
            throw RuntimeSignal(RuntimeSignal::Kind::Converged,
                                "polarization within 1e-10 of unity");
          }
          tau = engine.numeric_tau(strategy.search);
        } else {
          tau = tau_opt_iterative(current, params.g, params.M);
        }
      }
      const double probability = engine.step(tau);
      cumulative *= probability;
      trace.rounds.push_back({index, tau, engine.polarization(),
                              engine.entropy(), probability, cumulative});
    } catch (const RuntimeSignal& signal) {
      stopped = signal.kind() == RuntimeSignal::Kind::Flat
                    ? RuntimeSignal::Kind::Converged
                    : signal.kind();
      trace.stop_reason = std::string(to_string(*stopped));
      break;
    }
  }
  if (trace.rounds.empty() && stopped) {
    throw RuntimeSignal(*stopped, "protocol stopped before the first round: " +
                                      trace.stop_reason);
  }
}

}  // namespace dnp::detail
