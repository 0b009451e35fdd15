#pragma once

// Measurement-interval selection and protocol execution on the collective
// bath state.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dnp/model.hpp"
#include "dnp/spin_algebra.hpp"

namespace dnp {

enum class StrategyKind { EqualSpacing, UnequalSpacing, NumericOptimized };

// How an UnequalSpacing schedule picks the interval at an update round.
enum class UpdateRule {
  Numeric,   // maximize the one-round polarization of the current state
  Analytic,  // tau = 1 / (g M sqrt(2 P (1 - P))) with the current P
};

std::string_view to_string(StrategyKind kind);
std::string_view to_string(UpdateRule rule);

struct SearchConfig {
  double window_multiplier = 3.0;  // W, in units of the analytic interval
  int grid_points = 2000;
  double rel_tolerance = 1e-6;
  // Also cover one full period pi / Omega_1 of the slowest excited level.
  bool cover_slowest_period = true;
};

struct Strategy {
  StrategyKind kind = StrategyKind::EqualSpacing;
  int update_rate = 1;  // L; UnequalSpacing only
  UpdateRule rule = UpdateRule::Numeric;
  SearchConfig search;

  static Strategy equal_spacing() { return {}; }
  static Strategy unequal_spacing(int L, UpdateRule rule = UpdateRule::Numeric) {
    Strategy s;
    s.kind = StrategyKind::UnequalSpacing;
    s.update_rate = L;
    s.rule = rule;
    return s;
  }
  static Strategy numeric_optimized() {
    Strategy s;
    s.kind = StrategyKind::NumericOptimized;
    return s;
  }

  // True when the interval is (re)chosen before round `index` (1-based).
  bool updates_at(int index) const;
  std::string describe() const;
};

/// Stop threshold on 1 - P below which the analytic interval diverges.
inline constexpr double kConvergedGap = 1e-10;

struct RoundRecord {
  int index = 0;
  double tau = 0.0;
  double polarization = 0.0;
  double entropy = 0.0;
  double round_probability = 0.0;
  double cumulative_probability = 0.0;
};

struct ProtocolTrace {
  ModelParams params;
  Strategy strategy;
  double initial_polarization = 0.0;
  double initial_entropy = 0.0;
  std::vector<RoundRecord> rounds;
  std::string stop_reason;  // empty when all requested rounds ran
  std::vector<std::pair<std::string, std::string>> metadata;
  std::optional<BathState> final_state;  // collective runs only

  // Polarization after round N; holds the last value after convergence.
  double polarization_at(int N) const;
  double entropy_at(int N) const;
  double cumulative_probability_at(int N) const;
  // First round index whose polarization exceeds `level`, if any.
  std::optional<int> first_round_above(double level) const;
};

/// Exact thermal polarization sum_m p_m (M/2 - m) / (M/2).
double exact_thermal_polarization(int M, double beta_omega1);

/// 1 - 2x / (M (1 - x)), x = exp(-beta omega1). Large-M approximation; may be
/// negative. Throws ConfigError for beta_omega1 <= 0.
double thermal_polarization_closed_form(int M, double beta_omega1);

/// 1 / (g M sqrt(2 P (1 - P))). Throws ConfigError unless 0 < P < 1.
double tau_opt_analytic(double g, int M, double P);

/// tau_opt_analytic at the current polarization. Throws
/// RuntimeSignal(Converged) once 1 - P < kConvergedGap.
double tau_opt_iterative(double current_polarization, double g, int M);

/// Polarization after one round of length tau applied to `state`, using the
/// precomputed level table; nullopt when the round annihilates the state.
std::optional<double> one_round_polarization(const BathState& state,
                                             const LevelTable& levels,
                                             double tau);

/// Interval maximizing the one-round polarization: grid scan then
/// golden-section refinement. Among equal maxima the smallest tau wins.
/// Throws RuntimeSignal(Flat) when the state is already fully polarized.
double tau_opt_numeric(const BathState& state, const ModelParams& params,
                       const SearchConfig& config = {});

struct TauSample {
  double tau;
  double polarization;
};

std::vector<TauSample> sweep_tau(const ModelParams& params,
                                 const std::vector<double>& tau_grid);

ProtocolTrace run_protocol(const ModelParams& params, const Strategy& strategy,
                           int N);

namespace detail {

// Upper end of the numeric search window for the given state.
double search_window(double polarization, const ModelParams& params,
                     const SearchConfig& config);

// Generic grid + golden-section maximizer on (0, upper].
template <class Objective>
double maximize_on_window(Objective&& objective, double upper,
                          const SearchConfig& config);
template <class Batch, class Objective>
double maximize_on_window_batched(Batch&& batch, Objective&& objective,
                                  double upper, const SearchConfig& config);

}  // namespace detail

}  // namespace dnp

#include "dnp/detail/maximize.hpp"
#include "dnp/detail/drive.hpp"
