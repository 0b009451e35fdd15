#include "dnp/spin_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dnp/kernels.hpp"

namespace dnp {

std::string_view to_string(Interaction kind) {
  switch (kind) {
    case Interaction::XY:
      return "XY";
    case Interaction::XX:
      return "XX";
    case Interaction::XYZ:
      return "XYZ";
  }
  return "?";
}

Interaction parse_interaction(std::string_view text) {
  if (text == "XY" || text == "xy") return Interaction::XY;
  if (text == "XX" || text == "xx") return Interaction::XX;
  if (text == "XYZ" || text == "xyz") return Interaction::XYZ;
  throw ConfigError("unknown interaction '" + std::string(text) + "'");
}

std::string_view to_string(RuntimeSignal::Kind kind) {
  switch (kind) {
    case RuntimeSignal::Kind::Annihilated:
      return "annihilated";
    case RuntimeSignal::Kind::Converged:
      return "converged";
    case RuntimeSignal::Kind::Flat:
      return "flat-objective";
  }
  return "?";
}

void ModelParams::validate() const {
  if (M < 1) throw ConfigError("bath size M must be >= 1");
  if (!(g > 0.0)) throw ConfigError("coupling g must be > 0");
  if (!(beta_omega1 >= 0.0)) throw ConfigError("beta_omega1 must be >= 0");
  if (!std::isfinite(delta)) throw ConfigError("detuning must be finite");
}

BathState::BathState(std::vector<double> populations)
    : populations_(std::move(populations)) {
  if (populations_.empty()) throw ConfigError("bath state needs at least one level");
  double total = 0.0;
  for (double p : populations_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw ConfigError("bath populations must be finite and nonnegative");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ConfigError("bath populations must sum to 1");
  }
  for (double& p : populations_) p /= total;
}

BathState BathState::from_weights(std::vector<double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw ConfigError("bath weights must have a positive finite sum");
  }
  for (double& w : weights) w /= total;
  return BathState(std::move(weights));
}

BathState BathState::ground(int M) {
  std::vector<double> p(static_cast<std::size_t>(M) + 1, 0.0);
  p[0] = 1.0;
  return BathState(std::move(p));
}

RabiFrequency rabi_frequency(int m, const ModelParams& params) {
  if (m < 0 || m > params.M) {
    throw ConfigError("level index " + std::to_string(m) + " outside 0.." +
                      std::to_string(params.M));
  }
  const double md = m;
  const double coupling =
      2.0 * params.g * std::sqrt(md * (params.M - md + 1.0));
  const double full = std::sqrt(params.delta * params.delta / 4.0 +
                                coupling * coupling);
  return {full, coupling};
}

LevelTable LevelTable::build(const ModelParams& params) {
  LevelTable table;
  const auto n = static_cast<std::size_t>(params.M) + 1;
  table.rabi.resize(n);
  table.mixing.resize(n);
  for (int m = 0; m <= params.M; ++m) {
    const auto [full, coupling] = rabi_frequency(m, params);
    table.rabi[m] = full;
    table.mixing[m] = full > 0.0 ? (coupling * coupling) / (full * full) : 0.0;
  }
  return table;
}

std::complex<double> polarization_coefficient(int m, double tau,
                                              const ModelParams& params) {
  const auto [full, coupling] = rabi_frequency(m, params);
  if (full == 0.0) return {1.0, 0.0};
  const double phase = full * tau;
  return {std::cos(phase), params.delta * std::sin(phase) / (2.0 * full)};
}

PolarizationProfile coefficient_profile(const ModelParams& params, double tau,
                                        int N) {
  if (N < 1) throw ConfigError("measurement count N must be >= 1");
  const LevelTable levels = LevelTable::build(params);
  PolarizationProfile profile{std::vector<double>(levels.size()), tau, N};
  kernels::survival_factors(levels.rabi, levels.mixing, tau, profile.values);
  for (double& v : profile.values) v = std::pow(std::clamp(v, 0.0, 1.0), N);
  profile.values[0] = 1.0;
  return profile;
}

BathState thermal_populations(const ModelParams& params) {
  params.validate();
  // The m-independent factor exp(beta omega1 M / 2) cancels on normalization.
  std::vector<double> weights(static_cast<std::size_t>(params.M) + 1);
  for (int m = 0; m <= params.M; ++m) {
    weights[m] = std::exp(-params.beta_omega1 * m);
  }
  return BathState::from_weights(std::move(weights));
}

RoundResult apply_round(const BathState& state, double tau,
                        const LevelTable& levels) {
  if (levels.size() != state.populations().size()) {
    throw ConfigError("level table does not match bath size");
  }
  if (!(tau >= 0.0)) throw ConfigError("measurement interval must be >= 0");

  const std::size_t n = levels.size();
  std::vector<double> factors(n);
  kernels::survival_factors(levels.rabi, levels.mixing, tau, factors);
  std::vector<double> next(state.populations().begin(),
                           state.populations().end());
  const double probability = kernels::scale_populations(next, factors);
  if (!(probability >= kAnnihilationThreshold)) {
    throw RuntimeSignal(RuntimeSignal::Kind::Annihilated,
                        "success probability underflow at tau = " +
                            std::to_string(tau));
  }
  double total = 0.0;
  for (double& p : next) {
    p = std::max(p / probability, 0.0);
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    for (double& p : next) p /= total;
  }
  return {BathState(std::move(next)), probability};
}

RoundResult apply_round(const BathState& state, double tau,
                        const ModelParams& params) {
  return apply_round(state, tau, LevelTable::build(params));
}

double polarization_degree(std::span<const double> populations) {
  const double half = (static_cast<double>(populations.size()) - 1.0) / 2.0;
  double acc = 0.0;
  for (std::size_t m = 0; m < populations.size(); ++m) {
    acc += populations[m] * (half - static_cast<double>(m));
  }
  return std::abs(acc) / half;
}

double polarization_degree(const BathState& state) {
  return polarization_degree(state.populations());
}

double entropy(const BathState& state) {
  double s = 0.0;
  for (double p : state.populations()) {
    if (p > 0.0) s -= p * std::log(p);
  }
  return std::max(s, 0.0);
}

double beta_omega1_from_physical(double omega1_angular,
                                 double temperature_kelvin) {
  constexpr double kHbar = 1.054571817e-34;      // J s
  constexpr double kBoltzmann = 1.380649e-23;    // J / K
  if (!(temperature_kelvin > 0.0)) throw ConfigError("temperature must be > 0");
  if (!(omega1_angular >= 0.0)) throw ConfigError("bath frequency must be >= 0");
  return kHbar * omega1_angular / (kBoltzmann * temperature_kelvin);
}

}  // namespace dnp
