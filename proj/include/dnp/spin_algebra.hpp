#pragma once

// Closed-form dynamics in the collective (Dicke) subspace of the bath.
//
// The bath stays diagonal in the J_z eigenbasis |m>, m = 0..M (m counts
// excitations, m = 0 is fully polarized). A round of free evolution followed
// by a successful ground-state measurement of the central spin multiplies
// p_m by |alpha_m(tau)|^2 and renormalizes.

#include <complex>
#include <span>
#include <vector>

#include "dnp/model.hpp"

namespace dnp {

class BathState {
 public:
  // Populations must be nonnegative and sum to 1 within 1e-9; they are
  // renormalized exactly on construction.
  explicit BathState(std::vector<double> populations);

  // Normalizes arbitrary nonnegative weights.
  static BathState from_weights(std::vector<double> weights);
  static BathState ground(int M);

  int M() const { return static_cast<int>(populations_.size()) - 1; }
  std::span<const double> populations() const { return populations_; }
  double operator[](int m) const { return populations_[static_cast<std::size_t>(m)]; }

 private:
  std::vector<double> populations_;
};

struct RabiFrequency {
  double full;      // Omega_m = sqrt(delta^2/4 + Omega'_m^2)
  double coupling;  // Omega'_m = 2 g sqrt(m (M - m + 1))
};

RabiFrequency rabi_frequency(int m, const ModelParams& params);

// Per-level tables consumed by the kernels.
struct LevelTable {
  std::vector<double> rabi;    // Omega_m
  std::vector<double> mixing;  // Omega'_m^2 / Omega_m^2, 0 where Omega_m = 0

  static LevelTable build(const ModelParams& params);
  std::size_t size() const { return rabi.size(); }
};

std::complex<double> polarization_coefficient(int m, double tau,
                                              const ModelParams& params);

struct PolarizationProfile {
  std::vector<double> values;  // |alpha_m(tau)|^(2N)
  double tau = 0.0;
  int N = 1;
};

PolarizationProfile coefficient_profile(const ModelParams& params, double tau,
                                        int N);

BathState thermal_populations(const ModelParams& params);

struct RoundResult {
  BathState state;
  double probability;  // success probability of this round
};

/// One evolve-and-measure round. Throws RuntimeSignal(Annihilated) when the
/// surviving weight is below kAnnihilationThreshold.
RoundResult apply_round(const BathState& state, double tau,
                        const LevelTable& levels);
RoundResult apply_round(const BathState& state, double tau,
                        const ModelParams& params);

double polarization_degree(const BathState& state);
double polarization_degree(std::span<const double> populations);

double entropy(const BathState& state);

// beta * hbar * omega1 for an angular bath frequency (rad/s) at temperature T.
double beta_omega1_from_physical(double omega1_angular, double temperature_kelvin);

}  // namespace dnp
