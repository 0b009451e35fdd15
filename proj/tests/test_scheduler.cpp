#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "dnp/scheduler.hpp"

using namespace dnp;

namespace {

ModelParams make(int M, double delta, double g, double beta) {
  ModelParams p;
  p.M = M;
  p.delta = delta;
  p.g = g;
  p.beta_omega1 = beta;
  return p;
}

// beta giving the thermal polarization 0.257 at M = 700.
constexpr double kBeta700 = 0.002289168568666578;

double alpha_sq(int m, double tau, const ModelParams& p) {
  const double coupling = 2.0 * p.g * std::sqrt(double(m) * (p.M - m + 1));
  const double omega = std::sqrt(p.delta * p.delta / 4.0 + coupling * coupling);
  if (omega == 0.0) return 1.0;
  const double c = std::cos(omega * tau);
  const double s = std::sin(omega * tau) * p.delta / (2.0 * omega);
  return c * c + s * s;
}

std::vector<double> thermal_oracle(const ModelParams& p) {
  std::vector<double> w(p.M + 1);
  double z = 0.0;
  for (int m = 0; m <= p.M; ++m) z += (w[m] = std::exp(-p.beta_omega1 * m));
  for (auto& x : w) x /= z;
  return w;
}

double polarization_oracle(const std::vector<double>& w) {
  const double half = (w.size() - 1) / 2.0;
  double s = 0.0;
  for (std::size_t m = 0; m < w.size(); ++m) s += w[m] * (half - double(m));
  return std::abs(s) / half;
}

// Populations and success probability after the schedule `taus`, from the
// product of per-round survival factors applied to the thermal state.
struct Closed {
  std::vector<double> populations;
  double probability;
};

Closed product_form(const ModelParams& p, const std::vector<double>& taus) {
  auto w = thermal_oracle(p);
  double total = 0.0;
  for (int m = 0; m <= p.M; ++m) {
    for (double t : taus) w[m] *= alpha_sq(m, t, p);
    total += w[m];
  }
  for (auto& x : w) x /= total;
  return {w, total};
}

std::vector<double> taus_of(const ProtocolTrace& t) {
  std::vector<double> out;
  for (const auto& r : t.rounds) out.push_back(r.tau);
  return out;
}

}  // namespace

TEST_CASE("closed-form thermal polarization") {
  CHECK(thermal_polarization_closed_form(10, 60.0) == doctest::Approx(1.0).epsilon(1e-15));
  // M (1 - x) = 4 x: x = M / (M + 4)
  for (int M : {4, 20, 300}) {
    const double x = double(M) / (M + 4);
    CHECK(thermal_polarization_closed_form(M, -std::log(x)) ==
          doctest::Approx(0.5).epsilon(1e-12));
  }
  CHECK_THROWS_AS(thermal_polarization_closed_form(10, 0.0), ConfigError);

  SUBCASE("large-M limit tracks the exact sum") {
    for (double beta : {0.05, 0.2, 1.0}) {
      const double exact = polarization_oracle(thermal_oracle(make(20000, 0, 0.1, beta)));
      CHECK(thermal_polarization_closed_form(20000, beta) ==
            doctest::Approx(exact).epsilon(1e-3));
    }
  }
  SUBCASE("small M beta leaves the unit interval") {
    // At M = 700 with the calibrated beta the closed form is negative while
    // the exact thermal polarization is 0.257; seeding uses the exact value.
    CHECK(exact_thermal_polarization(700, kBeta700) == doctest::Approx(0.257).epsilon(1e-10));
    CHECK(thermal_polarization_closed_form(700, kBeta700) < 0.0);
  }
}

TEST_CASE("analytic interval") {
  CHECK(tau_opt_analytic(0.1, 700, 0.5) == doctest::Approx(std::sqrt(2.0) / 70.0));
  CHECK(tau_opt_analytic(1.0, 10, 0.9) == doctest::Approx(0.2357).epsilon(1e-4));
  for (double P : {0.1, 0.3, 0.45}) {
    CHECK(tau_opt_analytic(0.05, 100, P) ==
          doctest::Approx(tau_opt_analytic(0.05, 100, 1.0 - P)).epsilon(1e-14));
    CHECK(tau_opt_analytic(0.05, 100, P) > tau_opt_analytic(0.05, 100, 0.5));
  }
  for (double P : {0.0, 1.0, -0.2, 1.5}) {
    CHECK_THROWS_AS(tau_opt_analytic(0.1, 10, P), ConfigError);
  }
}

TEST_CASE("iterative interval") {
  CHECK(tau_opt_iterative(0.5, 0.1, 700) == doctest::Approx(std::sqrt(2.0) / 70.0));
  CHECK(tau_opt_iterative(0.99, 0.1, 700) / tau_opt_iterative(0.9, 0.1, 700) ==
        doctest::Approx(std::sqrt(0.09 / 0.0099)).epsilon(1e-12));
  CHECK(tau_opt_iterative(0.99, 0.1, 700) / tau_opt_iterative(0.9, 0.1, 700) ==
        doctest::Approx(3.015).epsilon(1e-3));
  double previous = 0.0;
  for (double P = 0.51; P < 0.9999; P += 0.01) {
    const double tau = tau_opt_iterative(P, 0.03, 500);
    CHECK(tau > previous);
    previous = tau;
  }
  try {
    tau_opt_iterative(1.0 - 1e-12, 0.1, 10);
    FAIL("expected convergence signal");
  } catch (const RuntimeSignal& e) {
    CHECK(e.kind() == RuntimeSignal::Kind::Converged);
  }
}

TEST_CASE("numeric interval") {
  SUBCASE("brute-force oracle on a small bath") {
    const auto p = make(2, 0.0, 0.25, 1.0);
    const auto w = thermal_oracle(p);
    SearchConfig config;
    config.cover_slowest_period = false;
    const double upper = 3.0 * tau_opt_analytic(p.g, p.M, polarization_oracle(w));
    const int n = 100000;
    double best = -1.0, best_tau = 0.0;
    for (int i = 1; i <= n; ++i) {
      const double tau = upper * i / n;
      std::vector<double> v(w);
      for (int m = 0; m <= 2; ++m) v[m] *= alpha_sq(m, tau, p);
      double z = v[0] + v[1] + v[2];
      for (auto& x : v) x /= z;
      const double P = polarization_oracle(v);
      if (P > best) best = P, best_tau = tau;
    }
    const double tau = tau_opt_numeric(thermal_populations(p), p, config);
    CHECK(tau == doctest::Approx(best_tau).epsilon(1e-4));
    const double P1 = polarization_degree(apply_round(thermal_populations(p), tau, p).state);
    CHECK(P1 >= best - 1e-12);
  }
  SUBCASE("fully polarized state is flat") {
    const auto p = make(8, 0.1, 0.1, 1.0);
    try {
      tau_opt_numeric(BathState::ground(8), p);
      FAIL("expected flat signal");
    } catch (const RuntimeSignal& e) {
      CHECK(e.kind() == RuntimeSignal::Kind::Flat);
    }
  }
  SUBCASE("sweep peak agrees with the optimizer") {
    const auto p = make(300, 0.1, 0.1, 0.01);
    SearchConfig config;
    config.cover_slowest_period = false;
    const double pth = exact_thermal_polarization(300, 0.01);
    const double upper = 3.0 * tau_opt_analytic(p.g, p.M, pth);
    std::vector<double> grid;
    for (int i = 1; i <= 3000; ++i) grid.push_back(upper * i / 3000);
    const auto sweep = sweep_tau(p, grid);
    std::size_t arg = 0;
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      if (sweep[i].polarization > sweep[arg].polarization) arg = i;
    }
    const double tau = tau_opt_numeric(thermal_populations(p), p, config);
    CHECK(std::abs(tau - sweep[arg].tau) <= upper / 3000 * 1.0001);
    CHECK(sweep.front().polarization == doctest::Approx(pth).epsilon(1e-3));
  }
}

TEST_CASE("sweep validation") {
  const auto p = make(10, 0.1, 0.1, 1.0);
  CHECK_THROWS_AS(sweep_tau(p, {0.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(sweep_tau(p, {1.0, 0.5}), ConfigError);
}

TEST_CASE("strategy schedule") {
  const auto s5 = Strategy::unequal_spacing(5);
  for (int i : {1, 6, 11, 16}) CHECK(s5.updates_at(i));
  for (int i : {2, 3, 4, 5, 7, 10}) CHECK_FALSE(s5.updates_at(i));
  CHECK(Strategy::equal_spacing().updates_at(1));
  CHECK_FALSE(Strategy::equal_spacing().updates_at(2));
  CHECK(Strategy::numeric_optimized().updates_at(7));
}

TEST_CASE("first round is the same for every schedule") {
  const auto p = make(120, 0.1, 0.05, 0.05);
  const double pth = exact_thermal_polarization(p.M, p.beta_omega1);
  const double tau = tau_opt_analytic(p.g, p.M, pth);
  const auto expected = apply_round(thermal_populations(p), tau, p);
  for (const auto& s : {Strategy::equal_spacing(), Strategy::unequal_spacing(1),
                        Strategy::unequal_spacing(3, UpdateRule::Analytic)}) {
    const auto trace = run_protocol(p, s, 1);
    REQUIRE(trace.rounds.size() == 1);
    CHECK(trace.rounds[0].tau == doctest::Approx(tau).epsilon(1e-15));
    CHECK(trace.rounds[0].round_probability ==
          doctest::Approx(expected.probability).epsilon(1e-14));
    CHECK(trace.rounds[0].polarization ==
          doctest::Approx(polarization_degree(expected.state)).epsilon(1e-14));
  }
}

TEST_CASE("equal spacing matches the power form") {
  for (int M : {5, 60, 200}) {
    const auto p = make(M, 0.1, 0.03, 0.05);
    const auto trace = run_protocol(p, Strategy::equal_spacing(), 200);
    REQUIRE(trace.rounds.size() == 200);
    const double tau = trace.rounds[0].tau;
    for (const auto& r : trace.rounds) CHECK(r.tau == tau);
    const auto closed = product_form(p, taus_of(trace));
    const auto pops = trace.final_state->populations();
    for (int m = 0; m <= M; ++m) CHECK(std::abs(pops[m] - closed.populations[m]) < 1e-10);
    CHECK(std::abs(trace.rounds.back().cumulative_probability - closed.probability) < 1e-10);
  }
}

TEST_CASE("unequal spacing matches the product form") {
  for (auto rule : {UpdateRule::Numeric, UpdateRule::Analytic}) {
    for (int L : {1, 2, 5}) {
      const auto p = make(150, 0.1, 0.05, 0.02);
      const auto trace = run_protocol(p, Strategy::unequal_spacing(L, rule), 25);
      const auto closed = product_form(p, taus_of(trace));
      const auto pops = trace.final_state->populations();
      for (int m = 0; m <= p.M; ++m) CHECK(std::abs(pops[m] - closed.populations[m]) < 1e-10);
      double cumulative = 1.0;
      double previous = 1.0;
      for (const auto& r : trace.rounds) {
        cumulative *= r.round_probability;
        CHECK(r.cumulative_probability == doctest::Approx(cumulative).epsilon(1e-13));
        CHECK(r.cumulative_probability <= previous);
        previous = r.cumulative_probability;
      }
      CHECK(std::abs(trace.rounds.back().cumulative_probability - closed.probability) < 1e-10);
    }
  }
}

TEST_CASE("L = 1 polarization and entropy over the scenarios") {
  // Preset baths with beta scaled from the M = 700 calibration at 108 MHz.
  struct Case {
    int M;
    double omega0, delta, g;
  };
  for (const Case c : {Case{500, 120, 0.1, 0.03}, Case{500, 400, 0.95, 0.03},
                       Case{2000, 5000, 0.999, 0.016}, Case{2000, 10000, 0.999, 0.008}}) {
    const double beta = kBeta700 * c.omega0 * (1.0 - c.delta) / 108.0;
    const auto p = make(c.M, c.delta, c.g, beta);
    // Re-optimized every round, the one-round maximum never loses ground.
    const auto numeric = run_protocol(p, Strategy::numeric_optimized(), 15);
    double P = numeric.initial_polarization;
    for (const auto& r : numeric.rounds) {
      CHECK(r.polarization >= P - 1e-12);
      P = r.polarization;
    }
    // With the analytic seed the first round may lose a little far from
    // resonance; every later round is re-optimized.
    const auto trace = run_protocol(p, Strategy::unequal_spacing(1), 15);
    P = trace.rounds[0].polarization;
    double S = trace.rounds[0].entropy;
    for (std::size_t i = 1; i < trace.rounds.size(); ++i) {
      CHECK(trace.rounds[i].polarization >= P - 1e-12);
      CHECK(trace.rounds[i].entropy <= S + 1e-12);
      P = trace.rounds[i].polarization;
      S = trace.rounds[i].entropy;
    }
    CHECK(trace.rounds.back().entropy < trace.initial_entropy);
    CHECK(numeric.rounds.back().entropy < numeric.initial_entropy);
  }
}

TEST_CASE("smaller update rate is never worse") {
  for (double g : {0.03, 0.1}) {
    const auto p = make(700, 0.1, g, kBeta700);
    std::vector<ProtocolTrace> traces;
    for (int L : {1, 2, 5, 10}) traces.push_back(run_protocol(p, Strategy::unequal_spacing(L), 30));
    traces.push_back(run_protocol(p, Strategy::equal_spacing(), 30));
    for (std::size_t k = 1; k < traces.size(); ++k) {
      for (int N = 1; N <= 30; ++N) {
        CHECK(traces[k - 1].polarization_at(N) >= traces[k].polarization_at(N) - 1e-9);
      }
    }
  }
}

TEST_CASE("protocol signals") {
  SUBCASE("a ground-state bath converges at once") {
    // beta large enough that 1 - P is below the stop threshold
    const auto p = make(4, 0.1, 0.1, 40.0);
    try {
      run_protocol(p, Strategy::unequal_spacing(1), 5);
      FAIL("expected convergence signal");
    } catch (const RuntimeSignal& e) {
      CHECK(e.kind() == RuntimeSignal::Kind::Converged);
    }
  }
  SUBCASE("convergence truncates the trace") {
    const auto p = make(2, 0.0, 0.25, 2.0);
    const auto trace = run_protocol(p, Strategy::unequal_spacing(1), 200);
    CHECK(trace.stop_reason == "converged");
    CHECK(trace.rounds.size() < 200);
    CHECK(1.0 - trace.rounds.back().polarization < 1e-9);
    CHECK(trace.polarization_at(200) == trace.rounds.back().polarization);
  }
  SUBCASE("bad inputs") {
    const auto p = make(4, 0.1, 0.1, 1.0);
    CHECK_THROWS_AS(run_protocol(p, Strategy::equal_spacing(), 0), ConfigError);
    CHECK_THROWS_AS(run_protocol(p, Strategy::unequal_spacing(0), 3), ConfigError);
  }
}

TEST_CASE("trace accessors") {
  const auto trace = run_protocol(make(50, 0.1, 0.05, 0.1), Strategy::equal_spacing(), 5);
  CHECK(trace.polarization_at(3) == trace.rounds[2].polarization);
  CHECK(trace.polarization_at(50) == trace.rounds[4].polarization);
  CHECK_THROWS_AS(trace.polarization_at(0), ConfigError);
  const auto above = trace.first_round_above(trace.rounds[1].polarization - 1e-15);
  REQUIRE(above);
  CHECK(*above <= 2);
  CHECK_FALSE(trace.first_round_above(1.0));
}
