#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "dnp/spin_algebra.hpp"

using namespace dnp;

namespace {

ModelParams make(int M, double delta, double g, double beta = 0.0) {
  ModelParams p;
  p.M = M;
  p.delta = delta;
  p.g = g;
  p.beta_omega1 = beta;
  return p;
}

// |alpha_m|^2 straight from the two-level solution, no shared code.
double alpha_sq_oracle(int m, double tau, const ModelParams& p) {
  const double coupling = 2.0 * p.g * std::sqrt(double(m) * (p.M - m + 1));
  const double omega = std::sqrt(p.delta * p.delta / 4.0 + coupling * coupling);
  if (omega == 0.0) return 1.0;
  const double c = std::cos(omega * tau);
  const double s = std::sin(omega * tau) * p.delta / (2.0 * omega);
  return c * c + s * s;
}

double sum(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

TEST_CASE("thermal populations") {
  SUBCASE("infinite temperature is uniform") {
    const auto s = thermal_populations(make(3, 0.0, 0.1, 0.0));
    for (int m = 0; m <= 3; ++m) CHECK(s[m] == doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("zero-temperature limit") {
    const auto s = thermal_populations(make(5, 0.0, 0.1, 100.0));
    CHECK(s[0] == doctest::Approx(1.0).epsilon(1e-15));
    for (int m = 1; m <= 5; ++m) CHECK(s[m] < 1e-40);
  }
  SUBCASE("geometric weights at ln 2") {
    const auto s = thermal_populations(make(2, 0.0, 0.1, std::numbers::ln2));
    CHECK(s[0] == doctest::Approx(4.0 / 7.0).epsilon(1e-14));
    CHECK(s[1] == doctest::Approx(2.0 / 7.0).epsilon(1e-14));
    CHECK(s[2] == doctest::Approx(1.0 / 7.0).epsilon(1e-14));
  }
  SUBCASE("large M beta does not overflow") {
    const auto s = thermal_populations(make(5000, 0.0, 0.1, 3.0));
    CHECK(std::isfinite(s[0]));
    CHECK(sum(s.populations()) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("rabi frequency") {
  const auto p = make(4, 0.2, 0.1);
  CHECK(rabi_frequency(0, p).full == doctest::Approx(0.1));
  CHECK(rabi_frequency(0, p).coupling == 0.0);
  CHECK(rabi_frequency(2, p).full == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(rabi_frequency(1, make(1, 0.0, 0.5)).full == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(rabi_frequency(-1, p), ConfigError);
  CHECK_THROWS_AS(rabi_frequency(5, p), ConfigError);
  for (int m = 0; m <= 4; ++m) CHECK(rabi_frequency(m, p).full >= 0.1 - 1e-15);
}

TEST_CASE("polarization coefficient") {
  const auto p = make(10, 0.3, 0.07);
  for (int m = 0; m <= 10; ++m) {
    const auto a = polarization_coefficient(m, 0.0, p);
    CHECK(a.real() == 1.0);
    CHECK(a.imag() == 0.0);
  }
  for (double tau : {0.1, 1.7, 25.0, 1e3}) {
    CHECK(std::abs(std::norm(polarization_coefficient(0, tau, p)) - 1.0) < 1e-12);
  }
  SUBCASE("resonant coefficient is real") {
    const auto r = make(6, 0.0, 0.05);
    for (int m = 0; m <= 6; ++m) {
      const auto a = polarization_coefficient(m, 2.3, r);
      CHECK(a.imag() == 0.0);
      CHECK(a.real() == doctest::Approx(std::cos(rabi_frequency(m, r).coupling * 2.3)));
    }
  }
  SUBCASE("degenerate level is the identity") {
    const auto r = make(3, 0.0, 0.2);
    CHECK(polarization_coefficient(0, 7.0, r) == std::complex<double>(1.0, 0.0));
  }
}

TEST_CASE("|alpha|^2 <= 1 on a random sample") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = make(1 + int(u(rng) * 300), u(rng) * 2.0 - 1.0, 0.001 + u(rng) * 0.2);
    const double tau = u(rng) * 50.0;
    for (int m = 0; m <= p.M; m += 1 + p.M / 17) {
      const double a2 = std::norm(polarization_coefficient(m, tau, p));
      CHECK(a2 <= 1.0 + 1e-12);
      CHECK(a2 == doctest::Approx(alpha_sq_oracle(m, tau, p)).epsilon(1e-12));
    }
  }
}

TEST_CASE("coefficient profile") {
  SUBCASE("zero interval") {
    const auto prof = coefficient_profile(make(20, 0.1, 0.1), 0.0, 1);
    for (double v : prof.values) CHECK(v == 1.0);
  }
  SUBCASE("brute-force agreement") {
    const auto p = make(2, 0.0, 0.25);
    const double tau = 2.0 * std::numbers::pi;
    const auto prof = coefficient_profile(p, tau, 1);
    REQUIRE(prof.values.size() == 3);
    for (int m = 0; m <= 2; ++m) {
      CHECK(prof.values[m] == doctest::Approx(alpha_sq_oracle(m, tau, p)).epsilon(1e-12));
    }
    CHECK(prof.values[0] == 1.0);
  }
  SUBCASE("profile shape at M = 700, tau = 0.03") {
    // Omega_m tau stays below pi here, so besides m = 0 the surviving levels
    // are the slow ones near m = M; the fast middle levels are wiped out.
    const auto p = make(700, 0.1, 0.1);
    const auto one = coefficient_profile(p, 0.03, 1);
    const auto ten = coefficient_profile(p, 0.03, 10);
    CHECK(ten.values[0] == 1.0);
    for (int m = 0; m <= 700; ++m) {
      CHECK(ten.values[m] >= 0.0);
      CHECK(ten.values[m] <= 1.0);
      CHECK(ten.values[m] <= one.values[m]);
    }
    CHECK(one.values[700] > 0.97);
    CHECK(ten.values[700] > 0.75);
    CHECK(ten.values[350] < 1e-5);
    // sin^2 passes its maximum at Omega_m tau = pi / 2: two deep minima
    // around a local bump in the middle.
    int minima = 0;
    for (int m = 1; m < 700; ++m) {
      if (one.values[m] < one.values[m - 1] && one.values[m] < one.values[m + 1]) ++minima;
    }
    CHECK(minima == 2);
  }
  SUBCASE("power of the single-round profile") {
    const auto p = make(40, 0.2, 0.05);
    const auto one = coefficient_profile(p, 1.3, 1);
    const auto many = coefficient_profile(p, 1.3, 7);
    for (int m = 0; m <= 40; ++m) {
      CHECK(many.values[m] == doctest::Approx(std::pow(one.values[m], 7)).epsilon(1e-12));
    }
  }
}

TEST_CASE("apply_round") {
  SUBCASE("ground state is invariant") {
    const auto p = make(6, 0.1, 0.1);
    const auto r = apply_round(BathState::ground(6), 3.0, p);
    CHECK(r.probability == 1.0);
    CHECK(r.state[0] == 1.0);
  }
  SUBCASE("two-level closed form") {
    const auto p = make(1, 0.0, 0.3);
    const double tau = std::numbers::pi / 4.0 / (2.0 * 0.3);  // cos^2(2 g tau) = 1/2
    const auto r = apply_round(BathState({0.5, 0.5}), tau, p);
    CHECK(r.probability == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(r.state[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(r.state[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  }
  SUBCASE("protected interval leaves the state unchanged") {
    const auto p = make(1, 0.0, 0.3);
    const double tau = std::numbers::pi / (2.0 * 0.3);
    const auto r = apply_round(BathState({0.5, 0.5}), tau, p);
    CHECK(r.probability == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.state[1] == doctest::Approx(0.5).epsilon(1e-13));
  }
  SUBCASE("annihilation is signalled") {
    const auto p = make(1, 0.0, 0.3);
    const double tau = std::numbers::pi / 2.0 / (2.0 * 0.3);  // cos = 0 for m = 1
    try {
      apply_round(BathState({0.0, 1.0}), tau, p);
      FAIL("expected a runtime signal");
    } catch (const RuntimeSignal& e) {
      CHECK(e.kind() == RuntimeSignal::Kind::Annihilated);
    }
  }
  SUBCASE("normalization and monotone ground share") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      const auto p = make(2 + int(u(rng) * 80), u(rng) - 0.5, 0.01 + 0.1 * u(rng), u(rng));
      BathState s = thermal_populations(p);
      for (int round = 0; round < 10; ++round) {
        const auto r = apply_round(s, 0.05 + 3.0 * u(rng), p);
        CHECK(sum(r.state.populations()) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.state[0] >= s[0] * (1.0 - 1e-12));
        for (double x : r.state.populations()) CHECK(x >= 0.0);
        s = r.state;
      }
    }
  }
}

TEST_CASE("repeated rounds equal the direct power form") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int M : {1, 5, 37, 100}) {
    const auto p = make(M, 0.4 * u(rng), 0.02 + 0.05 * u(rng), 0.2 + u(rng));
    const double tau = 0.5 + u(rng);
    const int N = 50;
    BathState s = thermal_populations(p);
    const BathState initial = s;
    for (int k = 0; k < N; ++k) s = apply_round(s, tau, p).state;
    std::vector<double> w(M + 1);
    double z = 0.0;
    for (int m = 0; m <= M; ++m) {
      w[m] = std::pow(alpha_sq_oracle(m, tau, p), N) * initial[m];
      z += w[m];
    }
    for (int m = 0; m <= M; ++m) CHECK(std::abs(s[m] - w[m] / z) < 1e-10);
  }
}

TEST_CASE("polarization degree") {
  CHECK(polarization_degree(BathState::ground(9)) == 1.0);
  for (int M : {1, 2, 7, 50}) {
    std::vector<double> uniform(M + 1, 1.0 / (M + 1));
    CHECK(std::abs(polarization_degree(uniform)) < 1e-14);
  }
  CHECK(polarization_degree(BathState({0.5, 0.25, 0.25})) == doctest::Approx(0.25));
  CHECK(polarization_degree(BathState({0.0, 0.0, 1.0})) == doctest::Approx(1.0));

  SUBCASE("thermal polarization increases with beta") {
    for (int M : {3, 100, 700}) {
      double previous = -1.0;
      for (double beta = 0.0; beta <= 5.0; beta += 0.05) {
        const double P = polarization_degree(thermal_populations(make(M, 0.0, 0.1, beta)));
        CHECK(P > previous);
        CHECK(P <= 1.0);
        previous = P;
      }
    }
  }
}

TEST_CASE("entropy") {
  CHECK(entropy(BathState::ground(4)) == 0.0);
  CHECK(entropy(BathState({0.25, 0.25, 0.25, 0.25})) == doctest::Approx(std::log(4.0)));
  CHECK(entropy(BathState({0.5, 0.5, 0.0})) == doctest::Approx(std::numbers::ln2));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int M = 1 + int(u(rng) * 40);
    std::vector<double> w(M + 1);
    for (auto& x : w) x = u(rng) < 0.3 ? 0.0 : u(rng);
    w[0] += 1e-3;
    const double S = entropy(BathState::from_weights(w));
    CHECK(S >= 0.0);
    CHECK(S <= std::log(M + 1.0) + 1e-12);
  }
}

TEST_CASE("bath state validation") {
  CHECK_THROWS_AS(BathState({0.5, 0.6}), ConfigError);
  CHECK_THROWS_AS(BathState({1.2, -0.2}), ConfigError);
  CHECK_THROWS_AS(BathState(std::vector<double>{}), ConfigError);
  CHECK_THROWS_AS(make(0, 0.0, 0.1).validate(), ConfigError);
  CHECK_THROWS_AS(make(2, 0.0, 0.0).validate(), ConfigError);
  CHECK_THROWS_AS(make(2, 0.0, 0.1, -1.0).validate(), ConfigError);
}

TEST_CASE("physical beta conversion") {
  // hbar * 1e8 rad/s / (k_B * 1 K)
  const double expected = 1.054571817e-34 * 1e8 / 1.380649e-23;
  CHECK(beta_omega1_from_physical(1e8, 1.0) == doctest::Approx(expected).epsilon(1e-9));
  CHECK_THROWS_AS(beta_omega1_from_physical(1e8, 0.0), ConfigError);
}
