#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "dnp/kernels.hpp"

using namespace dnp::kernels;

namespace {

struct Inputs {
  std::vector<double> pop, rabi, mixing;
};

Inputs random_inputs(std::size_t n, double max_rabi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Inputs in;
  in.pop.resize(n);
  in.rabi.resize(n);
  in.mixing.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    in.pop[i] = unit(rng);
    in.rabi[i] = max_rabi * unit(rng);
    in.mixing[i] = unit(rng);
  }
  return in;
}

std::vector<const KernelTable*> variants() {
  std::vector<const KernelTable*> out{&scalar_table()};
  if (const auto* avx2 = table_for(Isa::Avx2)) out.push_back(avx2);
  return out;
}

}  // namespace

TEST_CASE("scalar table is always available and active() is a supported table") {
  CHECK(table_for(Isa::Scalar) == &scalar_table());
  const auto& a = active();
  CHECK(table_for(a.isa) != nullptr);
  MESSAGE("active kernels: " << to_string(a.isa));
}

TEST_CASE("survival factors match the direct formula for every variant") {
  std::mt19937_64 rng(7);
  for (const auto* table : variants()) {
    CAPTURE(to_string(table->isa));
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 8u, 13u, 701u}) {
      auto in = random_inputs(n, 40.0, rng);
      const double tau = 3.7;
      std::vector<double> out(n, -1.0);
      table->survival(in.rabi.data(), in.mixing.data(), tau, out.data(), n);
      for (std::size_t i = 0; i < n; ++i) {
        const double s = std::sin(in.rabi[i] * tau);
        CHECK(std::abs(out[i] - (1.0 - s * s * in.mixing[i])) < 1e-14);
      }
    }
  }
}

TEST_CASE("vector sin^2 is accurate at quadrant boundaries and large arguments") {
  const auto* avx2 = table_for(Isa::Avx2);
  if (avx2 == nullptr) return;
  std::vector<double> rabi, mixing, out;
  for (int k = -40; k <= 40; ++k) {
    for (double off : {-1e-9, 0.0, 1e-9, 0.3, 0.785398}) {
      rabi.push_back(k * std::numbers::pi / 2 + off);
    }
  }
  for (double x : {1e3, 12345.678, 1e5, 5e5}) rabi.push_back(x);
  mixing.assign(rabi.size(), 1.0);
  out.resize(rabi.size());
  avx2->survival(rabi.data(), mixing.data(), 1.0, out.data(), rabi.size());
  for (std::size_t i = 0; i < rabi.size(); ++i) {
    const double s = std::sin(rabi[i]);
    CAPTURE(rabi[i]);
    CHECK(std::abs((1.0 - out[i]) - s * s) < 4e-16 * std::max(1.0, std::abs(rabi[i]) / 8.0));
  }
}

TEST_CASE("fused moments and scaling agree across variants") {
  std::mt19937_64 rng(11);
  const auto all = variants();
  for (std::size_t n : {1u, 2u, 7u, 64u, 2001u}) {
    auto in = random_inputs(n, 15.0, rng);
    for (double tau : {0.0, 0.023, 0.77, 9.1}) {
      const auto ref = all[0]->round_moments(in.pop.data(), in.rabi.data(),
                                             in.mixing.data(), tau, n);
      std::vector<double> factors(n);
      all[0]->survival(in.rabi.data(), in.mixing.data(), tau, factors.data(), n);
      double direct_w = 0.0, direct_f = 0.0;
      for (std::size_t m = 0; m < n; ++m) {
        direct_w += factors[m] * in.pop[m];
        direct_f += static_cast<double>(m) * factors[m] * in.pop[m];
      }
      CHECK(ref.weight == doctest::Approx(direct_w).epsilon(1e-13));
      CHECK(ref.first == doctest::Approx(direct_f).epsilon(1e-13));

      for (const auto* table : all) {
        CAPTURE(to_string(table->isa));
        const auto got = table->round_moments(in.pop.data(), in.rabi.data(),
                                              in.mixing.data(), tau, n);
        CHECK(got.weight == doctest::Approx(ref.weight).epsilon(1e-13));
        CHECK(got.first == doctest::Approx(ref.first).epsilon(1e-13));

        std::vector<double> p = in.pop;
        const double total = table->scale(p.data(), factors.data(), n);
        double check = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
          CHECK(p[m] == doctest::Approx(in.pop[m] * factors[m]).epsilon(1e-15));
          check += p[m];
        }
        CHECK(total == doctest::Approx(check).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("zero mixing gives a survival factor of exactly one") {
  for (const auto* table : variants()) {
    std::vector<double> rabi{0.0, 0.05, 3.0, 1e4, 7.0}, mixing(5, 0.0), out(5);
    table->survival(rabi.data(), mixing.data(), 123.4, out.data(), 5);
    for (double v : out) CHECK(v == 1.0);
  }
}
