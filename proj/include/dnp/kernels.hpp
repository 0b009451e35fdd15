#pragma once

// Data-parallel inner loops over the collective levels m = 0..M.
//
// Every kernel has a scalar reference implementation and, on x86-64 builds, an
// AVX2/FMA variant. The variant is chosen once at startup from CPUID; setting
// DNP_KERNELS=scalar in the environment pins the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace dnp::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

struct RoundMoments {
  double weight = 0.0;  // sum_m f_m p_m
  double first = 0.0;   // sum_m m f_m p_m
};

struct KernelTable {
  Isa isa;

  // out[m] = 1 - sin^2(rabi[m] * tau) * mixing[m]
  void (*survival)(const double* rabi, const double* mixing, double tau,
                   double* out, std::size_t n);

  // Moments of p_m weighted by the survival factor, without storing it.
  RoundMoments (*round_moments)(const double* pop, const double* rabi,
                                const double* mixing, double tau,
                                std::size_t n);

  // pop[m] *= factors[m]; returns the new total.
  double (*scale)(double* pop, const double* factors, std::size_t n);
};

const KernelTable& scalar_table();

// nullptr when the variant was not compiled in or the CPU lacks it.
const KernelTable* table_for(Isa isa);

const KernelTable& active();

// Wrappers over active().
void survival_factors(std::span<const double> rabi,
                      std::span<const double> mixing, double tau,
                      std::span<double> out);
RoundMoments round_moments(std::span<const double> pop,
                           std::span<const double> rabi,
                           std::span<const double> mixing, double tau);
double scale_populations(std::span<double> pop,
                         std::span<const double> factors);

namespace detail {
extern const KernelTable kScalarTable;
#if defined(DNP_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif
}  // namespace detail

}  // namespace dnp::kernels
