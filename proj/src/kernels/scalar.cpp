#include <cmath>

#include "dnp/kernels.hpp"

namespace dnp::kernels {
namespace {

void survival_scalar(const double* rabi, const double* mixing, double tau,
                     double* out, std::size_t n) {
  for (std::size_t m = 0; m < n; ++m) {
    const double s = std::sin(rabi[m] * tau);
    out[m] = 1.0 - s * s * mixing[m];
  }
}

RoundMoments round_moments_scalar(const double* pop, const double* rabi,
                                  const double* mixing, double tau,
                                  std::size_t n) {
  RoundMoments acc;
  for (std::size_t m = 0; m < n; ++m) {
    const double s = std::sin(rabi[m] * tau);
    const double w = (1.0 - s * s * mixing[m]) * pop[m];
    acc.weight += w;
    acc.first += static_cast<double>(m) * w;
  }
  return acc;
}

double scale_scalar(double* pop, const double* factors, std::size_t n) {
  double total = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    pop[m] *= factors[m];
    total += pop[m];
  }
  return total;
}

}  // namespace

namespace detail {
const KernelTable kScalarTable{Isa::Scalar, survival_scalar,
                               round_moments_scalar, scale_scalar};
}  // namespace detail

}  // namespace dnp::kernels
