#include <cassert>
#include <cstdlib>
#include <string_view>

#include "dnp/kernels.hpp"

namespace dnp::kernels {
namespace {

bool cpu_has(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(DNP_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& select() {
  if (const char* pin = std::getenv("DNP_KERNELS");
      pin != nullptr && std::string_view(pin) == "scalar") {
    return detail::kScalarTable;
  }
  if (const KernelTable* avx2 = table_for(Isa::Avx2)) return *avx2;
  return detail::kScalarTable;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
  }
  return "unknown";
}

const KernelTable& scalar_table() { return detail::kScalarTable; }

const KernelTable* table_for(Isa isa) {
  if (!cpu_has(isa)) return nullptr;
  switch (isa) {
    case Isa::Scalar:
      return &detail::kScalarTable;
    case Isa::Avx2:
#if defined(DNP_HAVE_AVX2)
      return &detail::kAvx2Table;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

void survival_factors(std::span<const double> rabi,
                      std::span<const double> mixing, double tau,
                      std::span<double> out) {
  assert(rabi.size() == mixing.size() && out.size() == rabi.size());
  active().survival(rabi.data(), mixing.data(), tau, out.data(), out.size());
}

RoundMoments round_moments(std::span<const double> pop,
                           std::span<const double> rabi,
                           std::span<const double> mixing, double tau) {
  assert(pop.size() == rabi.size() && pop.size() == mixing.size());
  return active().round_moments(pop.data(), rabi.data(), mixing.data(), tau,
                                pop.size());
}

double scale_populations(std::span<double> pop,
                         std::span<const double> factors) {
  assert(pop.size() == factors.size());
  return active().scale(pop.data(), factors.data(), pop.size());
}

}  // namespace dnp::kernels
