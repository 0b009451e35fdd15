// AVX2/FMA variants. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after a CPUID check (see dispatch.cpp).

#include <immintrin.h>

#include <array>

#include "dnp/kernels.hpp"

namespace dnp::kernels {
namespace {

// Three-part Cody-Waite split of pi/2 (fdlibm). Accurate reduction for
// |x| well beyond the arguments that occur here (|x| < 1e6).
constexpr double kTwoOverPi = 6.36619772367581382433e-01;
constexpr double kPio2Hi = 1.57079632673412561417e+00;
constexpr double kPio2Mid = 6.07710050630396597660e-11;
constexpr double kPio2Lo = 2.02226624871116645580e-21;

// sin(r) = r + r z P(z), z = r^2, |r| <= pi/4 (Cephes minimax).
constexpr std::array<double, 6> kSinCoeffs = {
    1.58962301576546568060e-10, -2.50507477628578072866e-8,
    2.75573136213857245213e-6,  -1.98412698295895385996e-4,
    8.33333333332211858878e-3,  -1.66666666666666307295e-1};

// sin^2(x). The sign of sin drops out, so only the quadrant parity matters:
// sin^2(x) = sin^2(r) for even quadrants and 1 - sin^2(r) for odd ones.
inline __m256d sin_squared(__m256d x) {
  const __m256d q = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kTwoOverPi)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(q, _mm256_set1_pd(kPio2Hi), x);
  r = _mm256_fnmadd_pd(q, _mm256_set1_pd(kPio2Mid), r);
  r = _mm256_fnmadd_pd(q, _mm256_set1_pd(kPio2Lo), r);

  const __m256d z = _mm256_mul_pd(r, r);
  __m256d poly = _mm256_set1_pd(kSinCoeffs[0]);
  for (std::size_t i = 1; i < kSinCoeffs.size(); ++i) {
    poly = _mm256_fmadd_pd(poly, z, _mm256_set1_pd(kSinCoeffs[i]));
  }
  const __m256d s = _mm256_fmadd_pd(_mm256_mul_pd(r, z), poly, r);
  const __m256d s2 = _mm256_mul_pd(s, s);

  const __m256d half = _mm256_mul_pd(q, _mm256_set1_pd(0.5));
  const __m256d odd = _mm256_cmp_pd(
      _mm256_sub_pd(half, _mm256_floor_pd(half)), _mm256_setzero_pd(),
      _CMP_NEQ_OQ);
  return _mm256_blendv_pd(s2, _mm256_sub_pd(_mm256_set1_pd(1.0), s2), odd);
}

inline __m256d survival4(__m256d rabi, __m256d mixing, __m256d tau) {
  const __m256d s2 = sin_squared(_mm256_mul_pd(rabi, tau));
  return _mm256_fnmadd_pd(s2, mixing, _mm256_set1_pd(1.0));
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

// Copies the trailing n % 4 elements into a zero-padded lane buffer.
inline __m256d load_tail(const double* src, std::size_t count) {
  alignas(32) std::array<double, 4> buf{};
  for (std::size_t i = 0; i < count; ++i) buf[i] = src[i];
  return _mm256_load_pd(buf.data());
}

void survival_avx2(const double* rabi, const double* mixing, double tau,
                   double* out, std::size_t n) {
  const __m256d vt = _mm256_set1_pd(tau);
  std::size_t m = 0;
  for (; m + 4 <= n; m += 4) {
    _mm256_storeu_pd(out + m, survival4(_mm256_loadu_pd(rabi + m),
                                        _mm256_loadu_pd(mixing + m), vt));
  }
  if (m < n) {
    alignas(32) std::array<double, 4> buf{};
    _mm256_store_pd(buf.data(), survival4(load_tail(rabi + m, n - m),
                                          load_tail(mixing + m, n - m), vt));
    for (std::size_t i = 0; m + i < n; ++i) out[m + i] = buf[i];
  }
}

RoundMoments round_moments_avx2(const double* pop, const double* rabi,
                                const double* mixing, double tau,
                                std::size_t n) {
  const __m256d vt = _mm256_set1_pd(tau);
  const __m256d step = _mm256_set1_pd(4.0);
  __m256d index = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
  __m256d weight = _mm256_setzero_pd();
  __m256d first = _mm256_setzero_pd();
  std::size_t m = 0;
  for (; m + 4 <= n; m += 4) {
    const __m256d f = survival4(_mm256_loadu_pd(rabi + m),
                                _mm256_loadu_pd(mixing + m), vt);
    const __m256d w = _mm256_mul_pd(f, _mm256_loadu_pd(pop + m));
    weight = _mm256_add_pd(weight, w);
    first = _mm256_fmadd_pd(index, w, first);
    index = _mm256_add_pd(index, step);
  }
  if (m < n) {
    // Padded lanes carry zero population and contribute nothing.
    const std::size_t rest = n - m;
    const __m256d f = survival4(load_tail(rabi + m, rest),
                                load_tail(mixing + m, rest), vt);
    const __m256d w = _mm256_mul_pd(f, load_tail(pop + m, rest));
    weight = _mm256_add_pd(weight, w);
    first = _mm256_fmadd_pd(index, w, first);
  }
  return {hsum(weight), hsum(first)};
}

double scale_avx2(double* pop, const double* factors, std::size_t n) {
  __m256d total = _mm256_setzero_pd();
  std::size_t m = 0;
  for (; m + 4 <= n; m += 4) {
    const __m256d p = _mm256_mul_pd(_mm256_loadu_pd(pop + m),
                                    _mm256_loadu_pd(factors + m));
    _mm256_storeu_pd(pop + m, p);
    total = _mm256_add_pd(total, p);
  }
  double tail = 0.0;
  for (; m < n; ++m) {
    pop[m] *= factors[m];
    tail += pop[m];
  }
  return hsum(total) + tail;
}

}  // namespace

namespace detail {
const KernelTable kAvx2Table{Isa::Avx2, survival_avx2, round_moments_avx2,
                             scale_avx2};
}  // namespace detail

}  // namespace dnp::kernels
