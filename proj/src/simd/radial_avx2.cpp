#include <immintrin.h>

#include <algorithm>
#include <array>

#include "regmark/simd/dispatch.hpp"

namespace regmark::simd::avx2 {
namespace {

// exp(x) for x <= 0. Cody-Waite reduction to |r| <= ln2/2 and a degree-13
// Taylor polynomial; arguments below -708 flush to zero.
inline __m256d exp_nonpositive(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634);
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  const __m256d floor_arg = _mm256_set1_pd(-708.0);
  const __m256d underflow = _mm256_cmp_pd(x, floor_arg, _CMP_LT_OQ);
  x = _mm256_max_pd(x, floor_arg);

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);

  static constexpr std::array<double, 14> kCoeff = {
      1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
      1.0 / 362880.0,     1.0 / 40320.0,     1.0 / 5040.0,      1.0 / 720.0,
      1.0 / 120.0,        1.0 / 24.0,        1.0 / 6.0,         0.5,
      1.0,                1.0};
  __m256d p = _mm256_set1_pd(kCoeff[0]);
  for (std::size_t k = 1; k < kCoeff.size(); ++k) {
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kCoeff[k]));
  }

  const __m128i ni = _mm256_cvtpd_epi32(n);
  __m256i bits = _mm256_cvtepi32_epi64(_mm_add_epi32(ni, _mm_set1_epi32(1023)));
  bits = _mm256_slli_epi64(bits, 52);
  const __m256d scale = _mm256_castsi256_pd(bits);
  return _mm256_andnot_pd(underflow, _mm256_mul_pd(p, scale));
}

inline __m256d basis(BasisKind kind, __m256d r) {
  const __m256d one = _mm256_set1_pd(1.0);
  switch (kind) {
    case BasisKind::Gaussian:
      return exp_nonpositive(_mm256_sub_pd(_mm256_setzero_pd(), _mm256_mul_pd(r, r)));
    case BasisKind::InverseQuadratic:
      return _mm256_div_pd(one, _mm256_fmadd_pd(r, r, one));
    case BasisKind::Wendland1: {
      const __m256d t = _mm256_max_pd(_mm256_sub_pd(one, r), _mm256_setzero_pd());
      const __m256d t2 = _mm256_mul_pd(t, t);
      const __m256d lead = _mm256_fmadd_pd(_mm256_set1_pd(4.0), r, one);
      return _mm256_mul_pd(lead, _mm256_mul_pd(t2, t2));
    }
  }
  return _mm256_setzero_pd();
}

inline __m256d bundle4(const BundleParams& params, __m256d d) {
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t s = 0; s < params.inv_radii.size(); ++s) {
    const __m256d r = _mm256_mul_pd(d, _mm256_set1_pd(params.inv_radii[s]));
    acc = _mm256_fmadd_pd(_mm256_set1_pd(params.weights[s]), basis(params.kind, r), acc);
  }
  return acc;
}

}  // namespace

void radial_bundle(const BundleParams& params, std::span<const double> dist,
                   std::span<double> out) {
  const std::size_t n = dist.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out.data() + i, bundle4(params, _mm256_loadu_pd(dist.data() + i)));
  }
  if (i < n) {
    alignas(32) std::array<double, 4> tail_in{};
    alignas(32) std::array<double, 4> tail_out{};
    std::copy(dist.begin() + i, dist.end(), tail_in.begin());
    _mm256_store_pd(tail_out.data(), bundle4(params, _mm256_load_pd(tail_in.data())));
    std::copy_n(tail_out.begin(), n - i, out.begin() + i);
  }
}

}  // namespace regmark::simd::avx2
