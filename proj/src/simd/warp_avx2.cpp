#include <immintrin.h>

#include <algorithm>
#include <array>

#include "regmark/simd/dispatch.hpp"

namespace regmark::simd::avx2 {

void compose_2d(const Field2d& outer, const Field2d& inner, std::span<double> out_x,
                std::span<double> out_y) {
  const int nx = outer.nx;
  const int ny = outer.ny;
  const std::size_t total = static_cast<std::size_t>(nx) * ny;
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d max_x = _mm256_set1_pd(nx - 1);
  const __m256d max_y = _mm256_set1_pd(ny - 1);
  const __m128i last_x = _mm_set1_epi32(std::max(nx - 2, 0));
  const __m128i last_y = _mm_set1_epi32(std::max(ny - 2, 0));
  const __m128i top_x = _mm_set1_epi32(nx - 1);
  const __m128i top_y = _mm_set1_epi32(ny - 1);
  const __m128i stride = _mm_set1_epi32(nx);
  const __m128i one_i = _mm_set1_epi32(1);

  for (std::size_t base = 0; base < total; base += 4) {
    const std::size_t lanes = std::min<std::size_t>(4, total - base);
    alignas(32) std::array<double, 4> gi{}, gj{}, bx{}, by{};
    for (std::size_t l = 0; l < 4; ++l) {
      const std::size_t idx = base + std::min(l, lanes - 1);
      gi[l] = static_cast<double>(idx % nx);
      gj[l] = static_cast<double>(idx / nx);
      bx[l] = inner.ux[idx];
      by[l] = inner.uy[idx];
    }
    const __m256d vbx = _mm256_load_pd(bx.data());
    const __m256d vby = _mm256_load_pd(by.data());
    const __m256d px =
        _mm256_min_pd(_mm256_max_pd(_mm256_add_pd(_mm256_load_pd(gi.data()), vbx), zero), max_x);
    const __m256d py =
        _mm256_min_pd(_mm256_max_pd(_mm256_add_pd(_mm256_load_pd(gj.data()), vby), zero), max_y);
    const __m128i x0 = _mm_min_epi32(_mm256_cvttpd_epi32(_mm256_floor_pd(px)), last_x);
    const __m128i y0 = _mm_min_epi32(_mm256_cvttpd_epi32(_mm256_floor_pd(py)), last_y);
    const __m128i x1 = _mm_min_epi32(_mm_add_epi32(x0, one_i), top_x);
    const __m128i y1 = _mm_min_epi32(_mm_add_epi32(y0, one_i), top_y);
    const __m256d fx = _mm256_sub_pd(px, _mm256_cvtepi32_pd(x0));
    const __m256d fy = _mm256_sub_pd(py, _mm256_cvtepi32_pd(y0));
    const __m256d gx = _mm256_sub_pd(one, fx);
    const __m256d gy = _mm256_sub_pd(one, fy);
    const __m256d w00 = _mm256_mul_pd(gx, gy);
    const __m256d w10 = _mm256_mul_pd(fx, gy);
    const __m256d w01 = _mm256_mul_pd(gx, fy);
    const __m256d w11 = _mm256_mul_pd(fx, fy);
    const __m128i row0 = _mm_mullo_epi32(y0, stride);
    const __m128i row1 = _mm_mullo_epi32(y1, stride);
    const __m128i i00 = _mm_add_epi32(row0, x0);
    const __m128i i10 = _mm_add_epi32(row0, x1);
    const __m128i i01 = _mm_add_epi32(row1, x0);
    const __m128i i11 = _mm_add_epi32(row1, x1);

    auto sample = [&](const double* f) {
      __m256d acc = _mm256_mul_pd(w00, _mm256_i32gather_pd(f, i00, 8));
      acc = _mm256_fmadd_pd(w10, _mm256_i32gather_pd(f, i10, 8), acc);
      acc = _mm256_fmadd_pd(w01, _mm256_i32gather_pd(f, i01, 8), acc);
      return _mm256_fmadd_pd(w11, _mm256_i32gather_pd(f, i11, 8), acc);
    };
    alignas(32) std::array<double, 4> rx{}, ry{};
    _mm256_store_pd(rx.data(), _mm256_add_pd(vbx, sample(outer.ux.data())));
    _mm256_store_pd(ry.data(), _mm256_add_pd(vby, sample(outer.uy.data())));
    std::copy_n(rx.begin(), lanes, out_x.begin() + base);
    std::copy_n(ry.begin(), lanes, out_y.begin() + base);
  }
}

}  // namespace regmark::simd::avx2
