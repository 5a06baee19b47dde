// AVX2 variants of the batch kernels. Four directions per iteration; the
// per-lane operation sequence mirrors the scalar kernels exactly (multiply
// then add, no FMA), which keeps results bit-identical to the scalar path.

#if defined(__AVX2__)

#include <immintrin.h>

#include <cmath>
#include <limits>

#include "dmk/simd_kernels.hpp"

namespace dmk::simd {
namespace {

void radial_batch_avx2(const double* normals, const double* offsets, int k, int n, const double* dirs,
                       int count, double* rho, std::int32_t* facet) {
  const double inf = std::numeric_limits<double>::infinity();
  const __m256d vinf = _mm256_set1_pd(inf);
  const __m256d vzero = _mm256_setzero_pd();
  int j = 0;
  for (; j + 4 <= count; j += 4) {
    __m256d best = vinf;
    __m256d arg = _mm256_set1_pd(-1.0);
    for (int i = 0; i < k; ++i) {
      __m256d dot = vzero;
      for (int d = 0; d < n; ++d) {
        __m256d u = _mm256_set1_pd(normals[i * n + d]);
        __m256d x = _mm256_loadu_pd(dirs + d * count + j);
        dot = _mm256_add_pd(dot, _mm256_mul_pd(u, x));
      }
      __m256d valid = _mm256_cmp_pd(dot, vzero, _CMP_GT_OQ);
      __m256d ratio = _mm256_div_pd(_mm256_set1_pd(offsets[i]), dot);
      ratio = _mm256_blendv_pd(vinf, ratio, valid);
      __m256d less = _mm256_cmp_pd(ratio, best, _CMP_LT_OQ);
      best = _mm256_blendv_pd(best, ratio, less);
      arg = _mm256_blendv_pd(arg, _mm256_set1_pd(static_cast<double>(i)), less);
    }
    _mm256_storeu_pd(rho + j, best);
    alignas(32) double args[4];
    _mm256_store_pd(args, arg);
    for (int l = 0; l < 4; ++l) facet[j + l] = static_cast<std::int32_t>(args[l]);
  }
  if (j < count) {
    // Scalar tail, identical op order.
    for (; j < count; ++j) {
      double best = inf;
      std::int32_t a = -1;
      for (int i = 0; i < k; ++i) {
        double dot = 0.0;
        for (int d = 0; d < n; ++d) dot += normals[i * n + d] * dirs[d * count + j];
        double ratio = dot > 0.0 ? offsets[i] / dot : inf;
        if (ratio < best) {
          best = ratio;
          a = i;
        }
      }
      rho[j] = best;
      facet[j] = a;
    }
  }
}

void support_batch_avx2(const double* vertices, int m, int n, const double* dirs, int count, double* h) {
  const __m256d vninf = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  int j = 0;
  for (; j + 4 <= count; j += 4) {
    __m256d best = vninf;
    for (int i = 0; i < m; ++i) {
      __m256d dot = _mm256_setzero_pd();
      for (int d = 0; d < n; ++d) {
        __m256d v = _mm256_set1_pd(vertices[i * n + d]);
        __m256d x = _mm256_loadu_pd(dirs + d * count + j);
        dot = _mm256_add_pd(dot, _mm256_mul_pd(v, x));
      }
      __m256d gt = _mm256_cmp_pd(dot, best, _CMP_GT_OQ);
      best = _mm256_blendv_pd(best, dot, gt);
    }
    _mm256_storeu_pd(h + j, best);
  }
  for (; j < count; ++j) {
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      double dot = 0.0;
      for (int d = 0; d < n; ++d) dot += vertices[i * n + d] * dirs[d * count + j];
      if (dot > best) best = dot;
    }
    h[j] = best;
  }
}

void quad_form_batch_avx2(const double* M, int n, const double* dirs, int count, double* rho) {
  const __m256d vone = _mm256_set1_pd(1.0);
  int j = 0;
  for (; j + 4 <= count; j += 4) {
    __m256d s = _mm256_setzero_pd();
    for (int d = 0; d < n; ++d) {
      __m256d row = _mm256_setzero_pd();
      for (int e = 0; e < n; ++e) {
        __m256d me = _mm256_set1_pd(M[d * n + e]);
        __m256d x = _mm256_loadu_pd(dirs + e * count + j);
        row = _mm256_add_pd(row, _mm256_mul_pd(me, x));
      }
      __m256d xd = _mm256_loadu_pd(dirs + d * count + j);
      s = _mm256_add_pd(s, _mm256_mul_pd(xd, row));
    }
    _mm256_storeu_pd(rho + j, _mm256_div_pd(vone, _mm256_sqrt_pd(s)));
  }
  for (; j < count; ++j) {
    double s = 0.0;
    for (int d = 0; d < n; ++d) {
      double row = 0.0;
      for (int e = 0; e < n; ++e) row += M[d * n + e] * dirs[e * count + j];
      s += dirs[d * count + j] * row;
    }
    rho[j] = 1.0 / std::sqrt(s);
  }
}

}  // namespace

const Kernels* avx2_kernels_impl() {
  static const Kernels k{"avx2", radial_batch_avx2, support_batch_avx2, quad_form_batch_avx2};
  return &k;
}

}  // namespace dmk::simd

#endif  // __AVX2__
