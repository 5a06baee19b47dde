#include <cmath>
#include <limits>

#include "dmk/simd_kernels.hpp"

namespace dmk::simd {
namespace {

void radial_batch_scalar(const double* normals, const double* offsets, int k, int n, const double* dirs,
                         int count, double* rho, std::int32_t* facet) {
  const double inf = std::numeric_limits<double>::infinity();
  for (int j = 0; j < count; ++j) {
    double best = inf;
    std::int32_t arg = -1;
    for (int i = 0; i < k; ++i) {
      double dot = 0.0;
      for (int d = 0; d < n; ++d) dot += normals[i * n + d] * dirs[d * count + j];
      double ratio = dot > 0.0 ? offsets[i] / dot : inf;
      if (ratio < best) {
        best = ratio;
        arg = i;
      }
    }
    rho[j] = best;
    facet[j] = arg;
  }
}

void support_batch_scalar(const double* vertices, int m, int n, const double* dirs, int count, double* h) {
  for (int j = 0; j < count; ++j) {
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      double dot = 0.0;
      for (int d = 0; d < n; ++d) dot += vertices[i * n + d] * dirs[d * count + j];
      if (dot > best) best = dot;
    }
    h[j] = best;
  }
}

void quad_form_batch_scalar(const double* M, int n, const double* dirs, int count, double* rho) {
  for (int j = 0; j < count; ++j) {
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

const Kernels& scalar_kernels() {
  static const Kernels k{"scalar", radial_batch_scalar, support_batch_scalar, quad_form_batch_scalar};
  return k;
}

}  // namespace dmk::simd
