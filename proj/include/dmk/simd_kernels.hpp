#pragma once

#include <cstdint>

namespace dmk::simd {

// Batch kernels over direction sets stored dim-major (SoA): coordinate d of
// direction j lives at dirs[d * count + j]. All variants of a kernel perform
// the same IEEE operations in the same order (multiply + add, no FMA), so
// results are bit-identical across implementations.

// rho_j = min over {i : <u_i, dir_j> > 0} of t_i / <u_i, dir_j>, facet_j the
// first minimizing i; rho = +inf and facet = -1 when no positive dot exists.
using RadialBatchFn = void (*)(const double* normals, const double* offsets, int k, int n,
                               const double* dirs, int count, double* rho, std::int32_t* facet);

// h_j = max over vertices of <v_m, dir_j>; vertices row-major m x n.
using SupportBatchFn = void (*)(const double* vertices, int m, int n, const double* dirs, int count,
                                double* h);

// rho_j = (dir_j^T M dir_j)^(-1/2) for a symmetric positive definite M (row-major).
using QuadFormBatchFn = void (*)(const double* M, int n, const double* dirs, int count, double* rho);

struct Kernels {
  const char* name;
  RadialBatchFn radial_batch;
  SupportBatchFn support_batch;
  QuadFormBatchFn ellipsoid_radial_batch;
};

const Kernels& scalar_kernels();
const Kernels* avx2_kernels();  // nullptr when not compiled in or unsupported by the CPU

// Runtime selection: DMK_KERNEL=scalar|avx2 overrides; default prefers AVX2.
const Kernels& active();

}  // namespace dmk::simd
