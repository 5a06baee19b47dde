#pragma once

#include <cstdint>

#include "dmk/polytope.hpp"
#include "dmk/star_body.hpp"

namespace dmk {

struct McEstimate {
  double value = 0.0;
  double stderr_est = 0.0;
  long long samples = 0;
};

struct McMeasure {
  McEstimate vq;
  std::vector<McEstimate> atoms;  // one per input normal
};

// Uniform unit vector for (seed, sample index): counter-based, the stream does
// not depend on how samples are partitioned across workers.
Vec mc_sphere_sample(int n, std::uint64_t seed, long long index);

// Monte-Carlo estimate of Vq(P, Q) = (omega_n / n) E[rho_P^q rho_Q^(n-q)]
// over uniform sphere directions. Deterministic for a fixed seed: chunked
// counter-based sampling + fixed-order pairwise reduction (DMK_THREADS caps
// the worker count without changing the result).
McEstimate mc_dual_intrinsic_volume(const HPolytope& P, const StarBody& Q, double q, long long samples,
                                    std::uint64_t seed);

// Same pass, with per-sample mass assigned to the facet hit by the radial ray.
McMeasure mc_dual_curvature(const HPolytope& P, const StarBody& Q, double q, long long samples,
                            std::uint64_t seed);

}  // namespace dmk
