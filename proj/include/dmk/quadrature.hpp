#pragma once

#include <functional>

#include "dmk/types.hpp"

namespace dmk {

// Grundmann-Moeller rule pair of degrees 2s+1 and 2s-1 on the d-simplex.
// Point layers are shared (layer r holds the partitions of r), so one
// evaluation pass yields both values and an embedded error estimate.
struct GmRule {
  int d = 0, s = 0;
  std::vector<std::vector<Vec>> layers;  // barycentric points, layers[r]
  std::vector<double> coeff_high;        // per-layer coefficients, d! folded in
  std::vector<double> coeff_low;
};

const GmRule& gm_rule(int d, int s = 3);

// d-volume of a simplex given as an m x (d+1) column stack, m >= d.
double simplex_volume(const Mat& S);

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
  long long evals = 0;
};

// Adaptive integration of f over the simplex S (columns are vertices).
// Elements split when the embedded error estimate exceeds their share of
// rtol * |integral| or when the integrand varies by more than 10% across the
// element (shallow depths only, the stated refinement trigger).
QuadResult integrate_simplex(const Mat& S, const std::function<double(const Vec&)>& f, double rtol,
                             int max_depth = 40);

}  // namespace dmk
