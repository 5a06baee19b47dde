#pragma once

#include "dmk/polytope.hpp"
#include "dmk/quadrature.hpp"
#include "dmk/star_body.hpp"

namespace dmk {

struct MeasureOptions {
  double rtol = 1e-9;          // per-facet relative quadrature target
  bool force_quadrature = false;  // disable the exact q = n cone-volume bypass (testing)
  int max_depth = 40;
};

struct DualMeasureResult {
  std::vector<double> atoms_cq;   // q-th dual curvature atom per input normal
  std::vector<double> atoms_cpq;  // h^{-p} scaled atoms; NaN where not applicable
  std::vector<bool> cpq_defined;  // false on zero-offset normals
  double vq = 0.0;                // dual intrinsic volume = total mass
  double quadrature_error = 0.0;
  long long evals = 0;
};

// Atom of the q-th dual curvature measure at one facet normal:
// (1/n) h_i * integral over the facet of ||x||_Q^(q-n).
// Zero-offset facets carry zero mass; q = n bypasses quadrature exactly.
double facet_integral(const HPolytope& P, const VPolytope& V, int normal_index, const StarBody& Q,
                      double q, const MeasureOptions& opt = {}, double* error_out = nullptr,
                      long long* evals_out = nullptr);

DualMeasureResult dual_curvature_measure(const HPolytope& P, const VPolytope& V, const StarBody& Q,
                                         double p, double q, const MeasureOptions& opt = {});
DualMeasureResult dual_curvature_measure(const HPolytope& P, const StarBody& Q, double p, double q,
                                         const MeasureOptions& opt = {});

double dual_intrinsic_volume(const HPolytope& P, const StarBody& Q, double q,
                             const MeasureOptions& opt = {});

// Closed form for balls: Vq(r B, s B) = kappa_n r^q s^(n-q).
double vq_ball(int n, double q, double r, double s = 1.0);

// d/dt Vq(P(z + t e_i), Q) = q * atom_i / z_i. Requires a tight representation.
Vec vq_gradient(const HPolytope& P, const VPolytope& V, const StarBody& Q, double q,
                const MeasureOptions& opt = {});

// Max relative atom discrepancy between the directly computed measure of
// (phi P, phi Q) and the pushforward of the measure of (P, Q).
double sl_equivariance_residual(const HPolytope& P, const StarBody& Q, double p, double q,
                                const Mat& phi, const MeasureOptions& opt = {});

// Halfspace image phi P = {x : <phi^-T u_i, x> <= t_i} renormalized.
HPolytope transform_hpolytope(const HPolytope& P, const Mat& phi);

}  // namespace dmk
