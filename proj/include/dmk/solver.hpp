#pragma once

#include <functional>

#include "dmk/dual_measures.hpp"

namespace dmk {

struct SolveOptions {
  double grad_tol = 1e-8;        // tangential gradient stopping threshold (relative)
  double residual_tol = 1e-6;    // max relative atom residual that still counts as Converged
  int max_iters = 20000;
  double quadrature_rtol = 1e-9;
  double offset_floor = 1e-10;
  double armijo_c = 1e-4;
  double armijo_shrink = 0.5;
  bool trace_objective = true;
  unsigned long long seed = 0;   // recorded for reproducibility of runs
};

enum class SolveStatus { Converged, NotConverged, FacetCollapse };

struct SolveReport {
  SolveStatus status = SolveStatus::NotConverged;
  int iterations = 0;
  double objective = 0.0;            // Vq(P(z*), Q) on the constraint surface
  double tangential_residual = 0.0;  // ||G_tangent|| / ||G|| at the last iterate
  double kkt_residual = 0.0;         // max_i |lambda a_i - b_i| / b_i
  double lagrange_lambda = 0.0;
  double lambda0 = 1.0;              // scaling that makes the normalized equation hold
  double final_rescale = 1.0;        // extra factor applied by solve() on top of lambda0
  std::vector<double> residuals;     // per-atom relative residual of the target equation
  double max_residual = 0.0;
  std::vector<double> objective_trace;
  std::vector<std::string> warnings;
  OriginDiagnostics origin;
  long long quadrature_evals = 0;
};

struct Solution {
  HPolytope polytope;
  VPolytope geometry;
  DualMeasureResult measure;
  SolveReport report;
};

// Maximizes Vq(P(z), Q) over the surface sum_i alpha_i z_i^p = 1 by projected
// gradient ascent with Armijo backtracking, then scales by lambda0 so that
// Vq(P,Q)^-1 Cpq(P,Q,.) = mu. When the ascent stalls above residual_tol a
// correction pass (clamped multiplicative steps, then damped log-space
// Newton) drives the equation directly; the final status reflects the
// achieved residual, not the stopping rule. Throws MeasureOnHemisphere for
// invalid measures.
Solution solve_normalized(const DirectionWeightMeasure& mu, const StarBody& Q, double p, double q,
                          const SolveOptions& opt = {});

// lambda = Vq(P0,Q)^(-1/(q-p)); PEqualsQ when p == q (no scale can work).
double rescale_factor(double vq_p0, double p, double q);

// P = lambda P0 so that Cpq(P,Q,.) equals the normalized measure of P0.
HPolytope rescale_solution(const HPolytope& P0, const StarBody& Q, double p, double q,
                           const MeasureOptions& opt = {});

// Full problem Cpq(P,Q,.) = mu: normalized solve plus the final rescale.
Solution solve(const DirectionWeightMeasure& mu, const StarBody& Q, double p, double q,
               const SolveOptions& opt = {});

// Density f on the sphere discretized into a cell measure: uniform arcs (n=2)
// or subdivided icosahedral cells (n=3), atom = cell integral of f placed at
// the cell centroid direction.
DirectionWeightMeasure discretize_density(int n, const std::function<double(const Vec&)>& f,
                                          int resolution, double rtol = 1e-9);

struct DensityStage {
  int resolution = 0;
  Solution solution;
  double distance_to_next = 0.0;   // support sup-norm on the fixed grid, 0 for the last stage
  double ma_residual_max = 0.0;    // weak Monge-Ampere residual (Q = ball only, else NaN)
  double ma_residual_mean = 0.0;
  double runtime_seconds = 0.0;
};

struct DensityResult {
  std::vector<DensityStage> stages;
};

// Runs solve() across a refinement schedule and reports stage-to-stage
// support distances on a fixed grid of ~1e4 directions.
DensityResult solve_density(int n, const std::function<double(const Vec&)>& f,
                            const std::vector<int>& resolutions, const StarBody& Q, double p, double q,
                            const SolveOptions& opt = {});

// Fixed evaluation grid used by the Hausdorff surrogate (10^4 angles for n=2,
// icosphere vertices for n=3).
std::vector<Vec> support_grid(int n);

// Support sup-norm distance between two bodies' supports on the fixed grid.
double support_distance(const VPolytope& A, const VPolytope& B);

}  // namespace dmk
