#pragma once

#include <optional>
#include <utility>

#include "dmk/types.hpp"

namespace dmk {

struct LpResult {
  enum class Status { Optimal, Infeasible, Unbounded };
  Status status = Status::Infeasible;
  double value = 0.0;
  Vec x;
};

// Maximizes c.x subject to A x <= b, x >= 0 (dense two-phase simplex, Bland's rule).
LpResult lp_solve_max(const Mat& A, const Vec& b, const Vec& c);

// Same with free x (internally split into positive and negative parts).
LpResult lp_solve_max_free(const Mat& A, const Vec& b, const Vec& c);

// Unit w with <u_i, w> <= 0 for all i (up to tolerance), if the normals fit in a
// closed hemisphere; nullopt when the origin is interior to their convex hull.
std::optional<Vec> hemisphere_witness(const std::vector<Vec>& normals);

// Center and radius of the largest ball inscribed in {x : <u_i, x> <= t_i}.
// Preconditions: the intersection is nonempty and bounded.
std::pair<Vec, double> chebyshev_center(const std::vector<Vec>& normals, const std::vector<double>& offsets);

}  // namespace dmk
