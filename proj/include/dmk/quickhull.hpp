#pragma once

#include "dmk/types.hpp"

namespace dmk {

struct HullFacet {
  Vec normal;                 // outward unit normal
  double offset = 0.0;        // <normal, x> = offset on the facet plane
  std::vector<int> vertices;  // n point indices spanning the facet plane
};

struct HullResult {
  std::vector<HullFacet> facets;
  std::vector<int> hull_points;  // indices of input points that are hull vertices
};

// Convex hull of full-dimensional point sets in R^n, n >= 2 (quickhull).
// Coplanar degeneracies may split a face into simplices sharing one plane.
// Throws DegenerateGeometry when the points are not full-dimensional.
HullResult convex_hull(const std::vector<Vec>& points);

}  // namespace dmk
