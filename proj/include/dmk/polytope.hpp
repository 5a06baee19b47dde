#pragma once

#include "dmk/types.hpp"

namespace dmk {

// Intersection of halfspaces <u_i, x> <= t_i with unit pairwise-distinct u_i
// and t_i >= 0 (the origin always belongs to the body).
struct HPolytope {
  std::vector<Vec> normals;
  std::vector<double> offsets;

  int dim() const { return normals.empty() ? 0 : static_cast<int>(normals[0].size()); }
  size_t size() const { return normals.size(); }
};

// Validating constructor: unit normals, distinct directions, nonnegative
// offsets, boundedness (Unbounded) and nonempty interior (EmptyInterior).
HPolytope build_hpolytope(std::vector<Vec> normals, std::vector<double> offsets);

struct FacetGeometry {
  int normal_index = -1;
  std::vector<int> vertex_ids;
  double area = 0.0;
  Vec centroid;               // vertex average, apex of the triangulation fan
  std::vector<Mat> simplices;  // n x n each; columns are the vertices of one (n-1)-simplex
};

struct VPolytope {
  int n = 0;
  std::vector<Vec> vertices;
  std::vector<FacetGeometry> facets;
  std::vector<int> facet_of_normal;  // -1 when the normal carries no (n-1)-face
  std::vector<bool> redundant;       // support < offset - band
  std::vector<double> achieved_support;
  Vec interior_point;
  double scale = 1.0;  // tolerance reference: max(1, max offset)

  double band() const { return kGeomTol * scale; }
};

// Vertex enumeration through the dual convex hull of u_i / (t_i - <u_i, c>)
// around an interior point c (the origin, or the Chebyshev center when some
// offset vanishes). Precondition: the polytope is bounded with interior.
VPolytope h_to_v(const HPolytope& P);

double support(const VPolytope& V, const Vec& dir);

struct RadialResult {
  double rho = 0.0;
  int facet = -1;          // lowest minimizing normal index
  std::vector<int> ties;   // all minimizing indices (relative band 1e-12)
};

// Radial function rho_P(u) = min over <u_i,u> > 0 of t_i / <u_i, u>.
RadialResult radial_and_facet(const HPolytope& P, const Vec& u);

struct MeasureValidity {
  bool valid = false;
  Vec witness;  // unit w with <u_i, w> <= 0 for all i when invalid
};

// A discrete measure admits a solution iff its support is not contained in any
// closed hemisphere.
MeasureValidity validate_measure(const DirectionWeightMeasure& mu);

OriginDiagnostics origin_diagnostics(const HPolytope& P, const VPolytope& V);

}  // namespace dmk
