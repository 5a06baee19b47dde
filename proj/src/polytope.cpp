#include "dmk/polytope.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "dmk/linprog.hpp"
#include "dmk/quickhull.hpp"

namespace dmk {

void check_measure_wellformed(const DirectionWeightMeasure& mu) {
  require(!mu.normals.empty(), ErrorCode::BadArgument, "measure has no atoms");
  require(mu.normals.size() == mu.weights.size(), ErrorCode::BadArgument,
          "measure normals/weights length mismatch");
  const int n = static_cast<int>(mu.normals[0].size());
  require(n >= 2, ErrorCode::BadArgument, "measure dimension must be >= 2");
  for (const Vec& u : mu.normals) {
    require(static_cast<int>(u.size()) == n, ErrorCode::BadArgument, "measure has mixed dimensions");
    check_unit(u, "measure");
  }
  for (double w : mu.weights)
    require(w > 0.0 && std::isfinite(w), ErrorCode::BadArgument, "measure weights must be positive finite");
  for (size_t i = 0; i < mu.normals.size(); ++i)
    for (size_t j = i + 1; j < mu.normals.size(); ++j)
      require((mu.normals[i] - mu.normals[j]).norm() > kDistinctNormalTol, ErrorCode::BadArgument,
              "measure directions must be pairwise distinct");
}

HPolytope build_hpolytope(std::vector<Vec> normals, std::vector<double> offsets) {
  require(!normals.empty() && normals.size() == offsets.size(), ErrorCode::BadArgument,
          "build_hpolytope: normals/offsets mismatch");
  const int n = static_cast<int>(normals[0].size());
  require(n >= 2, ErrorCode::BadArgument, "build_hpolytope: dimension must be >= 2");
  for (const Vec& u : normals) {
    require(static_cast<int>(u.size()) == n, ErrorCode::BadArgument, "build_hpolytope: mixed dimensions");
    check_unit(u, "build_hpolytope");
  }
  for (size_t i = 0; i < normals.size(); ++i)
    for (size_t j = i + 1; j < normals.size(); ++j)
      require((normals[i] - normals[j]).norm() > kDistinctNormalTol, ErrorCode::BadArgument,
              "build_hpolytope: normals must be pairwise distinct");
  for (double t : offsets)
    require(t >= 0.0 && std::isfinite(t), ErrorCode::BadArgument,
            "build_hpolytope: offsets must be nonnegative finite");

  if (auto w = hemisphere_witness(normals))
    fail(ErrorCode::Unbounded, "build_hpolytope: normals fit in a closed hemisphere, body is unbounded");

  double scale = 1.0;
  for (double t : offsets) scale = std::max(scale, t);
  auto [c, r] = chebyshev_center(normals, offsets);
  require(r > 1e-12 * scale, ErrorCode::EmptyInterior, "build_hpolytope: polytope has empty interior");

  HPolytope P;
  P.normals = std::move(normals);
  P.offsets = std::move(offsets);
  return P;
}

namespace {

// Affine dimension of a vertex subset, with singular values below `tol`
// treated as zero.
int affine_dim(const std::vector<Vec>& verts, const std::vector<int>& ids, double tol) {
  if (ids.size() <= 1) return 0;
  const int n = static_cast<int>(verts[ids[0]].size());
  Mat E(static_cast<int>(ids.size()) - 1, n);
  for (size_t i = 1; i < ids.size(); ++i) E.row(static_cast<int>(i) - 1) = (verts[ids[i]] - verts[ids[0]]).transpose();
  Eigen::JacobiSVD<Mat> svd(E);
  int d = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > tol) ++d;
  return d;
}

double simplex_area(const Mat& S) {
  const int n = static_cast<int>(S.rows());
  Mat E(n, n - 1);
  for (int i = 1; i < n; ++i) E.col(i - 1) = S.col(i) - S.col(0);
  if (n == 2) return E.col(0).norm();
  Mat G = E.transpose() * E;
  double det = G.determinant();
  if (det <= 0.0) return 0.0;
  double fact = 1.0;
  for (int i = 2; i <= n - 1; ++i) fact *= i;
  return std::sqrt(det) / fact;
}

// Recursive centroid-fan triangulation of a face with active constraint set
// `active`, vertex ids `vids` and affine dimension d. Emits d-simplices as
// column stacks of points; `lift` prepends cone apices gathered on the way up.
void triangulate_face(const HPolytope& P, const VPolytope& V, std::set<int> active, std::vector<int> vids,
                      int d, std::vector<Vec>& apices, std::vector<Mat>& out) {
  const int n = V.n;
  if (static_cast<int>(vids.size()) == d + 1) {
    Mat S(n, static_cast<int>(apices.size()) + d + 1);
    for (size_t a = 0; a < apices.size(); ++a) S.col(static_cast<int>(a)) = apices[a];
    for (int i = 0; i <= d; ++i) S.col(static_cast<int>(apices.size()) + i) = V.vertices[vids[i]];
    out.push_back(std::move(S));
    return;
  }
  Vec centroid = Vec::Zero(n);
  for (int v : vids) centroid += V.vertices[v];
  centroid /= static_cast<double>(vids.size());

  std::set<std::vector<int>> emitted;
  const double band = V.band();
  for (int j = 0; j < static_cast<int>(P.size()); ++j) {
    if (active.count(j)) continue;
    std::vector<int> w;
    for (int v : vids)
      if (P.normals[j].dot(V.vertices[v]) >= P.offsets[j] - band) w.push_back(v);
    if (w.empty() || w.size() == vids.size()) continue;
    if (affine_dim(V.vertices, w, band * 10) != d - 1) continue;
    if (!emitted.insert(w).second) continue;
    std::set<int> sub = active;
    sub.insert(j);
    apices.push_back(centroid);
    triangulate_face(P, V, std::move(sub), std::move(w), d - 1, apices, out);
    apices.pop_back();
  }
}

}  // namespace

VPolytope h_to_v(const HPolytope& P) {
  const int n = P.dim();
  const int k = static_cast<int>(P.size());
  require(n >= 2 && k >= n + 1, ErrorCode::BadArgument, "h_to_v: need at least n+1 halfspaces in R^n");

  VPolytope V;
  V.n = n;
  V.scale = 1.0;
  for (double t : P.offsets) V.scale = std::max(V.scale, t);
  const double band = V.band();

  double tmin = *std::min_element(P.offsets.begin(), P.offsets.end());
  Vec c = Vec::Zero(n);
  if (tmin <= band) {
    auto [cc, r] = chebyshev_center(P.normals, P.offsets);
    require(r > 1e-12 * V.scale, ErrorCode::EmptyInterior, "h_to_v: polytope has empty interior");
    c = cc;
  }
  V.interior_point = c;

  std::vector<Vec> duals(k);
  for (int i = 0; i < k; ++i) {
    double s = P.offsets[i] - P.normals[i].dot(c);
    require(s > 0.0, ErrorCode::EmptyInterior, "h_to_v: interior point violates a halfspace");
    duals[i] = P.normals[i] / s;
  }

  HullResult hull = convex_hull(duals);

  // Each dual facet plane <y, nu> = beta (beta > 0) is the primal vertex c + nu/beta.
  std::vector<Vec> cand;
  cand.reserve(hull.facets.size());
  for (const HullFacet& hf : hull.facets) {
    require(hf.offset > 0.0, ErrorCode::Unbounded, "h_to_v: dual hull does not enclose the origin");
    cand.push_back(c + hf.normal / hf.offset);
  }

  // Coplanar dual facets give duplicated vertices; merge within the band.
  std::vector<int> order(cand.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return cand[a](0) < cand[b](0); });
  std::vector<int> merged(cand.size(), -1);
  for (size_t oi = 0; oi < order.size(); ++oi) {
    int i = order[oi];
    if (merged[i] >= 0) continue;
    merged[i] = static_cast<int>(V.vertices.size());
    Vec acc = cand[i];
    int cnt = 1;
    for (size_t oj = oi + 1; oj < order.size(); ++oj) {
      int j = order[oj];
      if (cand[j](0) - cand[i](0) > band) break;
      if (merged[j] < 0 && (cand[j] - cand[i]).norm() <= band) {
        merged[j] = merged[i];
        acc += cand[j];
        ++cnt;
      }
    }
    V.vertices.push_back(acc / cnt);
  }

  V.achieved_support.resize(k);
  V.facet_of_normal.assign(k, -1);
  V.redundant.assign(k, false);
  for (int i = 0; i < k; ++i) {
    double h = -std::numeric_limits<double>::infinity();
    for (const Vec& v : V.vertices) h = std::max(h, P.normals[i].dot(v));
    V.achieved_support[i] = h;
    V.redundant[i] = h < P.offsets[i] - band;
    require(h <= P.offsets[i] + band, ErrorCode::DegenerateGeometry,
            "h_to_v: recovered vertex violates a halfspace beyond tolerance");
  }

  for (int i = 0; i < k; ++i) {
    if (V.redundant[i]) continue;
    std::vector<int> on;
    for (int v = 0; v < static_cast<int>(V.vertices.size()); ++v)
      if (P.normals[i].dot(V.vertices[v]) >= P.offsets[i] - band) on.push_back(v);
    if (static_cast<int>(on.size()) < n) continue;
    if (affine_dim(V.vertices, on, band * 10) != n - 1) continue;

    FacetGeometry fg;
    fg.normal_index = i;
    fg.vertex_ids = on;
    fg.centroid = Vec::Zero(n);
    for (int v : on) fg.centroid += V.vertices[v];
    fg.centroid /= static_cast<double>(on.size());

    std::vector<Vec> apices;
    triangulate_face(P, V, {i}, on, n - 1, apices, fg.simplices);
    require(!fg.simplices.empty(), ErrorCode::DegenerateGeometry, "h_to_v: facet triangulation failed");
    fg.area = 0.0;
    for (const Mat& S : fg.simplices) fg.area += simplex_area(S);

    V.facet_of_normal[i] = static_cast<int>(V.facets.size());
    V.facets.push_back(std::move(fg));
  }

  return V;
}

double support(const VPolytope& V, const Vec& dir) {
  require(!V.vertices.empty(), ErrorCode::BadArgument, "support: empty polytope");
  double h = -std::numeric_limits<double>::infinity();
  for (const Vec& v : V.vertices) h = std::max(h, v.dot(dir));
  return h;
}

RadialResult radial_and_facet(const HPolytope& P, const Vec& u) {
  check_unit(u, "radial_and_facet");
  RadialResult r;
  r.rho = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(P.size()); ++i) {
    double d = P.normals[i].dot(u);
    if (d <= 0.0) continue;
    double ratio = P.offsets[i] / d;
    if (ratio < r.rho) {
      r.rho = ratio;
      r.facet = i;
    }
  }
  require(std::isfinite(r.rho), ErrorCode::Unbounded, "radial_and_facet: direction lies in the recession cone");
  const double tie = 1e-12 * std::max(1.0, r.rho);
  for (int i = 0; i < static_cast<int>(P.size()); ++i) {
    double d = P.normals[i].dot(u);
    if (d > 0.0 && P.offsets[i] / d <= r.rho + tie) r.ties.push_back(i);
  }
  return r;
}

MeasureValidity validate_measure(const DirectionWeightMeasure& mu) {
  check_measure_wellformed(mu);
  MeasureValidity out;
  if (auto w = hemisphere_witness(mu.normals)) {
    out.valid = false;
    out.witness = *w;
  } else {
    out.valid = true;
  }
  return out;
}

OriginDiagnostics origin_diagnostics(const HPolytope& P, const VPolytope& V) {
  OriginDiagnostics d;
  const double tol = 1e-12 * V.scale;
  d.inradius_from_origin = *std::min_element(P.offsets.begin(), P.offsets.end());
  d.interior = d.inradius_from_origin > tol;
  for (int i = 0; i < static_cast<int>(P.size()); ++i) {
    if (P.offsets[i] <= tol) {
      d.zero_offset_normals.push_back(i);
      if (V.facet_of_normal[i] >= 0) d.xi_flagged = true;
    }
  }
  return d;
}

}  // namespace dmk
