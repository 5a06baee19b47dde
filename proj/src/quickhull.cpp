#include "dmk/quickhull.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace dmk {
namespace {

struct Facet {
  Vec normal;
  double offset = 0.0;
  std::vector<int> verts;      // n point indices
  std::vector<int> neighbors;  // neighbors[i] faces the ridge omitting verts[i]
  std::vector<int> outside;
  int furthest = -1;
  bool alive = true;
};

double dist(const Facet& f, const Vec& p) { return f.normal.dot(p) - f.offset; }

// Hyperplane through pts[ids], oriented away from `inside`.
void facet_plane(const std::vector<Vec>& pts, Facet& f, const Vec& inside) {
  const int n = static_cast<int>(inside.size());
  Mat E(n - 1, n);
  for (int i = 1; i < n; ++i) E.row(i - 1) = (pts[f.verts[i]] - pts[f.verts[0]]).transpose();
  Eigen::JacobiSVD<Mat> svd(E, Eigen::ComputeFullV);
  f.normal = svd.matrixV().col(n - 1);
  double off = 0.0;
  for (int v : f.verts) off += f.normal.dot(pts[v]);
  f.offset = off / n;
  if (f.normal.dot(inside) > f.offset) {
    f.normal = -f.normal;
    f.offset = -f.offset;
  }
}

}  // namespace

HullResult convex_hull(const std::vector<Vec>& points) {
  const int m = static_cast<int>(points.size());
  require(m > 0, ErrorCode::BadArgument, "convex_hull: no points");
  const int n = static_cast<int>(points[0].size());
  require(n >= 2, ErrorCode::BadArgument, "convex_hull: dimension must be >= 2");
  require(m >= n + 1, ErrorCode::DegenerateGeometry, "convex_hull: too few points for a full-dimensional hull");

  double scale = 0.0;
  for (const Vec& p : points) scale = std::max(scale, p.lpNorm<Eigen::Infinity>());
  const double eps = 1e-12 * (1.0 + scale);

  // Initial simplex: a far pair, then greedily the point farthest from the
  // affine hull built so far (distance via the orthonormalized edge basis).
  std::vector<int> simplex;
  {
    int i0 = 0;
    for (int i = 1; i < m; ++i)
      if (points[i](0) < points[i0](0)) i0 = i;
    int i1 = -1;
    double best = -1.0;
    for (int i = 0; i < m; ++i) {
      double d = (points[i] - points[i0]).norm();
      if (d > best) { best = d; i1 = i; }
    }
    require(best > eps, ErrorCode::DegenerateGeometry, "convex_hull: all points coincide");
    simplex = {i0, i1};
    Mat basis(n, n - 1);
    basis.col(0) = (points[i1] - points[i0]).normalized();
    int rank = 1;
    while (static_cast<int>(simplex.size()) < n + 1) {
      int pick = -1;
      double bd = eps;
      for (int i = 0; i < m; ++i) {
        Vec r = points[i] - points[i0];
        r -= basis.leftCols(rank) * (basis.leftCols(rank).transpose() * r);
        double d = r.norm();
        if (d > bd) { bd = d; pick = i; }
      }
      require(pick >= 0, ErrorCode::DegenerateGeometry, "convex_hull: points are not full-dimensional");
      simplex.push_back(pick);
      if (rank < n - 1) {
        Vec r = points[pick] - points[i0];
        r -= basis.leftCols(rank) * (basis.leftCols(rank).transpose() * r);
        r -= basis.leftCols(rank) * (basis.leftCols(rank).transpose() * r);
        basis.col(rank) = r.normalized();
      }
      ++rank;
    }
  }

  Vec inside = Vec::Zero(n);
  for (int v : simplex) inside += points[v];
  inside /= static_cast<double>(n + 1);

  std::vector<Facet> facets(n + 1);
  for (int s = 0; s <= n; ++s) {
    Facet& f = facets[s];
    for (int j = 0; j <= n; ++j)
      if (j != s) f.verts.push_back(simplex[j]);
    facet_plane(points, f, inside);
    f.neighbors.resize(n);
    for (int i = 0; i < n; ++i) {
      // ridge omitting verts[i]: the initial facet that omits that vertex
      int omitted = f.verts[i];
      for (int t = 0; t <= n; ++t)
        if (simplex[t] == omitted) f.neighbors[i] = t;
    }
  }

  std::deque<int> pending;
  auto claim = [&](int pt, const std::vector<int>& candidates) {
    for (int fi : candidates) {
      Facet& f = facets[fi];
      if (!f.alive) continue;
      double d = dist(f, points[pt]);
      if (d > eps) {
        if (f.outside.empty()) pending.push_back(fi);
        if (f.furthest < 0 || d > dist(f, points[f.furthest])) f.furthest = pt;
        f.outside.push_back(pt);
        return;
      }
    }
  };

  {
    std::vector<int> all(n + 1);
    for (int i = 0; i <= n; ++i) all[i] = i;
    std::vector<bool> in_simplex(m, false);
    for (int v : simplex) in_simplex[v] = true;
    for (int i = 0; i < m; ++i)
      if (!in_simplex[i]) claim(i, all);
  }

  while (!pending.empty()) {
    int fi = pending.front();
    pending.pop_front();
    if (!facets[fi].alive || facets[fi].outside.empty()) continue;
    const int apex = facets[fi].furthest;

    // Visible region (DFS) and its horizon ridges.
    std::vector<int> visible, stack{fi};
    std::vector<bool> seen(facets.size(), false);
    seen[fi] = true;
    struct Horizon {
      int visible_facet, hidden_facet;
      std::vector<int> ridge;
    };
    std::vector<Horizon> horizon;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      visible.push_back(v);
      for (int i = 0; i < n; ++i) {
        int nb = facets[v].neighbors[i];
        if (dist(facets[nb], points[apex]) > eps) {
          if (!seen[nb]) {
            seen[nb] = true;
            stack.push_back(nb);
          }
        } else {
          Horizon h;
          h.visible_facet = v;
          h.hidden_facet = nb;
          for (int j = 0; j < n; ++j)
            if (j != i) h.ridge.push_back(facets[v].verts[j]);
          horizon.push_back(h);
        }
      }
    }

    // New cone of facets from the apex over the horizon.
    std::map<std::vector<int>, std::pair<int, int>> ridge_map;  // sub-ridge -> (facet, slot)
    std::vector<int> created;
    for (const Horizon& h : horizon) {
      Facet nf;
      nf.verts = h.ridge;
      nf.verts.push_back(apex);
      facet_plane(points, nf, inside);
      nf.neighbors.assign(n, -1);
      int id = static_cast<int>(facets.size());

      // Ridge omitting the apex is the horizon ridge shared with the hidden facet.
      nf.neighbors[n - 1] = h.hidden_facet;
      Facet& hid = facets[h.hidden_facet];
      for (int i = 0; i < n; ++i)
        if (hid.neighbors[i] == h.visible_facet) hid.neighbors[i] = id;

      facets.push_back(std::move(nf));
      created.push_back(id);
      for (int i = 0; i < n - 1; ++i) {
        std::vector<int> key;
        for (int j = 0; j < n - 1; ++j)
          if (j != i) key.push_back(facets[id].verts[j]);
        std::sort(key.begin(), key.end());
        auto it = ridge_map.find(key);
        if (it == ridge_map.end()) {
          ridge_map[key] = {id, i};
        } else {
          facets[id].neighbors[i] = it->second.first;
          facets[it->second.first].neighbors[it->second.second] = id;
          ridge_map.erase(it);
        }
      }
    }
    require(ridge_map.empty(), ErrorCode::DegenerateGeometry, "convex_hull: open horizon (degenerate input)");

    std::vector<int> orphans;
    for (int v : visible) {
      facets[v].alive = false;
      for (int pt : facets[v].outside)
        if (pt != apex) orphans.push_back(pt);
      facets[v].outside.clear();
    }
    for (int pt : orphans) claim(pt, created);
  }

  HullResult out;
  std::vector<bool> used(m, false);
  for (const Facet& f : facets) {
    if (!f.alive) continue;
    HullFacet hf;
    hf.normal = f.normal;
    hf.offset = f.offset;
    hf.vertices = f.verts;
    out.facets.push_back(std::move(hf));
    for (int v : f.verts) used[v] = true;
  }
  for (int i = 0; i < m; ++i)
    if (used[i]) out.hull_points.push_back(i);
  return out;
}

}  // namespace dmk
