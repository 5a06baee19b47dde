#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "dmk/quickhull.hpp"
#include "dmk/types.hpp"

using namespace dmk;

namespace {

// Brute-force oracle: every facet plane of the hull is spanned by n points
// with all other points strictly on one side. Returns the sorted set of
// extreme point indices.
std::set<int> brute_hull_points(const std::vector<Vec>& pts) {
  const int n = static_cast<int>(pts[0].size());
  const int m = static_cast<int>(pts.size());
  std::set<int> extreme;
  std::vector<int> idx(n);
  std::vector<bool> take(m, false);
  std::fill(take.begin(), take.begin() + n, true);
  do {
    int k = 0;
    for (int i = 0; i < m; ++i)
      if (take[i]) idx[k++] = i;
    Mat span(n - 1, n);
    for (int i = 1; i < n; ++i) span.row(i - 1) = (pts[idx[i]] - pts[idx[0]]).transpose();
    Eigen::FullPivLU<Mat> lu(span);
    if (lu.rank() < n - 1) continue;
    Vec nu = lu.kernel().col(0);
    nu /= nu.norm();
    double off = nu.dot(pts[idx[0]]);
    double lo = 0, hi = 0;
    for (int i = 0; i < m; ++i) {
      double s = nu.dot(pts[i]) - off;
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    if (lo < -1e-9 && hi > 1e-9) continue;  // not a supporting plane
    for (int i = 0; i < m; ++i)
      if (std::abs(nu.dot(pts[i]) - off) <= 1e-9) extreme.insert(i);
  } while (std::prev_permutation(take.begin(), take.end()));
  return extreme;
}

void check_hull_valid(const std::vector<Vec>& pts, const HullResult& hull) {
  for (const HullFacet& f : hull.facets) {
    CHECK(f.normal.norm() == doctest::Approx(1.0).epsilon(1e-12));
    for (const Vec& p : pts) CHECK(f.normal.dot(p) <= f.offset + 1e-9);
    for (int vid : f.vertices)
      CHECK(std::abs(f.normal.dot(pts[vid]) - f.offset) <= 1e-9);
  }
}

}  // namespace

TEST_CASE("hull of the unit square") {
  std::vector<Vec> pts;
  for (double x : {-1.0, 1.0})
    for (double y : {-1.0, 1.0}) {
      Vec p(2);
      p << x, y;
      pts.push_back(p);
    }
  Vec inside(2);
  inside << 0.3, -0.2;
  pts.push_back(inside);

  HullResult hull = convex_hull(pts);
  CHECK(hull.facets.size() == 4);
  CHECK(hull.hull_points.size() == 4);
  CHECK(std::find(hull.hull_points.begin(), hull.hull_points.end(), 4) ==
        hull.hull_points.end());
  check_hull_valid(pts, hull);
  for (const HullFacet& f : hull.facets) CHECK(f.offset == doctest::Approx(1.0));
}

TEST_CASE("hull of the cube and the octahedron") {
  std::vector<Vec> cube;
  for (double x : {-1.0, 1.0})
    for (double y : {-1.0, 1.0})
      for (double z : {-1.0, 1.0}) {
        Vec p(3);
        p << x, y, z;
        cube.push_back(p);
      }
  HullResult hc = convex_hull(cube);
  CHECK(hc.hull_points.size() == 8);
  check_hull_valid(cube, hc);
  // Triangulated cube faces: every facet has |offset| 1 and axis normal.
  for (const HullFacet& f : hc.facets) {
    CHECK(f.offset == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.normal.cwiseAbs().maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
  }

  std::vector<Vec> oct;
  for (int a = 0; a < 3; ++a)
    for (double s : {-1.0, 1.0}) {
      Vec p = Vec::Zero(3);
      p[a] = s;
      oct.push_back(p);
    }
  HullResult ho = convex_hull(oct);
  CHECK(ho.facets.size() == 8);
  CHECK(ho.hull_points.size() == 6);
  check_hull_valid(oct, ho);
  for (const HullFacet& f : ho.facets)
    CHECK(f.offset == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("random point clouds agree with the brute-force oracle") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + static_cast<int>(rng() % 2);
    int m = n == 2 ? 12 : 10;
    std::vector<Vec> pts;
    for (int i = 0; i < m; ++i) {
      Vec p(n);
      for (int j = 0; j < n; ++j) p[j] = g(rng);
      pts.push_back(p);
    }
    HullResult hull = convex_hull(pts);
    check_hull_valid(pts, hull);
    std::set<int> got(hull.hull_points.begin(), hull.hull_points.end());
    CHECK(got == brute_hull_points(pts));
  }
}

TEST_CASE("degenerate input throws") {
  std::vector<Vec> flat;
  for (double t : {0.0, 1.0, 2.0, 3.0}) {
    Vec p(3);
    p << t, 2 * t, -t;
    flat.push_back(p);
  }
  CHECK_THROWS_AS(convex_hull(flat), Error);

  std::vector<Vec> few = {flat[0], flat[1]};
  CHECK_THROWS_AS(convex_hull(few), Error);
}
