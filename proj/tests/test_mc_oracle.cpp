#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <map>
#include <random>

#include "dmk/dual_measures.hpp"
#include "dmk/mc_oracle.hpp"

using namespace dmk;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

HPolytope unit_square() {
  std::vector<Vec> ns = {v2(1, 0), v2(0, 1), v2(-1, 0), v2(0, -1)};
  return build_hpolytope(ns, {1, 1, 1, 1});
}

HPolytope cube3() {
  std::vector<Vec> ns;
  std::vector<double> ts;
  for (int a = 0; a < 3; ++a)
    for (double s : {1.0, -1.0}) {
      Vec u = Vec::Zero(3);
      u[a] = s;
      ns.push_back(u);
      ts.push_back(1.0);
    }
  return build_hpolytope(ns, ts);
}

}  // namespace

TEST_CASE("sphere sampler is uniform across octants") {
  // Chi-squared octant counts; criticals at the 0.999 level so a correct
  // sampler fails spuriously once in a thousand runs of a fixed seed (never,
  // since the stream is deterministic).
  for (int n : {2, 3}) {
    const long long N = 200000;
    std::map<int, long long> counts;
    for (long long i = 0; i < N; ++i) {
      Vec u = mc_sphere_sample(n, 12345, i);
      CHECK(std::abs(u.norm() - 1.0) <= 1e-12);
      int oct = 0;
      for (int d = 0; d < n; ++d)
        if (u[d] > 0) oct |= 1 << d;
      counts[oct]++;
    }
    int cells = 1 << n;
    double expect = double(N) / cells;
    double chi2 = 0.0;
    for (int c = 0; c < cells; ++c) {
      double diff = counts[c] - expect;
      chi2 += diff * diff / expect;
    }
    double crit = (n == 2) ? 16.266 : 24.322;  // 0.999 quantile, 3 and 7 dof
    CHECK(chi2 < crit);
  }

  // Distinct seeds decorrelate; identical seeds reproduce.
  Vec a = mc_sphere_sample(3, 1, 77), b = mc_sphere_sample(3, 2, 77);
  CHECK((a - b).norm() > 1e-6);
  CHECK((a - mc_sphere_sample(3, 1, 77)).norm() == 0.0);
}

TEST_CASE("estimates are bit-identical across reruns and thread counts") {
  HPolytope P = cube3();
  StarBody B = StarBody::ball(3, 1.0);
  McEstimate base = mc_dual_intrinsic_volume(P, B, 2.1, 300000, 99);
  for (const char* threads : {"1", "2", "3", "8"}) {
    setenv("DMK_THREADS", threads, 1);
    McEstimate r = mc_dual_intrinsic_volume(P, B, 2.1, 300000, 99);
    CHECK(r.value == base.value);
    CHECK(r.stderr_est == base.stderr_est);
  }
  unsetenv("DMK_THREADS");
  McMeasure m1 = mc_dual_curvature(P, B, 2.1, 100000, 7);
  setenv("DMK_THREADS", "5", 1);
  McMeasure m2 = mc_dual_curvature(P, B, 2.1, 100000, 7);
  unsetenv("DMK_THREADS");
  CHECK(m1.vq.value == m2.vq.value);
  for (size_t i = 0; i < m1.atoms.size(); ++i) {
    CHECK(m1.atoms[i].value == m2.atoms[i].value);
    CHECK(m1.atoms[i].stderr_est == m2.atoms[i].stderr_est);
  }
}

TEST_CASE("ball value is recovered inside three sigma") {
  // Exact value known in closed form; a single fixed-seed run sits within
  // 3 sigma unless the estimator or its stderr is wrong.
  HPolytope P = unit_square();
  StarBody B = StarBody::ball(2, 1.0);
  double q = 1.4;
  double exact = dual_intrinsic_volume(P, B, q);
  McEstimate r = mc_dual_intrinsic_volume(P, B, q, 400000, 2024);
  CHECK(std::abs(r.value - exact) <= 3.0 * r.stderr_est);
  CHECK(r.stderr_est < 0.01 * exact);
  CHECK(r.samples == 400000);
}

TEST_CASE("thirty seeds cover the quadrature truth at the stated rate") {
  // >= 28 of 30 single-run 3-sigma intervals must contain the independent
  // quadrature value (binomial(30, 0.0027) has P[>2 misses] ~ 1e-4).
  HPolytope P = cube3();
  Mat A = Mat::Identity(3, 3);
  A(0, 0) = 2.0;
  A(1, 1) = 1.5;
  A(0, 1) = A(1, 0) = 0.3;
  StarBody Q = StarBody::ellipsoid(A);
  double q = 2.4;
  double exact = dual_intrinsic_volume(P, Q, q);
  int hits = 0;
  for (int s = 0; s < 30; ++s) {
    McEstimate r = mc_dual_intrinsic_volume(P, Q, q, 100000, 5000 + s);
    if (std::abs(r.value - exact) <= 3.0 * r.stderr_est) ++hits;
  }
  CHECK(hits >= 28);
}

TEST_CASE("per-facet atoms match quadrature within three sigma") {
  auto ns = unit_square().normals;
  HPolytope P = build_hpolytope(ns, {1, 2, 1, 0.5});
  StarBody B = StarBody::ball(2, 1.0);
  double q = 2.6;
  DualMeasureResult exact = dual_curvature_measure(P, B, 2.0, q);
  McMeasure mc = mc_dual_curvature(P, B, q, 600000, 321);
  REQUIRE(mc.atoms.size() == P.size());
  double vq_sum = 0.0;
  for (size_t i = 0; i < P.size(); ++i) {
    CHECK(std::abs(mc.atoms[i].value - exact.atoms_cq[i]) <= 3.0 * mc.atoms[i].stderr_est);
    vq_sum += mc.atoms[i].value;
  }
  CHECK(mc.vq.value == doctest::Approx(vq_sum).epsilon(1e-12));
  CHECK(std::abs(mc.vq.value - exact.vq) <= 3.0 * mc.vq.stderr_est);
}

TEST_CASE("zero-offset facets receive no Monte-Carlo mass") {
  auto ns = unit_square().normals;
  HPolytope P = build_hpolytope(ns, {1, 2, 1, 0});
  McMeasure mc = mc_dual_curvature(P, StarBody::ball(2, 1.0), 2.0, 50000, 11);
  CHECK(mc.atoms[3].value == 0.0);
}

TEST_CASE("gauge bodies are supported") {
  // Q given as a polytope gauge; exact reference from the facet route with
  // smooth-piece splitting.
  HPolytope P = cube3();
  StarBody Q = StarBody::polytope_gauge(cube3());
  double q = 1.8;
  double exact = dual_intrinsic_volume(P, Q, q);
  CHECK(exact == doctest::Approx(8.0).epsilon(1e-9));  // Q = P: volume for every q
  McEstimate r = mc_dual_intrinsic_volume(P, Q, q, 200000, 55);
  CHECK(std::abs(r.value - exact) <= 3.0 * r.stderr_est);
}
