#include "dmk/dual_measures.hpp"

#include <algorithm>

namespace dmk {

double facet_integral(const HPolytope& P, const VPolytope& V, int normal_index, const StarBody& Q,
                      double q, const MeasureOptions& opt, double* error_out, long long* evals_out) {
  require(q > 0, ErrorCode::BadArgument, "facet_integral: q must be positive");
  const int n = V.n;
  if (error_out) *error_out = 0.0;
  if (evals_out) *evals_out = 0;

  int fi = V.facet_of_normal[normal_index];
  if (fi < 0) return 0.0;
  const FacetGeometry& fg = V.facets[fi];
  const double h = P.offsets[normal_index];
  if (h <= 1e-12 * V.scale) return 0.0;  // zero-support facets carry no mass

  if (q == static_cast<double>(n) && !opt.force_quadrature) return h * fg.area / n;

  const double expo = q - n;
  auto integrand = [&](const Vec& x) { return std::pow(Q.gauge(x), expo); };

  double value = 0.0, err = 0.0;
  long long evals = 0;
  for (const Mat& S : fg.simplices) {
    for (const Mat& piece : Q.smooth_pieces(S)) {
      QuadResult r = integrate_simplex(piece, integrand, opt.rtol, opt.max_depth);
      require(r.converged, ErrorCode::QuadratureNotConverged,
              "facet_integral: adaptive quadrature failed to reach tolerance");
      value += r.value;
      err += r.error;
      evals += r.evals;
    }
  }
  if (error_out) *error_out = h * err / n;
  if (evals_out) *evals_out = evals;
  return h * value / n;
}

DualMeasureResult dual_curvature_measure(const HPolytope& P, const VPolytope& V, const StarBody& Q,
                                         double p, double q, const MeasureOptions& opt) {
  require(Q.dim() == V.n, ErrorCode::BadArgument, "dual_curvature_measure: dimension mismatch");
  const int k = static_cast<int>(P.size());
  DualMeasureResult res;
  res.atoms_cq.assign(k, 0.0);
  res.atoms_cpq.assign(k, std::numeric_limits<double>::quiet_NaN());
  res.cpq_defined.assign(k, false);
  for (int i = 0; i < k; ++i) {
    double err = 0.0;
    long long evals = 0;
    res.atoms_cq[i] = facet_integral(P, V, i, Q, q, opt, &err, &evals);
    res.quadrature_error += err;
    res.evals += evals;
    res.vq += res.atoms_cq[i];
    if (P.offsets[i] > 1e-12 * V.scale) {
      res.atoms_cpq[i] = std::pow(P.offsets[i], -p) * res.atoms_cq[i];
      res.cpq_defined[i] = true;
    }
  }
  return res;
}

DualMeasureResult dual_curvature_measure(const HPolytope& P, const StarBody& Q, double p, double q,
                                         const MeasureOptions& opt) {
  VPolytope V = h_to_v(P);
  return dual_curvature_measure(P, V, Q, p, q, opt);
}

double dual_intrinsic_volume(const HPolytope& P, const StarBody& Q, double q, const MeasureOptions& opt) {
  return dual_curvature_measure(P, Q, 1.0, q, opt).vq;
}

double vq_ball(int n, double q, double r, double s) {
  return unit_ball_volume(n) * std::pow(r, q) * std::pow(s, n - q);
}

Vec vq_gradient(const HPolytope& P, const VPolytope& V, const StarBody& Q, double q,
                const MeasureOptions& opt) {
  const int k = static_cast<int>(P.size());
  const double band = V.band();
  for (int i = 0; i < k; ++i)
    require(V.achieved_support[i] >= P.offsets[i] - band, ErrorCode::TightnessViolated,
            "vq_gradient: offset " + std::to_string(i) + " exceeds the achieved support");
  DualMeasureResult m = dual_curvature_measure(P, V, Q, 1.0, q, opt);
  Vec g(k);
  for (int i = 0; i < k; ++i) {
    require(P.offsets[i] > 0, ErrorCode::BadArgument, "vq_gradient: offsets must be positive");
    g(i) = q * m.atoms_cq[i] / P.offsets[i];
  }
  return g;
}

HPolytope transform_hpolytope(const HPolytope& P, const Mat& phi) {
  require(std::abs(phi.determinant() - 1.0) <= 1e-9, ErrorCode::NotUnimodular,
          "transform_hpolytope: map must be unimodular");
  Mat phi_inv_t = phi.inverse().transpose();
  HPolytope out = P;
  for (size_t i = 0; i < P.size(); ++i) {
    Vec v = phi_inv_t * P.normals[i];
    double nv = v.norm();
    out.normals[i] = v / nv;
    out.offsets[i] = P.offsets[i] / nv;
  }
  return out;
}

double sl_equivariance_residual(const HPolytope& P, const StarBody& Q, double p, double q,
                                const Mat& phi, const MeasureOptions& opt) {
  DualMeasureResult a = dual_curvature_measure(P, Q, p, q, opt);
  HPolytope TP = transform_hpolytope(P, phi);
  StarBody TQ = Q.transformed(phi);
  DualMeasureResult b = dual_curvature_measure(TP, TQ, p, q, opt);

  // The pushforward sends the atom at u_i to the i-th normal of phi P with
  // unchanged mass, so equivariance is atomwise equality.
  double res = 0.0;
  for (size_t i = 0; i < P.size(); ++i) {
    double den = std::max({a.atoms_cq[i], b.atoms_cq[i], 1e-300});
    res = std::max(res, std::abs(a.atoms_cq[i] - b.atoms_cq[i]) / den);
  }
  res = std::max(res, std::abs(a.vq - b.vq) / std::max(a.vq, 1e-300));
  return res;
}

}  // namespace dmk
