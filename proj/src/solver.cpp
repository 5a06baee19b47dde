#include "dmk/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace dmk {

namespace {

constexpr double kTiny = 1e-300;

std::vector<double> to_std(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

double phi_value(const Vec& alpha, const Vec& z, double p) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) s += alpha[i] * std::pow(z[i], p);
  return s;
}

struct IterState {
  std::vector<double> achieved;
  Vec atoms;  // Cq atoms per normal
  double vq = 0.0;
  long long evals = 0;
};

IterState eval_state(const std::vector<Vec>& normals, const Vec& z, const StarBody& Q, double p,
                     double q, const MeasureOptions& mopt) {
  HPolytope P{normals, to_std(z)};
  VPolytope V = h_to_v(P);
  DualMeasureResult m = dual_curvature_measure(P, V, Q, p, q, mopt);
  IterState st;
  st.achieved = std::move(V.achieved_support);
  st.atoms = Eigen::Map<const Vec>(m.atoms_cq.data(), static_cast<Eigen::Index>(m.atoms_cq.size()));
  st.vq = m.vq;
  st.evals = m.evals;
  return st;
}

struct KktData {
  Vec G, H, Gt;
  double tang = 0.0, lambda = 0.0, cert = 0.0;
};

// Gradient G = q * atom / z, constraint normal H = grad Phi, tangential
// projection, and the least-squares multiplier of the stationarity condition
// lambda * atom_i / z_i = p * alpha_i * z_i^(p-1).
KktData kkt_at(const Vec& alpha, const IterState& st, const Vec& z, double p, double q) {
  const Eigen::Index k = z.size();
  KktData kd;
  Vec a(k);
  kd.H.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    a[i] = st.atoms[i] / z[i];
    kd.H[i] = p * alpha[i] * std::pow(z[i], p - 1.0);
  }
  kd.G = q * a;
  kd.lambda = a.dot(kd.H) / std::max(a.squaredNorm(), kTiny);
  kd.Gt = kd.G - (kd.G.dot(kd.H) / kd.H.squaredNorm()) * kd.H;
  kd.tang = kd.Gt.norm() / std::max(kd.G.norm(), kTiny);
  for (Eigen::Index i = 0; i < k; ++i) {
    kd.cert = std::max(kd.cert, std::abs(kd.lambda * a[i] - kd.H[i]) / std::max(kd.H[i], kTiny));
  }
  return kd;
}

}  // namespace

Solution solve_normalized(const DirectionWeightMeasure& mu, const StarBody& Q, double p, double q,
                          const SolveOptions& opt) {
  require(p > 1.0, ErrorCode::BadArgument, "solve: requires p > 1");
  require(q > 0.0, ErrorCode::BadArgument, "solve: requires q > 0");
  check_measure_wellformed(mu);
  const int n = mu.dim();
  const int k = static_cast<int>(mu.size());
  require(k >= n + 1, ErrorCode::BadArgument, "solve: need at least n + 1 atoms");
  require(Q.dim() == n, ErrorCode::BadArgument, "solve: measure and Q dimensions differ");
  MeasureValidity mv = validate_measure(mu);
  if (!mv.valid) {
    std::ostringstream os;
    os << "measure is concentrated on a closed hemisphere; witness w = [";
    for (int j = 0; j < n; ++j) os << (j ? ", " : "") << mv.witness[j];
    os << "]";
    fail(ErrorCode::MeasureOnHemisphere, os.str());
  }

  const Vec alpha = Eigen::Map<const Vec>(mu.weights.data(), k);
  MeasureOptions mopt;
  mopt.rtol = opt.quadrature_rtol;

  SolveReport rep;
  Vec z = Vec::Constant(k, std::pow(alpha.sum(), -1.0 / p));
  IterState st = eval_state(mu.normals, z, Q, p, q, mopt);
  rep.quadrature_evals += st.evals;

  // The renormalization scales vq by the same pow(phi, -q/p) expression the
  // line search uses, so the stored objective trace is exactly monotone.
  int snap_events = 0;
  auto snap_and_renorm = [&](IterState& s, Vec& zz) {
    double band = kGeomTol * std::max(1.0, zz.maxCoeff());
    bool snapped = false;
    for (int i = 0; i < k; ++i) {
      if (zz[i] - s.achieved[i] > band) {
        zz[i] = std::max(s.achieved[i], opt.offset_floor);
        snapped = true;
      }
    }
    if (snapped) ++snap_events;
    double phi = phi_value(alpha, zz, p);
    double cz = std::pow(phi, -1.0 / p);
    double cq = std::pow(phi, -q / p);
    zz *= cz;
    for (double& a : s.achieved) a *= cz;
    s.atoms *= cq;
    s.vq *= cq;
  };

  snap_and_renorm(st, z);
  if (opt.trace_objective) rep.objective_trace.push_back(st.vq);

  std::vector<int> floor_streak(k, 0);
  Vec z_prev, gt_prev;
  double s_prev = 0.0;
  bool have_prev = false;
  bool stopped = false;
  double vq_mark = st.vq;
  int iter_mark = 0;

  // Part of the budget is held back for the multiplicative correction pass.
  const int reserve = std::min(600, opt.max_iters / 4);
  int iter = 0;
  while (iter < opt.max_iters - reserve) {
    ++iter;
    KktData kd = kkt_at(alpha, st, z, p, q);
    if (kd.tang <= opt.grad_tol && kd.cert <= 10.0 * opt.grad_tol) {
      rep.status = SolveStatus::Converged;
      stopped = true;
      break;
    }
    if (kd.tang <= 1e-2 * opt.grad_tol) {
      rep.warnings.push_back("stationary point with infeasible KKT certificate (vanished facet)");
      stopped = true;
      break;
    }

    // Barzilai-Borwein trial step, clamped around the unit-relative-change scale.
    double ref = z.norm() / std::max(kd.Gt.norm(), kTiny);
    double s0 = 0.2 * ref;
    if (have_prev) {
      Vec dz = z - z_prev, dg = kd.Gt - gt_prev;
      double den = -dz.dot(dg);
      s0 = den > 0 ? dz.squaredNorm() / den : 2.0 * s_prev;
    }
    s0 = std::min(std::max(s0, 1e-12 * ref), 10.0 * ref);
    z_prev = z;
    gt_prev = kd.Gt;

    // Armijo backtracking on PsiHat(z) = Vq(P(z)) Phi(z)^(-q/p); at the current
    // point Phi = 1 and the ascent slope along Gt is |Gt|^2.
    double slope = kd.Gt.squaredNorm();
    double psi_base = st.vq;
    double s = s0;
    bool accepted = false;
    Vec zt;
    IterState trial;
    for (int bt = 0; bt < 60 && !accepted; ++bt) {
      zt = (z + s * kd.Gt).cwiseMax(opt.offset_floor);
      bool ok = true;
      try {
        trial = eval_state(mu.normals, zt, Q, p, q, mopt);
      } catch (const Error&) {
        ok = false;
      }
      if (ok) {
        rep.quadrature_evals += trial.evals;
        double psi_t = trial.vq * std::pow(phi_value(alpha, zt, p), -q / p);
        if (psi_t >= psi_base + opt.armijo_c * s * slope) {
          accepted = true;
          break;
        }
      }
      s *= opt.armijo_shrink;
    }
    if (!accepted) {
      rep.warnings.push_back("line search stalled before reaching the gradient tolerance");
      stopped = true;
      break;
    }
    s_prev = s;
    have_prev = true;

    bool collapse = false;
    for (int i = 0; i < k; ++i) {
      floor_streak[i] = zt[i] <= opt.offset_floor ? floor_streak[i] + 1 : 0;
      if (floor_streak[i] > 50) collapse = true;
    }

    z = zt;
    st = trial;
    snap_and_renorm(st, z);
    if (opt.trace_objective) rep.objective_trace.push_back(st.vq);
    if (collapse) {
      rep.status = SolveStatus::FacetCollapse;
      rep.warnings.push_back("offset pinned at the floor for more than 50 accepted steps");
      stopped = true;
      break;
    }
    // Near the quadrature noise floor Armijo accepts machine-eps gains
    // forever; break the crawl and let the correction pass finish.
    if (iter - iter_mark >= 150) {
      if (st.vq - vq_mark <= 1e-12 * st.vq) {
        rep.warnings.push_back("objective stalled below relative progress 1e-12");
        stopped = true;
        break;
      }
      vq_mark = st.vq;
      iter_mark = iter;
    }
  }
  if (!stopped) rep.warnings.push_back("iteration budget exhausted");

  // Correction pass on the normalized equation got_i = atom_i z_i^-p / Vq.
  // The ascent stalls in two regimes: an offset chatters against the floor
  // when the solution lies decades below the body scale (q > p with p near 1),
  // and the Armijo test bottoms out at the quadrature noise floor near
  // residual ~ sqrt(rtol). Clamped multiplicative steps fix the former (the
  // diagonal response d ln got_i / d ln z_i <= -(p - 1) is strictly monotone,
  // and a vanished facet shrinks geometrically until its plane cuts again);
  // a damped finite-difference Newton in log coordinates fixes the latter,
  // where the coupling the diagonal model ignores dominates.
  auto eval_got = [&](const IterState& s, const Vec& zz, Vec& got) {
    double worst = 0.0;
    for (int i = 0; i < k; ++i) {
      got[i] = s.atoms[i] * std::pow(zz[i], -p) / std::max(s.vq, kTiny);
      worst = std::max(worst, std::abs(got[i] - alpha[i]) / alpha[i]);
    }
    return worst;
  };
  Vec got(k);
  double res_now = eval_got(st, z, got);
  const double res_target = 0.1 * opt.residual_tol;
  if (res_now > res_target && iter < opt.max_iters) {
    rep.warnings.push_back("ascent ended above the residual tolerance; applied equation correction");
    int budget = std::min(opt.max_iters - iter, 900);
    auto try_state = [&](const Vec& zt, IterState& out) {
      try {
        out = eval_state(mu.normals, zt, Q, p, q, mopt);
      } catch (const Error&) {
        return false;
      }
      rep.quadrature_evals += out.evals;
      return true;
    };

    // Steps are accepted on a capped-log L2 surrogate rather than the max
    // residual: while a squeezed facet stays vanished its atom pins the max
    // at 1, and only the surrogate lets the neighbors climb the decades
    // needed to resurrect it.
    auto surrogate = [&](const Vec& gv) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) {
        double f = std::log(std::max(gv[i], 1e-30) / alpha[i]);
        s += f * f;
      }
      return s;
    };
    double sur_now = surrogate(got);

    for (int round = 0; round < 3 && budget > 0 && res_now > res_target; ++round) {
      double theta = 0.5;
      const double expo_den = std::max(p - 1.0, 0.5);
      while (budget > 0 && res_now > res_target && theta > 1e-4) {
        ++iter;
        --budget;
        Vec zt(k);
        for (int i = 0; i < k; ++i) {
          double f = got[i] <= 0.0
                         ? 0.5
                         : std::clamp(std::pow(got[i] / alpha[i], theta / expo_den), 0.5, 2.0);
          zt[i] = std::max(z[i] * f, opt.offset_floor);
        }
        IterState trial;
        if (try_state(zt, trial)) {
          snap_and_renorm(trial, zt);
          Vec got_t(k);
          double rt = eval_got(trial, zt, got_t);
          double su = surrogate(got_t);
          if (su < sur_now) {
            z = zt;
            st = trial;
            got = got_t;
            res_now = rt;
            sur_now = su;
            theta = std::min(1.0, 1.3 * theta);
            // Hand the endgame to Newton once every facet is live and close.
            if (res_now < 3e-2 && got.minCoeff() > 0.0) break;
            continue;
          }
        }
        theta *= 0.5;
      }

      double rho = 1e-8;
      for (int outer = 0; outer < 30 && budget > k && res_now > res_target; ++outer) {
        if (got.minCoeff() <= 0.0) break;
        Vec F(k);
        for (int i = 0; i < k; ++i) F[i] = std::log(got[i] / alpha[i]);
        const double h = 3e-6;
        Mat M(k, k);
        bool jac_ok = true;
        for (int j = 0; j < k && jac_ok; ++j) {
          Vec zj = z;
          zj[j] *= std::exp(h);
          IterState sj;
          if (!try_state(zj, sj)) {
            jac_ok = false;
            break;
          }
          ++iter;
          --budget;
          Vec gj(k);
          eval_got(sj, zj, gj);
          if (gj.minCoeff() <= 0.0) {
            jac_ok = false;
            break;
          }
          for (int i = 0; i < k; ++i) M(i, j) = (std::log(gj[i] / alpha[i]) - F[i]) / h;
        }
        if (!jac_ok) break;
        Mat MtM = M.transpose() * M;
        double dscale = std::max(MtM.diagonal().maxCoeff(), kTiny);
        Vec rhs = -M.transpose() * F;
        bool accepted = false;
        for (int attempt = 0; attempt < 12 && budget > 0; ++attempt) {
          Mat A = MtM + rho * dscale * Mat::Identity(k, k);
          Vec dy = A.ldlt().solve(rhs);
          double m = dy.cwiseAbs().maxCoeff();
          if (m > 0.7) dy *= 0.7 / m;
          Vec zt(k);
          for (int i = 0; i < k; ++i) zt[i] = std::max(z[i] * std::exp(dy[i]), opt.offset_floor);
          ++iter;
          --budget;
          IterState trial;
          if (try_state(zt, trial)) {
            snap_and_renorm(trial, zt);
            Vec got_t(k);
            double rt = eval_got(trial, zt, got_t);
            double su = surrogate(got_t);
            if (su < sur_now && got_t.minCoeff() > 0.0) {
              z = zt;
              st = trial;
              got = got_t;
              res_now = rt;
              sur_now = su;
              rho = std::max(rho / 3.0, 1e-12);
              accepted = true;
              break;
            }
          }
          rho *= 8.0;
        }
        if (!accepted) break;
      }
    }
  }
  rep.iterations = iter;
  rep.objective = st.vq;
  if (snap_events > 0)
    rep.warnings.push_back("snapped redundant offsets to their supports in " +
                           std::to_string(snap_events) + " iterations");

  KktData kd = kkt_at(alpha, st, z, p, q);
  rep.tangential_residual = kd.tang;
  rep.kkt_residual = kd.cert;
  rep.lagrange_lambda = kd.lambda;
  // The stationarity condition gives alpha_i = lambda * atom_i / (p z_i^p)
  // with lambda = p / Vq at the exact optimum, so P0 = lambda0 P(z*) with
  // lambda0 = (p / (lambda Vq))^(1/p) satisfies Vq(P0)^-1 Cpq(P0, Q, .) = mu
  // (lambda0 = 1 up to the residual of the ascent).
  rep.lambda0 = std::pow(p / (kd.lambda * st.vq), 1.0 / p);

  Solution sol;
  sol.polytope = HPolytope{mu.normals, to_std(rep.lambda0 * z)};
  sol.geometry = h_to_v(sol.polytope);
  sol.measure = dual_curvature_measure(sol.polytope, sol.geometry, Q, p, q, mopt);
  rep.quadrature_evals += sol.measure.evals;
  rep.residuals.resize(k);
  rep.max_residual = 0.0;
  for (int i = 0; i < k; ++i) {
    double got = sol.measure.atoms_cpq[i] / sol.measure.vq;
    rep.residuals[i] = std::abs(got - alpha[i]) / alpha[i];
    rep.max_residual = std::max(rep.max_residual, rep.residuals[i]);
  }
  // Converged states that the returned measure matches mu to residual_tol;
  // the gradient rule only decides when iteration stops.
  if (rep.max_residual <= opt.residual_tol)
    rep.status = SolveStatus::Converged;
  else if (rep.status != SolveStatus::FacetCollapse)
    rep.status = SolveStatus::NotConverged;
  rep.origin = origin_diagnostics(sol.polytope, sol.geometry);
  sol.report = std::move(rep);
  return sol;
}

double rescale_factor(double vq_p0, double p, double q) {
  require(std::abs(p - q) > 1e-12, ErrorCode::PEqualsQ,
          "p == q: Cpq is scale invariant, only the normalized problem is solvable");
  require(vq_p0 > 0.0, ErrorCode::BadArgument, "rescale: nonpositive dual volume");
  return std::pow(vq_p0, -1.0 / (q - p));
}

HPolytope rescale_solution(const HPolytope& P0, const StarBody& Q, double p, double q,
                           const MeasureOptions& opt) {
  double lam = rescale_factor(dual_intrinsic_volume(P0, Q, q, opt), p, q);
  HPolytope P = P0;
  for (double& t : P.offsets) t *= lam;
  return P;
}

Solution solve(const DirectionWeightMeasure& mu, const StarBody& Q, double p, double q,
               const SolveOptions& opt) {
  require(std::abs(p - q) > 1e-12, ErrorCode::PEqualsQ,
          "p == q: Cpq is scale invariant, only the normalized problem is solvable");
  Solution sol = solve_normalized(mu, Q, p, q, opt);
  double lam = rescale_factor(sol.measure.vq, p, q);
  sol.report.final_rescale = lam;

  Vec zf = lam * Eigen::Map<const Vec>(sol.polytope.offsets.data(), sol.polytope.offsets.size());
  sol.polytope.offsets = to_std(zf);
  sol.geometry = h_to_v(sol.polytope);
  MeasureOptions mopt;
  mopt.rtol = opt.quadrature_rtol;
  sol.measure = dual_curvature_measure(sol.polytope, sol.geometry, Q, p, q, mopt);
  sol.report.quadrature_evals += sol.measure.evals;
  const int kk = static_cast<int>(mu.size());
  sol.report.max_residual = 0.0;
  for (int i = 0; i < kk; ++i) {
    double r = std::abs(sol.measure.atoms_cpq[i] - mu.weights[i]) / mu.weights[i];
    sol.report.residuals[i] = r;
    sol.report.max_residual = std::max(sol.report.max_residual, r);
  }
  if (sol.report.max_residual <= opt.residual_tol)
    sol.report.status = SolveStatus::Converged;
  else if (sol.report.status != SolveStatus::FacetCollapse)
    sol.report.status = SolveStatus::NotConverged;
  sol.report.origin = origin_diagnostics(sol.polytope, sol.geometry);
  return sol;
}

DirectionWeightMeasure discretize_density(int n, const std::function<double(const Vec&)>& f,
                                          int resolution, double rtol) {
  require(n == 2 || n == 3, ErrorCode::BadArgument, "density discretization supports n = 2 or 3");
  DirectionWeightMeasure mu;
  if (n == 2) {
    require(resolution >= 3, ErrorCode::BadArgument, "need at least 3 arcs");
    for (int j = 0; j < resolution; ++j) {
      double a0 = 2.0 * M_PI * j / resolution;
      double a1 = 2.0 * M_PI * (j + 1) / resolution;
      Mat S(1, 2);
      S(0, 0) = a0;
      S(0, 1) = a1;
      auto g = [&](const Vec& t) {
        Vec u(2);
        u << std::cos(t[0]), std::sin(t[0]);
        return f(u);
      };
      QuadResult qr = integrate_simplex(S, g, rtol, 30);
      require(qr.converged, ErrorCode::QuadratureNotConverged,
              "density cell integral did not converge");
      require(qr.value >= 0.0, ErrorCode::DegenerateDensity, "density must be nonnegative");
      if (qr.value <= 0.0) continue;  // f vanishes on this cell
      double mid = 0.5 * (a0 + a1);
      Vec u(2);
      u << std::cos(mid), std::sin(mid);
      mu.normals.push_back(u);
      mu.weights.push_back(qr.value);
    }
  } else {
    int freq = 1;
    while (20 * freq * freq < resolution) ++freq;
    IcoMesh mesh = icosphere(freq);
    for (const auto& face : mesh.faces) {
      const Vec& v0 = mesh.vertices[face[0]];
      const Vec& v1 = mesh.vertices[face[1]];
      const Vec& v2 = mesh.vertices[face[2]];
      Mat S(3, 3);
      S.col(0) = v0;
      S.col(1) = v1;
      S.col(2) = v2;
      Vec c = (v0 + v1 + v2) / 3.0;
      Eigen::Vector3d e1 = v1 - v0, e2 = v2 - v0;
      Vec nu = e1.cross(e2);
      nu = unit_vector(nu);
      if (nu.dot(c) < 0) nu = -nu;
      // Radial projection onto the sphere: d sigma = <nu, x/|x|> dA / |x|^2.
      auto g = [&](const Vec& x) {
        double r2 = x.squaredNorm();
        double r = std::sqrt(r2);
        Vec u = x / r;
        return f(u) * nu.dot(u) / r2;
      };
      QuadResult qr = integrate_simplex(S, g, rtol, 30);
      require(qr.converged, ErrorCode::QuadratureNotConverged,
              "density cell integral did not converge");
      require(qr.value >= 0.0, ErrorCode::DegenerateDensity, "density must be nonnegative");
      if (qr.value <= 0.0) continue;
      mu.normals.push_back(unit_vector(c));
      mu.weights.push_back(qr.value);
    }
  }
  require(mu.size() >= static_cast<size_t>(n + 1), ErrorCode::DegenerateDensity,
          "density mass survives on too few cells");
  MeasureValidity mv = validate_measure(mu);
  require(mv.valid, ErrorCode::DegenerateDensity,
          "discretized density is concentrated on a closed hemisphere");
  return mu;
}

std::vector<Vec> support_grid(int n) {
  std::vector<Vec> grid;
  if (n == 2) {
    const int m = 10000;
    grid.reserve(m);
    for (int j = 0; j < m; ++j) {
      double a = 2.0 * M_PI * j / m;
      Vec u(2);
      u << std::cos(a), std::sin(a);
      grid.push_back(u);
    }
  } else if (n == 3) {
    grid = icosphere(32).vertices;  // 10242 unit directions
  } else {
    fail(ErrorCode::BadArgument, "support grid defined for n = 2 or 3");
  }
  return grid;
}

double support_distance(const VPolytope& A, const VPolytope& B) {
  require(A.n == B.n, ErrorCode::BadArgument, "support distance: dimension mismatch");
  double mx = 0.0;
  for (const Vec& u : support_grid(A.n)) {
    mx = std::max(mx, std::abs(support(A, u) - support(B, u)));
  }
  return mx;
}

namespace {

// Weak Monge-Ampere residual per discretization cell for Q the unit ball:
// facet area against n * integral over the cell of h^(p-1) |Dh|^(n-q) f.
void ma_residuals(int n, const std::function<double(const Vec&)>& f, int resolution,
                  const Solution& sol, double p, double q, double* out_max, double* out_mean) {
  const VPolytope& V = sol.geometry;
  auto cell_weight = [&](const Vec& u) {
    double best = -std::numeric_limits<double>::infinity();
    double xnorm = 0.0;
    for (const Vec& v : V.vertices) {
      double d = u.dot(v);
      if (d > best) {
        best = d;
        xnorm = v.norm();
      }
    }
    return n * std::pow(best, p - 1.0) * std::pow(xnorm, n - q) * f(u);
  };

  std::vector<double> lhs, rhs;
  if (n == 2) {
    for (int j = 0; j < resolution; ++j) {
      double a0 = 2.0 * M_PI * j / resolution;
      double a1 = 2.0 * M_PI * (j + 1) / resolution;
      Mat S(1, 2);
      S(0, 0) = a0;
      S(0, 1) = a1;
      auto g = [&](const Vec& t) {
        Vec u(2);
        u << std::cos(t[0]), std::sin(t[0]);
        return cell_weight(u);
      };
      rhs.push_back(integrate_simplex(S, g, 1e-7, 14).value);
      int fi = V.facet_of_normal[j];
      lhs.push_back(fi >= 0 ? V.facets[fi].area : 0.0);
    }
  } else {
    int freq = 1;
    while (20 * freq * freq < resolution) ++freq;
    IcoMesh mesh = icosphere(freq);
    for (size_t j = 0; j < mesh.faces.size(); ++j) {
      const auto& face = mesh.faces[j];
      const Vec& v0 = mesh.vertices[face[0]];
      const Vec& v1 = mesh.vertices[face[1]];
      const Vec& v2 = mesh.vertices[face[2]];
      Mat S(3, 3);
      S.col(0) = v0;
      S.col(1) = v1;
      S.col(2) = v2;
      Vec c = (v0 + v1 + v2) / 3.0;
      Eigen::Vector3d e1 = v1 - v0, e2 = v2 - v0;
      Vec nu = unit_vector(Vec(e1.cross(e2)));
      if (nu.dot(c) < 0) nu = -nu;
      auto g = [&](const Vec& x) {
        double r2 = x.squaredNorm();
        double r = std::sqrt(r2);
        Vec u = x / r;
        return cell_weight(u) * nu.dot(u) / r2;
      };
      rhs.push_back(integrate_simplex(S, g, 1e-7, 14).value);
      int fi = V.facet_of_normal[static_cast<int>(j)];
      lhs.push_back(fi >= 0 ? V.facets[fi].area : 0.0);
    }
  }

  double mx = 0.0, mean = 0.0;
  for (size_t j = 0; j < lhs.size(); ++j) {
    double rel = std::abs(lhs[j] - rhs[j]) / std::max({lhs[j], rhs[j], kTiny});
    mx = std::max(mx, rel);
    mean += rel;
  }
  *out_max = mx;
  *out_mean = lhs.empty() ? 0.0 : mean / lhs.size();
}

}  // namespace

DensityResult solve_density(int n, const std::function<double(const Vec&)>& f,
                            const std::vector<int>& resolutions, const StarBody& Q, double p,
                            double q, const SolveOptions& opt) {
  require(!resolutions.empty(), ErrorCode::BadArgument, "solve_density: empty schedule");
  DensityResult out;
  for (int r : resolutions) {
    auto t0 = std::chrono::steady_clock::now();
    DensityStage stage;
    stage.resolution = r;
    DirectionWeightMeasure mu = discretize_density(n, f, r, opt.quadrature_rtol);
    stage.solution = solve(mu, Q, p, q, opt);
    if (Q.is_unit_ball()) {
      ma_residuals(n, f, r, stage.solution, p, q, &stage.ma_residual_max, &stage.ma_residual_mean);
    } else {
      stage.ma_residual_max = std::numeric_limits<double>::quiet_NaN();
      stage.ma_residual_mean = std::numeric_limits<double>::quiet_NaN();
    }
    stage.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.stages.push_back(std::move(stage));
  }
  for (size_t i = 0; i + 1 < out.stages.size(); ++i) {
    out.stages[i].distance_to_next =
        support_distance(out.stages[i].solution.geometry, out.stages[i + 1].solution.geometry);
  }
  return out;
}

}  // namespace dmk
