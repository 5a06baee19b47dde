#include "dmk/star_body.hpp"

#include <algorithm>
#include <map>

#include "dmk/linprog.hpp"

namespace dmk {

IcoMesh icosphere(int frequency) {
  require(frequency >= 1, ErrorCode::BadArgument, "icosphere: frequency must be >= 1");
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> base = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
      {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};

  IcoMesh mesh;
  std::map<std::array<long long, 3>, int> index;
  auto add_vertex = [&](const Eigen::Vector3d& raw) {
    Eigen::Vector3d v = raw.normalized();
    std::array<long long, 3> key;
    for (int i = 0; i < 3; ++i) key[i] = llround(v(i) * 1e12);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    int id = static_cast<int>(mesh.vertices.size());
    index[key] = id;
    Vec u(3);
    u << v(0), v(1), v(2);
    mesh.vertices.push_back(u);
    return id;
  };

  const int f = frequency;
  for (const auto& face : faces) {
    const Eigen::Vector3d a = base[face[0]], b = base[face[1]], c = base[face[2]];
    // Lattice points a + (i/f)(b-a) + (j/f)(c-a), i + j <= f, split into triangles.
    std::vector<std::vector<int>> grid(f + 1);
    for (int i = 0; i <= f; ++i) {
      grid[i].resize(f - i + 1);
      for (int j = 0; j <= f - i; ++j)
        grid[i][j] = add_vertex(a + (b - a) * (double(i) / f) + (c - a) * (double(j) / f));
    }
    for (int i = 0; i < f; ++i) {
      for (int j = 0; j < f - i; ++j) {
        mesh.faces.push_back({grid[i][j], grid[i + 1][j], grid[i][j + 1]});
        if (j < f - i - 1) mesh.faces.push_back({grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]});
      }
    }
  }
  return mesh;
}

StarBody StarBody::ball(int n, double radius) {
  require(n >= 2, ErrorCode::BadArgument, "ball: dimension must be >= 2");
  require(radius > 0 && std::isfinite(radius), ErrorCode::NonPositiveRadial, "ball: radius must be positive");
  StarBody q;
  q.kind_ = StarBodyKind::Ball;
  q.n_ = n;
  q.radius_ = radius;
  return q;
}

StarBody StarBody::ellipsoid(const Mat& shape) {
  const int n = static_cast<int>(shape.rows());
  require(n >= 2 && shape.cols() == n, ErrorCode::BadArgument, "ellipsoid: shape matrix must be square");
  require((shape - shape.transpose()).lpNorm<Eigen::Infinity>() <= 1e-10 * (1 + shape.lpNorm<Eigen::Infinity>()),
          ErrorCode::BadArgument, "ellipsoid: shape matrix must be symmetric");
  Eigen::LLT<Mat> llt(shape);
  require(llt.info() == Eigen::Success, ErrorCode::NonPositiveRadial,
          "ellipsoid: shape matrix must be positive definite");
  StarBody q;
  q.kind_ = StarBodyKind::Ellipsoid;
  q.n_ = n;
  q.shape_ = 0.5 * (shape + shape.transpose());
  q.inv_shape_ = llt.solve(Mat::Identity(n, n));
  q.inv_shape_ = 0.5 * (q.inv_shape_ + q.inv_shape_.transpose());
  return q;
}

StarBody StarBody::polytope_gauge(HPolytope P) {
  require(!P.normals.empty(), ErrorCode::BadArgument, "polytope_gauge: empty polytope");
  for (double t : P.offsets)
    require(t > 0, ErrorCode::NonPositiveRadial, "polytope_gauge: origin must be interior (offsets > 0)");
  require(!hemisphere_witness(P.normals).has_value(), ErrorCode::Unbounded,
          "polytope_gauge: gauge body must be bounded");
  StarBody q;
  q.kind_ = StarBodyKind::PolytopeGauge;
  q.n_ = P.dim();
  q.poly_ = std::move(P);
  return q;
}

StarBody StarBody::radial_table_2d(std::vector<double> angles, std::vector<double> values) {
  require(angles.size() == values.size() && angles.size() >= 3, ErrorCode::BadArgument,
          "radial_table_2d: need at least 3 samples");
  for (size_t i = 0; i < angles.size(); ++i) {
    require(std::isfinite(angles[i]) && angles[i] >= 0 && angles[i] < 2 * M_PI, ErrorCode::BadArgument,
            "radial_table_2d: angles must lie in [0, 2pi)");
    if (i) require(angles[i] > angles[i - 1], ErrorCode::BadArgument, "radial_table_2d: angles must increase");
    require(values[i] > 0 && std::isfinite(values[i]), ErrorCode::NonPositiveRadial,
            "radial_table_2d: radial values must be positive");
  }
  StarBody q;
  q.kind_ = StarBodyKind::RadialTable2D;
  q.n_ = 2;
  q.table_x_ = std::move(angles);
  q.table_v_ = std::move(values);
  return q;
}

StarBody StarBody::radial_table_3d(int frequency, std::vector<double> values) {
  IcoMesh mesh = icosphere(frequency);
  require(values.size() == mesh.vertices.size(), ErrorCode::BadArgument,
          "radial_table_3d: need one value per grid vertex (" + std::to_string(mesh.vertices.size()) + ")");
  for (double v : values)
    require(v > 0 && std::isfinite(v), ErrorCode::NonPositiveRadial,
            "radial_table_3d: radial values must be positive");
  StarBody q;
  q.kind_ = StarBodyKind::RadialTable3D;
  q.n_ = 3;
  q.mesh_ = std::move(mesh);
  q.table_v_ = std::move(values);
  return q;
}

double StarBody::radial_base(const Vec& u) const {
  switch (kind_) {
    case StarBodyKind::Ball:
      return radius_;
    case StarBodyKind::Ellipsoid:
      return 1.0 / std::sqrt(u.dot(inv_shape_ * u));
    case StarBodyKind::PolytopeGauge: {
      double rho = std::numeric_limits<double>::infinity();
      for (size_t i = 0; i < poly_.size(); ++i) {
        double d = poly_.normals[i].dot(u);
        if (d > 0.0) rho = std::min(rho, poly_.offsets[i] / d);
      }
      require(std::isfinite(rho), ErrorCode::Unbounded, "radial: gauge polytope unbounded in direction");
      return rho;
    }
    case StarBodyKind::RadialTable2D: {
      double theta = std::atan2(u(1), u(0));
      if (theta < 0) theta += 2 * M_PI;
      const auto& xs = table_x_;
      const auto& vs = table_v_;
      size_t hi = std::upper_bound(xs.begin(), xs.end(), theta) - xs.begin();
      double x0, x1, v0, v1;
      if (hi == 0 || hi == xs.size()) {  // wrap segment spanning 2pi -> 0
        x0 = xs.back();
        x1 = xs.front() + 2 * M_PI;
        v0 = vs.back();
        v1 = vs.front();
        if (theta < x0) theta += 2 * M_PI;
      } else {
        x0 = xs[hi - 1];
        x1 = xs[hi];
        v0 = vs[hi - 1];
        v1 = vs[hi];
      }
      double s = (theta - x0) / (x1 - x0);
      return v0 + s * (v1 - v0);
    }
    case StarBodyKind::RadialTable3D: {
      // Gnomonic barycentric coordinates on the containing grid face.
      Eigen::Vector3d p(u(0), u(1), u(2));
      for (const auto& face : mesh_.faces) {
        Eigen::Matrix3d M;
        M.col(0) = Eigen::Vector3d(mesh_.vertices[face[0]].data());
        M.col(1) = Eigen::Vector3d(mesh_.vertices[face[1]].data());
        M.col(2) = Eigen::Vector3d(mesh_.vertices[face[2]].data());
        Eigen::Vector3d lam = M.partialPivLu().solve(p);
        if (lam.minCoeff() >= -1e-12 && lam.sum() > 0) {
          lam /= lam.sum();
          return lam(0) * table_v_[face[0]] + lam(1) * table_v_[face[1]] + lam(2) * table_v_[face[2]];
        }
      }
      // Numerical fallback: nearest grid vertex.
      int best = 0;
      double bd = -2.0;
      for (int i = 0; i < static_cast<int>(mesh_.vertices.size()); ++i) {
        double d = mesh_.vertices[i].dot(u);
        if (d > bd) { bd = d; best = i; }
      }
      return table_v_[best];
    }
  }
  fail(ErrorCode::BadArgument, "radial: unknown star body kind");
}

double StarBody::radial(const Vec& u) const {
  Vec w = u;
  if (has_inv_map_) {
    w = inv_map_ * u;
    double nw = w.norm();
    return radial_base(w / nw) / nw;  // see gauge identity in the header
  }
  return radial_base(w);
}

double StarBody::gauge(const Vec& x) const {
  double nx = x.norm();
  if (nx == 0.0) return 0.0;
  return nx / radial(x / nx);
}

namespace {

// Sutherland-Hodgman clip of a planar convex polygon by <d, x> >= 0. Crossing
// points a + t (b - a) with t = sa / (sa - sb) are bitwise identical for d and
// -d, so adjacent cells tile the polygon without gaps or overlap.
std::vector<Vec> clip_halfplane(const std::vector<Vec>& poly, const Vec& d) {
  std::vector<Vec> out;
  const size_t m = poly.size();
  for (size_t i = 0; i < m; ++i) {
    const Vec& a = poly[i];
    const Vec& b = poly[(i + 1) % m];
    double sa = d.dot(a), sb = d.dot(b);
    if (sa >= 0) out.push_back(a);
    if ((sa > 0 && sb < 0) || (sa < 0 && sb > 0)) out.push_back(a + (sa / (sa - sb)) * (b - a));
  }
  return out;
}

void fan_triangulate(const std::vector<Vec>& poly, std::vector<Mat>& out) {
  for (size_t i = 1; i + 1 < poly.size(); ++i) {
    Mat piece(poly[0].size(), 3);
    piece.col(0) = poly[0];
    piece.col(1) = poly[i];
    piece.col(2) = poly[i + 1];
    out.push_back(std::move(piece));
  }
}

void emit_segments(const Vec& a, const Vec& b, std::vector<double>& roots, std::vector<Mat>& out) {
  roots.push_back(0.0);
  roots.push_back(1.0);
  std::sort(roots.begin(), roots.end());
  for (size_t i = 0; i + 1 < roots.size(); ++i) {
    if (roots[i + 1] - roots[i] <= 1e-12) continue;
    Mat piece(a.size(), 2);
    piece.col(0) = a + roots[i] * (b - a);
    piece.col(1) = a + roots[i + 1] * (b - a);
    out.push_back(std::move(piece));
  }
}

}  // namespace

std::vector<Mat> StarBody::smooth_pieces(const Mat& S) const {
  std::vector<Mat> out;
  if (kind_ == StarBodyKind::Ball || kind_ == StarBodyKind::Ellipsoid) {
    out.push_back(S);
    return out;
  }
  auto to_current = [&](const Vec& d) { return has_inv_map_ ? Vec(inv_map_.transpose() * d) : d; };

  if (kind_ == StarBodyKind::PolytopeGauge) {
    std::vector<Vec> a(poly_.size());
    for (size_t i = 0; i < poly_.size(); ++i) a[i] = poly_.normals[i] / poly_.offsets[i];
    if (n_ == 2) {
      const Vec p0 = S.col(0), p1 = S.col(1);
      std::vector<double> roots;
      for (size_t j = 0; j < a.size(); ++j)
        for (size_t k = j + 1; k < a.size(); ++k) {
          double sa = (a[j] - a[k]).dot(p0), sb = (a[j] - a[k]).dot(p1);
          if ((sa > 0) == (sb > 0) || sa == sb) continue;
          double t = sa / (sa - sb);
          if (t <= 1e-12 || t >= 1.0 - 1e-12) continue;
          // Keep only crossings where both functions attain the gauge max.
          Vec x = p0 + t * (p1 - p0);
          double g = 0.0;
          for (const Vec& al : a) g = std::max(g, al.dot(x));
          if (a[j].dot(x) >= g * (1.0 - 1e-9)) roots.push_back(t);
        }
      emit_segments(p0, p1, roots, out);
      return out;
    }
    // n = 3: clip the triangle against each gauge cell {<a_j - a_k, x> >= 0}.
    for (size_t j = 0; j < a.size(); ++j) {
      std::vector<Vec> poly = {S.col(0), S.col(1), S.col(2)};
      for (size_t k = 0; k < a.size() && poly.size() >= 3; ++k)
        if (k != j) poly = clip_halfplane(poly, a[j] - a[k]);
      if (poly.size() >= 3) fan_triangulate(poly, out);
    }
    return out;
  }

  if (kind_ == StarBodyKind::RadialTable2D) {
    const Vec p0 = S.col(0), p1 = S.col(1);
    std::vector<double> roots;
    for (double th : table_x_) {
      Vec u(2), d(2);
      u << std::cos(th), std::sin(th);
      d << -u[1], u[0];
      Vec dc = to_current(d), uc = to_current(u);
      double sa = dc.dot(p0), sb = dc.dot(p1);
      if ((sa > 0) == (sb > 0) || sa == sb) continue;
      double t = sa / (sa - sb);
      if (t <= 1e-12 || t >= 1.0 - 1e-12) continue;
      if (uc.dot(p0 + t * (p1 - p0)) > 0) roots.push_back(t);  // the ray, not its opposite
    }
    emit_segments(p0, p1, roots, out);
    return out;
  }

  // RadialTable3D: clip against the cone over each grid face.
  for (const auto& face : mesh_.faces) {
    const Vec &A = mesh_.vertices[face[0]], &B = mesh_.vertices[face[1]], &C = mesh_.vertices[face[2]];
    Eigen::Vector3d a3(A[0], A[1], A[2]), b3(B[0], B[1], B[2]), c3(C[0], C[1], C[2]);
    double orient = a3.cross(b3).dot(c3) > 0 ? 1.0 : -1.0;
    Eigen::Vector3d planes[3] = {orient * a3.cross(b3), orient * b3.cross(c3), orient * c3.cross(a3)};
    std::vector<Vec> poly = {S.col(0), S.col(1), S.col(2)};
    for (int i = 0; i < 3 && poly.size() >= 3; ++i) {
      Vec d(3);
      d << planes[i][0], planes[i][1], planes[i][2];
      poly = clip_halfplane(poly, to_current(d));
    }
    if (poly.size() >= 3) fan_triangulate(poly, out);
  }
  return out;
}

StarBody StarBody::transformed(const Mat& phi) const {
  require(static_cast<int>(phi.rows()) == n_ && static_cast<int>(phi.cols()) == n_, ErrorCode::BadArgument,
          "transformed: map has wrong dimensions");
  double det = phi.determinant();
  require(std::abs(det - 1.0) <= 1e-9, ErrorCode::NotUnimodular,
          "transformed: map must be unimodular (det = 1)");

  StarBody out = *this;
  switch (kind_) {
    case StarBodyKind::Ball: {
      out.kind_ = StarBodyKind::Ellipsoid;
      out.shape_ = radius_ * radius_ * phi * phi.transpose();
      out.inv_shape_ = out.shape_.llt().solve(Mat::Identity(n_, n_));
      out.inv_shape_ = 0.5 * (out.inv_shape_ + out.inv_shape_.transpose());
      break;
    }
    case StarBodyKind::Ellipsoid: {
      out.shape_ = phi * shape_ * phi.transpose();
      out.inv_shape_ = out.shape_.llt().solve(Mat::Identity(n_, n_));
      out.inv_shape_ = 0.5 * (out.inv_shape_ + out.inv_shape_.transpose());
      break;
    }
    case StarBodyKind::PolytopeGauge: {
      Mat phi_inv_t = phi.inverse().transpose();
      for (size_t i = 0; i < poly_.size(); ++i) {
        Vec v = phi_inv_t * poly_.normals[i];
        double nv = v.norm();
        out.poly_.normals[i] = v / nv;
        out.poly_.offsets[i] = poly_.offsets[i] / nv;
      }
      break;
    }
    case StarBodyKind::RadialTable2D:
    case StarBodyKind::RadialTable3D: {
      Mat inv = phi.inverse();
      out.inv_map_ = has_inv_map_ ? Mat(inv_map_ * inv) : inv;
      out.has_inv_map_ = true;
      break;
    }
  }
  return out;
}

}  // namespace dmk
