#pragma once

#include "dmk/polytope.hpp"
#include "dmk/types.hpp"

namespace dmk {

enum class StarBodyKind { Ball, Ellipsoid, PolytopeGauge, RadialTable2D, RadialTable3D };

struct IcoMesh {
  std::vector<Vec> vertices;            // unit vectors
  std::vector<std::array<int, 3>> faces;
};

// Icosahedron subdivided `frequency` times per edge, projected to the sphere
// (20 * frequency^2 faces).
IcoMesh icosphere(int frequency);

// Star body about the origin with positive continuous radial function.
// Radial tables carry an accumulated inverse linear map so SL(n) images stay
// exact: rho_{phi Q}(u) = rho_Q(w/|w|)/|w| with w = phi^{-1} u.
class StarBody {
public:
  static StarBody ball(int n, double radius);
  static StarBody ellipsoid(const Mat& shape);  // Q = {x : x^T shape^{-1} x <= 1}, SPD
  static StarBody polytope_gauge(HPolytope P);  // requires strictly positive offsets
  static StarBody radial_table_2d(std::vector<double> angles, std::vector<double> values);
  static StarBody radial_table_3d(int frequency, std::vector<double> values);

  int dim() const { return n_; }
  StarBodyKind kind() const { return kind_; }

  // rho_Q(u) for unit u.
  double radial(const Vec& u) const;

  // Minkowski gauge ||x||_Q = ||x|| / rho_Q(x/||x||); gauge(0) = 0.
  double gauge(const Vec& x) const;

  // Image phi Q for unimodular phi (|det phi - 1| <= 1e-9, else NotUnimodular).
  StarBody transformed(const Mat& phi) const;

  // Sub-simplices of the (n-1)-simplex S (n x n vertex columns) on which the
  // gauge is smooth: polytope gauges and radial tables split along their
  // radial-cell boundaries so quadrature error estimates stay honest. Balls
  // and ellipsoids return {S}.
  std::vector<Mat> smooth_pieces(const Mat& S) const;

  bool is_unit_ball() const { return kind_ == StarBodyKind::Ball && radius_ == 1.0; }
  double ball_radius() const { return radius_; }
  const Mat& ellipsoid_inverse() const { return inv_shape_; }
  const HPolytope& gauge_polytope() const { return poly_; }

private:
  StarBody() = default;
  double radial_base(const Vec& u) const;  // radial in the untransformed frame

  StarBodyKind kind_ = StarBodyKind::Ball;
  int n_ = 0;
  double radius_ = 1.0;          // Ball
  Mat shape_, inv_shape_;        // Ellipsoid
  HPolytope poly_;               // PolytopeGauge
  std::vector<double> table_x_;  // RadialTable2D angles
  std::vector<double> table_v_;  // table values (2D and 3D)
  IcoMesh mesh_;                 // RadialTable3D grid
  Mat inv_map_;                  // accumulated phi^{-1} for radial tables
  bool has_inv_map_ = false;
};

}  // namespace dmk
