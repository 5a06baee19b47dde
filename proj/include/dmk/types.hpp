#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace dmk {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class ErrorCode {
  BadArgument,
  SchemaViolation,
  MeasureOnHemisphere,
  DegenerateGeometry,
  EmptyInterior,
  Unbounded,
  NonPositiveRadial,
  NotUnimodular,
  TightnessViolated,
  QuadratureNotConverged,
  FacetCollapse,
  NotConverged,
  PEqualsQ,
  DegenerateDensity,
  IoError,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

constexpr double kUnitNormTol = 1e-12;
constexpr double kDistinctNormalTol = 1e-10;
constexpr double kGeomTol = 1e-9;

// Normalizes v to unit length; rejects vectors too short to normalize reliably.
inline Vec unit_vector(const Vec& v) {
  double nrm = v.norm();
  require(nrm > 1e-14, ErrorCode::BadArgument, "cannot normalize near-zero vector");
  return v / nrm;
}

inline void check_unit(const Vec& u, const char* who) {
  require(std::abs(u.norm() - 1.0) <= kUnitNormTol, ErrorCode::BadArgument,
          std::string(who) + ": direction is not unit length");
}

// Finite atomic measure on the sphere: weight w_i at unit direction u_i.
struct DirectionWeightMeasure {
  std::vector<Vec> normals;
  std::vector<double> weights;

  int dim() const { return normals.empty() ? 0 : static_cast<int>(normals[0].size()); }
  size_t size() const { return normals.size(); }
  double total_mass() const {
    double s = 0;
    for (double w : weights) s += w;
    return s;
  }
};

// Validates unit norms, positive weights and pairwise-distinct directions.
void check_measure_wellformed(const DirectionWeightMeasure& mu);

struct OriginDiagnostics {
  bool interior = false;
  double inradius_from_origin = 0.0;
  std::vector<int> zero_offset_normals;
  bool xi_flagged = false;  // some zero-offset normal carries a full-dimensional facet
};

// Volume of the n-dimensional unit ball.
inline double unit_ball_volume(int n) { return std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0 + 1.0); }

// Surface area of S^{n-1}.
inline double sphere_area(int n) { return n * unit_ball_volume(n); }

}  // namespace dmk
