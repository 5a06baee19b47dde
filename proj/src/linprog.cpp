#include "dmk/linprog.hpp"

#include <limits>

namespace dmk {
namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kFeasTol = 1e-9;

// Dense tableau simplex with Bland's rule. Row `m` is the objective row storing
// reduced costs z_j - c_j and, in its rhs slot, the current objective value.
class Tableau {
public:
  Tableau(int rows, int vars) : m_(rows), total_(vars), t_(Mat::Zero(rows + 1, vars + 1)), basis_(rows, -1), dead_(rows, false) {}

  Mat& data() { return t_; }
  std::vector<int>& basis() { return basis_; }
  int total() const { return total_; }

  void price_out(const Vec& c) {
    t_.row(m_).setZero();
    t_.row(m_).head(total_) = -c.transpose();
    for (int r = 0; r < m_; ++r) {
      double cb = c(basis_[r]);
      if (cb != 0.0) t_.row(m_) += cb * t_.row(r);
    }
  }

  double value() const { return t_(m_, total_); }

  void pivot(int row, int col) {
    t_.row(row) /= t_(row, col);
    for (int r = 0; r <= m_; ++r) {
      if (r == row) continue;
      double f = t_(r, col);
      if (f != 0.0) t_.row(r) -= f * t_.row(row);
    }
    basis_[row] = col;
  }

  // allowed(c): whether column c may enter. Returns false when unbounded.
  template <typename Pred>
  bool optimize(Pred allowed) {
    for (;;) {
      int enter = -1;
      for (int c = 0; c < total_; ++c) {
        if (allowed(c) && t_(m_, c) < -kPivotTol) { enter = c; break; }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int r = 0; r < m_; ++r) {
        if (dead_[r]) continue;
        double a = t_(r, enter);
        if (a > kPivotTol) {
          double ratio = t_(r, total_) / a;
          if (ratio < best - kPivotTol) {
            best = ratio;
            leave = r;
          } else if (ratio < best + kPivotTol && leave >= 0 && basis_[r] < basis_[leave]) {
            leave = r;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }

  // Pivots basic artificials out after phase 1; rows that cannot be cleared are
  // redundant and get marked dead.
  template <typename Pred>
  void clear_artificials(Pred allowed) {
    for (int r = 0; r < m_; ++r) {
      if (allowed(basis_[r])) continue;
      int col = -1;
      for (int c = 0; c < total_; ++c) {
        if (allowed(c) && std::abs(t_(r, c)) > kPivotTol) { col = c; break; }
      }
      if (col >= 0) {
        pivot(r, col);
      } else {
        dead_[r] = true;
      }
    }
  }

private:
  int m_, total_;
  Mat t_;
  std::vector<int> basis_;
  std::vector<bool> dead_;
};

}  // namespace

LpResult lp_solve_max(const Mat& A, const Vec& b, const Vec& c) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  int n_art = 0;
  for (int r = 0; r < m; ++r)
    if (b(r) < 0) ++n_art;

  const int total = n + m + n_art;
  Tableau tab(m, total);
  Mat& t = tab.data();
  int art = n + m;
  for (int r = 0; r < m; ++r) {
    double sign = b(r) < 0 ? -1.0 : 1.0;
    t.row(r).head(n) = sign * A.row(r);
    t(r, n + r) = sign;  // slack
    t(r, total) = sign * b(r);
    if (b(r) < 0) {
      t(r, art) = 1.0;
      tab.basis()[r] = art++;
    } else {
      tab.basis()[r] = n + r;
    }
  }

  const int first_art = n + m;
  auto structural = [first_art](int col) { return col < first_art; };

  LpResult res;
  if (n_art > 0) {
    Vec phase1 = Vec::Zero(total);
    phase1.tail(n_art).setConstant(-1.0);
    tab.price_out(phase1);
    tab.optimize([](int) { return true; });
    if (tab.value() < -kFeasTol) {
      res.status = LpResult::Status::Infeasible;
      return res;
    }
    tab.clear_artificials(structural);
  }

  Vec obj = Vec::Zero(total);
  obj.head(n) = c;
  tab.price_out(obj);
  if (!tab.optimize(structural)) {
    res.status = LpResult::Status::Unbounded;
    return res;
  }

  res.status = LpResult::Status::Optimal;
  res.value = tab.value();
  res.x = Vec::Zero(n);
  for (int r = 0; r < m; ++r) {
    int bv = tab.basis()[r];
    if (bv < n) res.x(bv) = t(r, total);
  }
  return res;
}

LpResult lp_solve_max_free(const Mat& A, const Vec& b, const Vec& c) {
  const int n = static_cast<int>(A.cols());
  Mat As(A.rows(), 2 * n);
  As << A, -A;
  Vec cs(2 * n);
  cs << c, -c;
  LpResult inner = lp_solve_max(As, b, cs);
  LpResult res;
  res.status = inner.status;
  res.value = inner.value;
  if (inner.status == LpResult::Status::Optimal) res.x = inner.x.head(n) - inner.x.tail(n);
  return res;
}

std::optional<Vec> hemisphere_witness(const std::vector<Vec>& normals) {
  require(!normals.empty(), ErrorCode::BadArgument, "hemisphere_witness: no normals");
  const int k = static_cast<int>(normals.size());
  const int n = static_cast<int>(normals[0].size());

  // w lies in the polar cone {w : <u_i, w> <= 0}; the cone is nontrivial iff
  // some coordinate of it reaches the unit box boundary.
  Mat A(k + 2 * n, n);
  Vec b(k + 2 * n);
  for (int i = 0; i < k; ++i) {
    A.row(i) = normals[i].transpose();
    b(i) = 0.0;
  }
  A.middleRows(k, n) = Mat::Identity(n, n);
  A.middleRows(k + n, n) = -Mat::Identity(n, n);
  b.tail(2 * n).setOnes();

  for (int j = 0; j < n; ++j) {
    for (double sign : {1.0, -1.0}) {
      Vec c = Vec::Zero(n);
      c(j) = sign;
      LpResult lp = lp_solve_max_free(A, b, c);
      if (lp.status == LpResult::Status::Optimal && lp.value > 0.5) {
        Vec w = lp.x / lp.x.norm();
        bool ok = true;
        for (const Vec& u : normals)
          if (u.dot(w) > kFeasTol) ok = false;
        if (ok) return w;
      }
    }
  }
  return std::nullopt;
}

std::pair<Vec, double> chebyshev_center(const std::vector<Vec>& normals, const std::vector<double>& offsets) {
  require(normals.size() == offsets.size() && !normals.empty(), ErrorCode::BadArgument,
          "chebyshev_center: bad inputs");
  const int k = static_cast<int>(normals.size());
  const int n = static_cast<int>(normals[0].size());

  Mat A(k + 1, n + 1);
  Vec b(k + 1);
  for (int i = 0; i < k; ++i) {
    A.row(i).head(n) = normals[i].transpose();
    A(i, n) = 1.0;  // unit normals, so the ball constraint is <u,c> + r <= t
    b(i) = offsets[i];
  }
  A.row(k).setZero();
  A(k, n) = -1.0;
  b(k) = 0.0;

  Vec c = Vec::Zero(n + 1);
  c(n) = 1.0;
  LpResult lp = lp_solve_max_free(A, b, c);
  require(lp.status == LpResult::Status::Optimal, ErrorCode::DegenerateGeometry,
          "chebyshev_center: LP failed (polytope empty or unbounded)");
  return {lp.x.head(n), lp.x(n)};
}

}  // namespace dmk
