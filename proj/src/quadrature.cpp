#include "dmk/quadrature.hpp"

#include <algorithm>
#include <map>
#include <mutex>

namespace dmk {
namespace {

void partitions_rec(int remaining, int slots, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (slots == 1) {
    cur.push_back(remaining);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int v = 0; v <= remaining; ++v) {
    cur.push_back(v);
    partitions_rec(remaining - v, slots - 1, cur, out);
    cur.pop_back();
  }
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Layer coefficient of the degree-(2s+1) rule for layer r on the d-simplex:
// (-1)^(s-r) 2^(-2s) (2r+d+1)^(2s+1) / ((s-r)! (s+r+d+1)!)
double gm_coeff(int d, int s, int r) {
  double sign = ((s - r) % 2 == 0) ? 1.0 : -1.0;
  double num = std::pow(2.0 * r + d + 1.0, 2.0 * s + 1.0) * std::pow(2.0, -2.0 * s);
  return sign * num / (factorial(s - r) * factorial(s + r + d + 1));
}

GmRule build_rule(int d, int s) {
  GmRule rule;
  rule.d = d;
  rule.s = s;
  const double dfact = factorial(d);
  rule.layers.resize(s + 1);
  rule.coeff_high.assign(s + 1, 0.0);
  rule.coeff_low.assign(s + 1, 0.0);
  for (int r = 0; r <= s; ++r) {
    std::vector<std::vector<int>> parts;
    std::vector<int> cur;
    partitions_rec(r, d + 1, cur, parts);
    for (const auto& beta : parts) {
      Vec lam(d + 1);
      for (int j = 0; j <= d; ++j) lam(j) = (2.0 * beta[j] + 1.0) / (2.0 * r + d + 1.0);
      rule.layers[r].push_back(lam);
    }
    rule.coeff_high[r] = dfact * gm_coeff(d, s, r);
    if (r <= s - 1) rule.coeff_low[r] = dfact * gm_coeff(d, s - 1, r);
  }
  return rule;
}

}  // namespace

const GmRule& gm_rule(int d, int s) {
  static std::map<std::pair<int, int>, GmRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_pair(d, s);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build_rule(d, s)).first;
  return it->second;
}

double simplex_volume(const Mat& S) {
  const int d = static_cast<int>(S.cols()) - 1;
  if (d == 0) return 1.0;
  Mat E(S.rows(), d);
  for (int i = 1; i <= d; ++i) E.col(i - 1) = S.col(i) - S.col(0);
  Mat G = E.transpose() * E;
  double det = G.determinant();
  if (det <= 0.0) return 0.0;
  return std::sqrt(det) / factorial(d);
}

namespace {

struct Element {
  Mat S;
  double vol = 0.0;
  double value = 0.0;
  double error = 0.0;
  double vmin = 0.0, vmax = 0.0;
  int depth = 0;
};

Element evaluate(const GmRule& rule, Mat S, int depth, const std::function<double(const Vec&)>& f,
                 long long& evals) {
  Element e;
  e.vol = simplex_volume(S);
  e.depth = depth;
  e.vmin = std::numeric_limits<double>::infinity();
  e.vmax = -e.vmin;
  double high = 0.0, low = 0.0;
  for (int r = 0; r <= rule.s; ++r) {
    double layer_sum = 0.0;
    for (const Vec& lam : rule.layers[r]) {
      Vec x = S * lam;
      double v = f(x);
      ++evals;
      layer_sum += v;
      e.vmin = std::min(e.vmin, v);
      e.vmax = std::max(e.vmax, v);
    }
    high += rule.coeff_high[r] * layer_sum;
    low += rule.coeff_low[r] * layer_sum;
  }
  e.value = e.vol * high;
  e.error = e.vol * std::abs(high - low);
  e.S = std::move(S);
  return e;
}

void bisect(const Mat& S, Mat& A, Mat& B) {
  const int cols = static_cast<int>(S.cols());
  int bi = 0, bj = 1;
  double best = -1.0;
  for (int i = 0; i < cols; ++i)
    for (int j = i + 1; j < cols; ++j) {
      double d = (S.col(i) - S.col(j)).norm();
      if (d > best) { best = d; bi = i; bj = j; }
    }
  Vec mid = 0.5 * (S.col(bi) + S.col(bj));
  A = S;
  A.col(bj) = mid;
  B = S;
  B.col(bi) = mid;
}

}  // namespace

QuadResult integrate_simplex(const Mat& S, const std::function<double(const Vec&)>& f, double rtol,
                             int max_depth) {
  const int d = static_cast<int>(S.cols()) - 1;
  const GmRule& rule = gm_rule(d);
  QuadResult out;

  std::vector<Element> done;
  std::vector<Element> work;
  work.push_back(evaluate(rule, S, 0, f, out.evals));
  const double vol_total = std::max(work.front().vol, 1e-300);

  constexpr int kVariationDepthCap = 6;
  while (!work.empty()) {
    double total = 0.0;
    for (const auto& e : done) total += e.value;
    for (const auto& e : work) total += e.value;
    const double tol = rtol * std::max(std::abs(total), 1e-300);

    std::vector<Element> next;
    for (Element& e : work) {
      const double budget = std::max(tol * (e.vol / vol_total), 4e-16 * std::abs(total));
      const bool varies = e.vmax - e.vmin > 0.1 * std::max(std::abs(e.vmin), 1e-300);
      const bool err_bad = e.error > budget;
      bool split = (varies && e.depth < kVariationDepthCap) || (err_bad && e.depth < max_depth);
      if (!split) {
        if (err_bad) out.converged = false;
        done.push_back(std::move(e));
        continue;
      }
      Mat A, B;
      bisect(e.S, A, B);
      next.push_back(evaluate(rule, std::move(A), e.depth + 1, f, out.evals));
      next.push_back(evaluate(rule, std::move(B), e.depth + 1, f, out.evals));
    }
    work = std::move(next);
  }

  for (const auto& e : done) {
    out.value += e.value;
    out.error += e.error;
  }
  return out;
}

}  // namespace dmk
