#include "dmk/mc_oracle.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

#include "dmk/simd_kernels.hpp"

namespace dmk {
namespace {

constexpr long long kChunk = 8192;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in (0,1), never exactly 0 or 1.
inline double to_unit(std::uint64_t v) { return (static_cast<double>(v >> 11) + 0.5) * 0x1.0p-53; }

// n standard Gaussians for one (seed, sample) key via Box-Muller.
inline void gaussians(int n, std::uint64_t seed, long long index, double* out) {
  std::uint64_t key = splitmix64(splitmix64(seed) ^ (static_cast<std::uint64_t>(index) * 0x9e3779b97f4a7c15ULL));
  int produced = 0;
  std::uint64_t t = 0;
  while (produced < n) {
    double u1 = to_unit(splitmix64(key + 0xd1342543de82ef95ULL * t++));
    double u2 = to_unit(splitmix64(key + 0xd1342543de82ef95ULL * t++));
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    out[produced++] = r * std::cos(a);
    if (produced < n) out[produced++] = r * std::sin(a);
  }
}

int thread_budget() {
  if (const char* env = std::getenv("DMK_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

struct ChunkSums {
  double vq_sum = 0.0, vq_sumsq = 0.0;
  std::vector<double> atom_sum, atom_sumsq;
};

ChunkSums reduce_pair(const ChunkSums& a, const ChunkSums& b) {
  ChunkSums r = a;
  r.vq_sum += b.vq_sum;
  r.vq_sumsq += b.vq_sumsq;
  for (size_t i = 0; i < r.atom_sum.size(); ++i) {
    r.atom_sum[i] += b.atom_sum[i];
    r.atom_sumsq[i] += b.atom_sumsq[i];
  }
  return r;
}

ChunkSums reduce_range(const std::vector<ChunkSums>& c, size_t lo, size_t hi) {
  if (hi - lo == 1) return c[lo];
  size_t mid = lo + (hi - lo) / 2;
  return reduce_pair(reduce_range(c, lo, mid), reduce_range(c, mid, hi));
}

McMeasure run_mc(const HPolytope& P, const StarBody& Q, double q, long long samples, std::uint64_t seed,
                 bool want_atoms) {
  require(samples > 0, ErrorCode::BadArgument, "mc: sample count must be positive");
  require(Q.dim() == P.dim(), ErrorCode::BadArgument, "mc: dimension mismatch");
  const int n = P.dim();
  const int k = static_cast<int>(P.size());
  const double nq = n - q;
  const auto& kern = simd::active();

  std::vector<double> normals_flat(static_cast<size_t>(k) * n);
  for (int i = 0; i < k; ++i)
    for (int d = 0; d < n; ++d) normals_flat[static_cast<size_t>(i) * n + d] = P.normals[i](d);

  std::vector<double> q_normals_flat, q_offsets;
  std::vector<double> q_inv_flat;
  if (Q.kind() == StarBodyKind::PolytopeGauge) {
    const HPolytope& G = Q.gauge_polytope();
    q_offsets = G.offsets;
    q_normals_flat.resize(G.size() * n);
    for (size_t i = 0; i < G.size(); ++i)
      for (int d = 0; d < n; ++d) q_normals_flat[i * n + d] = G.normals[i](d);
  } else if (Q.kind() == StarBodyKind::Ellipsoid) {
    q_inv_flat.resize(static_cast<size_t>(n) * n);
    for (int d = 0; d < n; ++d)
      for (int e = 0; e < n; ++e) q_inv_flat[static_cast<size_t>(d) * n + e] = Q.ellipsoid_inverse()(d, e);
  }
  const bool q_is_ball = Q.kind() == StarBodyKind::Ball;
  const double ball_w = q_is_ball ? std::pow(Q.ball_radius(), nq) : 1.0;

  const long long nchunks = (samples + kChunk - 1) / kChunk;
  std::vector<ChunkSums> chunks(static_cast<size_t>(nchunks));
  for (auto& c : chunks) {
    c.atom_sum.assign(k, 0.0);
    c.atom_sumsq.assign(k, 0.0);
  }

  std::atomic<long long> next{0};
  auto worker = [&] {
    std::vector<double> dirs(static_cast<size_t>(n) * kChunk), g(n);
    std::vector<double> rho(kChunk), rho_q(kChunk);
    std::vector<std::int32_t> facet(kChunk), facet_q(kChunk);
    for (;;) {
      long long c = next.fetch_add(1);
      if (c >= nchunks) break;
      const long long lo = c * kChunk;
      const int len = static_cast<int>(std::min<long long>(kChunk, samples - lo));
      for (int j = 0; j < len; ++j) {
        gaussians(n, seed, lo + j, g.data());
        double norm = 0.0;
        for (int d = 0; d < n; ++d) norm += g[d] * g[d];
        norm = std::sqrt(norm);
        for (int d = 0; d < n; ++d) dirs[static_cast<size_t>(d) * len + j] = g[d] / norm;
      }
      kern.radial_batch(normals_flat.data(), P.offsets.data(), k, n, dirs.data(), len, rho.data(),
                        facet.data());
      if (q_is_ball) {
        for (int j = 0; j < len; ++j) rho_q[j] = ball_w;  // already raised to n-q
      } else if (Q.kind() == StarBodyKind::Ellipsoid) {
        kern.ellipsoid_radial_batch(q_inv_flat.data(), n, dirs.data(), len, rho_q.data());
        for (int j = 0; j < len; ++j) rho_q[j] = std::pow(rho_q[j], nq);
      } else if (Q.kind() == StarBodyKind::PolytopeGauge) {
        kern.radial_batch(q_normals_flat.data(), q_offsets.data(), static_cast<int>(q_offsets.size()), n,
                          dirs.data(), len, rho_q.data(), facet_q.data());
        for (int j = 0; j < len; ++j) rho_q[j] = std::pow(rho_q[j], nq);
      } else {
        Vec u(n);
        for (int j = 0; j < len; ++j) {
          for (int d = 0; d < n; ++d) u(d) = dirs[static_cast<size_t>(d) * len + j];
          rho_q[j] = std::pow(Q.radial(u), nq);
        }
      }
      ChunkSums& cs = chunks[static_cast<size_t>(c)];
      for (int j = 0; j < len; ++j) {
        int fi = facet[j];
        double val = fi >= 0 ? std::pow(rho[j], q) * rho_q[j] : 0.0;
        cs.vq_sum += val;
        cs.vq_sumsq += val * val;
        if (fi >= 0) {
          cs.atom_sum[fi] += val;
          cs.atom_sumsq[fi] += val * val;
        }
      }
    }
  };

  int workers = std::min<long long>(thread_budget(), nchunks);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ChunkSums total = reduce_range(chunks, 0, chunks.size());
  const double scale = sphere_area(n) / n;  // omega_n / n = kappa_n
  const double N = static_cast<double>(samples);
  auto estimate = [&](double sum, double sumsq) {
    McEstimate e;
    e.samples = samples;
    e.value = scale * sum / N;
    double var = std::max(0.0, (sumsq - sum * sum / N) / std::max(1.0, N - 1.0));
    e.stderr_est = scale * std::sqrt(var / N);
    return e;
  };

  McMeasure out;
  out.vq = estimate(total.vq_sum, total.vq_sumsq);
  if (want_atoms) {
    out.atoms.resize(k);
    for (int i = 0; i < k; ++i) out.atoms[i] = estimate(total.atom_sum[i], total.atom_sumsq[i]);
  }
  return out;
}

}  // namespace

Vec mc_sphere_sample(int n, std::uint64_t seed, long long index) {
  Vec g(n);
  gaussians(n, seed, index, g.data());
  return g / g.norm();
}

McEstimate mc_dual_intrinsic_volume(const HPolytope& P, const StarBody& Q, double q, long long samples,
                                    std::uint64_t seed) {
  return run_mc(P, Q, q, samples, seed, false).vq;
}

McMeasure mc_dual_curvature(const HPolytope& P, const StarBody& Q, double q, long long samples,
                            std::uint64_t seed) {
  return run_mc(P, Q, q, samples, seed, true);
}

}  // namespace dmk
