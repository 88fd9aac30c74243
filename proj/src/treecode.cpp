#include "qbx3d/treecode.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include "qbx3d/parallel.hpp"

namespace qbx {

TaylorCoeffs taylor_coeffs_bk(Vec3 c, Vec3 y, int p) {
  Vec3 d = y - c;
  double R2 = norm2(d);
  if (R2 < 1e-28) throw std::domain_error("taylor_coeffs_bk: coincident points");
  TaylorCoeffs tc;
  tc.p = p;
  tc.dim = p + 1;
  tc.b.assign(static_cast<std::size_t>(tc.dim) * tc.dim * tc.dim, 0.0);
  const int dim = tc.dim;
  auto idx = [dim](int k1, int k2, int k3) { return (k1 * dim + k2) * dim + k3; };
  tc.b[idx(0, 0, 0)] = 1.0 / std::sqrt(R2);
  const double dy[3] = {d.x, d.y, d.z};
  for (int n = 1; n <= p; ++n) {
    for (int k1 = n; k1 >= 0; --k1) {
      for (int k2 = n - k1; k2 >= 0; --k2) {
        int k3 = n - k1 - k2;
        int k[3] = {k1, k2, k3};
        double s1 = 0.0, s2 = 0.0;
        for (int i = 0; i < 3; ++i) {
          if (k[i] >= 1) {
            int km[3] = {k1, k2, k3};
            km[i] -= 1;
            s1 += dy[i] * tc.b[idx(km[0], km[1], km[2])];
          }
          if (k[i] >= 2) {
            int km[3] = {k1, k2, k3};
            km[i] -= 2;
            s2 += tc.b[idx(km[0], km[1], km[2])];
          }
        }
        tc.b[idx(k1, k2, k3)] = ((2.0 * n - 1.0) * s1 - (n - 1.0) * s2) / (n * R2);
      }
    }
  }
  return tc;
}

namespace {

constexpr double kInv4Pi = 1.0 / (4.0 * M_PI);
constexpr double kCoincident2 = 1e-28;

struct Cluster {
  int begin = 0, end = 0;  // range into the permuted source order
  Vec3 centroid{};
  double radius = 0;
  int children[8] = {-1, -1, -1, -1, -1, -1, -1, -1};
  bool leaf = true;
  int level = 0;
  // Combined coefficients Q_k = sum_d k_d M_d^{k - e_d}, ||k|| <= p_T + 1,
  // where M_d^m are the (nu_d sigma w)-weighted source moments about the
  // centroid. The cluster's far-field value is (1/4pi) sum_k b_k(c, x) Q_k.
  std::vector<double> Q;
};

}  // namespace

struct Treecode::Impl {
  const Domain* domain = nullptr;
  TreecodeParams params;
  std::vector<Cluster> clusters;
  std::vector<int> perm;  // DFS-leaf-ordered source ids
  // permuted source copies, contiguous for leaf sweeps
  std::vector<double> sx, sy, sz, snx, sny, snz, sqw;
  bool moments_ready = false;
  int depth = 0;
  int qdim = 0;  // p_T + 2: cube dimension of the Q arrays
  mutable std::atomic<std::uint64_t> direct_pairs{0};
  mutable std::atomic<std::uint64_t> cluster_evals{0};
  mutable TreecodeCounters counters_snapshot;

  int build(std::vector<int>& ids, int begin, int end, Vec3 cube_lo, double cube_size, int level);
  void compute_cluster_q(Cluster& cl);
  // Accumulates into a single running sum in depth-first order so that with
  // the acceptance criterion disabled the arithmetic matches direct_sum.
  void eval_target(Vec3 x, int cluster_id, double& acc) const;
  inline double direct_term(Vec3 x, int slot) const {
    double dx = x.x - sx[slot];
    double dy = x.y - sy[slot];
    double dz = x.z - sz[slot];
    double r2 = dx * dx + dy * dy + dz * dz;
    if (r2 <= kCoincident2) return 0.0;
    double nd = snx[slot] * dx + sny[slot] * dy + snz[slot] * dz;
    return sqw[slot] * nd / (r2 * std::sqrt(r2));
  }
};

int Treecode::Impl::build(std::vector<int>& ids, int begin, int end, Vec3 cube_lo,
                          double cube_size, int level) {
  int my = static_cast<int>(clusters.size());
  clusters.emplace_back();
  {
    Cluster& cl = clusters[my];
    cl.begin = begin;
    cl.end = end;
    cl.level = level;
    depth = std::max(depth, level);
    Vec3 centroid{};
    for (int i = begin; i < end; ++i) centroid += domain->node_position(ids[i]);
    centroid = centroid / static_cast<double>(end - begin);
    cl.centroid = centroid;
    double r2 = 0.0;
    for (int i = begin; i < end; ++i) r2 = std::max(r2, norm2(domain->node_position(ids[i]) - centroid));
    cl.radius = std::sqrt(r2);
  }
  if (end - begin <= params.leaf_cap || cube_size < 1e-12) {
    clusters[my].leaf = true;
    return my;
  }
  clusters[my].leaf = false;
  // 8-way bucket by octant of the cube, stable so each bucket keeps ascending ids
  Vec3 mid = cube_lo + 0.5 * cube_size * Vec3{1, 1, 1};
  std::vector<int> buckets[8];
  for (int i = begin; i < end; ++i) {
    Vec3 p = domain->node_position(ids[i]);
    int o = (p.x >= mid.x ? 1 : 0) | (p.y >= mid.y ? 2 : 0) | (p.z >= mid.z ? 4 : 0);
    buckets[o].push_back(ids[i]);
  }
  int pos = begin;
  for (int o = 0; o < 8; ++o) {
    for (int id : buckets[o]) ids[pos++] = id;
  }
  pos = begin;
  int children[8];
  for (int o = 0; o < 8; ++o) {
    int cnt = static_cast<int>(buckets[o].size());
    if (cnt == 0) {
      children[o] = -1;
      continue;
    }
    Vec3 child_lo = cube_lo + 0.5 * cube_size * Vec3{double(o & 1), double((o >> 1) & 1), double((o >> 2) & 1)};
    children[o] = build(ids, pos, pos + cnt, child_lo, 0.5 * cube_size, level + 1);
    pos += cnt;
  }
  for (int o = 0; o < 8; ++o) clusters[my].children[o] = children[o];
  return my;
}

Treecode::Treecode(const Domain& domain, TreecodeParams params) : impl_(new Impl) {
  if (domain.num_nodes() < 1) throw std::invalid_argument("Treecode: empty domain");
  if (!(params.eps_T > 0.0 && params.eps_T < 1.0))
    throw std::invalid_argument("Treecode: eps_T in (0,1)");
  if (params.p_T < 0 || params.leaf_cap < 1) throw std::invalid_argument("Treecode: bad params");
  impl_->domain = &domain;
  impl_->params = params;
  impl_->qdim = params.p_T + 2;

  const int n = domain.num_nodes();
  std::vector<int> ids(n);
  for (int i = 0; i < n; ++i) ids[i] = i;
  Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  for (int i = 0; i < n; ++i) {
    Vec3 p = domain.node_position(i);
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  double size = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z, 1e-12});
  impl_->build(ids, 0, n, lo, size, 0);
  impl_->perm = std::move(ids);

  impl_->sx.resize(n);
  impl_->sy.resize(n);
  impl_->sz.resize(n);
  impl_->snx.resize(n);
  impl_->sny.resize(n);
  impl_->snz.resize(n);
  impl_->sqw.resize(n);
  for (int i = 0; i < n; ++i) {
    Vec3 p = domain.node_position(impl_->perm[i]);
    Vec3 nu = domain.node_normal(impl_->perm[i]);
    impl_->sx[i] = p.x;
    impl_->sy[i] = p.y;
    impl_->sz[i] = p.z;
    impl_->snx[i] = nu.x;
    impl_->sny[i] = nu.y;
    impl_->snz[i] = nu.z;
  }
}

Treecode::~Treecode() = default;

void Treecode::Impl::compute_cluster_q(Cluster& cl) {
  const int pt = params.p_T;
  const int dim = qdim;  // p_T + 2
  auto idx = [dim](int k1, int k2, int k3) { return (k1 * dim + k2) * dim + k3; };
  // nu-weighted moments M_d^m, ||m|| <= p_T
  std::vector<double> M(3 * static_cast<std::size_t>(dim) * dim * dim, 0.0);
  std::vector<double> X(pt + 1), Y(pt + 1), Z(pt + 1);
  for (int i = cl.begin; i < cl.end; ++i) {
    double dx = sx[i] - cl.centroid.x;
    double dy = sy[i] - cl.centroid.y;
    double dz = sz[i] - cl.centroid.z;
    X[0] = Y[0] = Z[0] = 1.0;
    for (int a = 1; a <= pt; ++a) {
      X[a] = X[a - 1] * dx;
      Y[a] = Y[a - 1] * dy;
      Z[a] = Z[a - 1] * dz;
    }
    double qn[3] = {sqw[i] * snx[i], sqw[i] * sny[i], sqw[i] * snz[i]};
    for (int m1 = 0; m1 <= pt; ++m1) {
      for (int m2 = 0; m2 <= pt - m1; ++m2) {
        double xy = X[m1] * Y[m2];
        for (int m3 = 0; m3 <= pt - m1 - m2; ++m3) {
          double mono = xy * Z[m3];
          std::size_t at = idx(m1, m2, m3);
          M[at] += qn[0] * mono;
          M[at + static_cast<std::size_t>(dim) * dim * dim] += qn[1] * mono;
          M[at + 2 * static_cast<std::size_t>(dim) * dim * dim] += qn[2] * mono;
        }
      }
    }
  }
  // Q_k = sum_d k_d M_d^{k-e_d}, 1 <= ||k|| <= p_T + 1
  cl.Q.assign(static_cast<std::size_t>(dim) * dim * dim, 0.0);
  const std::size_t stride = static_cast<std::size_t>(dim) * dim * dim;
  for (int k1 = 0; k1 <= pt + 1; ++k1) {
    for (int k2 = 0; k2 <= pt + 1 - k1; ++k2) {
      for (int k3 = 0; k3 <= pt + 1 - k1 - k2; ++k3) {
        if (k1 + k2 + k3 == 0) continue;
        double q = 0.0;
        if (k1 >= 1) q += k1 * M[idx(k1 - 1, k2, k3)];
        if (k2 >= 1) q += k2 * M[idx(k1, k2 - 1, k3) + stride];
        if (k3 >= 1) q += k3 * M[idx(k1, k2, k3 - 1) + 2 * stride];
        cl.Q[idx(k1, k2, k3)] = q;
      }
    }
  }
}

void Treecode::update_moments(const std::vector<double>& sigma) {
  Impl& im = *impl_;
  const Domain& dom = *im.domain;
  if (sigma.size() != static_cast<std::size_t>(dom.num_nodes()))
    throw std::invalid_argument("Treecode: density length mismatch");
  for (std::size_t i = 0; i < im.perm.size(); ++i)
    im.sqw[i] = sigma[im.perm[i]] * dom.node_weight(im.perm[i]);
  parallel_for(im.clusters.size(), [&](std::size_t c) { im.compute_cluster_q(im.clusters[c]); });
  im.moments_ready = true;
}

void Treecode::Impl::eval_target(Vec3 x, int cluster_id, double& acc) const {
  const Cluster& cl = clusters[cluster_id];
  double D = std::sqrt(norm2(x - cl.centroid));
  // Zero-radius (degenerate) clusters go direct; ties go direct as well.
  if (cl.radius > 0.0 && cl.radius < params.eps_T * D) {
    cluster_evals.fetch_add(1, std::memory_order_relaxed);
    TaylorCoeffs tc = taylor_coeffs_bk(cl.centroid, x, params.p_T + 1);
    const int dim = qdim;
    for (int k1 = 0; k1 <= params.p_T + 1; ++k1) {
      for (int k2 = 0; k2 <= params.p_T + 1 - k1; ++k2) {
        for (int k3 = 0; k3 <= params.p_T + 1 - k1 - k2; ++k3) {
          if (k1 + k2 + k3 == 0) continue;
          acc += tc.at(k1, k2, k3) * cl.Q[(k1 * dim + k2) * dim + k3];
        }
      }
    }
    return;
  }
  if (cl.leaf) {
    for (int i = cl.begin; i < cl.end; ++i) acc += direct_term(x, i);
    direct_pairs.fetch_add(cl.end - cl.begin, std::memory_order_relaxed);
    return;
  }
  for (int o = 0; o < 8; ++o) {
    if (cl.children[o] >= 0) eval_target(x, cl.children[o], acc);
  }
}

std::vector<double> Treecode::eval(const std::vector<Vec3>& targets) const {
  const Impl& im = *impl_;
  if (!im.moments_ready) throw std::logic_error("Treecode: update_moments first");
  std::vector<double> out(targets.size());
  parallel_for(targets.size(), [&](std::size_t t) {
    double acc = 0.0;
    im.eval_target(targets[t], 0, acc);
    out[t] = kInv4Pi * acc;
  });
  return out;
}

double Treecode::direct_sum(Vec3 target) const {
  const Impl& im = *impl_;
  double acc = 0.0;
  for (std::size_t i = 0; i < im.perm.size(); ++i) acc += im.direct_term(target, static_cast<int>(i));
  return kInv4Pi * acc;
}

const TreecodeCounters& Treecode::counters() const {
  impl_->counters_snapshot.direct_pairs = impl_->direct_pairs.load();
  impl_->counters_snapshot.cluster_evals = impl_->cluster_evals.load();
  return impl_->counters_snapshot;
}

void Treecode::reset_counters() {
  impl_->direct_pairs.store(0);
  impl_->cluster_evals.store(0);
}

int Treecode::depth() const { return impl_->depth; }
int Treecode::num_clusters() const { return static_cast<int>(impl_->clusters.size()); }

}  // namespace qbx
