// AVX2/FMA variants of the hot quadrature kernels. This translation unit is
// compiled with -mavx2 -mfma; callers must gate on avx2::available().

#include "qbx3d/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)
#define QBX3D_HAVE_AVX2_TU 1
#include <immintrin.h>
#else
#define QBX3D_HAVE_AVX2_TU 0
#endif

#include <cmath>
#include <vector>

namespace qbx::kernels::avx2 {

#if QBX3D_HAVE_AVX2_TU

namespace {

constexpr double kInv4Pi = 1.0 / (4.0 * M_PI);
constexpr double kCoincident2 = 1e-28;

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

inline double hmin(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_min_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_min_sd(lo, swapped));
}

}  // namespace

bool available() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

double dl_sum(Vec3 t, const NodeBlock& nodes, const double* qw) {
  const std::size_t n4 = nodes.n & ~std::size_t(3);
  __m256d tx = _mm256_set1_pd(t.x);
  __m256d ty = _mm256_set1_pd(t.y);
  __m256d tz = _mm256_set1_pd(t.z);
  __m256d guard = _mm256_set1_pd(kCoincident2);
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < n4; i += 4) {
    __m256d dx = _mm256_sub_pd(tx, _mm256_loadu_pd(nodes.px + i));
    __m256d dy = _mm256_sub_pd(ty, _mm256_loadu_pd(nodes.py + i));
    __m256d dz = _mm256_sub_pd(tz, _mm256_loadu_pd(nodes.pz + i));
    __m256d r2 = _mm256_fmadd_pd(dz, dz, _mm256_fmadd_pd(dy, dy, _mm256_mul_pd(dx, dx)));
    __m256d nd = _mm256_mul_pd(_mm256_loadu_pd(nodes.nx + i), dx);
    nd = _mm256_fmadd_pd(_mm256_loadu_pd(nodes.ny + i), dy, nd);
    nd = _mm256_fmadd_pd(_mm256_loadu_pd(nodes.nz + i), dz, nd);
    __m256d r = _mm256_sqrt_pd(r2);
    __m256d term = _mm256_div_pd(_mm256_mul_pd(_mm256_loadu_pd(qw + i), nd),
                                 _mm256_mul_pd(r2, r));
    // zero out coincident lanes
    __m256d mask = _mm256_cmp_pd(r2, guard, _CMP_GT_OQ);
    acc = _mm256_add_pd(acc, _mm256_and_pd(term, mask));
  }
  double s = hsum(acc);
  for (std::size_t i = n4; i < nodes.n; ++i) {
    double dx = t.x - nodes.px[i];
    double dy = t.y - nodes.py[i];
    double dz = t.z - nodes.pz[i];
    double r2 = dx * dx + dy * dy + dz * dz;
    if (r2 <= kCoincident2) continue;
    double nd = nodes.nx[i] * dx + nodes.ny[i] * dy + nodes.nz[i] * dz;
    s += qw[i] * nd / (r2 * std::sqrt(r2));
  }
  return s * kInv4Pi;
}

double sl_sum(Vec3 t, const NodeBlock& nodes, const double* qw) {
  const std::size_t n4 = nodes.n & ~std::size_t(3);
  __m256d tx = _mm256_set1_pd(t.x);
  __m256d ty = _mm256_set1_pd(t.y);
  __m256d tz = _mm256_set1_pd(t.z);
  __m256d guard = _mm256_set1_pd(kCoincident2);
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < n4; i += 4) {
    __m256d dx = _mm256_sub_pd(tx, _mm256_loadu_pd(nodes.px + i));
    __m256d dy = _mm256_sub_pd(ty, _mm256_loadu_pd(nodes.py + i));
    __m256d dz = _mm256_sub_pd(tz, _mm256_loadu_pd(nodes.pz + i));
    __m256d r2 = _mm256_fmadd_pd(dz, dz, _mm256_fmadd_pd(dy, dy, _mm256_mul_pd(dx, dx)));
    __m256d term = _mm256_div_pd(_mm256_loadu_pd(qw + i), _mm256_sqrt_pd(r2));
    __m256d mask = _mm256_cmp_pd(r2, guard, _CMP_GT_OQ);
    acc = _mm256_add_pd(acc, _mm256_and_pd(term, mask));
  }
  double s = hsum(acc);
  for (std::size_t i = n4; i < nodes.n; ++i) {
    double dx = t.x - nodes.px[i];
    double dy = t.y - nodes.py[i];
    double dz = t.z - nodes.pz[i];
    double r2 = dx * dx + dy * dy + dz * dz;
    if (r2 <= kCoincident2) continue;
    s += qw[i] / std::sqrt(r2);
  }
  return s * kInv4Pi;
}

void dl_weights(Vec3 t, const NodeBlock& nodes, double* out) {
  const std::size_t n4 = nodes.n & ~std::size_t(3);
  __m256d tx = _mm256_set1_pd(t.x);
  __m256d ty = _mm256_set1_pd(t.y);
  __m256d tz = _mm256_set1_pd(t.z);
  __m256d guard = _mm256_set1_pd(kCoincident2);
  __m256d c4pi = _mm256_set1_pd(kInv4Pi);
  for (std::size_t i = 0; i < n4; i += 4) {
    __m256d dx = _mm256_sub_pd(tx, _mm256_loadu_pd(nodes.px + i));
    __m256d dy = _mm256_sub_pd(ty, _mm256_loadu_pd(nodes.py + i));
    __m256d dz = _mm256_sub_pd(tz, _mm256_loadu_pd(nodes.pz + i));
    __m256d r2 = _mm256_fmadd_pd(dz, dz, _mm256_fmadd_pd(dy, dy, _mm256_mul_pd(dx, dx)));
    __m256d nd = _mm256_mul_pd(_mm256_loadu_pd(nodes.nx + i), dx);
    nd = _mm256_fmadd_pd(_mm256_loadu_pd(nodes.ny + i), dy, nd);
    nd = _mm256_fmadd_pd(_mm256_loadu_pd(nodes.nz + i), dz, nd);
    __m256d r = _mm256_sqrt_pd(r2);
    __m256d v = _mm256_div_pd(_mm256_mul_pd(_mm256_mul_pd(_mm256_loadu_pd(nodes.w + i), c4pi), nd),
                              _mm256_mul_pd(r2, r));
    __m256d mask = _mm256_cmp_pd(r2, guard, _CMP_GT_OQ);
    _mm256_storeu_pd(out + i, _mm256_and_pd(v, mask));
  }
  for (std::size_t i = n4; i < nodes.n; ++i) {
    double dx = t.x - nodes.px[i];
    double dy = t.y - nodes.py[i];
    double dz = t.z - nodes.pz[i];
    double r2 = dx * dx + dy * dy + dz * dz;
    if (r2 <= kCoincident2) {
      out[i] = 0.0;
      continue;
    }
    double nd = nodes.nx[i] * dx + nodes.ny[i] * dy + nodes.nz[i] * dz;
    out[i] = nodes.w[i] * kInv4Pi * nd / (r2 * std::sqrt(r2));
  }
}

void ts_weights(Vec3 c, Vec3 x, int p, const NodeBlock& nodes, double* out, double* min_r2) {
  const Vec3 xcv = x - c;
  const double r = norm(xcv);
  const double inv_r = 1.0 / r;
  static thread_local std::vector<double> inv_n_tab;
  if (static_cast<int>(inv_n_tab.size()) < p + 1) {
    inv_n_tab.resize(p + 1);
    for (int n = 1; n <= p; ++n) inv_n_tab[n] = 1.0 / n;
  }

  const std::size_t n4 = nodes.n & ~std::size_t(3);
  __m256d cx = _mm256_set1_pd(c.x);
  __m256d cy = _mm256_set1_pd(c.y);
  __m256d cz = _mm256_set1_pd(c.z);
  __m256d xcx = _mm256_set1_pd(xcv.x);
  __m256d xcy = _mm256_set1_pd(xcv.y);
  __m256d xcz = _mm256_set1_pd(xcv.z);
  __m256d vinv_r = _mm256_set1_pd(inv_r);
  __m256d vr = _mm256_set1_pd(r);
  __m256d c4pi = _mm256_set1_pd(kInv4Pi);
  __m256d vmin = _mm256_set1_pd(1e300);
  __m256d one = _mm256_set1_pd(1.0);

  for (std::size_t i = 0; i < n4; i += 4) {
    __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(nodes.px + i), cx);
    __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(nodes.py + i), cy);
    __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(nodes.pz + i), cz);
    __m256d r2 = _mm256_fmadd_pd(dz, dz, _mm256_fmadd_pd(dy, dy, _mm256_mul_pd(dx, dx)));
    vmin = _mm256_min_pd(vmin, r2);
    __m256d R = _mm256_sqrt_pd(r2);
    __m256d t = _mm256_div_pd(one, R);
    __m256d alpha = _mm256_mul_pd(dx, xcx);
    alpha = _mm256_fmadd_pd(dy, xcy, alpha);
    alpha = _mm256_fmadd_pd(dz, xcz, alpha);
    __m256d u = _mm256_mul_pd(_mm256_mul_pd(alpha, t), vinv_r);
    __m256d nux = _mm256_loadu_pd(nodes.nx + i);
    __m256d nuy = _mm256_loadu_pd(nodes.ny + i);
    __m256d nuz = _mm256_loadu_pd(nodes.nz + i);
    __m256d nu_d = _mm256_mul_pd(nux, dx);
    nu_d = _mm256_fmadd_pd(nuy, dy, nu_d);
    nu_d = _mm256_fmadd_pd(nuz, dz, nu_d);
    __m256d nu_xc = _mm256_mul_pd(nux, xcx);
    nu_xc = _mm256_fmadd_pd(nuy, xcy, nu_xc);
    nu_xc = _mm256_fmadd_pd(nuz, xcz, nu_xc);
    __m256d a = _mm256_sub_pd(_mm256_setzero_pd(), nu_d);
    __m256d t2 = _mm256_mul_pd(t, t);
    __m256d A = _mm256_mul_pd(a, t2);
    __m256d E = _mm256_mul_pd(
        vinv_r, _mm256_fmadd_pd(_mm256_mul_pd(alpha, a), _mm256_mul_pd(t2, t),
                                _mm256_mul_pd(nu_xc, t)));
    __m256d rt = _mm256_mul_pd(vr, t);

    __m256d pn = one;
    __m256d pnm1 = _mm256_setzero_pd();
    __m256d dpn = _mm256_setzero_pd();
    __m256d dpnm1 = _mm256_setzero_pd();
    __m256d s = one;
    __m256d acc = A;  // (0+1) * P_0 * A
    for (int n = 1; n <= p; ++n) {
      __m256d c1 = _mm256_set1_pd(2.0 * n - 1.0);
      __m256d c2 = _mm256_set1_pd(static_cast<double>(n - 1));
      __m256d cinv = _mm256_set1_pd(inv_n_tab[n]);
      __m256d pnext = _mm256_mul_pd(
          _mm256_fmsub_pd(_mm256_mul_pd(c1, u), pn, _mm256_mul_pd(c2, pnm1)), cinv);
      __m256d dpnext = _mm256_fmadd_pd(c1, pn, dpnm1);
      pnm1 = pn;
      pn = pnext;
      dpnm1 = dpn;
      dpn = dpnext;
      s = _mm256_mul_pd(s, rt);
      __m256d term = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_set1_pd(n + 1.0), pn), A,
                                     _mm256_mul_pd(dpn, E));
      acc = _mm256_fmadd_pd(s, term, acc);
    }
    __m256d wv = _mm256_mul_pd(_mm256_loadu_pd(nodes.w + i), c4pi);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_mul_pd(wv, t), acc));
  }

  double mn = hmin(vmin);
  if (nodes.n > n4) {
    NodeBlock tail = nodes;
    tail.px += n4;
    tail.py += n4;
    tail.pz += n4;
    tail.nx += n4;
    tail.ny += n4;
    tail.nz += n4;
    tail.w += n4;
    tail.n = nodes.n - n4;
    double tail_min = 0.0;
    scalar::ts_weights(c, x, p, tail, out + n4, &tail_min);
    mn = std::min(mn, tail_min);
  }
  if (min_r2) *min_r2 = mn;
}

#else  // !QBX3D_HAVE_AVX2_TU

bool available() { return false; }
double dl_sum(Vec3 t, const NodeBlock& nodes, const double* qw) {
  return scalar::dl_sum(t, nodes, qw);
}
double sl_sum(Vec3 t, const NodeBlock& nodes, const double* qw) {
  return scalar::sl_sum(t, nodes, qw);
}
void dl_weights(Vec3 t, const NodeBlock& nodes, double* out) { scalar::dl_weights(t, nodes, out); }
void ts_weights(Vec3 c, Vec3 x, int p, const NodeBlock& nodes, double* out, double* min_r2) {
  scalar::ts_weights(c, x, p, nodes, out, min_r2);
}

#endif

}  // namespace qbx::kernels::avx2
