#include <cmath>

#include "qbx3d/kernels.hpp"

namespace qbx::kernels::scalar {

namespace {
constexpr double kInv4Pi = 1.0 / (4.0 * M_PI);
constexpr double kCoincident2 = 1e-28;  // (1e-14)^2
}  // namespace

double dl_sum(Vec3 t, const NodeBlock& nodes, const double* qw) {
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.n; ++i) {
    double dx = t.x - nodes.px[i];
    double dy = t.y - nodes.py[i];
    double dz = t.z - nodes.pz[i];
    double r2 = dx * dx + dy * dy + dz * dz;
    if (r2 <= kCoincident2) continue;
    double nd = nodes.nx[i] * dx + nodes.ny[i] * dy + nodes.nz[i] * dz;
    double r = std::sqrt(r2);
    acc += qw[i] * nd / (r2 * r);
  }
  return acc * kInv4Pi;
}

double sl_sum(Vec3 t, const NodeBlock& nodes, const double* qw) {
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.n; ++i) {
    double dx = t.x - nodes.px[i];
    double dy = t.y - nodes.py[i];
    double dz = t.z - nodes.pz[i];
    double r2 = dx * dx + dy * dy + dz * dz;
    if (r2 <= kCoincident2) continue;
    acc += qw[i] / std::sqrt(r2);
  }
  return acc * kInv4Pi;
}

void dl_weights(Vec3 t, const NodeBlock& nodes, double* out) {
  for (std::size_t i = 0; i < nodes.n; ++i) {
    double dx = t.x - nodes.px[i];
    double dy = t.y - nodes.py[i];
    double dz = t.z - nodes.pz[i];
    double r2 = dx * dx + dy * dy + dz * dz;
    if (r2 <= kCoincident2) {
      out[i] = 0.0;
      continue;
    }
    double nd = nodes.nx[i] * dx + nodes.ny[i] * dy + nodes.nz[i] * dz;
    double r = std::sqrt(r2);
    out[i] = nodes.w[i] * kInv4Pi * nd / (r2 * r);
  }
}

void ts_weights(Vec3 c, Vec3 x, int p, const NodeBlock& nodes, double* out, double* min_r2) {
  const Vec3 xc = x - c;
  const double r = norm(xc);
  const double inv_r = 1.0 / r;
  double mn = 1e300;
  for (std::size_t i = 0; i < nodes.n; ++i) {
    double dx = nodes.px[i] - c.x;
    double dy = nodes.py[i] - c.y;
    double dz = nodes.pz[i] - c.z;
    double r2 = dx * dx + dy * dy + dz * dz;
    if (r2 < mn) mn = r2;
    double R = std::sqrt(r2);
    double t = 1.0 / R;
    double alpha = dx * xc.x + dy * xc.y + dz * xc.z;
    double u = alpha * t * inv_r;
    double nu_d = nodes.nx[i] * dx + nodes.ny[i] * dy + nodes.nz[i] * dz;  // nu.(y-c)
    double nu_xc = nodes.nx[i] * xc.x + nodes.ny[i] * xc.y + nodes.nz[i] * xc.z;
    double a = -nu_d;                                         // nu.(c-y)
    double A = a * t * t;                                     // a/R^3 after the final 1/R
    double E = inv_r * (nu_xc * t + alpha * a * t * t * t);   // nu.grad_y u
    double rt = r * t;
    // n = 0: P_0 = 1, P_0' = 0
    double pn = 1.0, pnm1 = 0.0;
    double dpn = 0.0, dpnm1 = 0.0;
    double s = 1.0;
    double acc = 1.0 * pn * A;  // (n+1) P_n A with n = 0
    for (int n = 1; n <= p; ++n) {
      double pnext = ((2 * n - 1) * u * pn - (n - 1) * pnm1) / n;
      double dpnext = dpnm1 + (2 * n - 1) * pn;
      pnm1 = pn;
      pn = pnext;
      dpnm1 = dpn;
      dpn = dpnext;
      s *= rt;
      acc += s * ((n + 1) * pn * A + dpn * E);
    }
    out[i] = nodes.w[i] * kInv4Pi * t * acc;
  }
  if (min_r2) *min_r2 = mn;
}

}  // namespace qbx::kernels::scalar
