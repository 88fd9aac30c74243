#include "qbx3d/reference.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "qbx3d/specfun.hpp"
#include "qbx3d/treecode.hpp"

namespace qbx {

double re_sph_harm(int l, int m, double theta, double phi) {
  return spherical_harmonic(l, m, theta, phi).real();
}

double eigen_dl_value(int l, int m, double theta, double phi) {
  if (std::abs(m) > l) throw std::invalid_argument("eigen_dl_value: |m| > l");
  return -re_sph_harm(l, m, theta, phi) / (4.0 * l + 2.0);
}

double separation_solution(int l, int m, double rho, double theta, double phi, bool interior) {
  if (interior && rho >= 1.0) throw std::invalid_argument("separation_solution: need rho < 1");
  if (!interior && rho <= 1.0) throw std::invalid_argument("separation_solution: need rho > 1");
  double y = re_sph_harm(l, m, theta, phi);
  if (interior) return -(l + 1.0) / (2.0 * l + 1.0) * std::pow(rho, l) * y;
  return l / (2.0 * l + 1.0) * std::pow(rho, -(l + 1.0)) * y;
}

PointChargeSet make_point_charges(Vec3 center, double radius, int n_theta, int n_phi) {
  PointChargeSet set;
  for (int i = 0; i < n_theta; ++i) {
    double th = M_PI * (i + 0.5) / n_theta;
    for (int j = 0; j < n_phi; ++j) {
      double ph = 2.0 * M_PI * j / n_phi;
      set.positions.push_back(center + radius * Vec3{std::sin(th) * std::cos(ph),
                                                     std::sin(th) * std::sin(ph), std::cos(th)});
      set.strengths.push_back(1.0);
    }
  }
  return set;
}

double point_charge_potential(const PointChargeSet& charges, Vec3 x) {
  double acc = 0.0;
  for (std::size_t j = 0; j < charges.positions.size(); ++j) {
    double r = dist(x, charges.positions[j]);
    if (r < 1e-14) throw std::domain_error("point_charge_potential: coincident point");
    acc += charges.strengths[j] / r;
  }
  return acc / (4.0 * M_PI);
}

namespace {

// shell sums B_n of the Taylor coefficients
std::vector<double> taylor_shell_sums(Vec3 c, Vec3 x, Vec3 y, int p) {
  TaylorCoeffs tc = taylor_coeffs_bk(c, y, p);
  Vec3 d = x - c;
  std::vector<double> X(p + 1), Y(p + 1), Z(p + 1);
  X[0] = Y[0] = Z[0] = 1.0;
  for (int a = 1; a <= p; ++a) {
    X[a] = X[a - 1] * d.x;
    Y[a] = Y[a - 1] * d.y;
    Z[a] = Z[a - 1] * d.z;
  }
  std::vector<double> B(p + 1, 0.0);
  for (int n = 0; n <= p; ++n) {
    double s = 0.0;
    for (int k1 = 0; k1 <= n; ++k1) {
      for (int k2 = 0; k2 <= n - k1; ++k2) {
        int k3 = n - k1 - k2;
        s += tc.at(k1, k2, k3) * X[k1] * Y[k2] * Z[k3];
      }
    }
    B[n] = s;
  }
  return B;
}

}  // namespace

double expansion_equivalence_check(Vec3 c, Vec3 x, Vec3 y, int p) {
  double r = dist(x, c), R = dist(y, c);
  if (r >= R) throw std::domain_error("expansion_equivalence_check: |x-c| < |y-c| required");
  std::vector<double> B = taylor_shell_sums(c, x, y, p);
  double alpha = dot(y - c, x - c);
  double u = r > 0 ? alpha / (r * R) : 1.0;
  std::vector<LegendreEval> pn = legendre_all(p, std::clamp(u, -1.0, 1.0));
  double dev = 0.0;
  double rn = 1.0, Rn1 = 1.0 / R;
  for (int n = 0; n <= p; ++n) {
    double legendre_form = rn * Rn1 * pn[n].value;
    dev = std::max(dev, std::abs(B[n] - legendre_form));
    rn *= r;
    Rn1 /= R;
  }
  return dev;
}

double expansion_partial_sum_error(Vec3 c, Vec3 x, Vec3 y, int p) {
  std::vector<double> B = taylor_shell_sums(c, x, y, p);
  double s = 0.0;
  for (double b : B) s += b;
  return std::abs(s - 1.0 / dist(x, y));
}

double sh_qbx_eval(const std::vector<UpsampledPanel>& patch, Vec3 c, Vec3 x, int p) {
  using cplx = std::complex<double>;
  // z_nm = (1/4pi) int sigma nu . grad_y [ R^{-(n+1)} Y_n^m(theta_y, phi_y) ]
  std::vector<cplx> znm(static_cast<std::size_t>(p + 1) * (2 * p + 1), 0.0);
  auto zat = [&](int n, int m) -> cplx& {
    return znm[static_cast<std::size_t>(n) * (2 * p + 1) + (m + p)];
  };
  for (const UpsampledPanel& up : patch) {
    const FinePanelGeometry& g = *up.geom;
    for (int i = 0; i < g.n_fine; ++i) {
      Vec3 d = Vec3{g.px[i], g.py[i], g.pz[i]} - c;
      double R = norm(d);
      double ct = std::clamp(d.z / R, -1.0, 1.0);
      double theta = std::acos(ct);
      double phi = std::atan2(d.y, d.x);
      double st = std::sin(theta);
      Vec3 rhat = d / R;
      Vec3 that{ct * std::cos(phi), ct * std::sin(phi), -st};
      Vec3 phat{-std::sin(phi), std::cos(phi), 0.0};
      Vec3 nu{g.nx[i], g.ny[i], g.nz[i]};
      double sw = up.density[i] * g.w[i] / (4.0 * M_PI);
      for (int n = 0; n <= p; ++n) {
        double Rpow = std::pow(R, -(n + 2.0));
        for (int m = -n; m <= n; ++m) {
          cplx Y = spherical_harmonic(n, m, theta, phi);
          cplx Yt = spherical_harmonic_dtheta(n, m, theta, phi);
          cplx Yp = cplx(0.0, m) * Y;
          cplx grad_dot_nu = Rpow * (-(n + 1.0) * Y * dot(nu, rhat) + Yt * dot(nu, that) +
                                     (st > 1e-13 ? Yp / st : cplx(0.0)) * dot(nu, phat));
          zat(n, m) += sw * grad_dot_nu;
        }
      }
    }
  }
  Vec3 dx = x - c;
  double r = norm(dx);
  double ctx = std::clamp(dx.z / std::max(r, 1e-300), -1.0, 1.0);
  double thx = std::acos(ctx);
  double phx = std::atan2(dx.y, dx.x);
  cplx total = 0.0;
  double rn = 1.0;
  for (int n = 0; n <= p; ++n) {
    cplx shell = 0.0;
    for (int m = -n; m <= n; ++m)
      shell += zat(n, m) * spherical_harmonic(n, -m, thx, phx);
    total += 4.0 * M_PI / (2.0 * n + 1.0) * shell * rn;
    rn *= r;
  }
  return total.real();
}

}  // namespace qbx
