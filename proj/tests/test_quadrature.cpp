#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <random>

#include "qbx3d/quadrature.hpp"

using namespace qbx;

namespace {

Domain unit_sphere_domain(int n_theta, int q = 7) {
  Domain d;
  d.add_component(SurfaceShape::sphere(1.0), n_theta, n_theta);
  d.finalize(q);
  return d;
}

// adaptive tensor quadrature over a parameter box, for panel-integral oracles
double adaptive_box_quad(const std::function<double(double, double)>& f, double t0, double t1,
                         double p0, double p1, double tol, int depth = 0) {
  const GaussRule& g5 = gauss_rule(5);
  const GaussRule& g10 = gauss_rule(10);
  auto tensor = [&](const GaussRule& g) {
    double s = 0.0;
    for (int i = 0; i < g.order; ++i) {
      double th = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * g.nodes[i];
      for (int j = 0; j < g.order; ++j) {
        double ph = 0.5 * (p0 + p1) + 0.5 * (p1 - p0) * g.nodes[j];
        s += f(th, ph) * g.weights[i] * g.weights[j];
      }
    }
    return s * 0.25 * (t1 - t0) * (p1 - p0);
  };
  double coarse = tensor(g5), fine = tensor(g10);
  if (std::abs(fine - coarse) < tol || depth > 12) return fine;
  double tm = 0.5 * (t0 + t1), pm = 0.5 * (p0 + p1);
  return adaptive_box_quad(f, t0, tm, p0, pm, tol / 4, depth + 1) +
         adaptive_box_quad(f, t0, tm, pm, p1, tol / 4, depth + 1) +
         adaptive_box_quad(f, tm, t1, p0, pm, tol / 4, depth + 1) +
         adaptive_box_quad(f, tm, t1, pm, p1, tol / 4, depth + 1);
}

}  // namespace

TEST_CASE("double layer kernel: direct substitution and orthogonality") {
  REQUIRE(double_layer_kernel({0, 0, 2}, {0, 0, 1}, {0, 0, 1}) ==
          Catch::Approx(1.0 / (4.0 * M_PI)).epsilon(1e-15));
  REQUIRE(double_layer_kernel({1, 0, 1}, {0, 0, 1}, {0, 0, 1}) == Catch::Approx(0.0).margin(1e-18));
  REQUIRE_THROWS(double_layer_kernel({0, 0, 1}, {0, 0, 1}, {0, 0, 1}));
}

TEST_CASE("double layer kernel matches a finite-difference normal derivative of G") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double h = 1e-6;
  for (int t = 0; t < 40; ++t) {
    Vec3 x{u(rng) + 3.0, u(rng), u(rng)};
    Vec3 y{u(rng), u(rng), u(rng)};
    Vec3 nu = normalized({u(rng), u(rng), u(rng) + 1.3});
    double fd = (single_layer_kernel(x, y + h * nu) - single_layer_kernel(x, y - h * nu)) / (2 * h);
    REQUIRE(double_layer_kernel(x, y, nu) == Catch::Approx(fd).margin(1e-6));
  }
}

TEST_CASE("gauss identity: unit density double layer") {
  Domain d = unit_sphere_domain(8);
  std::vector<double> one(d.num_nodes(), 1.0);
  auto u = direct_layer_eval(d, one, {{0, 0, 0}, {10, 0, 0}}, Layer::double_);
  REQUIRE(u[0] == Catch::Approx(-1.0).margin(1e-10));
  REQUIRE(std::abs(u[1]) < 1e-10);
}

TEST_CASE("interior eigenfunction value of the double layer") {
  Domain d = unit_sphere_domain(8);
  std::vector<double> sigma(d.num_nodes());
  for (int i = 0; i < d.num_nodes(); ++i) {
    auto y = spherical_harmonic(2, 2, d.node_theta(i), d.node_phi(i));
    sigma[i] = y.real();
  }
  // target at rho = 0.5 along a generic direction
  double th = 1.1, ph = 0.7, rho = 0.5;
  Vec3 x = rho * Vec3{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
  auto u = direct_layer_eval(d, sigma, {x}, Layer::double_);
  double exact = -(3.0 / 5.0) * rho * rho * spherical_harmonic(2, 2, th, ph).real();
  REQUIRE(u[0] == Catch::Approx(exact).margin(1e-8));
}

TEST_CASE("direct_layer_eval is linear in the density") {
  Domain d = unit_sphere_domain(4);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> a(d.num_nodes()), b(d.num_nodes()), ab(d.num_nodes());
  for (int i = 0; i < d.num_nodes(); ++i) {
    a[i] = u(rng);
    b[i] = u(rng);
    ab[i] = 2.0 * a[i] - 3.0 * b[i];
  }
  std::vector<Vec3> targets{{0.1, 0.2, 0.3}, {3.0, -1.0, 0.4}};
  auto ua = direct_layer_eval(d, a, targets, Layer::double_);
  auto ub = direct_layer_eval(d, b, targets, Layer::double_);
  auto uab = direct_layer_eval(d, ab, targets, Layer::double_);
  for (std::size_t i = 0; i < targets.size(); ++i)
    REQUIRE(uab[i] == Catch::Approx(2.0 * ua[i] - 3.0 * ub[i]).margin(1e-14));
}

TEST_CASE("upsampling reproduces constants and low-degree polynomials") {
  Domain d = unit_sphere_domain(4);
  const int q = d.q();
  std::vector<double> cdens(q * q, 3.25);
  UpsampledPanel up = upsample(d, 5, cdens.data(), 3);
  for (int i = 0; i < up.geom->n_fine; ++i) REQUIRE(up.density[i] == Catch::Approx(3.25).epsilon(1e-14));

  // degree-6 bivariate polynomial is reproduced exactly by q=7 interpolation
  const Panel& P = d.panel(5);
  auto poly = [&](double th, double ph) {
    double s = 2.0 * (th - P.theta0) / (P.theta1 - P.theta0) - 1.0;
    double t = 2.0 * (ph - P.phi0) / (P.phi1 - P.phi0) - 1.0;
    return std::pow(s, 6) - 2.0 * std::pow(s, 3) * t + std::pow(t, 5) + 0.5;
  };
  std::vector<double> pd(q * q);
  kernels::NodeBlock nb = d.panel_nodes(5);
  for (int i = 0; i < q * q; ++i) {
    int off = P.node_offset + i;
    pd[i] = poly(d.node_theta(off), d.node_phi(off));
  }
  (void)nb;
  UpsampledPanel up2 = upsample(d, 5, pd.data(), 2);
  for (int i = 0; i < up2.geom->n_fine; ++i) {
    double want = poly(up2.geom->theta[i], up2.geom->phi[i]);
    REQUIRE(up2.density[i] == Catch::Approx(want).margin(1e-12));
  }
}

TEST_CASE("upsampling error of a smooth density decays like h^7") {
  auto f = [](double th, double ph) { return std::sin(3.0 * th) * std::cos(2.0 * ph); };
  double errs[2];
  int idx = 0;
  for (int nt : {4, 8}) {
    Domain d = unit_sphere_domain(nt);
    const int q = d.q();
    // pick an equatorial panel
    int panel = -1;
    for (std::size_t i = 0; i < d.panels().size(); ++i) {
      const Panel& P = d.panel(static_cast<int>(i));
      if (P.theta0 < M_PI / 2 && P.theta1 > M_PI / 2 + 1e-12) {
        panel = static_cast<int>(i);
        break;
      }
    }
    if (panel < 0) panel = static_cast<int>(d.panels().size()) / 2;
    std::vector<double> pd(q * q);
    const Panel& P = d.panel(panel);
    for (int i = 0; i < q * q; ++i)
      pd[i] = f(d.node_theta(P.node_offset + i), d.node_phi(P.node_offset + i));
    UpsampledPanel up = upsample(d, panel, pd.data(), 2);
    double err = 0.0;
    for (int i = 0; i < up.geom->n_fine; ++i)
      err = std::max(err, std::abs(up.density[i] - f(up.geom->theta[i], up.geom->phi[i])));
    errs[idx++] = err;
  }
  // halving h reduces the interpolation error by about 2^7
  REQUIRE(errs[0] / errs[1] > 40.0);
}

TEST_CASE("upsampled quadrature: kappa=1 identity and the gauss identity") {
  Domain d = unit_sphere_domain(8);
  std::vector<double> one(d.num_nodes(), 1.0);
  Vec3 inside{0.2, -0.1, 0.3};

  double direct = 0.0, up1 = 0.0, up2 = 0.0;
  for (std::size_t pi = 0; pi < d.panels().size(); ++pi) {
    std::vector<double> pd(d.q() * d.q(), 1.0);
    UpsampledPanel k1 = upsample(d, static_cast<int>(pi), pd.data(), 1);
    UpsampledPanel k2 = upsample(d, static_cast<int>(pi), pd.data(), 2);
    up1 += upsampled_panel_quad(k1, inside, Layer::double_);
    up2 += upsampled_panel_quad(k2, inside, Layer::double_);
    std::vector<double> qw(d.q() * d.q());
    kernels::NodeBlock nb = d.panel_nodes(static_cast<int>(pi));
    for (std::size_t i = 0; i < nb.n; ++i) qw[i] = nb.w[i];
    direct += kernels::dl_sum(inside, nb, qw.data());
  }
  REQUIRE(up1 == Catch::Approx(direct).margin(1e-13));
  REQUIRE(up2 == Catch::Approx(-1.0).margin(1e-12));
}

TEST_CASE("upsampled quadrature near a panel matches an adaptive oracle") {
  Domain d = unit_sphere_domain(8);
  const SurfaceShape& sh = d.component(0).shape;
  int panel = 12;
  const Panel& P = d.panel(panel);
  double thm = 0.5 * (P.theta0 + P.theta1), phm = 0.5 * (P.phi0 + P.phi1);
  Vec3 nu0;
  double W0;
  sh.normal_area(thm, phm, nu0, W0);
  Vec3 x = sh.position(thm, phm) + 0.1 * nu0;

  auto integrand = [&](double th, double ph) {
    Vec3 y = sh.position(th, ph);
    Vec3 nu;
    double W;
    sh.normal_area(th, ph, nu, W);
    return double_layer_kernel(x, y, nu) * W;
  };
  double oracle =
      adaptive_box_quad(integrand, P.theta0, P.theta1, P.phi0, P.phi1, 1e-12);

  std::vector<double> pd(d.q() * d.q(), 1.0);
  UpsampledPanel up = upsample(d, panel, pd.data(), 4);
  double got = upsampled_panel_quad(up, x, Layer::double_);
  REQUIRE(got == Catch::Approx(oracle).epsilon(1e-8));
}
