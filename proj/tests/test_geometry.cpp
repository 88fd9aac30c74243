#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "qbx3d/geometry.hpp"

using namespace qbx;

namespace {

Domain unit_sphere_domain(int n_theta, int q = 7) {
  Domain d;
  d.add_component(SurfaceShape::sphere(1.0), n_theta, n_theta);
  d.finalize(q);
  return d;
}

// reference surface area by a fine tensor quadrature
double reference_area(const SurfaceShape& shape, int n = 400) {
  double area = 0.0;
  for (int i = 0; i < n; ++i) {
    double th = M_PI * (i + 0.5) / n;
    for (int j = 0; j < 2 * n; ++j) {
      double ph = 2.0 * M_PI * (j + 0.5) / (2 * n);
      Vec3 nu;
      double W;
      shape.normal_area(th, ph, nu, W);
      area += W * (M_PI / n) * (M_PI / n);
    }
  }
  return area;
}

}  // namespace

TEST_CASE("panel tiling: counts and unit-sphere area") {
  Domain d = unit_sphere_domain(4);
  REQUIRE(d.panels().size() == 16);
  REQUIRE(d.num_nodes() == 784);
  double sum = 0.0;
  for (double w : d.weights()) sum += w;
  REQUIRE(sum == Catch::Approx(4.0 * M_PI).epsilon(1e-8));
}

TEST_CASE("panel tiling rejects degenerate shapes") {
  REQUIRE_THROWS(SurfaceShape::sphere(-1.0));
  REQUIRE_THROWS(SurfaceShape::ellipsoid(1.0, 0.0, 2.0));
}

TEST_CASE("area error decreases under refinement") {
  double prev = 1e9;
  for (int nt : {4, 8, 16}) {
    Domain d = unit_sphere_domain(nt);
    double sum = 0.0;
    for (double w : d.weights()) sum += w;
    double err = std::abs(sum - 4.0 * M_PI);
    REQUIRE(err < prev);
    prev = err;
  }
}

TEST_CASE("ellipsoid area matches a reference quadrature") {
  SurfaceShape e = SurfaceShape::ellipsoid(0.5, 1.0, 2.0);
  Domain d;
  d.add_component(e, 8, 8);
  d.finalize(7);
  double sum = 0.0;
  for (double w : d.weights()) sum += w;
  REQUIRE(sum == Catch::Approx(reference_area(e)).epsilon(1e-6));
}

TEST_CASE("sphere normals are radial") {
  Domain d = unit_sphere_domain(6);
  for (int i = 0; i < d.num_nodes(); i += 7) {
    Vec3 p = d.node_position(i);
    Vec3 nu = d.node_normal(i);
    REQUIRE(dist(nu, normalized(p)) < 1e-12);
  }
}

TEST_CASE("fourfold shape is quarter-periodic in phi") {
  SurfaceShape f = SurfaceShape::fourfold(0.3);
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> dist01(0.05, 0.95);
  for (int t = 0; t < 50; ++t) {
    double th = M_PI * dist01(rng);
    double ph = 2.0 * M_PI * dist01(rng);
    Vec3 a = f.position(th, ph);
    Vec3 b = f.position(th, ph + M_PI / 2.0);
    // rotate a by pi/2 about z
    Vec3 ar{-a.y, a.x, a.z};
    REQUIRE(dist(ar, b) < 1e-12);
  }
}

TEST_CASE("panel_distance: node hit, center, and dense-sampling oracle") {
  Domain d = unit_sphere_domain(8);
  const Panel& P = d.panel(3);
  kernels::NodeBlock nb = d.panel_nodes(3);
  Vec3 node{nb.px[10], nb.py[10], nb.pz[10]};
  REQUIRE(panel_distance(node, P) < 1e-12);
  REQUIRE(panel_distance({0, 0, 0}, P) == Catch::Approx(1.0).margin(P.probe_spacing));

  // dense kappa=16 oracle
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const SurfaceShape& sh = d.component(0).shape;
  for (int t = 0; t < 20; ++t) {
    Vec3 x{u(rng), u(rng), u(rng)};
    double dense = 1e300;
    for (int i = 0; i < 64; ++i) {
      double th = P.theta0 + (P.theta1 - P.theta0) * (i + 0.5) / 64;
      for (int j = 0; j < 64; ++j) {
        double ph = P.phi0 + (P.phi1 - P.phi0) * (j + 0.5) / 64;
        dense = std::min(dense, dist(x, sh.position(th, ph)));
      }
    }
    double est = panel_distance(x, P);
    REQUIRE(est >= dense - 1e-12);
    REQUIRE(est <= dense + P.probe_spacing);
  }
}

TEST_CASE("panels_within equals a brute-force scan") {
  Domain d = unit_sphere_domain(8);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.6, 1.6);
  std::uniform_real_distribution<double> cut(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    Vec3 x{u(rng), u(rng), u(rng)};
    double cutoff = cut(rng);
    std::vector<int> got = panels_within(x, cutoff, d);
    std::vector<int> want;
    for (std::size_t i = 0; i < d.panels().size(); ++i)
      if (panel_distance(x, d.panel(static_cast<int>(i))) <= cutoff)
        want.push_back(static_cast<int>(i));
    REQUIRE(got == want);
  }
  // trivial cutoffs
  REQUIRE(panels_within({1.5, 0, 0}, 0.0, d).empty());
  REQUIRE(panels_within({0.3, 0.2, 0.1}, 10.0, d).size() == d.panels().size());
}

TEST_CASE("nearest_surface_point on spheres is exact") {
  Domain d = unit_sphere_domain(4);
  NearestPoint np = nearest_surface_point(d, 0, {0, 0, 1.3});
  REQUIRE(dist(np.point, {0, 0, 1}) < 1e-14);
  REQUIRE(dist(np.normal, {0, 0, 1}) < 1e-14);
  REQUIRE(np.distance == Catch::Approx(0.3).margin(1e-14));

  NearestPoint ni = nearest_surface_point(d, 0, {0, 0, 0.7});
  REQUIRE(dist(ni.point, {0, 0, 1}) < 1e-14);
  REQUIRE(ni.distance == Catch::Approx(0.3).margin(1e-14));
}

TEST_CASE("nearest_surface_point on an ellipsoid satisfies optimality") {
  Domain d;
  d.add_component(SurfaceShape::ellipsoid(0.5, 1.0, 2.0), 8, 8);
  d.finalize(7);
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  for (int t = 0; t < 30; ++t) {
    Vec3 x{u(rng), u(rng), u(rng)};
    NearestPoint np = nearest_surface_point(d, 0, x);
    REQUIRE(np.converged);
    REQUIRE(np.residual < 1e-12);
    // distance is no larger than to any probe point
    for (const Panel& P : d.panels()) {
      REQUIRE(np.distance <= panel_distance(x, P) + 1e-10);
    }
  }
}
