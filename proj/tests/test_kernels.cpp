#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "qbx3d/kernels.hpp"
#include "qbx3d/specfun.hpp"

using namespace qbx;

namespace {

struct Cloud {
  std::vector<double> px, py, pz, nx, ny, nz, w, qw;

  kernels::NodeBlock block() const {
    return {px.data(), py.data(), pz.data(), nx.data(), ny.data(), nz.data(), w.data(),
            px.size()};
  }
};

Cloud random_cloud(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Cloud c;
  for (int i = 0; i < n; ++i) {
    Vec3 p{dist(rng), dist(rng), dist(rng)};
    Vec3 nu = normalized({dist(rng) + 1.5, dist(rng), dist(rng)});
    c.px.push_back(p.x);
    c.py.push_back(p.y);
    c.pz.push_back(p.z);
    c.nx.push_back(nu.x);
    c.ny.push_back(nu.y);
    c.nz.push_back(nu.z);
    c.w.push_back(0.5 + 0.5 * std::abs(dist(rng)));
    c.qw.push_back(dist(rng));
  }
  return c;
}

// order-separated scalar reference for the fused ts_weights kernel
double ts_weight_reference(Vec3 c, Vec3 x, Vec3 y, Vec3 nu, double w, int p) {
  Vec3 d = y - c;
  Vec3 xc = x - c;
  double R = norm(d), r = norm(xc);
  double alpha = dot(d, xc);
  double u = alpha / (r * R);
  auto pn = legendre_all(p, std::clamp(u, -1.0, 1.0));
  double acc = 0.0;
  for (int n = 0; n <= p; ++n) {
    Vec3 grad = (n + 1.0) * std::pow(R, -(n + 3.0)) * pn[n].value * (-1.0 * d) +
                std::pow(R, -(n + 1.0)) * pn[n].derivative *
                    ((1.0 / (r * R)) * xc - (alpha / (r * R * R * R)) * d);
    acc += std::pow(r, n) * dot(nu, grad);
  }
  return w / (4.0 * M_PI) * acc;
}

}  // namespace

TEST_CASE("scalar ts_weights matches the order-separated gradient formula") {
  Cloud c = random_cloud(37, 5);
  Vec3 center{2.5, 0.1, -0.2}, target{2.3, 0.2, 0.0};
  std::vector<double> out(c.px.size());
  double min_r2 = 0.0;
  kernels::scalar::ts_weights(center, target, 12, c.block(), out.data(), &min_r2);
  for (std::size_t i = 0; i < c.px.size(); ++i) {
    double ref = ts_weight_reference(center, target, {c.px[i], c.py[i], c.pz[i]},
                                     {c.nx[i], c.ny[i], c.nz[i]}, c.w[i], 12);
    REQUIRE(out[i] == Catch::Approx(ref).epsilon(1e-12).margin(1e-15));
  }
}

TEST_CASE("ts_weights kernel sums the double layer when the series converges") {
  // a single far source: sum_n z_n r^n must reproduce K(x,y) w sigma
  Vec3 y{0.0, 0.0, 1.0}, nu{0.0, 0.0, 1.0};
  Vec3 center{0.0, 0.0, 3.0}, target{0.0, 0.2, 2.6};
  Cloud c;
  c.px = {y.x};
  c.py = {y.y};
  c.pz = {y.z};
  c.nx = {nu.x};
  c.ny = {nu.y};
  c.nz = {nu.z};
  c.w = {0.7};
  double out = 0.0;
  double min_r2 = 0.0;
  kernels::scalar::ts_weights(center, target, 60, c.block(), &out, &min_r2);
  double exact = 0.7 * dot(nu, target - y) / (4.0 * M_PI * std::pow(dist(target, y), 3.0));
  REQUIRE(out == Catch::Approx(exact).epsilon(1e-12));
  REQUIRE(min_r2 == Catch::Approx(norm2(y - center)));
}

TEST_CASE("avx2 variants agree with the scalar reference") {
  if (!kernels::avx2::available()) {
    SUCCEED("no AVX2 on this host");
    return;
  }
  for (int n : {1, 4, 7, 64, 253}) {
    Cloud c = random_cloud(n, 100 + n);
    Vec3 target{1.7, -0.3, 0.4};
    Vec3 center{2.2, -0.5, 0.6};

    double s_dl = kernels::scalar::dl_sum(target, c.block(), c.qw.data());
    double v_dl = kernels::avx2::dl_sum(target, c.block(), c.qw.data());
    REQUIRE(v_dl == Catch::Approx(s_dl).epsilon(1e-13).margin(1e-15));

    double s_sl = kernels::scalar::sl_sum(target, c.block(), c.qw.data());
    double v_sl = kernels::avx2::sl_sum(target, c.block(), c.qw.data());
    REQUIRE(v_sl == Catch::Approx(s_sl).epsilon(1e-13).margin(1e-15));

    std::vector<double> sw(n), vw(n);
    kernels::scalar::dl_weights(target, c.block(), sw.data());
    kernels::avx2::dl_weights(target, c.block(), vw.data());
    for (int i = 0; i < n; ++i) REQUIRE(vw[i] == Catch::Approx(sw[i]).epsilon(1e-13).margin(1e-16));

    double smin = 0, vmin = 0;
    kernels::scalar::ts_weights(center, target, 20, c.block(), sw.data(), &smin);
    kernels::avx2::ts_weights(center, target, 20, c.block(), vw.data(), &vmin);
    REQUIRE(vmin == Catch::Approx(smin).epsilon(1e-14));
    for (int i = 0; i < n; ++i)
      REQUIRE(vw[i] == Catch::Approx(sw[i]).epsilon(1e-12).margin(1e-15));
  }
}

TEST_CASE("coincident sources contribute zero") {
  Cloud c = random_cloud(9, 3);
  Vec3 target{c.px[4], c.py[4], c.pz[4]};
  double with = kernels::scalar::dl_sum(target, c.block(), c.qw.data());
  // removing the coincident node does not change the sum
  Cloud c2 = c;
  c2.qw[4] = 0.0;
  double without = kernels::scalar::dl_sum(target, c2.block(), c2.qw.data());
  REQUIRE(with == Catch::Approx(without).margin(1e-300));
}

TEST_CASE("dispatch honors force_scalar") {
  kernels::force_scalar(true);
  REQUIRE_FALSE(kernels::using_simd());
  kernels::force_scalar(false);
}
