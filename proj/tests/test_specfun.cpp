#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "qbx3d/specfun.hpp"

using namespace qbx;

namespace {

// Independent oracle: explicit monomial form
// P_n(z) = 2^{-n} sum_j (-1)^j C(n,j) C(2n-2j,n) z^{n-2j}, via log-gamma.
double legendre_monomial_form(int n, double z) {
  double sum = 0.0;
  for (int j = 0; j <= n / 2; ++j) {
    double logmag = log_binomial(n, j) + log_binomial(2 * n - 2 * j, n) - n * std::log(2.0);
    double term = std::exp(logmag) * std::pow(z, n - 2 * j);
    sum += (j % 2 == 0 ? term : -term);
  }
  return sum;
}

}  // namespace

TEST_CASE("gauss rules: endpoints and low orders") {
  const GaussRule& g1 = gauss_rule(1);
  REQUIRE(g1.nodes[0] == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(g1.weights[0] == Catch::Approx(2.0));

  const GaussRule& g2 = gauss_rule(2);
  REQUIRE(g2.nodes[0] == Catch::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-14));
  REQUIRE(g2.nodes[1] == Catch::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
  REQUIRE(g2.weights[0] == Catch::Approx(1.0).epsilon(1e-14));

  REQUIRE_THROWS(gauss_rule(0));
  REQUIRE_THROWS(gauss_rule(65));
}

TEST_CASE("gauss rules: symmetry, positivity, exactness up to 2q-1") {
  for (int q : {3, 7, 12, 31, 64}) {
    const GaussRule& g = gauss_rule(q);
    double wsum = 0.0;
    for (int i = 0; i < q; ++i) {
      REQUIRE(g.weights[i] > 0.0);
      wsum += g.weights[i];
      REQUIRE(g.nodes[i] == Catch::Approx(-g.nodes[q - 1 - i]).margin(1e-14));
      if (i > 0) REQUIRE(g.nodes[i] > g.nodes[i - 1]);
    }
    REQUIRE(wsum == Catch::Approx(2.0).epsilon(1e-14));
    // exactness on monomials x^j, j <= 2q-1: exact integral is 2/(j+1) for
    // even j, 0 for odd j
    for (int j = 0; j <= 2 * q - 1; ++j) {
      double s = 0.0;
      for (int i = 0; i < q; ++i) s += g.weights[i] * std::pow(g.nodes[i], j);
      double exact = (j % 2 == 0) ? 2.0 / (j + 1) : 0.0;
      REQUIRE(s == Catch::Approx(exact).margin(1e-13));
    }
  }
}

TEST_CASE("gauss q=7 integrates x^13 to zero") {
  const GaussRule& g = gauss_rule(7);
  double s = 0.0;
  for (int i = 0; i < 7; ++i) s += g.weights[i] * std::pow(g.nodes[i], 13);
  REQUIRE(std::abs(s) < 1e-14);
}

TEST_CASE("legendre_all: closed forms and the monomial oracle") {
  auto v = legendre_all(1, 0.7);
  REQUIRE(v[0].value == Catch::Approx(1.0));
  REQUIRE(v[1].value == Catch::Approx(0.7));

  auto w = legendre_all(2, 0.5);
  REQUIRE(w[2].value == Catch::Approx(-0.125).margin(1e-15));

  auto z = legendre_all(10, 0.3);
  REQUIRE(z[10].value == Catch::Approx(legendre_monomial_form(10, 0.3)).margin(1e-12));

  REQUIRE_THROWS_AS(legendre_all(3, 1.1), std::domain_error);
  REQUIRE_NOTHROW(legendre_all(3, 1.0 + 5e-13));
}

TEST_CASE("legendre recursion matches the monomial formula at random points") {
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    double x = dist(rng);
    auto v = legendre_all(40, x);
    for (int n : {5, 13, 27, 40}) {
      double ref = legendre_monomial_form(n, x);
      double scale = std::max(1.0, std::abs(ref));
      REQUIRE(std::abs(v[n].value - ref) / scale < 1e-10);
    }
    REQUIRE(std::abs(v[40].value) <= 1.0 + 1e-12);
  }
}

TEST_CASE("legendre derivatives agree with central differences") {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> dist(-0.95, 0.95);
  const double h = 1e-6;
  for (int trial = 0; trial < 25; ++trial) {
    double x = dist(rng);
    auto v = legendre_all(20, x);
    auto vp = legendre_all(20, x + h);
    auto vm = legendre_all(20, x - h);
    for (int n = 1; n <= 20; ++n) {
      double fd = (vp[n].value - vm[n].value) / (2 * h);
      REQUIRE(v[n].derivative == Catch::Approx(fd).margin(1e-6));
    }
  }
}

TEST_CASE("spherical harmonics: explicit values and orthonormality") {
  REQUIRE(spherical_harmonic(0, 0, 1.1, 2.3).real() ==
          Catch::Approx(1.0 / std::sqrt(4.0 * M_PI)).epsilon(1e-14));
  REQUIRE(spherical_harmonic(1, 0, 0.0, 0.0).real() ==
          Catch::Approx(std::sqrt(3.0 / (4.0 * M_PI))).epsilon(1e-13));
  REQUIRE_THROWS(spherical_harmonic(1, 2, 0.3, 0.4));

  // 1 = int |Y_2^2|^2 dS via Gauss in theta x trapezoid in phi
  const GaussRule& g = gauss_rule(32);
  const int nphi = 40;
  double integral = 0.0;
  for (int i = 0; i < 32; ++i) {
    double th = 0.5 * M_PI * (1.0 + g.nodes[i]);
    double wt = 0.5 * M_PI * g.weights[i];
    for (int j = 0; j < nphi; ++j) {
      double ph = 2.0 * M_PI * j / nphi;
      auto y = spherical_harmonic(2, 2, th, ph);
      integral += std::norm(y) * std::sin(th) * wt * (2.0 * M_PI / nphi);
    }
  }
  REQUIRE(integral == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("lemma: alternating binomial sums vanish") {
  // n=2, m=1 by hand: 6/3 - 2/1 = 0
  REQUIRE(lemma_binom_sum(2, 1) == Catch::Approx(0.0).margin(1e-12));

  for (int n = 2; n <= 30; ++n) {
    for (int m = 1; m <= n / 2; ++m) {
      // scale by the largest summand
      double largest = 0.0;
      for (int j = 0; j <= n / 2; ++j) {
        double logmag = log_binomial(n, j) + log_binomial(2 * n - 2 * j, n);
        for (int i = 1; i <= m; ++i) logmag -= std::log(std::abs(2.0 * n - 2.0 * j - (2 * i - 1)));
        largest = std::max(largest, std::exp(logmag));
      }
      REQUIRE(std::abs(lemma_binom_sum(n, m)) / largest < 1e-8);
    }
  }
}

TEST_CASE("lemma: legendre coefficient bound") {
  REQUIRE(legendre_coeff_bound_check(0));
  REQUIRE(legendre_coeff_bound_check(2));  // leading coefficient 3/2
  for (int n = 0; n <= 40; ++n) REQUIRE(legendre_coeff_bound_check(n));
}
