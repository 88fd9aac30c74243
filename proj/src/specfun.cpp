#include "qbx3d/specfun.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>

namespace qbx {

namespace {

constexpr int kMaxGaussOrder = 64;

GaussRule compute_gauss_rule(int q) {
  GaussRule rule;
  rule.order = q;
  rule.nodes.resize(q);
  rule.weights.resize(q);
  // Newton iteration on P_q from Chebyshev initial guesses. Roots come out
  // in decreasing order of the guess; store increasing.
  for (int i = 0; i < (q + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (q + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Evaluate P_q(x) and P_q'(x).
      double p0 = 1.0, p1 = x;
      for (int n = 2; n <= q; ++n) {
        double p2 = ((2 * n - 1) * x * p1 - (n - 1) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      double pq = (q == 1) ? x : p1;
      double pqm1 = (q == 1) ? 1.0 : p0;
      pp = q * (pqm1 - x * pq) / (1.0 - x * x);
      double dx = pq / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0, p1 = x;
    for (int n = 2; n <= q; ++n) {
      double p2 = ((2 * n - 1) * x * p1 - (n - 1) * p0) / n;
      p0 = p1;
      p1 = p2;
    }
    double pqm1 = (q == 1) ? 1.0 : p0;
    double pq = (q == 1) ? x : p1;
    pp = q * (pqm1 - x * pq) / (1.0 - x * x);
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.nodes[q - 1 - i] = x;
    rule.nodes[i] = -x;
    rule.weights[i] = w;
    rule.weights[q - 1 - i] = w;
  }
  if (q % 2 == 1) {
    rule.nodes[q / 2] = 0.0;
    // P_q'(0) via recursion
    double p0 = 1.0, p1 = 0.0;
    for (int n = 2; n <= q; ++n) {
      double p2 = (-(n - 1) * p0) / n;
      p0 = p1;
      p1 = p2;
    }
    double pp = q * p0;  // q*(P_{q-1}(0) - 0)/(1-0)
    if (q == 1) pp = 1.0;
    rule.weights[q / 2] = 2.0 / (pp * pp);
  }
  return rule;
}

}  // namespace

const GaussRule& gauss_rule(int q) {
  if (q < 1 || q > kMaxGaussOrder) throw std::invalid_argument("gauss_rule: unsupported order");
  static std::vector<GaussRule> cache(kMaxGaussOrder + 1);
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  if (cache[q].order != q) cache[q] = compute_gauss_rule(q);
  return cache[q];
}

std::vector<LegendreEval> legendre_all(int p, double x) {
  if (p < 0) throw std::invalid_argument("legendre_all: negative order");
  if (std::abs(x) > 1.0 + 1e-12) throw std::domain_error("legendre_all: |x| > 1");
  x = std::max(-1.0, std::min(1.0, x));
  std::vector<LegendreEval> out(p + 1);
  out[0] = {1.0, 0.0};
  if (p == 0) return out;
  out[1] = {x, 1.0};
  for (int n = 2; n <= p; ++n) {
    out[n].value = ((2 * n - 1) * x * out[n - 1].value - (n - 1) * out[n - 2].value) / n;
    // P'_n = P'_{n-2} + (2n-1) P_{n-1}
    out[n].derivative = out[n - 2].derivative + (2 * n - 1) * out[n - 1].value;
  }
  return out;
}

void assoc_legendre_all(int nmax, int m, double x, std::vector<double>& out) {
  if (m < 0 || nmax < m) throw std::invalid_argument("assoc_legendre_all: need 0 <= m <= nmax");
  x = std::max(-1.0, std::min(1.0, x));
  out.assign(nmax - m + 1, 0.0);
  double somx2 = std::sqrt(std::max(0.0, (1.0 - x) * (1.0 + x)));
  // P_m^m = (2m-1)!! (1-x^2)^{m/2}
  double pmm = 1.0;
  double fact = 1.0;
  for (int i = 0; i < m; ++i) {
    pmm *= fact * somx2;
    fact += 2.0;
  }
  out[0] = pmm;
  if (nmax == m) return;
  double pmmp1 = x * (2 * m + 1) * pmm;
  out[1] = pmmp1;
  for (int n = m + 2; n <= nmax; ++n) {
    double pnn = (x * (2 * n - 1) * pmmp1 - (n + m - 1) * pmm) / (n - m);
    pmm = pmmp1;
    pmmp1 = pnn;
    out[n - m] = pnn;
  }
}

namespace {

double ynm_norm(int n, int am) {
  double lg = std::lgamma(n - am + 1.0) - std::lgamma(n + am + 1.0);
  return std::sqrt((2 * n + 1) / (4.0 * M_PI) * std::exp(lg));
}

}  // namespace

std::complex<double> spherical_harmonic(int n, int m, double theta, double phi) {
  int am = std::abs(m);
  if (am > n) throw std::invalid_argument("spherical_harmonic: |m| > n");
  std::vector<double> pnm;
  assoc_legendre_all(n, am, std::cos(theta), pnm);
  double mag = ynm_norm(n, am) * pnm[n - am];
  return std::polar(1.0, m * phi) * mag;
}

std::complex<double> spherical_harmonic_dtheta(int n, int m, double theta, double phi) {
  int am = std::abs(m);
  if (am > n) throw std::invalid_argument("spherical_harmonic_dtheta: |m| > n");
  double x = std::cos(theta), s = std::sin(theta);
  std::vector<double> pnm;
  assoc_legendre_all(n, am, x, pnm);
  // d/dtheta P_n^m(cos t) = -[ (n+m) P_{n-1}^m - n x P_n^m ] / sin t
  double pn = pnm[n - am];
  double pn1 = (n - 1 >= am) ? pnm[n - 1 - am] : 0.0;
  double d = -((n + am) * pn1 - n * x * pn) / s;
  return std::polar(1.0, m * phi) * (ynm_norm(n, am) * d);
}

double log_binomial(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double lemma_binom_sum(int n, int m) {
  if (n < 2 || m < 1 || m > n / 2) throw std::invalid_argument("lemma_binom_sum: domain");
  double sum = 0.0;
  for (int j = 0; j <= n / 2; ++j) {
    double logmag = log_binomial(n, j) + log_binomial(2 * n - 2 * j, n);
    double sign = (j % 2 == 0) ? 1.0 : -1.0;
    for (int i = 1; i <= m; ++i) {
      double f = 2.0 * n - 2.0 * j - (2.0 * i - 1.0);
      logmag -= std::log(std::abs(f));
      if (f < 0) sign = -sign;
    }
    sum += sign * std::exp(logmag);
  }
  return sum;
}

bool legendre_coeff_bound_check(int n) {
  if (n < 0) return false;
  double logbound = n * std::log1p(std::sqrt(2.0));
  for (int k = 0; k <= n / 2; ++k) {
    double logmag = log_binomial(n, k) + log_binomial(2 * n - 2 * k, n) - n * std::log(2.0);
    if (logmag > logbound + 1e-12) return false;
  }
  return true;
}

}  // namespace qbx
