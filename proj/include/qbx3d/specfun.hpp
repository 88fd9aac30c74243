#pragma once

#include <complex>
#include <vector>

namespace qbx {

/// Tensorizable 1D Gauss-Legendre rule on (-1, 1).
struct GaussRule {
  int order = 0;
  std::vector<double> nodes;    // strictly increasing, symmetric about 0
  std::vector<double> weights;  // positive, sum to 2
};

/// Returns the q-point rule, computed once and cached. Throws for q outside [1, 64].
const GaussRule& gauss_rule(int q);

struct LegendreEval {
  double value = 0.0;
  double derivative = 0.0;
};

// P_n(x) and P_n'(x) for n = 0..p by the three-term recursions. x is clamped
// into [-1, 1] when within 1e-12 of the interval, rejected otherwise.
std::vector<LegendreEval> legendre_all(int p, double x);

// Associated Legendre P_n^m(x) (no Condon-Shortley phase) for n = m..nmax at
// fixed m >= 0, by upward recursion in n. out[k] holds P_{m+k}^m.
void assoc_legendre_all(int nmax, int m, double x, std::vector<double>& out);

// Spherical harmonic Y_n^m(theta, phi) with the normalization
// sqrt((2n+1)/4pi * (n-|m|)!/(n+|m|)!) P_n^{|m|}(cos theta) e^{i m phi}.
std::complex<double> spherical_harmonic(int n, int m, double theta, double phi);

// d/dtheta of Y_n^m at (theta, phi); undefined at the poles (sin theta = 0).
std::complex<double> spherical_harmonic_dtheta(int n, int m, double theta, double phi);

// log C(n, k) via lgamma; valid for real arguments with n >= k >= 0.
double log_binomial(double n, double k);

// Alternating binomial sum of Appendix-type identities:
//   sum_{j=0}^{floor(n/2)} (-1)^j C(n,j) C(2n-2j,n) / prod_{i=1}^{m} (2n-2j-form(2i-1))
// Exactly zero in exact arithmetic for 1 <= m <= floor(n/2), n >= 2.
double lemma_binom_sum(int n, int m);

// True iff every monomial coefficient d_k of P_n satisfies |d_k| <= (1+sqrt 2)^n.
bool legendre_coeff_bound_check(int n);

}  // namespace qbx
