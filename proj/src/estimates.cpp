#include "qbx3d/estimates.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qbx {

namespace {

// alpha_k = 1 for odd k, |c|/sqrt(c^2 + R_bar^2) for even k
double alpha(int k, double c, double R_bar) {
  if (k % 2 == 1) return 1.0;
  return std::abs(c) / std::sqrt(c * c + R_bar * R_bar);
}

}  // namespace

double coeff_error_estimate(const ErrorInputs& in) {
  if (in.q < 2) throw std::invalid_argument("coeff_error_estimate: q >= 2");
  if (in.h <= 0) throw std::invalid_argument("coeff_error_estimate: h > 0");
  const double log_pref = std::log(2.0) + 1.5 * std::log(M_PI);
  const double expo = -4.0 * in.q * in.r_p / in.h;
  double sum = 0.0;
  for (int l = 0; l <= in.p; ++l) {
    double logterm = log_pref + std::lgamma(2.0 * l + 1.0) - std::lgamma(l + 0.5) -
                     2.0 * std::lgamma(l + 1.0);
    if (l > 0) {
      double ratio = in.q * in.r / in.h;
      if (ratio <= 0.0) continue;  // (qr/h)^l vanishes
      logterm += l * std::log(ratio);
    }
    logterm += expo;
    if (logterm > 700.0) return std::numeric_limits<double>::infinity();
    sum += std::exp(logterm);
  }
  return std::abs(in.sigma0) * (in.h / in.q) * sum;
}

double truncation_error_estimate_dl(const ErrorInputs& in) {
  const double D = std::sqrt(in.c * in.c + in.R_bar * in.R_bar);
  if (D <= 0.0) throw std::invalid_argument("truncation_error_estimate_dl: degenerate patch");
  const double lead_ratio = (1.0 + std::sqrt(2.0)) * in.r / D;
  const double lead = in.C * in.p * alpha(in.p + 1, in.c, in.R_bar) * std::abs(in.sigma0) *
                      std::pow(lead_ratio, in.p + 1);
  const double curv = alpha(in.p, in.c, in.R_bar) * in.p * std::abs(in.sigma0) * std::abs(in.H) *
                      in.R_bar * std::pow(in.r / D, in.p + 1);
  return lead + curv;
}

double truncation_error_estimate_sl(const ErrorInputs& in) {
  const double D = std::sqrt(in.c * in.c + in.R_bar * in.R_bar);
  if (D <= 0.0) throw std::invalid_argument("truncation_error_estimate_sl: degenerate patch");
  const double lead = in.C * alpha(in.p, in.c, in.R_bar) * std::abs(in.sigma0) *
                      std::pow((1.0 + std::sqrt(2.0)) * in.r, in.p + 1) / std::pow(D, in.p);
  const double curv = alpha(in.p + 1, in.c, in.R_bar) * std::abs(in.sigma0) * std::abs(in.H) *
                      in.R_bar * in.R_bar * std::pow(in.r / D, in.p + 1);
  return lead + curv;
}

}  // namespace qbx
