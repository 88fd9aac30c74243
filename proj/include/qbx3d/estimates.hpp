#pragma once

namespace qbx {

// Inputs of the closed-form QBX error estimators. Lengths are physical; the
// estimators are pure functions used for parameter ordering and diagnostics,
// not certified bounds.
struct ErrorInputs {
  double h = 0;       // panel size
  int q = 7;          // quadrature order
  int p = 0;          // truncation order
  double r = 0;       // center-to-target distance
  double r_p = 0;     // panel-to-center distance
  double c = 0;       // signed center offset from the patch base point
  double R_bar = 0;   // patch radius
  double H = 0;       // mean curvature at the base point
  double sigma0 = 1;  // density magnitude at the base point
  double C = 1;       // calibration constant
};

// Flat-panel coefficient (quadrature) error:
//   |sigma| (h/q) sum_{l=0}^{p} [2 pi^{3/2} (2l)! / (Gamma(l+1/2) (l!)^2)]
//     (q r / h)^l e^{-4 q r_p / h}
// Factorials via log-gamma; returns +inf on overflow.
double coeff_error_estimate(const ErrorInputs& in);

// Truncation error of the local double layer potential (leading term plus
// curvature correction, alpha per the planar lemma).
double truncation_error_estimate_dl(const ErrorInputs& in);

// Single layer counterpart; leading term is a factor R_bar smaller.
double truncation_error_estimate_sl(const ErrorInputs& in);

}  // namespace qbx
