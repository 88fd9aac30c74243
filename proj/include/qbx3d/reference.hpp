#pragma once

#include <vector>

#include "qbx3d/quadrature.hpp"

namespace qbx {

enum class Side;  // from qbx.hpp

// Re Y_l^m(theta, phi).
double re_sph_harm(int l, int m, double theta, double phi);

// Eigenfunction identity of the on-surface double layer on the unit sphere:
// D[Re Y_l^m](x) = -Re Y_l^m(x) / (4l + 2) (principal value).
double eigen_dl_value(int l, int m, double theta, double phi);

// Separation-of-variables solution of the Dirichlet problem on the unit
// sphere with boundary density Re Y_l^m:
//   interior (rho < 1):  -(l+1)/(2l+1) rho^l      Re Y_l^m
//   exterior (rho > 1):   l/(2l+1)     rho^-(l+1) Re Y_l^m
double separation_solution(int l, int m, double rho, double theta, double phi, bool interior);

struct PointChargeSet {
  std::vector<Vec3> positions;
  std::vector<double> strengths;
};

// Deterministic n_theta x n_phi tensor grid of unit charges on the sphere of
// the given radius about `center` (theta offset by half a cell).
PointChargeSet make_point_charges(Vec3 center, double radius, int n_theta = 7, int n_phi = 7);

// sum_j s_j / (4 pi |x - y_j|).
double point_charge_potential(const PointChargeSet& charges, Vec3 x);

// Appendix-level equivalence of the Cartesian Taylor shells and the Legendre
// form: returns max_n |sum_{||k||=n} b_k (x-c)^k - (r^n/R^{n+1}) P_n(alpha/(rR))|
// over n <= p. Requires |x-c| < |y-c|.
double expansion_equivalence_check(Vec3 c, Vec3 x, Vec3 y, int p);

// Truncated-sum tail of the same check: |sum_{n<=p} B_n - 1/|x-y||.
double expansion_partial_sum_error(Vec3 c, Vec3 x, Vec3 y, int p);

// Spherical-harmonics QBX oracle: evaluates the truncated local expansion via
// the (p+1)^2 target-independent coefficients z_nm on the same fine nodes.
// Kept as a cross-check for the target-specific path, not a production route.
double sh_qbx_eval(const std::vector<UpsampledPanel>& patch, Vec3 center, Vec3 target, int p);

}  // namespace qbx
