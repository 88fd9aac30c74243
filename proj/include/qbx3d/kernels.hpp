#pragma once

#include <cstddef>

#include "qbx3d/vec3.hpp"

namespace qbx::kernels {

// Structure-of-arrays view of quadrature nodes (positions, unit normals,
// scalar weights). All pointers must stay valid for the call.
struct NodeBlock {
  const double* px = nullptr;
  const double* py = nullptr;
  const double* pz = nullptr;
  const double* nx = nullptr;
  const double* ny = nullptr;
  const double* nz = nullptr;
  const double* w = nullptr;
  std::size_t n = 0;
};

// Scalar reference implementations. These define the semantics; the AVX2
// variants must agree with them to rounding.
namespace scalar {

// sum_i qw[i] * nu_i . (x - y_i) / |x - y_i|^3 / (4 pi).
// Sources with |x - y_i| <= 1e-14 contribute zero.
double dl_sum(Vec3 target, const NodeBlock& nodes, const double* qw);

// sum_i qw[i] / (4 pi |x - y_i|), same coincidence guard.
double sl_sum(Vec3 target, const NodeBlock& nodes, const double* qw);

// Per-node double layer quadrature weights: out[i] = w_i K(x, y_i).
void dl_weights(Vec3 target, const NodeBlock& nodes, double* out);

// Per-node target-specific QBX correction weights:
//   out[i] = w_i/(4 pi) * sum_{n=0}^{p} r^n nu_i . grad_y [ R^{-(n+1)} P_n(alpha/(r R)) ]
// with R = |y_i - c|, r = |x - c|, alpha = (y_i - c).(x - c). Also reports the
// minimum R^2 over the block for the convergence-ball check.
void ts_weights(Vec3 center, Vec3 target, int p, const NodeBlock& nodes, double* out,
                double* min_r2);

}  // namespace scalar

namespace avx2 {

bool available();  // true when this binary can run the AVX2 paths on this CPU

double dl_sum(Vec3 target, const NodeBlock& nodes, const double* qw);
double sl_sum(Vec3 target, const NodeBlock& nodes, const double* qw);
void dl_weights(Vec3 target, const NodeBlock& nodes, double* out);
void ts_weights(Vec3 center, Vec3 target, int p, const NodeBlock& nodes, double* out,
                double* min_r2);

}  // namespace avx2

// Runtime-dispatched entry points. Default to the AVX2 variants when the CPU
// supports them, otherwise the scalar reference; see force_scalar().
double dl_sum(Vec3 target, const NodeBlock& nodes, const double* qw);
double sl_sum(Vec3 target, const NodeBlock& nodes, const double* qw);
void dl_weights(Vec3 target, const NodeBlock& nodes, double* out);
void ts_weights(Vec3 center, Vec3 target, int p, const NodeBlock& nodes, double* out,
                double* min_r2);

// Pin dispatch to the scalar path (also honored via QBX3D_FORCE_SCALAR=1).
void force_scalar(bool on);
bool using_simd();

}  // namespace qbx::kernels
