#include <atomic>
#include <cstdlib>

#include "qbx3d/kernels.hpp"

namespace qbx::kernels {

namespace {

std::atomic<bool> g_force_scalar{false};

bool simd_enabled() {
  static const bool env_scalar = [] {
    const char* v = std::getenv("QBX3D_FORCE_SCALAR");
    return v != nullptr && v[0] == '1';
  }();
  static const bool hw = avx2::available();
  return hw && !env_scalar && !g_force_scalar.load(std::memory_order_relaxed);
}

}  // namespace

void force_scalar(bool on) { g_force_scalar.store(on); }

bool using_simd() { return simd_enabled(); }

double dl_sum(Vec3 target, const NodeBlock& nodes, const double* qw) {
  return simd_enabled() ? avx2::dl_sum(target, nodes, qw) : scalar::dl_sum(target, nodes, qw);
}

double sl_sum(Vec3 target, const NodeBlock& nodes, const double* qw) {
  return simd_enabled() ? avx2::sl_sum(target, nodes, qw) : scalar::sl_sum(target, nodes, qw);
}

void dl_weights(Vec3 target, const NodeBlock& nodes, double* out) {
  if (simd_enabled())
    avx2::dl_weights(target, nodes, out);
  else
    scalar::dl_weights(target, nodes, out);
}

void ts_weights(Vec3 center, Vec3 target, int p, const NodeBlock& nodes, double* out,
                double* min_r2) {
  if (simd_enabled())
    avx2::ts_weights(center, target, p, nodes, out, min_r2);
  else
    scalar::ts_weights(center, target, p, nodes, out, min_r2);
}

}  // namespace qbx::kernels
