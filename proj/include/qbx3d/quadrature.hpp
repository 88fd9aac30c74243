#pragma once

#include <memory>
#include <vector>

#include "qbx3d/geometry.hpp"

namespace qbx {

enum class Layer { single, double_ };

// K(x,y) = nu(y).grad_y G(x,y) = (1/4pi) nu(y).(x-y)/|x-y|^3.
// Throws for |x-y| < 1e-14.
double double_layer_kernel(Vec3 x, Vec3 y, Vec3 nu_y);

// G(x,y) = 1/(4pi |x-y|), same guard.
double single_layer_kernel(Vec3 x, Vec3 y);

// Direct quadrature sum_i sigma_i K(x, y_i) w_i over all domain nodes, for
// each target. Coincident sources are skipped; accuracy near the surface
// degrades by design.
std::vector<double> direct_layer_eval(const Domain& domain, const std::vector<double>& sigma,
                                      const std::vector<Vec3>& targets, Layer layer);

// Barycentric weights of the q-point Gauss-Legendre nodes (second-form
// barycentric interpolation), cached per q.
const std::vector<double>& barycentric_weights(int q);

// Lagrange basis values l_j(s), j = 0..q-1, at a point s in [-1, 1].
void lagrange_basis(int q, double s, double* out);

// Row-major (kappa*q_fine) x q matrix mapping values at the parent q-point
// Gauss grid to the kappa sub-box q_fine-point Gauss grids; cached.
const std::vector<double>& interp_matrix_1d(int q, int kappa, int q_fine);

// Analytically evaluated fine geometry of one panel split into kappa^2
// sub-boxes with q_fine^2 Gauss nodes each. Arrays are padded to a multiple
// of four entries with zero-weight copies of the last node.
struct FinePanelGeometry {
  int panel = -1;
  int kappa = 1;
  int q_fine = 0;
  int n_fine = 0;    // real nodes
  int n_padded = 0;  // array length
  std::vector<double> px, py, pz, nx, ny, nz, w, theta, phi;

  kernels::NodeBlock block() const {
    return {px.data(), py.data(), pz.data(), nx.data(), ny.data(), nz.data(), w.data(),
            static_cast<std::size_t>(n_padded)};
  }
};

std::shared_ptr<const FinePanelGeometry> make_fine_geometry(const Domain& domain, int panel,
                                                            int kappa, int q_fine);

// Thread-safe cache of FinePanelGeometry keyed by (panel, kappa, q_fine).
class UpsampleCache {
 public:
  explicit UpsampleCache(const Domain& domain) : domain_(&domain) {}
  std::shared_ptr<const FinePanelGeometry> get(int panel, int kappa, int q_fine);

 private:
  const Domain* domain_;
  struct Impl;
  std::shared_ptr<Impl> impl_ = make_impl();
  static std::shared_ptr<Impl> make_impl();
};

// A panel's density carried onto its upsampled grid.
struct UpsampledPanel {
  std::shared_ptr<const FinePanelGeometry> geom;
  std::vector<double> density;  // padded like the geometry, pad entries zero
};

// Tensor-product barycentric interpolation of the q^2 panel values of sigma
// onto the kappa^2 q^2 fine grid; geometry evaluated analytically.
UpsampledPanel upsample(const Domain& domain, int panel, const double* sigma_panel, int kappa);

// Interpolate a panel-local density onto an existing fine grid (general
// q_fine); out is resized and padded with zeros.
void interpolate_to_fine(const Domain& domain, int panel, const double* sigma_panel,
                         const FinePanelGeometry& fine, std::vector<double>& out);

// Quadrature of the layer kernel against the upsampled density over one panel.
double upsampled_panel_quad(const UpsampledPanel& up, Vec3 target, Layer layer);

}  // namespace qbx
