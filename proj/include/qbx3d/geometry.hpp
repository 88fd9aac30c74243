#pragma once

#include <string>
#include <vector>

#include "qbx3d/kernels.hpp"
#include "qbx3d/vec3.hpp"

namespace qbx {

enum class ShapeKind { sphere, ellipsoid, fourfold, plane };

// Parametric surface x(theta, phi). The closed shapes are parameterized over
// [0, pi] x [0, 2 pi); the plane kind is a flat rectangular patch used by
// tests and the error-estimate experiments, parameterized over its extents.
class SurfaceShape {
 public:
  static SurfaceShape sphere(double radius, Vec3 center = {});
  static SurfaceShape ellipsoid(double a, double b, double c, Vec3 center = {});
  static SurfaceShape fourfold(double epsilon, Vec3 center = {});
  // Flat patch origin + u*e1 + v*e2, (u, v) in [0, extent1] x [0, extent2].
  static SurfaceShape flat_patch(Vec3 origin, Vec3 e1, Vec3 e2, double extent1, double extent2);

  ShapeKind kind() const { return kind_; }
  Vec3 center() const { return center_; }
  bool closed() const { return kind_ != ShapeKind::plane; }

  double param_theta_max() const;
  double param_phi_max() const;

  Vec3 position(double theta, double phi) const;
  void first_partials(double theta, double phi, Vec3& xt, Vec3& xp) const;
  void second_partials(double theta, double phi, Vec3& xtt, Vec3& xtp, Vec3& xpp) const;
  // Outward unit normal and area element W = |x_theta x x_phi|.
  void normal_area(double theta, double phi, Vec3& nu, double& W) const;

  // Largest distance from the center to the surface; sets length scales.
  double bounding_radius() const;

  double radius() const { return a_; }     // sphere
  double epsilon() const { return a_; }    // fourfold
  void semiaxes(double& a, double& b, double& c) const { a = a_; b = b_; c = c_; }

 private:
  ShapeKind kind_ = ShapeKind::sphere;
  Vec3 center_{};
  double a_ = 1.0, b_ = 1.0, c_ = 1.0;
  Vec3 origin_{}, e1_{}, e2_{};  // plane
};

struct Panel {
  int component = 0;
  double theta0 = 0, theta1 = 0, phi0 = 0, phi1 = 0;
  int q = 0;
  int node_offset = 0;  // into the domain-global node arrays; q*q nodes
  Vec3 bound_center{};
  double bound_radius = 0;
  double h_param = 0;  // max parameter extent of the box
  // kappa=4 probe cloud for conservative distance queries
  std::vector<Vec3> probe;
  double probe_spacing = 0;
};

struct ComponentInfo {
  SurfaceShape shape;
  int n_theta = 0, n_phi = 0, q = 0;
  int panel_offset = 0, panel_count = 0;
  int node_offset = 0, node_count = 0;
  double area = 0;        // sum of quadrature weights
  Vec3 interior_probe{};  // used by the rank-M operator
  double h_bar = 0;       // typical panel physical dimension
};

struct NearestPoint {
  Vec3 point{};
  Vec3 normal{};
  double distance = 0;
  double residual = 0;  // normalized tangential gradient at the solution
  bool converged = true;
};

// A multiply-connected boundary: disjoint closed components tiled into
// tensor Gauss-Legendre panels with a global node ordering
// (component, panel, node). Immutable once built.
class Domain {
 public:
  void add_component(const SurfaceShape& shape, int n_theta, int n_phi);
  void finalize(int q = 7);

  int num_components() const { return static_cast<int>(components_.size()); }
  const ComponentInfo& component(int k) const { return components_[k]; }
  const std::vector<Panel>& panels() const { return panels_; }
  const Panel& panel(int gp) const { return panels_[gp]; }
  int num_nodes() const { return static_cast<int>(px_.size()); }
  int q() const { return q_; }

  kernels::NodeBlock nodes() const;
  kernels::NodeBlock panel_nodes(int gp) const;

  Vec3 node_position(int i) const { return {px_[i], py_[i], pz_[i]}; }
  Vec3 node_normal(int i) const { return {nx_[i], ny_[i], nz_[i]}; }
  double node_weight(int i) const { return w_[i]; }
  double node_theta(int i) const { return theta_[i]; }
  double node_phi(int i) const { return phi_[i]; }
  int node_component(int i) const { return node_component_[i]; }
  int node_panel(int i) const { return node_panel_[i]; }

  const std::vector<double>& weights() const { return w_; }

 private:
  friend Domain;
  std::vector<ComponentInfo> components_;
  std::vector<Panel> panels_;
  std::vector<double> px_, py_, pz_, nx_, ny_, nz_, w_, theta_, phi_;
  std::vector<int> node_component_, node_panel_;
  int q_ = 7;
  bool finalized_ = false;
};

// Conservative distance from a target to a panel: min over the panel's probe
// cloud. Never less than the true distance minus zero, never more than the
// true distance plus the cloud spacing.
double panel_distance(Vec3 target, const Panel& panel);

// Global ids of panels with panel_distance <= cutoff; bounding-sphere
// rejection first, then the probe scan.
std::vector<int> panels_within(Vec3 target, double cutoff, const Domain& domain);

// Closest point on a component's surface via Newton iteration in (theta, phi)
// seeded from the best panel node. Spheres are handled in closed form.
NearestPoint nearest_surface_point(const Domain& domain, int component, Vec3 target);

}  // namespace qbx
