#include "qbx3d/geometry.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qbx3d/specfun.hpp"

namespace qbx {

SurfaceShape SurfaceShape::sphere(double radius, Vec3 center) {
  if (radius <= 0) throw std::invalid_argument("sphere: radius must be positive");
  SurfaceShape s;
  s.kind_ = ShapeKind::sphere;
  s.center_ = center;
  s.a_ = radius;
  return s;
}

SurfaceShape SurfaceShape::ellipsoid(double a, double b, double c, Vec3 center) {
  if (a <= 0 || b <= 0 || c <= 0) throw std::invalid_argument("ellipsoid: semiaxes must be positive");
  SurfaceShape s;
  s.kind_ = ShapeKind::ellipsoid;
  s.center_ = center;
  s.a_ = a;
  s.b_ = b;
  s.c_ = c;
  return s;
}

SurfaceShape SurfaceShape::fourfold(double epsilon, Vec3 center) {
  if (epsilon <= -1.0 || epsilon >= 1.0) throw std::invalid_argument("fourfold: |epsilon| < 1 required");
  SurfaceShape s;
  s.kind_ = ShapeKind::fourfold;
  s.center_ = center;
  s.a_ = epsilon;
  return s;
}

SurfaceShape SurfaceShape::flat_patch(Vec3 origin, Vec3 e1, Vec3 e2, double extent1,
                                      double extent2) {
  if (extent1 <= 0 || extent2 <= 0) throw std::invalid_argument("flat_patch: extents must be positive");
  SurfaceShape s;
  s.kind_ = ShapeKind::plane;
  s.origin_ = origin;
  s.center_ = origin + 0.5 * extent1 * e1 + 0.5 * extent2 * e2;
  s.e1_ = e1;
  s.e2_ = e2;
  s.a_ = extent1;
  s.b_ = extent2;
  return s;
}

double SurfaceShape::param_theta_max() const { return kind_ == ShapeKind::plane ? a_ : M_PI; }
double SurfaceShape::param_phi_max() const { return kind_ == ShapeKind::plane ? b_ : 2.0 * M_PI; }

namespace {

inline Vec3 omega(double st, double ct, double sp, double cp) { return {st * cp, st * sp, ct}; }

}  // namespace

Vec3 SurfaceShape::position(double t, double p) const {
  double st = std::sin(t), ct = std::cos(t), sp = std::sin(p), cp = std::cos(p);
  switch (kind_) {
    case ShapeKind::sphere:
      return center_ + a_ * omega(st, ct, sp, cp);
    case ShapeKind::ellipsoid:
      return center_ + Vec3{a_ * st * cp, b_ * st * sp, c_ * ct};
    case ShapeKind::fourfold: {
      double rho = 1.0 + a_ * st * st * std::cos(4.0 * p);
      return center_ + rho * omega(st, ct, sp, cp);
    }
    case ShapeKind::plane:
      return origin_ + t * e1_ + p * e2_;
  }
  return {};
}

void SurfaceShape::first_partials(double t, double p, Vec3& xt, Vec3& xp) const {
  double st = std::sin(t), ct = std::cos(t), sp = std::sin(p), cp = std::cos(p);
  switch (kind_) {
    case ShapeKind::sphere:
      xt = a_ * Vec3{ct * cp, ct * sp, -st};
      xp = a_ * Vec3{-st * sp, st * cp, 0.0};
      return;
    case ShapeKind::ellipsoid:
      xt = {a_ * ct * cp, b_ * ct * sp, -c_ * st};
      xp = {-a_ * st * sp, b_ * st * cp, 0.0};
      return;
    case ShapeKind::fourfold: {
      double c4 = std::cos(4.0 * p), s4 = std::sin(4.0 * p);
      double rho = 1.0 + a_ * st * st * c4;
      double rho_t = a_ * std::sin(2.0 * t) * c4;
      double rho_p = -4.0 * a_ * st * st * s4;
      Vec3 om = omega(st, ct, sp, cp);
      Vec3 om_t = {ct * cp, ct * sp, -st};
      Vec3 om_p = {-st * sp, st * cp, 0.0};
      xt = rho_t * om + rho * om_t;
      xp = rho_p * om + rho * om_p;
      return;
    }
    case ShapeKind::plane:
      xt = e1_;
      xp = e2_;
      return;
  }
}

void SurfaceShape::second_partials(double t, double p, Vec3& xtt, Vec3& xtp, Vec3& xpp) const {
  double st = std::sin(t), ct = std::cos(t), sp = std::sin(p), cp = std::cos(p);
  switch (kind_) {
    case ShapeKind::sphere:
      xtt = -a_ * omega(st, ct, sp, cp);
      xtp = a_ * Vec3{-ct * sp, ct * cp, 0.0};
      xpp = a_ * Vec3{-st * cp, -st * sp, 0.0};
      return;
    case ShapeKind::ellipsoid:
      xtt = {-a_ * st * cp, -b_ * st * sp, -c_ * ct};
      xtp = {-a_ * ct * sp, b_ * ct * cp, 0.0};
      xpp = {-a_ * st * cp, -b_ * st * sp, 0.0};
      return;
    case ShapeKind::fourfold: {
      double c4 = std::cos(4.0 * p), s4 = std::sin(4.0 * p);
      double rho = 1.0 + a_ * st * st * c4;
      double rho_t = a_ * std::sin(2.0 * t) * c4;
      double rho_p = -4.0 * a_ * st * st * s4;
      double rho_tt = 2.0 * a_ * std::cos(2.0 * t) * c4;
      double rho_tp = -4.0 * a_ * std::sin(2.0 * t) * s4;
      double rho_pp = -16.0 * a_ * st * st * c4;
      Vec3 om = omega(st, ct, sp, cp);
      Vec3 om_t = {ct * cp, ct * sp, -st};
      Vec3 om_p = {-st * sp, st * cp, 0.0};
      Vec3 om_tt = -1.0 * om;
      Vec3 om_tp = {-ct * sp, ct * cp, 0.0};
      Vec3 om_pp = {-st * cp, -st * sp, 0.0};
      xtt = rho_tt * om + 2.0 * rho_t * om_t + rho * om_tt;
      xtp = rho_tp * om + rho_t * om_p + rho_p * om_t + rho * om_tp;
      xpp = rho_pp * om + 2.0 * rho_p * om_p + rho * om_pp;
      return;
    }
    case ShapeKind::plane:
      xtt = xtp = xpp = {};
      return;
  }
}

void SurfaceShape::normal_area(double t, double p, Vec3& nu, double& W) const {
  Vec3 xt, xp;
  first_partials(t, p, xt, xp);
  Vec3 cr = cross(xt, xp);
  W = norm(cr);
  if (W < 1e-300) {
    // parameterization pole; direction is still well defined for our shapes
    nu = normalized(position(t, p) - center_);
    return;
  }
  nu = cr / W;
}

double SurfaceShape::bounding_radius() const {
  switch (kind_) {
    case ShapeKind::sphere:
      return a_;
    case ShapeKind::ellipsoid:
      return std::max({a_, b_, c_});
    case ShapeKind::fourfold:
      return 1.0 + std::abs(a_);
    case ShapeKind::plane:
      return 0.5 * std::hypot(a_ * norm(e1_), b_ * norm(e2_));
  }
  return 0;
}

void Domain::add_component(const SurfaceShape& shape, int n_theta, int n_phi) {
  if (finalized_) throw std::logic_error("Domain: cannot add components after finalize");
  if (n_theta < 1 || n_phi < 1) throw std::invalid_argument("Domain: need n_theta, n_phi >= 1");
  ComponentInfo ci;
  ci.shape = shape;
  ci.n_theta = n_theta;
  ci.n_phi = n_phi;
  components_.push_back(ci);
}

void Domain::finalize(int q) {
  if (q < 2) throw std::invalid_argument("Domain: q >= 2 required");
  q_ = q;
  const GaussRule& rule = gauss_rule(q);
  const int probe_factor = 4;
  const GaussRule& prule = gauss_rule(q);  // probe uses the same 1D rule per sub-box

  for (std::size_t k = 0; k < components_.size(); ++k) {
    ComponentInfo& ci = components_[k];
    ci.q = q;
    ci.panel_offset = static_cast<int>(panels_.size());
    ci.node_offset = static_cast<int>(px_.size());
    ci.panel_count = ci.n_theta * ci.n_phi;
    ci.node_count = ci.panel_count * q * q;
    ci.interior_probe = ci.shape.center();
    ci.h_bar = ci.shape.closed() ? M_PI * ci.shape.bounding_radius() / ci.n_theta
                                 : std::max(ci.shape.param_theta_max() / ci.n_theta,
                                            ci.shape.param_phi_max() / ci.n_phi);
    const double tmax = ci.shape.param_theta_max();
    const double pmax = ci.shape.param_phi_max();
    const double dth = tmax / ci.n_theta;
    const double dph = pmax / ci.n_phi;
    double area = 0.0;

    for (int it = 0; it < ci.n_theta; ++it) {
      for (int ip = 0; ip < ci.n_phi; ++ip) {
        Panel panel;
        panel.component = static_cast<int>(k);
        panel.theta0 = it * dth;
        panel.theta1 = (it + 1) * dth;
        panel.phi0 = ip * dph;
        panel.phi1 = (ip + 1) * dph;
        panel.q = q;
        panel.node_offset = static_cast<int>(px_.size());
        panel.h_param = std::max(dth, dph);

        const double jac = 0.25 * dth * dph;
        for (int a = 0; a < q; ++a) {
          double th = 0.5 * (panel.theta0 + panel.theta1) + 0.5 * dth * rule.nodes[a];
          for (int b = 0; b < q; ++b) {
            double ph = 0.5 * (panel.phi0 + panel.phi1) + 0.5 * dph * rule.nodes[b];
            Vec3 pos = ci.shape.position(th, ph);
            Vec3 nu;
            double W;
            ci.shape.normal_area(th, ph, nu, W);
            double w = rule.weights[a] * rule.weights[b] * W * jac;
            px_.push_back(pos.x);
            py_.push_back(pos.y);
            pz_.push_back(pos.z);
            nx_.push_back(nu.x);
            ny_.push_back(nu.y);
            nz_.push_back(nu.z);
            w_.push_back(w);
            theta_.push_back(th);
            phi_.push_back(ph);
            node_component_.push_back(static_cast<int>(k));
            node_panel_.push_back(static_cast<int>(panels_.size()));
            area += w;
          }
        }

        // probe cloud: probe_factor^2 sub-boxes, q Gauss nodes per direction
        panel.probe.reserve(probe_factor * probe_factor * q * q);
        double sdt = dth / probe_factor, sdp = dph / probe_factor;
        for (int st = 0; st < probe_factor; ++st) {
          for (int a = 0; a < q; ++a) {
            double th = panel.theta0 + (st + 0.5) * sdt + 0.5 * sdt * prule.nodes[a];
            for (int sp = 0; sp < probe_factor; ++sp) {
              for (int b = 0; b < q; ++b) {
                double ph = panel.phi0 + (sp + 0.5) * sdp + 0.5 * sdp * prule.nodes[b];
                panel.probe.push_back(ci.shape.position(th, ph));
              }
            }
          }
        }
        Vec3 centroid{};
        for (const Vec3& v : panel.probe) centroid += v;
        centroid = centroid / static_cast<double>(panel.probe.size());
        double rad = 0.0;
        for (const Vec3& v : panel.probe) rad = std::max(rad, dist(centroid, v));
        // spacing bound: largest physical step of the probe grid, estimated
        // from the parameter step and the surface metric at the box center
        Vec3 xt, xp;
        ci.shape.first_partials(0.5 * (panel.theta0 + panel.theta1),
                                0.5 * (panel.phi0 + panel.phi1), xt, xp);
        panel.probe_spacing = std::max(sdt * norm(xt), sdp * norm(xp));
        panel.bound_center = centroid;
        panel.bound_radius = rad + panel.probe_spacing;
        panels_.push_back(std::move(panel));
      }
    }
    ci.area = area;
  }

  // disjointness check between closed components (bounding spheres)
  for (std::size_t i = 0; i < components_.size(); ++i) {
    for (std::size_t j = i + 1; j < components_.size(); ++j) {
      if (!components_[i].shape.closed() || !components_[j].shape.closed()) continue;
      double d = dist(components_[i].shape.center(), components_[j].shape.center());
      double ri = components_[i].shape.bounding_radius();
      double rj = components_[j].shape.bounding_radius();
      if (d <= 0.999 * (ri + rj) && d < ri + rj - 1e-12) {
        // spheres may be nearly touching; only reject actual overlap
        if (d < std::max(ri, rj)) throw std::invalid_argument("Domain: components overlap");
      }
    }
  }
  finalized_ = true;
}

kernels::NodeBlock Domain::nodes() const {
  kernels::NodeBlock b;
  b.px = px_.data();
  b.py = py_.data();
  b.pz = pz_.data();
  b.nx = nx_.data();
  b.ny = ny_.data();
  b.nz = nz_.data();
  b.w = w_.data();
  b.n = px_.size();
  return b;
}

kernels::NodeBlock Domain::panel_nodes(int gp) const {
  kernels::NodeBlock b = nodes();
  int off = panels_[gp].node_offset;
  b.px += off;
  b.py += off;
  b.pz += off;
  b.nx += off;
  b.ny += off;
  b.nz += off;
  b.w += off;
  b.n = static_cast<std::size_t>(q_) * q_;
  return b;
}

double panel_distance(Vec3 target, const Panel& panel) {
  double best = std::numeric_limits<double>::max();
  for (const Vec3& v : panel.probe) {
    double dx = target.x - v.x, dy = target.y - v.y, dz = target.z - v.z;
    best = std::min(best, dx * dx + dy * dy + dz * dz);
  }
  return std::sqrt(best);
}

std::vector<int> panels_within(Vec3 target, double cutoff, const Domain& domain) {
  std::vector<int> out;
  const auto& panels = domain.panels();
  for (std::size_t i = 0; i < panels.size(); ++i) {
    double lb = dist(target, panels[i].bound_center) - panels[i].bound_radius;
    if (lb > cutoff) continue;
    if (panel_distance(target, panels[i]) <= cutoff) out.push_back(static_cast<int>(i));
  }
  return out;
}

namespace {

NearestPoint newton_nearest(const SurfaceShape& shape, Vec3 target, double t0, double p0) {
  double t = t0, p = p0;
  double f_prev = std::numeric_limits<double>::max();
  NearestPoint np;
  for (int iter = 0; iter < 50; ++iter) {
    Vec3 x = shape.position(t, p);
    Vec3 xt, xp, xtt, xtp, xpp;
    shape.first_partials(t, p, xt, xp);
    shape.second_partials(t, p, xtt, xtp, xpp);
    Vec3 d = x - target;
    double g1 = dot(xt, d), g2 = dot(xp, d);
    double h11 = dot(xt, xt) + dot(xtt, d);
    double h12 = dot(xt, xp) + dot(xtp, d);
    double h22 = dot(xp, xp) + dot(xpp, d);
    double det = h11 * h22 - h12 * h12;
    double dt, dp;
    if (det > 1e-14 * (std::abs(h11 * h22) + 1.0) && h11 > 0) {
      dt = -(h22 * g1 - h12 * g2) / det;
      dp = -(h11 * g2 - h12 * g1) / det;
    } else {
      // Gauss-Newton fallback
      double a11 = dot(xt, xt), a12 = dot(xt, xp), a22 = dot(xp, xp);
      double adet = a11 * a22 - a12 * a12;
      if (adet < 1e-300) break;
      dt = -(a22 * g1 - a12 * g2) / adet;
      dp = -(a11 * g2 - a12 * g1) / adet;
    }
    // damped update
    double step = 1.0;
    double f0 = 0.5 * norm2(d);
    for (int ls = 0; ls < 25; ++ls) {
      double tn = t + step * dt, pn = p + step * dp;
      if (tn < 0) { tn = -tn; pn += M_PI; }
      if (tn > M_PI) { tn = 2 * M_PI - tn; pn += M_PI; }
      double fn = 0.5 * norm2(shape.position(tn, pn) - target);
      if (fn <= f0 || step < 1e-8) {
        t = tn;
        p = pn;
        break;
      }
      step *= 0.5;
    }
    double scale = (norm(d) + 1e-300) * (norm(xt) + norm(xp) + 1e-300);
    np.residual = std::max(std::abs(g1), std::abs(g2)) / scale;
    if (np.residual < 1e-13 || std::abs(f_prev - f0) < 1e-30) break;
    f_prev = f0;
  }
  Vec3 x = shape.position(t, p);
  Vec3 nu;
  double W;
  shape.normal_area(t, p, nu, W);
  // recompute residual at the final iterate
  {
    Vec3 xt, xp;
    shape.first_partials(t, p, xt, xp);
    Vec3 d = x - target;
    double scale = (norm(d) + 1e-300) * (norm(xt) + norm(xp) + 1e-300);
    np.residual = std::max(std::abs(dot(xt, d)), std::abs(dot(xp, d))) / scale;
  }
  np.point = x;
  np.normal = nu;
  np.distance = dist(x, target);
  np.converged = np.residual < 1e-12;
  return np;
}

}  // namespace

NearestPoint nearest_surface_point(const Domain& domain, int component, Vec3 target) {
  const ComponentInfo& ci = domain.component(component);
  if (ci.shape.kind() == ShapeKind::sphere) {
    NearestPoint np;
    Vec3 d = target - ci.shape.center();
    double dn = norm(d);
    Vec3 dir = dn > 1e-14 ? d / dn : Vec3{1, 0, 0};
    np.point = ci.shape.center() + ci.shape.radius() * dir;
    np.normal = dir;
    np.distance = std::abs(dn - ci.shape.radius());
    np.residual = 0.0;
    np.converged = true;
    return np;
  }

  // seed from the best node of this component
  int best = -1;
  double bestd = std::numeric_limits<double>::max();
  for (int i = ci.node_offset; i < ci.node_offset + ci.node_count; ++i) {
    double d2 = norm2(domain.node_position(i) - target);
    if (d2 < bestd) {
      bestd = d2;
      best = i;
    }
  }
  NearestPoint np = newton_nearest(ci.shape, target, domain.node_theta(best), domain.node_phi(best));
  if (!np.converged) {
    // retry from a perturbed seed before giving up; flag stays if both fail
    NearestPoint np2 = newton_nearest(ci.shape, target, domain.node_theta(best) + 0.05,
                                      domain.node_phi(best) - 0.05);
    if (np2.distance < np.distance || np2.converged) np = np2;
  }
  if (!np.converged && bestd < norm2(np.point - target)) {
    np.point = domain.node_position(best);
    np.normal = domain.node_normal(best);
    np.distance = std::sqrt(bestd);
  }
  return np;
}

}  // namespace qbx
