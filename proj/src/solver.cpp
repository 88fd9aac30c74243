#include "qbx3d/solver.hpp"

#include <cmath>
#include <stdexcept>

#include "qbx3d/quadrature.hpp"

namespace qbx {

std::vector<double> apply_A(const Domain& domain, const std::vector<double>& sigma,
                            const std::vector<Vec3>& targets) {
  if (sigma.size() != static_cast<std::size_t>(domain.num_nodes()))
    throw std::invalid_argument("apply_A: density length mismatch");
  std::vector<double> charge(domain.num_components());
  for (int k = 0; k < domain.num_components(); ++k) {
    const ComponentInfo& ci = domain.component(k);
    double s = 0.0;
    for (int i = ci.node_offset; i < ci.node_offset + ci.node_count; ++i)
      s += sigma[i] * domain.node_weight(i);
    charge[k] = s / std::sqrt(ci.area);
  }
  std::vector<double> out(targets.size(), 0.0);
  for (std::size_t t = 0; t < targets.size(); ++t) {
    double acc = 0.0;
    for (int k = 0; k < domain.num_components(); ++k)
      acc += charge[k] * single_layer_kernel(domain.component(k).interior_probe, targets[t]);
    out[t] = acc;
  }
  return out;
}

namespace {

double nrm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

GmresResult gmres_solve(const MatVec& matvec, const std::vector<double>& rhs,
                        std::vector<double>& x, const GmresOptions& opts) {
  const std::size_t n = rhs.size();
  if (x.size() != n) x.assign(n, 0.0);
  GmresResult res;
  double bnorm = nrm2(rhs);
  if (bnorm == 0.0) {
    x.assign(n, 0.0);
    res.converged = true;
    return res;
  }
  const int m = opts.restart > 0 ? std::min(opts.restart, opts.max_iter) : opts.max_iter;
  int total_iters = 0;

  while (true) {
    // r0 = rhs - A x  (x may be nonzero after a restart)
    std::vector<double> r = rhs;
    bool x_zero = true;
    for (double v : x)
      if (v != 0.0) {
        x_zero = false;
        break;
      }
    if (!x_zero) {
      std::vector<double> ax = matvec(x);
      for (std::size_t i = 0; i < n; ++i) r[i] -= ax[i];
    }
    double beta = nrm2(r);
    res.rel_residual = beta / bnorm;
    if (res.rel_residual <= opts.tol) {
      res.converged = true;
      return res;
    }

    std::vector<std::vector<double>> V;
    V.reserve(m + 1);
    std::vector<double> v0(n);
    for (std::size_t i = 0; i < n; ++i) v0[i] = r[i] / beta;
    V.push_back(std::move(v0));

    std::vector<std::vector<double>> H;  // H[j] holds column j (j+2 entries)
    std::vector<double> cs(m, 0.0), sn(m, 0.0), g(m + 1, 0.0);
    g[0] = beta;
    int j = 0;
    bool happy = false;
    for (; j < m && total_iters < opts.max_iter; ++j, ++total_iters) {
      std::vector<double> w = matvec(V[j]);
      std::vector<double> h(j + 2, 0.0);
      for (int i = 0; i <= j; ++i) {
        double hij = 0.0;
        for (std::size_t k = 0; k < n; ++k) hij += w[k] * V[i][k];
        h[i] = hij;
        for (std::size_t k = 0; k < n; ++k) w[k] -= hij * V[i][k];
      }
      double hj1 = nrm2(w);
      h[j + 1] = hj1;
      // apply previous Givens rotations
      for (int i = 0; i < j; ++i) {
        double t = cs[i] * h[i] + sn[i] * h[i + 1];
        h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
        h[i] = t;
      }
      double denom = std::hypot(h[j], h[j + 1]);
      cs[j] = denom == 0.0 ? 1.0 : h[j] / denom;
      sn[j] = denom == 0.0 ? 0.0 : h[j + 1] / denom;
      h[j] = denom;
      h[j + 1] = 0.0;
      double gt = cs[j] * g[j];
      g[j + 1] = -sn[j] * g[j];
      g[j] = gt;
      H.push_back(std::move(h));
      res.rel_residual = std::abs(g[j + 1]) / bnorm;
      res.history.push_back(res.rel_residual);
      if (hj1 <= 1e-300) {
        happy = true;
        ++j;
        break;
      }
      if (res.rel_residual <= opts.tol) {
        ++j;
        break;
      }
      std::vector<double> vj(n);
      for (std::size_t k = 0; k < n; ++k) vj[k] = w[k] / hj1;
      V.push_back(std::move(vj));
    }
    // back substitution: y = R^{-1} g
    std::vector<double> y(j, 0.0);
    for (int i = j - 1; i >= 0; --i) {
      double s = g[i];
      for (int k = i + 1; k < j; ++k) s -= H[k][i] * y[k];
      y[i] = s / H[i][i];
    }
    for (int i = 0; i < j; ++i) {
      for (std::size_t k = 0; k < n; ++k) x[k] += y[i] * V[i][k];
    }
    res.iterations = total_iters;
    if (res.rel_residual <= opts.tol || happy) {
      res.converged = true;
      return res;
    }
    if (total_iters >= opts.max_iter) {
      res.converged = false;  // best iterate is in x
      return res;
    }
    // otherwise restart
  }
}

DirichletSolver::DirichletSolver(const Domain& domain, const QbxParams& params,
                                 FarField far_field, TreecodeParams tree_params)
    : domain_(&domain), eval_(domain, params, far_field, tree_params), prepared_side_(Side::interior) {}

std::vector<double> DirichletSolver::nystrom_matvec(const std::vector<double>& sigma, Side side) {
  if (!prepared_ || prepared_side_ != side) {
    eval_.prepare_onsurface(OnSurfaceMode::one_sided, side);
    prepared_ = true;
    prepared_side_ = side;
  }
  std::vector<double> u = eval_.eval_onsurface(sigma);
  if (side == Side::exterior) {
    std::vector<Vec3> nodes(domain_->num_nodes());
    for (int i = 0; i < domain_->num_nodes(); ++i) nodes[i] = domain_->node_position(i);
    std::vector<double> a = apply_A(*domain_, sigma, nodes);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += a[i];
  }
  return u;
}

DirichletSolver::Output DirichletSolver::solve(const BvpSpec& spec, const GmresOptions& opts) {
  if (spec.f.size() != static_cast<std::size_t>(domain_->num_nodes()))
    throw std::invalid_argument("solve: boundary data length mismatch");
  Output out;
  out.sigma.assign(domain_->num_nodes(), 0.0);
  auto mv = [&](const std::vector<double>& s) { return nystrom_matvec(s, spec.side); };
  out.gmres = gmres_solve(mv, spec.f, out.sigma, opts);
  return out;
}

std::vector<double> DirichletSolver::postprocess(const BvpSpec& spec,
                                                 const std::vector<double>& sigma,
                                                 const std::vector<Vec3>& targets) {
  // wrong-side guard
  for (const Vec3& t : targets) {
    bool inside_any = false;
    for (int k = 0; k < domain_->num_components(); ++k) {
      const SurfaceShape& sh = domain_->component(k).shape;
      if (!sh.closed()) continue;
      if (sh.kind() == ShapeKind::sphere) {
        if (dist(t, sh.center()) < sh.radius()) inside_any = true;
      } else {
        NearestPoint np = nearest_surface_point(*domain_, k, t);
        if (dot(t - np.point, np.normal) < 0) inside_any = true;
      }
    }
    if (spec.side == Side::interior && !inside_any)
      throw std::invalid_argument("postprocess: target outside the domain of an interior problem");
    if (spec.side == Side::exterior && inside_any)
      throw std::invalid_argument("postprocess: target inside a component of an exterior problem");
  }
  std::vector<double> u = eval_.eval_points(sigma, targets);
  if (spec.side == Side::exterior) {
    std::vector<double> a = apply_A(*domain_, sigma, targets);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += a[i];
  }
  return u;
}

}  // namespace qbx
