#include "qbx3d/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include "qbx3d/parallel.hpp"
#include "qbx3d/specfun.hpp"

namespace qbx {

double double_layer_kernel(Vec3 x, Vec3 y, Vec3 nu_y) {
  Vec3 d = x - y;
  double r = norm(d);
  if (r < 1e-14) throw std::domain_error("double_layer_kernel: coincident points");
  return dot(nu_y, d) / (4.0 * M_PI * r * r * r);
}

double single_layer_kernel(Vec3 x, Vec3 y) {
  double r = dist(x, y);
  if (r < 1e-14) throw std::domain_error("single_layer_kernel: coincident points");
  return 1.0 / (4.0 * M_PI * r);
}

std::vector<double> direct_layer_eval(const Domain& domain, const std::vector<double>& sigma,
                                      const std::vector<Vec3>& targets, Layer layer) {
  if (sigma.size() != static_cast<std::size_t>(domain.num_nodes()))
    throw std::invalid_argument("direct_layer_eval: density length mismatch");
  std::vector<double> qw(sigma.size());
  const auto& w = domain.weights();
  for (std::size_t i = 0; i < sigma.size(); ++i) qw[i] = sigma[i] * w[i];
  std::vector<double> out(targets.size());
  kernels::NodeBlock nb = domain.nodes();
  parallel_for(targets.size(), [&](std::size_t t) {
    out[t] = layer == Layer::double_ ? kernels::dl_sum(targets[t], nb, qw.data())
                                     : kernels::sl_sum(targets[t], nb, qw.data());
  });
  return out;
}

const std::vector<double>& barycentric_weights(int q) {
  static std::map<int, std::vector<double>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(q);
  if (it != cache.end()) return it->second;
  const GaussRule& rule = gauss_rule(q);
  std::vector<double> lam(q, 1.0);
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < q; ++j) {
      if (j != i) lam[i] /= (rule.nodes[i] - rule.nodes[j]);
    }
  }
  return cache.emplace(q, std::move(lam)).first->second;
}

void lagrange_basis(int q, double s, double* out) {
  const GaussRule& rule = gauss_rule(q);
  const std::vector<double>& lam = barycentric_weights(q);
  // exact-hit guard
  for (int j = 0; j < q; ++j) {
    if (std::abs(s - rule.nodes[j]) < 1e-15) {
      for (int k = 0; k < q; ++k) out[k] = (k == j) ? 1.0 : 0.0;
      return;
    }
  }
  double denom = 0.0;
  for (int j = 0; j < q; ++j) {
    out[j] = lam[j] / (s - rule.nodes[j]);
    denom += out[j];
  }
  for (int j = 0; j < q; ++j) out[j] /= denom;
}

const std::vector<double>& interp_matrix_1d(int q, int kappa, int q_fine) {
  static std::map<std::tuple<int, int, int>, std::vector<double>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(q, kappa, q_fine);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  const GaussRule& fine = gauss_rule(q_fine);
  std::vector<double> mat(static_cast<std::size_t>(kappa) * q_fine * q);
  for (int s = 0; s < kappa; ++s) {
    double lo = -1.0 + 2.0 * s / kappa;
    double hi = -1.0 + 2.0 * (s + 1) / kappa;
    for (int a = 0; a < q_fine; ++a) {
      double t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * fine.nodes[a];
      lagrange_basis(q, t, &mat[(static_cast<std::size_t>(s) * q_fine + a) * q]);
    }
  }
  return cache.emplace(key, std::move(mat)).first->second;
}

std::shared_ptr<const FinePanelGeometry> make_fine_geometry(const Domain& domain, int panel,
                                                            int kappa, int q_fine) {
  const Panel& P = domain.panel(panel);
  const SurfaceShape& shape = domain.component(P.component).shape;
  const GaussRule& rule = gauss_rule(q_fine);
  auto fg = std::make_shared<FinePanelGeometry>();
  fg->panel = panel;
  fg->kappa = kappa;
  fg->q_fine = q_fine;
  const int m = kappa * q_fine;
  fg->n_fine = m * m;
  fg->n_padded = (fg->n_fine + 3) & ~3;
  auto reserve = [&](std::vector<double>& v) { v.resize(fg->n_padded); };
  reserve(fg->px);
  reserve(fg->py);
  reserve(fg->pz);
  reserve(fg->nx);
  reserve(fg->ny);
  reserve(fg->nz);
  reserve(fg->w);
  reserve(fg->theta);
  reserve(fg->phi);

  const double dth = (P.theta1 - P.theta0) / kappa;
  const double dph = (P.phi1 - P.phi0) / kappa;
  const double jac = 0.25 * dth * dph;
  int idx = 0;
  for (int st = 0; st < kappa; ++st) {
    for (int a = 0; a < q_fine; ++a) {
      double th = P.theta0 + (st + 0.5) * dth + 0.5 * dth * rule.nodes[a];
      for (int sp = 0; sp < kappa; ++sp) {
        for (int b = 0; b < q_fine; ++b) {
          double ph = P.phi0 + (sp + 0.5) * dph + 0.5 * dph * rule.nodes[b];
          Vec3 pos = shape.position(th, ph);
          Vec3 nu;
          double W;
          shape.normal_area(th, ph, nu, W);
          fg->px[idx] = pos.x;
          fg->py[idx] = pos.y;
          fg->pz[idx] = pos.z;
          fg->nx[idx] = nu.x;
          fg->ny[idx] = nu.y;
          fg->nz[idx] = nu.z;
          fg->w[idx] = rule.weights[a] * rule.weights[b] * W * jac;
          fg->theta[idx] = th;
          fg->phi[idx] = ph;
          ++idx;
        }
      }
    }
  }
  for (int i = fg->n_fine; i < fg->n_padded; ++i) {
    fg->px[i] = fg->px[fg->n_fine - 1];
    fg->py[i] = fg->py[fg->n_fine - 1];
    fg->pz[i] = fg->pz[fg->n_fine - 1];
    fg->nx[i] = fg->nx[fg->n_fine - 1];
    fg->ny[i] = fg->ny[fg->n_fine - 1];
    fg->nz[i] = fg->nz[fg->n_fine - 1];
    fg->w[i] = 0.0;
    fg->theta[i] = fg->theta[fg->n_fine - 1];
    fg->phi[i] = fg->phi[fg->n_fine - 1];
  }
  return fg;
}

struct UpsampleCache::Impl {
  std::mutex mu;
  std::map<std::tuple<int, int, int>, std::shared_ptr<const FinePanelGeometry>> entries;
};

std::shared_ptr<UpsampleCache::Impl> UpsampleCache::make_impl() { return std::make_shared<Impl>(); }

std::shared_ptr<const FinePanelGeometry> UpsampleCache::get(int panel, int kappa, int q_fine) {
  auto key = std::make_tuple(panel, kappa, q_fine);
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    auto it = impl_->entries.find(key);
    if (it != impl_->entries.end()) return it->second;
  }
  auto fg = make_fine_geometry(*domain_, panel, kappa, q_fine);
  std::lock_guard<std::mutex> lock(impl_->mu);
  return impl_->entries.emplace(key, std::move(fg)).first->second;
}

void interpolate_to_fine(const Domain& domain, int panel, const double* sigma_panel,
                         const FinePanelGeometry& fine, std::vector<double>& out) {
  const int q = domain.q();
  const int m = fine.kappa * fine.q_fine;
  const std::vector<double>& I = interp_matrix_1d(q, fine.kappa, fine.q_fine);  // m x q
  out.assign(fine.n_padded, 0.0);
  // tmp[s][b] = sum_a I[s][a] sigma[a][b]
  std::vector<double> tmp(static_cast<std::size_t>(m) * q, 0.0);
  for (int s = 0; s < m; ++s) {
    const double* Irow = &I[static_cast<std::size_t>(s) * q];
    for (int a = 0; a < q; ++a) {
      double c = Irow[a];
      if (c == 0.0) continue;
      const double* srow = sigma_panel + static_cast<std::size_t>(a) * q;
      double* trow = &tmp[static_cast<std::size_t>(s) * q];
      for (int b = 0; b < q; ++b) trow[b] += c * srow[b];
    }
  }
  // out[s][t] = sum_b I[t][b] tmp[s][b]
  for (int s = 0; s < m; ++s) {
    const double* trow = &tmp[static_cast<std::size_t>(s) * q];
    double* orow = &out[static_cast<std::size_t>(s) * m];
    for (int t = 0; t < m; ++t) {
      const double* Irow = &I[static_cast<std::size_t>(t) * q];
      double acc = 0.0;
      for (int b = 0; b < q; ++b) acc += Irow[b] * trow[b];
      orow[t] = acc;
    }
  }
}

UpsampledPanel upsample(const Domain& domain, int panel, const double* sigma_panel, int kappa) {
  if (kappa < 1) throw std::invalid_argument("upsample: kappa >= 1");
  UpsampledPanel up;
  up.geom = make_fine_geometry(domain, panel, kappa, domain.q());
  interpolate_to_fine(domain, panel, sigma_panel, *up.geom, up.density);
  return up;
}

double upsampled_panel_quad(const UpsampledPanel& up, Vec3 target, Layer layer) {
  std::vector<double> qw(up.geom->n_padded);
  for (int i = 0; i < up.geom->n_padded; ++i) qw[i] = up.density[i] * up.geom->w[i];
  kernels::NodeBlock nb = up.geom->block();
  return layer == Layer::double_ ? kernels::dl_sum(target, nb, qw.data())
                                 : kernels::sl_sum(target, nb, qw.data());
}

}  // namespace qbx
