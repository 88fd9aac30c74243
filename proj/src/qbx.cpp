#include "qbx3d/qbx.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <cstring>
#include <map>
#include <tuple>
#include <stdexcept>

#include "qbx3d/parallel.hpp"

namespace qbx {

namespace {

// Accurate min distance from a point to a component (closed-form for spheres,
// Newton otherwise, probe cloud as a safety net).
double component_distance(const Domain& domain, int comp, Vec3 p) {
  NearestPoint np = nearest_surface_point(domain, comp, p);
  double d = np.distance;
  if (!np.converged) {
    const ComponentInfo& ci = domain.component(comp);
    for (int gp = ci.panel_offset; gp < ci.panel_offset + ci.panel_count; ++gp)
      d = std::min(d, panel_distance(p, domain.panel(gp)));
  }
  return d;
}

}  // namespace

QbxCenter place_center(const Domain& domain, Vec3 target, int component, double r_c, Side side,
                       int on_surface_node) {
  if (r_c <= 0) throw std::invalid_argument("place_center: r_c > 0 required");
  QbxCenter out;
  out.component = component;
  out.side = side;

  const bool on_surface =
      on_surface_node >= 0 && domain.node_component(on_surface_node) == component;
  Vec3 base, dir;
  double r_tilde = 0.0;
  if (on_surface) {
    base = domain.node_position(on_surface_node);
    dir = domain.node_normal(on_surface_node);
    if (side == Side::interior) dir = -dir;
  } else {
    NearestPoint np = nearest_surface_point(domain, component, target);
    base = np.point;
    r_tilde = np.distance;
    if (r_tilde < 1e-14) throw std::invalid_argument("place_center: off-surface target on surface");
    dir = (target - np.point) / r_tilde;
    out.side = dot(dir, np.normal) > 0 ? Side::exterior : Side::interior;
  }
  out.base_point = base;

  double rc_eff = r_c;
  for (int attempt = 0; attempt <= 3; ++attempt) {
    Vec3 c = on_surface ? base + rc_eff * dir : target + rc_eff * dir;
    double expected = on_surface ? rc_eff : r_tilde + rc_eff;
    double down = component_distance(domain, component, c);
    bool own_ok = down >= expected * (1.0 - 1e-6);
    bool cross_ok = true;
    for (int j = 0; j < domain.num_components(); ++j) {
      if (j == component) continue;
      // conservative reach of the other component into the convergence ball:
      // the target must stay strictly inside the ball it would imply
      const ComponentInfo& cj = domain.component(j);
      double lb = dist(c, cj.shape.center()) - cj.shape.bounding_radius();
      double r_here = rc_eff;  // |target - c|
      if (lb > r_here) continue;
      double dj = component_distance(domain, j, c);
      bool inside_j = cj.shape.kind() == ShapeKind::sphere &&
                      dist(c, cj.shape.center()) < cj.shape.radius();
      if (inside_j || dj <= r_here) cross_ok = false;
    }
    if (own_ok && cross_ok) {
      out.position = c;
      out.r_c = rc_eff;
      out.ball_radius = expected;
      out.valid = true;
      out.halvings = attempt;
      return out;
    }
    if (own_ok && !cross_ok && attempt == 3) {
      // Another component still reaches into the ball. Each component is
      // expanded about its own center, so this does not break convergence of
      // the expansion this center serves; keep the original radius and flag.
      Vec3 c0 = on_surface ? base + r_c * dir : target + r_c * dir;
      out.position = c0;
      out.r_c = r_c;
      out.ball_radius = on_surface ? r_c : r_tilde + r_c;
      out.valid = true;
      out.halvings = attempt;
      out.cross_flag = true;
      return out;
    }
    rc_eff *= 0.5;
  }
  out.valid = false;
  return out;
}

namespace {

// z_n accumulation over one node block (scalar; mirrors kernels::ts_weights
// but keeps the orders separate).
void accumulate_coeffs(const kernels::NodeBlock& nodes, const double* sigma, Vec3 c, Vec3 x,
                       int p, double* z, double* min_r2) {
  const Vec3 xc = x - c;
  const double r = norm(xc);
  const double inv_r = 1.0 / r;
  constexpr double kInv4Pi = 1.0 / (4.0 * M_PI);
  double mn = 1e300;
  for (std::size_t i = 0; i < nodes.n; ++i) {
    double dx = nodes.px[i] - c.x;
    double dy = nodes.py[i] - c.y;
    double dz = nodes.pz[i] - c.z;
    double r2 = dx * dx + dy * dy + dz * dz;
    if (r2 < mn) mn = r2;
    double R = std::sqrt(r2);
    double t = 1.0 / R;
    double alpha = dx * xc.x + dy * xc.y + dz * xc.z;
    double u = alpha * t * inv_r;
    double a = -(nodes.nx[i] * dx + nodes.ny[i] * dy + nodes.nz[i] * dz);
    double nu_xc = nodes.nx[i] * xc.x + nodes.ny[i] * xc.y + nodes.nz[i] * xc.z;
    double E = inv_r * (nu_xc * t + alpha * a * t * t * t);
    double sw = (sigma ? sigma[i] : 1.0) * nodes.w[i] * kInv4Pi;
    double tn1 = t;  // t^{n+1}
    double pn = 1.0, pnm1 = 0.0, dpn = 0.0, dpnm1 = 0.0;
    z[0] += sw * (1.0 * pn * a * t * t + dpn * E) * tn1;
    for (int n = 1; n <= p; ++n) {
      double pnext = ((2 * n - 1) * u * pn - (n - 1) * pnm1) / n;
      double dpnext = dpnm1 + (2 * n - 1) * pn;
      pnm1 = pn;
      pn = pnext;
      dpnm1 = dpn;
      dpn = dpnext;
      tn1 *= t;
      z[n] += sw * ((n + 1) * pn * a * t * t + dpn * E) * tn1;
    }
  }
  if (min_r2) *min_r2 = std::min(*min_r2, mn);
}

}  // namespace

ExpansionCoeffs ts_coefficients(const std::vector<UpsampledPanel>& patch, Vec3 center, Vec3 target,
                                int p) {
  if (p < 0) throw std::invalid_argument("ts_coefficients: p >= 0");
  ExpansionCoeffs ec;
  ec.center = center;
  ec.target = target;
  ec.r = dist(target, center);
  ec.z.assign(p + 1, 0.0);
  double min_r2 = 1e300;
  for (const UpsampledPanel& up : patch)
    accumulate_coeffs(up.geom->block(), up.density.data(), center, target, p, ec.z.data(), &min_r2);
  double r2lim = ec.r * ec.r * (1.0 + 1e-10) * (1.0 + 1e-10);
  if (min_r2 <= r2lim)
    throw std::domain_error("ts_coefficients: patch node inside the convergence ball");
  return ec;
}

double eval_expansion(const ExpansionCoeffs& coeffs) {
  double acc = 0.0;
  double rn = 1.0;
  for (std::size_t n = 0; n < coeffs.z.size(); ++n) {
    acc += coeffs.z[n] * rn;
    rn *= coeffs.r;
  }
  return acc;
}

int adaptive_kappa(double r_p, double r_c, int kappa_base) {
  if (r_c <= 0 || kappa_base < 1) throw std::invalid_argument("adaptive_kappa: bad inputs");
  if (r_p <= 0) return kappa_base;
  int k = static_cast<int>(std::ceil(kappa_base * r_c / r_p - 1e-12));
  return std::clamp(k, 1, kappa_base);
}

// ---------------------------------------------------------------------------
// correction rows
// ---------------------------------------------------------------------------

namespace {

enum class Route { patch, onfly, ring };

struct NearPanel {
  int panel;
  double distance;
  Route route;
};

struct Row {
  std::vector<std::int32_t> src;
  std::vector<double> w;
};

// Local (per-task) cache of fine panel geometry.
struct FineCache {
  const Domain* domain;
  std::map<std::tuple<int, int, int>, std::shared_ptr<const FinePanelGeometry>> map;

  const FinePanelGeometry& get(int panel, int kappa, int q_fine) {
    auto key = std::make_tuple(panel, kappa, q_fine);
    auto it = map.find(key);
    if (it == map.end())
      it = map.emplace(key, make_fine_geometry(*domain, panel, kappa, q_fine)).first;
    return *it->second;
  }
};

std::vector<NearPanel> classify_panels(const Domain& domain, Vec3 target, const QbxParams& params,
                                       int on_surface_node) {
  const double d_qbx = params.resolved_d_qbx();
  const double d_up = params.resolved_d_up();
  int tcomp = on_surface_node >= 0 ? domain.node_component(on_surface_node) : -1;
  double patch_radius =
      tcomp >= 0 ? std::max(domain.component(tcomp).h_bar, d_qbx) : -1.0;
  const double cutoff = std::max(d_up, patch_radius);
  std::vector<NearPanel> out;
  const auto& panels = domain.panels();
  for (std::size_t gp = 0; gp < panels.size(); ++gp) {
    const Panel& P = panels[gp];
    double lb = dist(target, P.bound_center) - P.bound_radius;
    if (lb > cutoff) continue;
    double d = panel_distance(target, P);
    if (tcomp == P.component && d < patch_radius)
      out.push_back({static_cast<int>(gp), d, Route::patch});
    else if (d <= d_qbx)
      out.push_back({static_cast<int>(gp), d, Route::onfly});
    else if (d <= d_up)
      out.push_back({static_cast<int>(gp), d, Route::ring});
  }
  return out;
}

// R_coarse[a][b] = sum_{s,t} I[s][a] I[t][b] W_fine[s][t]; appends the panel's
// coarse node ids and weights to the row.
void contract_to_row(const Domain& domain, int panel, const FinePanelGeometry& fine,
                     const std::vector<double>& wfine, Row& row, std::vector<double>& scratch) {
  const int q = domain.q();
  const int m = fine.kappa * fine.q_fine;
  const std::vector<double>& I = interp_matrix_1d(q, fine.kappa, fine.q_fine);
  scratch.assign(static_cast<std::size_t>(q) * m, 0.0);
  // T[a][t] = sum_s I[s][a] W[s][t]
  for (int s = 0; s < m; ++s) {
    const double* Irow = &I[static_cast<std::size_t>(s) * q];
    const double* Wrow = &wfine[static_cast<std::size_t>(s) * m];
    for (int a = 0; a < q; ++a) {
      double c = Irow[a];
      double* Trow = &scratch[static_cast<std::size_t>(a) * m];
      for (int t = 0; t < m; ++t) Trow[t] += c * Wrow[t];
    }
  }
  const int base = domain.panel(panel).node_offset;
  for (int a = 0; a < q; ++a) {
    const double* Trow = &scratch[static_cast<std::size_t>(a) * m];
    for (int b = 0; b < q; ++b) {
      double acc = 0.0;
      for (int t = 0; t < m; ++t) acc += Trow[t] * I[static_cast<std::size_t>(t) * q + b];
      row.src.push_back(static_cast<std::int32_t>(base + a * q + b));
      row.w.push_back(acc);
    }
  }
}

struct RowBuildResult {
  Row row;
  std::uint32_t patch_len = 0;
  std::uint64_t onfly_rows = 0;
  bool center_failed = false;
  bool cross_flag = false;
};

// The QBX part of the patch weights for one on-surface node and one side.
// Appends only the QBX weights (no direct subtraction).
bool build_patch_qbx(const Domain& domain, const QbxParams& params, Side side, int node,
                     const std::vector<NearPanel>& near, FineCache& cache, Row& row,
                     bool* cross_flag) {
  QbxCenter center = place_center(domain, domain.node_position(node),
                                  domain.node_component(node), params.r_c, side, node);
  if (!center.valid) return false;
  if (cross_flag && center.cross_flag) *cross_flag = true;
  Vec3 x = domain.node_position(node);
  double r = dist(x, center.position);
  double r2lim = r * r * (1.0 + 2e-10);
  std::vector<double> wfine, scratch;
  for (const NearPanel& np : near) {
    if (np.route != Route::patch) continue;
    const FinePanelGeometry& fine = cache.get(np.panel, params.kappa, domain.q());
    wfine.resize(fine.n_padded);
    double min_r2 = 0.0;
    kernels::ts_weights(center.position, x, params.p, fine.block(), wfine.data(), &min_r2);
    if (min_r2 <= r2lim) return false;
    contract_to_row(domain, np.panel, fine, wfine, row, scratch);
  }
  return true;
}

RowBuildResult build_row(const Domain& domain, const QbxParams& params, Vec3 target,
                         int on_surface_node, OnSurfaceMode mode, Side side, bool qbx_enabled,
                         FineCache& cache) {
  RowBuildResult res;
  std::vector<NearPanel> near = classify_panels(domain, target, params, on_surface_node);
  if (near.empty()) return res;

  std::vector<double> wfine, scratch;

  // --- patch route (precomputed-style QBX over the same-component patch)
  bool have_patch = false;
  for (const NearPanel& np : near) have_patch |= np.route == Route::patch;
  if (have_patch) {
    Row qrow;
    if (mode == OnSurfaceMode::averaged) {
      Row ext, intr;
      bool ok = build_patch_qbx(domain, params, Side::exterior, on_surface_node, near, cache, ext,
                                &res.cross_flag) &&
                build_patch_qbx(domain, params, Side::interior, on_surface_node, near, cache, intr,
                                &res.cross_flag);
      if (!ok) {
        res.center_failed = true;
        return res;
      }
      qrow = ext;
      for (std::size_t i = 0; i < qrow.w.size(); ++i) qrow.w[i] = 0.5 * (ext.w[i] + intr.w[i]);
    } else {
      if (!build_patch_qbx(domain, params, side, on_surface_node, near, cache, qrow,
                           &res.cross_flag)) {
        res.center_failed = true;
        return res;
      }
      if (mode == OnSurfaceMode::principal_value) {
        // PV = one-sided limit minus the jump: v_side = PV + sign * sigma/2
        double sign = side == Side::exterior ? 1.0 : -1.0;
        for (std::size_t i = 0; i < qrow.src.size(); ++i) {
          if (qrow.src[i] == on_surface_node) qrow.w[i] -= 0.5 * sign;
        }
      }
    }
    res.patch_len = static_cast<std::uint32_t>(qrow.src.size());
    res.row.src.insert(res.row.src.end(), qrow.src.begin(), qrow.src.end());
    res.row.w.insert(res.row.w.end(), qrow.w.begin(), qrow.w.end());
  }

  // --- on-the-fly QBX, grouped per component, one center each
  std::map<int, std::vector<const NearPanel*>> onfly_groups;
  for (const NearPanel& np : near) {
    if (np.route == Route::onfly) onfly_groups[domain.panel(np.panel).component].push_back(&np);
  }
  for (auto& [comp, group] : onfly_groups) {
    if (qbx_enabled) {
      QbxCenter center =
          place_center(domain, target, comp, params.r_c, Side::exterior, on_surface_node);
      if (!center.valid) {
        res.center_failed = true;
        return res;
      }
      if (center.cross_flag) res.cross_flag = true;
      double r = dist(target, center.position);
      double r2lim = r * r * (1.0 + 2e-10);
      for (const NearPanel* np : group) {
        double r_p = panel_distance(center.position, domain.panel(np->panel));
        int kap = adaptive_kappa(r_p, center.r_c, params.kappa);
        const FinePanelGeometry& fine = cache.get(np->panel, kap, params.q_coeff);
        wfine.resize(fine.n_padded);
        double min_r2 = 0.0;
        kernels::ts_weights(center.position, target, params.p, fine.block(), wfine.data(),
                            &min_r2);
        if (min_r2 <= r2lim) {
          res.center_failed = true;
          return res;
        }
        contract_to_row(domain, np->panel, fine, wfine, res.row, scratch);
        ++res.onfly_rows;
      }
    } else {
      // comparison method: oversampled direct quadrature instead of QBX
      for (const NearPanel* np : group) {
        const FinePanelGeometry& fine = cache.get(np->panel, params.kappa, params.q_coeff);
        wfine.resize(fine.n_padded);
        kernels::dl_weights(target, fine.block(), wfine.data());
        contract_to_row(domain, np->panel, fine, wfine, res.row, scratch);
      }
    }
  }

  // --- upsampled direct ring
  for (const NearPanel& np : near) {
    if (np.route != Route::ring) continue;
    const FinePanelGeometry& fine = cache.get(np.panel, params.kappa_upsample, domain.q());
    wfine.resize(fine.n_padded);
    kernels::dl_weights(target, fine.block(), wfine.data());
    contract_to_row(domain, np.panel, fine, wfine, res.row, scratch);
  }

  // --- subtract the coarse direct contribution of every corrected panel
  const int q2 = domain.q() * domain.q();
  std::vector<double> wdir(q2);
  for (const NearPanel& np : near) {
    kernels::dl_weights(target, domain.panel_nodes(np.panel), wdir.data());
    int base = domain.panel(np.panel).node_offset;
    for (int j = 0; j < q2; ++j) {
      res.row.src.push_back(static_cast<std::int32_t>(base + j));
      res.row.w.push_back(-wdir[j]);
    }
  }
  return res;
}

}  // namespace

std::vector<TargetWeights> precompute_onsurface(const Domain& domain, const QbxParams& params,
                                                Side side, const std::vector<int>* subset) {
  std::vector<int> all;
  if (!subset) {
    all.resize(domain.num_nodes());
    for (int i = 0; i < domain.num_nodes(); ++i) all[i] = i;
    subset = &all;
  }
  std::vector<TargetWeights> out(subset->size());
  std::atomic<std::uint64_t> stored{0};
  std::atomic<int> failed{-1};
  parallel_for_ranges(subset->size(), [&](std::size_t lo, std::size_t hi) {
    FineCache cache{&domain, {}};
    for (std::size_t k = lo; k < hi; ++k) {
      int node = (*subset)[k];
      std::vector<NearPanel> near = classify_panels(domain, domain.node_position(node), params, node);
      Row row;
      bool ok = build_patch_qbx(domain, params, side, node, near, cache, row, nullptr);
      if (!ok) {
        failed.store(node);
        continue;
      }
      out[k].target_node = node;
      out[k].sources = std::move(row.src);
      out[k].weights = std::move(row.w);
      stored.fetch_add(out[k].weights.size());
    }
  });
  if (failed.load() >= 0)
    throw std::runtime_error("precompute_onsurface: center validity failed at node " +
                             std::to_string(failed.load()));
  if (stored.load() > params.max_stored_weights)
    throw std::runtime_error("precompute_onsurface: stored weights exceed the configured cap");
  return out;
}

// ---------------------------------------------------------------------------
// Evaluator
// ---------------------------------------------------------------------------

struct Evaluator::Impl {
  const Domain* domain;
  QbxParams params;
  FarField far_field;
  TreecodeParams tree_params;
  std::unique_ptr<Treecode> tree;

  bool prepared = false;
  OnSurfaceMode mode = OnSurfaceMode::one_sided;
  Side side = Side::exterior;
  std::vector<Row> rows;                 // merged correction rows per node
  std::vector<std::uint32_t> patch_len;  // QBX-dot lengths per node
  std::vector<char> node_ready;
  std::vector<TargetWeights> patch_ext, patch_int;
  bool patch_ext_ready = false, patch_int_ready = false;

  std::atomic<std::uint64_t> ops_patch{0}, ops_rows{0}, ops_onfly{0};
  std::atomic<int> invalid{0}, crossed{0};
  mutable EvalCounters snapshot;

  std::vector<double> far_field_at(const std::vector<double>& sigma,
                                   const std::vector<Vec3>& targets) {
    if (far_field == FarField::treecode) {
      if (!tree) tree = std::make_unique<Treecode>(*domain, tree_params);
      tree->update_moments(sigma);
      return tree->eval(targets);
    }
    return direct_layer_eval(*domain, sigma, targets, Layer::double_);
  }
};

Evaluator::Evaluator(const Domain& domain, const QbxParams& params, FarField far_field,
                     TreecodeParams tree_params)
    : impl_(new Impl) {
  impl_->domain = &domain;
  impl_->params = params;
  impl_->far_field = far_field;
  impl_->tree_params = tree_params;
}

Evaluator::~Evaluator() = default;

void Evaluator::prepare_onsurface(OnSurfaceMode mode, Side side, const std::vector<int>* subset) {
  Impl& im = *impl_;
  const Domain& dom = *im.domain;
  im.mode = mode;
  im.side = side;
  im.rows.assign(dom.num_nodes(), {});
  im.patch_len.assign(dom.num_nodes(), 0);
  im.node_ready.assign(dom.num_nodes(), 0);

  std::vector<int> all;
  if (!subset) {
    all.resize(dom.num_nodes());
    for (int i = 0; i < dom.num_nodes(); ++i) all[i] = i;
    subset = &all;
  }
  std::atomic<int> failed{-1};
  std::atomic<std::uint64_t> stored{0};
  parallel_for_ranges(subset->size(), [&](std::size_t lo, std::size_t hi) {
    FineCache cache{&dom, {}};
    for (std::size_t k = lo; k < hi; ++k) {
      int node = (*subset)[k];
      RowBuildResult rb = build_row(dom, im.params, dom.node_position(node), node, mode, side,
                                    true, cache);
      if (rb.center_failed) {
        failed.store(node);
        continue;
      }
      if (rb.cross_flag) im.crossed.fetch_add(1);
      im.patch_len[node] = rb.patch_len;
      stored.fetch_add(rb.row.w.size());
      im.rows[node] = std::move(rb.row);
      im.node_ready[node] = 1;
    }
  });
  if (failed.load() >= 0) {
    impl_->invalid.fetch_add(1);
    throw std::runtime_error("qbx: center validity failed at node " +
                             std::to_string(failed.load()));
  }
  if (stored.load() > im.params.max_stored_weights)
    throw std::runtime_error("qbx: stored correction weights exceed the configured cap");
  im.prepared = true;
}

std::vector<double> Evaluator::eval_onsurface(const std::vector<double>& sigma) {
  Impl& im = *impl_;
  const Domain& dom = *im.domain;
  if (!im.prepared) throw std::logic_error("Evaluator: prepare_onsurface first");
  if (sigma.size() != static_cast<std::size_t>(dom.num_nodes()))
    throw std::invalid_argument("Evaluator: density length mismatch");
  std::vector<Vec3> targets(dom.num_nodes());
  for (int i = 0; i < dom.num_nodes(); ++i) targets[i] = dom.node_position(i);
  std::vector<double> u = im.far_field_at(sigma, targets);
  std::uint64_t p_ops = 0, r_ops = 0;
  parallel_for_ranges(u.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      if (!im.node_ready[i]) {
        continue;
      }
      const Row& row = im.rows[i];
      double acc = 0.0;
      for (std::size_t j = 0; j < row.src.size(); ++j) acc += row.w[j] * sigma[row.src[j]];
      u[i] += acc;
    }
  });
  for (int i = 0; i < dom.num_nodes(); ++i) {
    if (!im.node_ready[i]) continue;
    p_ops += im.patch_len[i];
    r_ops += im.rows[i].src.size();
  }
  im.ops_patch.fetch_add(p_ops);
  im.ops_rows.fetch_add(r_ops);
  return u;
}

std::vector<double> Evaluator::eval_points(const std::vector<double>& sigma,
                                           const std::vector<Vec3>& targets, bool qbx_enabled) {
  Impl& im = *impl_;
  const Domain& dom = *im.domain;
  if (sigma.size() != static_cast<std::size_t>(dom.num_nodes()))
    throw std::invalid_argument("Evaluator: density length mismatch");
  std::vector<double> u = im.far_field_at(sigma, targets);
  std::atomic<int> failed{-1};
  parallel_for_ranges(targets.size(), [&](std::size_t lo, std::size_t hi) {
    FineCache cache{&dom, {}};
    std::uint64_t p_ops = 0, r_ops = 0, f_rows = 0;
    for (std::size_t t = lo; t < hi; ++t) {
      RowBuildResult rb = build_row(dom, im.params, targets[t], -1, OnSurfaceMode::one_sided,
                                    Side::exterior, qbx_enabled, cache);
      if (rb.center_failed) {
        failed.store(static_cast<int>(t));
        continue;
      }
      double acc = 0.0;
      for (std::size_t j = 0; j < rb.row.src.size(); ++j)
        acc += rb.row.w[j] * sigma[rb.row.src[j]];
      u[t] += acc;
      r_ops += rb.row.src.size();
      f_rows += rb.onfly_rows;
      if (rb.cross_flag) im.crossed.fetch_add(1);
    }
    im.ops_patch.fetch_add(p_ops);
    im.ops_rows.fetch_add(r_ops);
    im.ops_onfly.fetch_add(f_rows);
  });
  if (failed.load() >= 0)
    throw std::runtime_error("qbx: center validity failed at target " +
                             std::to_string(failed.load()));
  return u;
}

const std::vector<TargetWeights>& Evaluator::patch_weights(Side side) const {
  Impl& im = *impl_;
  if (side == Side::exterior) {
    if (!im.patch_ext_ready) {
      im.patch_ext = precompute_onsurface(*im.domain, im.params, side);
      im.patch_ext_ready = true;
    }
    return im.patch_ext;
  }
  if (!im.patch_int_ready) {
    im.patch_int = precompute_onsurface(*im.domain, im.params, side);
    im.patch_int_ready = true;
  }
  return im.patch_int;
}

const EvalCounters& Evaluator::counters() const {
  impl_->snapshot.patch_dot_ops = impl_->ops_patch.load();
  impl_->snapshot.row_entries = impl_->ops_rows.load();
  impl_->snapshot.onfly_rows = impl_->ops_onfly.load();
  impl_->snapshot.invalid_centers = impl_->invalid.load();
  impl_->snapshot.cross_flags = impl_->crossed.load();
  return impl_->snapshot;
}

void Evaluator::reset_counters() {
  impl_->ops_patch.store(0);
  impl_->ops_rows.store(0);
  impl_->ops_onfly.store(0);
  impl_->invalid.store(0);
  impl_->crossed.store(0);
}

const Domain& Evaluator::domain() const { return *impl_->domain; }
const QbxParams& Evaluator::params() const { return impl_->params; }

std::vector<double> corrected_eval(const Domain& domain, const std::vector<double>& sigma,
                                   const std::vector<Vec3>& targets, const QbxParams& params,
                                   FarField far_field) {
  Evaluator ev(domain, params, far_field);
  return ev.eval_points(sigma, targets);
}

}  // namespace qbx
