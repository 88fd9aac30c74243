#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "qbx3d/config.hpp"
#include "qbx3d/reference.hpp"

namespace qbx {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> eigen_density(const Domain& domain, int l, int m) {
  std::vector<double> sigma(domain.num_nodes());
  for (int i = 0; i < domain.num_nodes(); ++i)
    sigma[i] = re_sph_harm(l, m, domain.node_theta(i), domain.node_phi(i));
  return sigma;
}

std::vector<PointChargeSet> charge_sets(const Domain& domain, const BoundaryDataSpec& bd) {
  std::vector<PointChargeSet> sets;
  for (int k = 0; k < domain.num_components(); ++k)
    sets.push_back(make_point_charges(domain.component(k).shape.center(), bd.radius,
                                      bd.count_theta, bd.count_phi));
  return sets;
}

double charges_potential(const std::vector<PointChargeSet>& sets, Vec3 x) {
  double u = 0.0;
  for (const auto& s : sets) u += point_charge_potential(s, x);
  return u;
}

std::vector<Vec3> sphere_targets(Vec3 center, double r, int gt, int gp) {
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(gt) * gp);
  for (int i = 0; i < gt; ++i) {
    double th = M_PI * (i + 0.5) / gt;
    for (int j = 0; j < gp; ++j) {
      double ph = 2.0 * M_PI * (j + 0.25) / gp;
      out.push_back(center + r * Vec3{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                                      std::cos(th)});
    }
  }
  return out;
}

std::vector<Vec3> scaled_shape_targets(const SurfaceShape& shape, double factor, int gt, int gp) {
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(gt) * gp);
  for (int i = 0; i < gt; ++i) {
    double th = M_PI * (i + 0.5) / gt;
    for (int j = 0; j < gp; ++j) {
      double ph = 2.0 * M_PI * (j + 0.25) / gp;
      Vec3 p = shape.position(th, ph);
      out.push_back(shape.center() + factor * (p - shape.center()));
    }
  }
  return out;
}

struct ErrPair {
  double l2 = 0, linf = 0;
};

ErrPair relative_errors(const std::vector<double>& u, const std::vector<double>& ue) {
  double num2 = 0, den2 = 0, numi = 0, deni = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double d = u[i] - ue[i];
    num2 += d * d;
    den2 += ue[i] * ue[i];
    numi = std::max(numi, std::abs(d));
    deni = std::max(deni, std::abs(ue[i]));
  }
  ErrPair e;
  e.l2 = den2 > 0 ? std::sqrt(num2 / den2) : std::sqrt(num2);
  e.linf = deni > 0 ? numi / deni : numi;
  return e;
}

struct CsvWriter {
  std::ostringstream out;

  CsvWriter() {
    out << "experiment_id,n_theta,p,kappa,r_c,d_qbx,target_set,l2_rel_error,linf_rel_error,"
           "gmres_iters,qbx_correction_ops,wall_seconds\n";
  }
  void row(const std::string& id, int n_theta, const QbxParams& qp, const std::string& tset,
           double l2, double linf, int iters, std::uint64_t ops, double wall) {
    char buf[384];
    std::snprintf(buf, sizeof buf, "%s,%d,%d,%d,%.6g,%.6g,%s,%.12e,%.12e,%d,%llu,%.3f\n",
                  id.c_str(), n_theta, qp.p, qp.kappa, qp.r_c, qp.resolved_d_qbx(), tset.c_str(),
                  l2, linf, iters, static_cast<unsigned long long>(ops), wall);
    out << buf;
  }
};

struct SweepRow {
  int n_theta;
  QbxParams qbx;
};

std::vector<SweepRow> sweep_rows(const ExperimentConfig& cfg) {
  std::vector<SweepRow> rows;
  if (cfg.sweep_n_theta.empty()) {
    rows.push_back({cfg.scene.components[0].n_theta, cfg.qbx});
    return rows;
  }
  for (std::size_t i = 0; i < cfg.sweep_n_theta.size(); ++i) {
    SweepRow r{cfg.sweep_n_theta[i], cfg.qbx};
    if (!cfg.sweep_r_c.empty())
      r.qbx.r_c = cfg.sweep_r_c[std::min(i, cfg.sweep_r_c.size() - 1)];
    if (!cfg.sweep_d_qbx.empty())
      r.qbx.d_qbx = cfg.sweep_d_qbx[std::min(i, cfg.sweep_d_qbx.size() - 1)];
    rows.push_back(r);
  }
  return rows;
}

Domain build_domain(const ExperimentConfig& cfg, int n_theta) {
  if (cfg.sweep_n_theta.empty()) return cfg.scene.build();
  return cfg.scene.build_with_n_theta(n_theta);
}

std::vector<double> boundary_values(const Domain& domain, const ExperimentConfig& cfg, Side side,
                                    const std::vector<PointChargeSet>& sets) {
  std::vector<double> f(domain.num_nodes());
  if (cfg.boundary.type == BoundaryDataSpec::Type::eigenfunction) {
    // boundary value of the separation-of-variables solution at rho = 1
    int l = cfg.boundary.l, m = cfg.boundary.m;
    double coeff = side == Side::interior ? -(l + 1.0) / (2.0 * l + 1.0) : l / (2.0 * l + 1.0);
    for (int i = 0; i < domain.num_nodes(); ++i)
      f[i] = coeff * re_sph_harm(l, m, domain.node_theta(i), domain.node_phi(i));
  } else {
    if (side != Side::exterior)
      throw std::invalid_argument("point-charge boundary data drives the exterior problem");
    for (int i = 0; i < domain.num_nodes(); ++i)
      f[i] = charges_potential(sets, domain.node_position(i));
  }
  return f;
}

void exact_at(const Domain& domain, const ExperimentConfig& cfg, Side side,
              const std::vector<PointChargeSet>& sets, const std::vector<Vec3>& targets,
              std::vector<double>& ue) {
  ue.resize(targets.size());
  if (cfg.boundary.type == BoundaryDataSpec::Type::eigenfunction) {
    Vec3 c0 = domain.component(0).shape.center();
    for (std::size_t i = 0; i < targets.size(); ++i) {
      Vec3 d = targets[i] - c0;
      double rho = norm(d);
      double th = std::acos(std::clamp(d.z / rho, -1.0, 1.0));
      double ph = std::atan2(d.y, d.x);
      ue[i] = separation_solution(cfg.boundary.l, cfg.boundary.m, rho, th, ph,
                                  side == Side::interior);
    }
  } else {
    for (std::size_t i = 0; i < targets.size(); ++i) ue[i] = charges_potential(sets, targets[i]);
  }
}

int run_solve(const ExperimentConfig& cfg, CsvWriter& csv) {
  Side side = cfg.kind == ExperimentKind::solve_interior ? Side::interior : Side::exterior;
  for (const SweepRow& row : sweep_rows(cfg)) {
    auto t0 = Clock::now();
    Domain domain = build_domain(cfg, row.n_theta);
    std::vector<PointChargeSet> sets;
    if (cfg.boundary.type == BoundaryDataSpec::Type::point_charges)
      sets = charge_sets(domain, cfg.boundary);
    std::vector<double> f = boundary_values(domain, cfg, side, sets);
    DirichletSolver solver(domain, row.qbx, cfg.far_field, cfg.treecode);
    BvpSpec spec{side, f};
    auto out = solver.solve(spec, cfg.gmres);
    if (!out.gmres.converged) return 2;

    if (cfg.targets.sigma_error &&
        cfg.boundary.type == BoundaryDataSpec::Type::eigenfunction) {
      std::vector<double> se = eigen_density(domain, cfg.boundary.l, cfg.boundary.m);
      ErrPair e = relative_errors(out.sigma, se);
      csv.row(cfg.id, row.n_theta, row.qbx, "sigma", e.l2, e.linf, out.gmres.iterations,
              solver.evaluator().counters().patch_dot_ops, seconds_since(t0));
    }
    Vec3 c0 = domain.component(0).shape.center();
    for (double r : cfg.targets.radii) {
      std::vector<Vec3> targets =
          sphere_targets(c0, r, cfg.targets.grid_theta, cfg.targets.grid_phi);
      std::vector<double> u = solver.postprocess(spec, out.sigma, targets);
      std::vector<double> ue;
      exact_at(domain, cfg, side, sets, targets, ue);
      ErrPair e = relative_errors(u, ue);
      char tag[32];
      std::snprintf(tag, sizeof tag, "r%.4g", r);
      csv.row(cfg.id, row.n_theta, row.qbx, tag, e.l2, e.linf, out.gmres.iterations,
              solver.evaluator().counters().patch_dot_ops, seconds_since(t0));
    }
    for (double fct : cfg.targets.scaled) {
      std::vector<Vec3> targets = scaled_shape_targets(domain.component(0).shape, fct,
                                                       cfg.targets.grid_theta, cfg.targets.grid_phi);
      std::vector<double> u = solver.postprocess(spec, out.sigma, targets);
      std::vector<double> ue;
      exact_at(domain, cfg, side, sets, targets, ue);
      ErrPair e = relative_errors(u, ue);
      char tag[32];
      std::snprintf(tag, sizeof tag, "s%.4g", fct);
      csv.row(cfg.id, row.n_theta, row.qbx, tag, e.l2, e.linf, out.gmres.iterations,
              solver.evaluator().counters().patch_dot_ops, seconds_since(t0));
    }
  }
  return 0;
}

int run_eval_onsurface(const ExperimentConfig& cfg, CsvWriter& csv) {
  for (const SweepRow& row : sweep_rows(cfg)) {
    auto t0 = Clock::now();
    Domain domain = build_domain(cfg, row.n_theta);
    std::vector<double> sigma = eigen_density(domain, cfg.boundary.l, cfg.boundary.m);
    Evaluator ev(domain, row.qbx, cfg.far_field, cfg.treecode);
    ev.prepare_onsurface(cfg.onsurface_mode, cfg.onsurface_side);
    std::vector<double> u = ev.eval_onsurface(sigma);
    std::vector<double> ue(domain.num_nodes());
    double jump = 0.0;
    if (cfg.onsurface_mode == OnSurfaceMode::one_sided)
      jump = cfg.onsurface_side == Side::exterior ? 0.5 : -0.5;
    for (int i = 0; i < domain.num_nodes(); ++i) {
      ue[i] = eigen_dl_value(cfg.boundary.l, cfg.boundary.m, domain.node_theta(i),
                             domain.node_phi(i)) +
              jump * sigma[i];
    }
    ErrPair e = relative_errors(u, ue);
    csv.row(cfg.id, row.n_theta, row.qbx, "onsurface", e.l2, e.linf, 0,
            ev.counters().patch_dot_ops, seconds_since(t0));
  }
  return 0;
}

int write_output(const ExperimentConfig& cfg, const std::string& text, std::string* csv_out) {
  if (csv_out) *csv_out = text;
  if (!cfg.out_path.empty() && cfg.out_path != "-") {
    std::ofstream out(cfg.out_path);
    if (!out) {
      std::fprintf(stderr, "cannot write %s\n", cfg.out_path.c_str());
      return 3;
    }
    out << text;
  }
  return 0;
}

}  // namespace

int run_distance_sweep(const ExperimentConfig& cfg, std::string* csv_out) {
  if (cfg.kind != ExperimentKind::eval_near)
    throw std::invalid_argument("run_distance_sweep: eval_near kind required");
  std::ostringstream out;
  out << "distance,error_qbx,error_upsampling_only\n";

  if (!cfg.sweep_gaps.empty()) {
    // two-sphere gap sweep: solve the exterior point-charge problem at each
    // separation and evaluate on the gap-bisecting target sphere
    if (cfg.scene.components.size() != 2)
      throw std::invalid_argument("gap sweep expects a two-component scene");
    for (double gap : cfg.sweep_gaps) {
      SceneSpec scene = cfg.scene;
      const SurfaceShape& s0 = scene.components[0].shape;
      const SurfaceShape& s1 = scene.components[1].shape;
      Vec3 dir = normalized(s1.center() - s0.center());
      double sep = s0.bounding_radius() + s1.bounding_radius() + gap;
      scene.components[1].shape =
          SurfaceShape::sphere(s1.bounding_radius(), s0.center() + sep * dir);
      Domain domain = scene.build();
      std::vector<PointChargeSet> sets = charge_sets(domain, cfg.boundary);
      std::vector<double> f(domain.num_nodes());
      for (int i = 0; i < domain.num_nodes(); ++i)
        f[i] = charges_potential(sets, domain.node_position(i));
      DirichletSolver solver(domain, cfg.qbx, cfg.far_field, cfg.treecode);
      BvpSpec spec{Side::exterior, f};
      auto res = solver.solve(spec, cfg.gmres);
      double rstar = s0.bounding_radius() + 0.5 * gap;
      std::vector<Vec3> targets =
          sphere_targets(s0.center(), rstar, cfg.targets.grid_theta, cfg.targets.grid_phi);
      std::vector<double> uq = solver.postprocess(spec, res.sigma, targets);
      std::vector<double> uu = solver.evaluator().eval_points(res.sigma, targets, false);
      {
        std::vector<double> a = apply_A(domain, res.sigma, targets);
        for (std::size_t i = 0; i < uu.size(); ++i) uu[i] += a[i];
      }
      std::vector<double> ue(targets.size());
      for (std::size_t i = 0; i < targets.size(); ++i) ue[i] = charges_potential(sets, targets[i]);
      ErrPair eq = relative_errors(uq, ue), eu = relative_errors(uu, ue);
      char buf[128];
      std::snprintf(buf, sizeof buf, "%.6g,%.12e,%.12e\n", gap, eq.linf, eu.linf);
      out << buf;
    }
    return write_output(cfg, out.str(), csv_out);
  }

  // single-surface: targets along theta = pi/2, phi = 0 at the given distances
  Domain domain = cfg.scene.build();
  std::vector<double> sigma = eigen_density(domain, cfg.boundary.l, cfg.boundary.m);
  const SurfaceShape& sh = domain.component(0).shape;
  Vec3 base = sh.position(M_PI / 2.0, 0.0);
  Vec3 nu;
  double W;
  sh.normal_area(M_PI / 2.0, 0.0, nu, W);
  std::vector<Vec3> targets;
  for (double d : cfg.sweep_distances) targets.push_back(base + d * nu);
  Evaluator ev(domain, cfg.qbx, cfg.far_field, cfg.treecode);
  std::vector<double> uq = ev.eval_points(sigma, targets, true);
  std::vector<double> uu = ev.eval_points(sigma, targets, false);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    Vec3 dv = targets[i] - sh.center();
    double rho = norm(dv);
    double th = std::acos(std::clamp(dv.z / rho, -1.0, 1.0));
    double ph = std::atan2(dv.y, dv.x);
    double ue = separation_solution(cfg.boundary.l, cfg.boundary.m, rho, th, ph, false);
    double scale = std::abs(ue) > 0 ? std::abs(ue) : 1.0;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.10g,%.12e,%.12e\n", cfg.sweep_distances[i],
                  std::abs(uq[i] - ue) / scale, std::abs(uu[i] - ue) / scale);
    out << buf;
  }
  return write_output(cfg, out.str(), csv_out);
}

int run_experiment(const ExperimentConfig& cfg, std::string* csv_out) {
  if (cfg.kind == ExperimentKind::eval_near) return run_distance_sweep(cfg, csv_out);
  CsvWriter csv;
  int rc = 0;
  switch (cfg.kind) {
    case ExperimentKind::eval_onsurface:
    case ExperimentKind::sweep:
      rc = run_eval_onsurface(cfg, csv);
      break;
    case ExperimentKind::solve_interior:
    case ExperimentKind::solve_exterior:
      rc = run_solve(cfg, csv);
      break;
    default:
      rc = 4;
  }
  if (rc != 0) return rc;
  return write_output(cfg, csv.out.str(), csv_out);
}

}  // namespace qbx
