#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "qbx3d/quadrature.hpp"
#include "qbx3d/treecode.hpp"

namespace qbx {

enum class Side { interior, exterior };
enum class OnSurfaceMode { one_sided, principal_value, averaged };
enum class FarField { direct, treecode };

struct QbxParams {
  int p = 20;              // truncation order
  int kappa = 8;           // coefficient-quadrature upsampling inside the QBX patch
  int kappa_upsample = 2;  // upsampling for the direct-quadrature ring
  double r_c = 0.2;        // expansion-center distance from the surface
  double d_qbx = 0.0;      // QBX cutoff; 0 means 3.5 * r_c
  double d_up = 0.0;       // upsampling cutoff; 0 means 2 * d_qbx
  int q_coeff = 15;        // Gauss order per sub-box for on-the-fly coefficients
  std::uint64_t max_stored_weights = 400000000;  // memory guard, in doubles

  double resolved_d_qbx() const { return d_qbx > 0 ? d_qbx : 3.5 * r_c; }
  double resolved_d_up() const { return d_up > 0 ? d_up : 2.0 * resolved_d_qbx(); }
};

struct QbxCenter {
  Vec3 position{};
  double r_c = 0;         // realized center-to-base distance (after any halving)
  Side side = Side::exterior;
  int component = 0;      // component whose panels this center expands
  Vec3 base_point{};      // surface point the convergence ball touches
  double ball_radius = 0; // intended distance from the center to the component
  bool valid = false;
  int halvings = 0;
  bool cross_flag = false;  // another component reaches inside the ball
};

// Places the expansion center for integrating `component` at `target`.
// On-surface targets (quadrature nodes of that component) pass their node id
// and get c = x +/- r_c nu(x); off-surface targets get the center another r_c
// beyond the target along the line from the nearest surface point. If another
// component intrudes, r_c is halved up to three times.
QbxCenter place_center(const Domain& domain, Vec3 target, int component, double r_c, Side side,
                       int on_surface_node = -1);

struct ExpansionCoeffs {
  Vec3 center{}, target{};
  double r = 0;
  std::vector<double> z;
};

// Local target-specific coefficients z_n, n = 0..p, accumulated over the
// upsampled patch. Throws if any patch node enters the convergence ball.
ExpansionCoeffs ts_coefficients(const std::vector<UpsampledPanel>& patch, Vec3 center, Vec3 target,
                                int p);

// sum_{n=0}^{p} z_n r^n.
double eval_expansion(const ExpansionCoeffs& coeffs);

// kappa_P = ceil(kappa_base r_c / r_P) clamped to [1, kappa_base].
int adaptive_kappa(double r_p, double r_c, int kappa_base);

// Precomputed target-specific quadrature: u_L(x_i) = weights . sigma[sources].
struct TargetWeights {
  int target_node = -1;
  std::vector<std::int32_t> sources;
  std::vector<double> weights;
};

// Per-node on-surface weights for the local patch (same-component panels
// within max(h_bar, d_qbx)), one-sided toward `side`. If `subset` is given,
// only those nodes are built.
std::vector<TargetWeights> precompute_onsurface(const Domain& domain, const QbxParams& params,
                                                Side side,
                                                const std::vector<int>* subset = nullptr);

struct EvalCounters {
  std::uint64_t patch_dot_ops = 0;   // madds in precomputed-weight dot products
  std::uint64_t row_entries = 0;     // total correction-row entries applied
  std::uint64_t onfly_rows = 0;      // on-the-fly QBX (target, panel) pairs
  int invalid_centers = 0;
  int cross_flags = 0;
};

// Full local-correction evaluator: global far-field sum, subtraction of the
// coarse contribution of every corrected panel, then precomputed patch QBX /
// on-the-fly QBX / upsampled quadrature by distance band.
class Evaluator {
 public:
  Evaluator(const Domain& domain, const QbxParams& params, FarField far_field = FarField::direct,
            TreecodeParams tree_params = {});
  ~Evaluator();

  // Builds the merged correction rows for every on-surface node (or a subset).
  void prepare_onsurface(OnSurfaceMode mode, Side side, const std::vector<int>* subset = nullptr);

  // Double layer at the prepared nodes; length matches the full node count
  // (entries outside a prepared subset are zero).
  std::vector<double> eval_onsurface(const std::vector<double>& sigma);

  // Double layer at off-surface points. qbx_enabled=false replaces the QBX
  // band with oversampled direct quadrature (the comparison method).
  std::vector<double> eval_points(const std::vector<double>& sigma, const std::vector<Vec3>& targets,
                                  bool qbx_enabled = true);

  const std::vector<TargetWeights>& patch_weights(Side side) const;
  const EvalCounters& counters() const;
  void reset_counters();

  const Domain& domain() const;
  const QbxParams& params() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One-shot convenience wrapper over Evaluator for off-surface targets.
std::vector<double> corrected_eval(const Domain& domain, const std::vector<double>& sigma,
                                   const std::vector<Vec3>& targets, const QbxParams& params,
                                   FarField far_field = FarField::direct);

}  // namespace qbx
