#pragma once

#include <functional>
#include <vector>

#include "qbx3d/qbx.hpp"

namespace qbx {

struct BvpSpec {
  Side side = Side::interior;
  std::vector<double> f;  // Dirichlet data at the domain nodes
};

// Rank-M correction making the exterior equation uniquely solvable:
//   A sigma(x) = sum_k |S_k|^{-1/2} (sum_{i in k} sigma_i w_i) G(x_k, x),
// with x_k the interior probe point of component k.
std::vector<double> apply_A(const Domain& domain, const std::vector<double>& sigma,
                            const std::vector<Vec3>& targets);

struct GmresOptions {
  double tol = 1e-10;
  int max_iter = 200;
  int restart = 0;  // 0: no restart
};

struct GmresResult {
  int iterations = 0;
  double rel_residual = 0;
  bool converged = false;
  std::vector<double> history;
};

using MatVec = std::function<std::vector<double>(const std::vector<double>&)>;

// Matrix-free GMRES (Arnoldi with modified Gram-Schmidt, Givens least
// squares). Returns the best iterate in x even on max-iteration failure.
GmresResult gmres_solve(const MatVec& matvec, const std::vector<double>& rhs,
                        std::vector<double>& x, const GmresOptions& opts);

// Nystrom solver for the interior/exterior Dirichlet problem with the local
// target-specific QBX evaluation of the on-surface double layer.
class DirichletSolver {
 public:
  DirichletSolver(const Domain& domain, const QbxParams& params,
                  FarField far_field = FarField::direct, TreecodeParams tree_params = {});

  // One application of the discrete boundary operator
  // (interior: v_-; exterior: v_+ + A) at the nodes.
  std::vector<double> nystrom_matvec(const std::vector<double>& sigma, Side side);

  struct Output {
    std::vector<double> sigma;
    GmresResult gmres;
  };
  Output solve(const BvpSpec& spec, const GmresOptions& opts = {});

  // u at off-surface targets: D sigma (+ A sigma for the exterior problem).
  // Targets on the wrong side of the boundary are rejected.
  std::vector<double> postprocess(const BvpSpec& spec, const std::vector<double>& sigma,
                                  const std::vector<Vec3>& targets);

  Evaluator& evaluator() { return eval_; }

 private:
  const Domain* domain_;
  Evaluator eval_;
  Side prepared_side_;
  bool prepared_ = false;
};

}  // namespace qbx
