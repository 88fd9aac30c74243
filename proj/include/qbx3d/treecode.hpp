#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "qbx3d/geometry.hpp"

namespace qbx {

struct TreecodeParams {
  int p_T = 5;         // Taylor order
  double eps_T = 0.2;  // multipole acceptance parameter, in (0, 1)
  int leaf_cap = 64;
};

// Dense cube of Taylor coefficients b_k, ||k|| <= p, of 1/|x - y| expanded in
// x about c (b_0 = 1/|y - c|).
struct TaylorCoeffs {
  int p = 0;
  int dim = 1;            // p + 1
  std::vector<double> b;  // b[(k1*dim + k2)*dim + k3], entries with ||k|| > p unused

  double at(int k1, int k2, int k3) const { return b[(k1 * dim + k2) * dim + k3]; }
};

// Recursion: ||k|| R^2 b_k - (2||k||-1) sum_i (y_i-c_i) b_{k-e_i}
//            + (||k||-1) sum_i b_{k-2e_i} = 0, negative indices zero.
TaylorCoeffs taylor_coeffs_bk(Vec3 c, Vec3 y, int p);

struct TreecodeCounters {
  std::uint64_t direct_pairs = 0;
  std::uint64_t cluster_evals = 0;
  std::uint64_t interactions() const { return direct_pairs + cluster_evals; }
};

// Octree over the source nodes with per-cluster Taylor moments of the double
// layer (nu sigma w - weighted monomials, differentiated once). The tree is
// geometric and fixed; moments are refreshed per density.
class Treecode {
 public:
  Treecode(const Domain& domain, TreecodeParams params);
  ~Treecode();

  void update_moments(const std::vector<double>& sigma);

  // Double layer potential at the targets; requires update_moments first.
  std::vector<double> eval(const std::vector<Vec3>& targets) const;

  // Direct summation over all sources in the tree's canonical (depth-first
  // leaf) order; the eps_T -> 0 equivalence baseline.
  double direct_sum(Vec3 target) const;

  const TreecodeCounters& counters() const;
  void reset_counters();

  int depth() const;
  int num_clusters() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace qbx
