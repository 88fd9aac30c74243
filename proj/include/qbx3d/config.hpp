#pragma once

#include <map>
#include <string>
#include <vector>

#include "qbx3d/qbx.hpp"
#include "qbx3d/solver.hpp"

namespace qbx {

// Flat key-value text with [section] headers; '#' starts a comment. Sections
// may repeat (each [component] block describes one boundary component).
struct ConfigSection {
  std::string name;
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) != 0; }
  std::string get(const std::string& key, const std::string& fallback = "") const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  Vec3 get_vec3(const std::string& key, Vec3 fallback = {}) const;
  std::vector<double> get_list(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;
};

struct ConfigFile {
  std::vector<ConfigSection> sections;

  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_string(const std::string& text);

  const ConfigSection* find(const std::string& name) const;
  std::vector<const ConfigSection*> find_all(const std::string& name) const;
};

struct ComponentSpec {
  SurfaceShape shape;
  int n_theta = 4, n_phi = 4;
};

struct SceneSpec {
  int q = 7;
  std::vector<ComponentSpec> components;

  Domain build() const;
  // Same scene with every component retiled to n_theta x n_theta panels.
  Domain build_with_n_theta(int n_theta) const;
};

SceneSpec load_scene(const std::string& path);
SceneSpec parse_scene(const ConfigFile& file);

enum class ExperimentKind { eval_onsurface, eval_near, solve_interior, solve_exterior, sweep };

struct BoundaryDataSpec {
  enum class Type { eigenfunction, point_charges } type = Type::eigenfunction;
  int l = 2, m = 2;
  double radius = 0.5;  // point-charge shell radius inside each component
  int count_theta = 7, count_phi = 7;
};

struct TargetSpec {
  std::vector<double> radii;   // spheres about component 0's center
  std::vector<double> scaled;  // scaled copies of component 0's shape
  bool sigma_error = false;    // report the density error too
  int grid_theta = 12, grid_phi = 24;
};

struct ExperimentConfig {
  std::string id = "experiment";
  ExperimentKind kind = ExperimentKind::eval_onsurface;
  std::string scene_path;
  SceneSpec scene;
  std::string out_path = "out.csv";
  FarField far_field = FarField::direct;
  QbxParams qbx;
  TreecodeParams treecode;
  GmresOptions gmres;
  BoundaryDataSpec boundary;
  TargetSpec targets;
  OnSurfaceMode onsurface_mode = OnSurfaceMode::principal_value;
  Side onsurface_side = Side::exterior;

  // sweep lists (paired by index; scalars broadcast)
  std::vector<int> sweep_n_theta;
  std::vector<double> sweep_r_c;
  std::vector<double> sweep_d_qbx;
  std::vector<double> sweep_distances;  // eval_near target distances
  std::vector<double> sweep_gaps;       // two-sphere surface separations
};

ExperimentConfig load_experiment(const std::string& path);
ExperimentConfig parse_experiment(const ConfigFile& file, const std::string& base_dir);

// Runs the configured experiment, writes the CSV, returns a process exit
// code (0 on success). The CSV text is also returned through csv_out when
// non-null (used by tests).
int run_experiment(const ExperimentConfig& config, std::string* csv_out = nullptr);

// Error-versus-distance sweep (eval_near kind): columns
// distance, error_qbx, error_upsampling_only.
int run_distance_sweep(const ExperimentConfig& config, std::string* csv_out = nullptr);

}  // namespace qbx
