#include "qbx3d/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qbx {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string dirname_of(const std::string& path) {
  std::size_t pos = path.find_last_of('/');
  return pos == std::string::npos ? std::string(".") : path.substr(0, pos);
}

}  // namespace

std::string ConfigSection::get(const std::string& key, const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

double ConfigSection::get_double(const std::string& key, double fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : std::stod(it->second);
}

int ConfigSection::get_int(const std::string& key, int fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : std::stoi(it->second);
}

bool ConfigSection::get_bool(const std::string& key, bool fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  return it->second == "true" || it->second == "1" || it->second == "yes";
}

Vec3 ConfigSection::get_vec3(const std::string& key, Vec3 fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  std::istringstream in(it->second);
  Vec3 v;
  if (!(in >> v.x >> v.y >> v.z)) throw std::invalid_argument("config: bad vector for " + key);
  return v;
}

std::vector<double> ConfigSection::get_list(const std::string& key) const {
  std::vector<double> out;
  auto it = values.find(key);
  if (it == values.end()) return out;
  std::istringstream in(it->second);
  double v;
  while (in >> v) out.push_back(v);
  return out;
}

std::vector<int> ConfigSection::get_int_list(const std::string& key) const {
  std::vector<int> out;
  auto it = values.find(key);
  if (it == values.end()) return out;
  std::istringstream in(it->second);
  int v;
  while (in >> v) out.push_back(v);
  return out;
}

ConfigFile ConfigFile::parse_string(const std::string& text) {
  ConfigFile file;
  std::istringstream in(text);
  std::string line;
  ConfigSection* current = nullptr;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw std::invalid_argument("config: bad section at line " +
                                                          std::to_string(lineno));
      file.sections.push_back({trim(line.substr(1, line.size() - 2)), {}});
      current = &file.sections.back();
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos || current == nullptr)
      throw std::invalid_argument("config: expected key = value at line " + std::to_string(lineno));
    current->values[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return file;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

const ConfigSection* ConfigFile::find(const std::string& name) const {
  for (const auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

std::vector<const ConfigSection*> ConfigFile::find_all(const std::string& name) const {
  std::vector<const ConfigSection*> out;
  for (const auto& s : sections)
    if (s.name == name) out.push_back(&s);
  return out;
}

Domain SceneSpec::build() const {
  Domain d;
  for (const auto& c : components) d.add_component(c.shape, c.n_theta, c.n_phi);
  d.finalize(q);
  return d;
}

Domain SceneSpec::build_with_n_theta(int n_theta) const {
  Domain d;
  for (const auto& c : components) d.add_component(c.shape, n_theta, n_theta);
  d.finalize(q);
  return d;
}

SceneSpec parse_scene(const ConfigFile& file) {
  SceneSpec scene;
  if (const ConfigSection* g = file.find("scene")) scene.q = g->get_int("q", 7);
  for (const ConfigSection* cs : file.find_all("component")) {
    ComponentSpec spec;
    std::string kind = cs->get("kind", "sphere");
    Vec3 center = cs->get_vec3("center");
    if (kind == "sphere") {
      spec.shape = SurfaceShape::sphere(cs->get_double("radius", 1.0), center);
    } else if (kind == "ellipsoid") {
      std::vector<double> ax = cs->get_list("semiaxes");
      if (ax.size() != 3) throw std::invalid_argument("scene: ellipsoid needs semiaxes = a b c");
      spec.shape = SurfaceShape::ellipsoid(ax[0], ax[1], ax[2], center);
    } else if (kind == "fourfold") {
      spec.shape = SurfaceShape::fourfold(cs->get_double("epsilon", 0.3), center);
    } else {
      throw std::invalid_argument("scene: unknown component kind " + kind);
    }
    spec.n_theta = cs->get_int("n_theta", 4);
    spec.n_phi = cs->get_int("n_phi", spec.n_theta);
    scene.components.push_back(spec);
  }
  if (scene.components.empty()) throw std::invalid_argument("scene: no components");
  return scene;
}

SceneSpec load_scene(const std::string& path) { return parse_scene(ConfigFile::parse_file(path)); }

ExperimentConfig parse_experiment(const ConfigFile& file, const std::string& base_dir) {
  ExperimentConfig cfg;
  const ConfigSection* ex = file.find("experiment");
  if (!ex) throw std::invalid_argument("experiment config: missing [experiment]");
  cfg.id = ex->get("id", "experiment");
  std::string kind = ex->get("kind", "eval_onsurface");
  if (kind == "eval_onsurface") cfg.kind = ExperimentKind::eval_onsurface;
  else if (kind == "eval_near") cfg.kind = ExperimentKind::eval_near;
  else if (kind == "solve_interior") cfg.kind = ExperimentKind::solve_interior;
  else if (kind == "solve_exterior") cfg.kind = ExperimentKind::solve_exterior;
  else if (kind == "sweep") cfg.kind = ExperimentKind::sweep;
  else throw std::invalid_argument("experiment: unknown kind " + kind);

  cfg.scene_path = ex->get("scene");
  if (cfg.scene_path.empty()) throw std::invalid_argument("experiment: scene path required");
  if (cfg.scene_path.front() != '/') cfg.scene_path = base_dir + "/" + cfg.scene_path;
  cfg.scene = load_scene(cfg.scene_path);
  cfg.out_path = ex->get("out", "out.csv");
  std::string ff = ex->get("far_field", "direct");
  if (ff == "treecode") cfg.far_field = FarField::treecode;
  else if (ff != "direct") throw std::invalid_argument("experiment: far_field direct|treecode");
  std::string mode = ex->get("onsurface_mode", "principal_value");
  if (mode == "one_sided") cfg.onsurface_mode = OnSurfaceMode::one_sided;
  else if (mode == "averaged") cfg.onsurface_mode = OnSurfaceMode::averaged;
  else cfg.onsurface_mode = OnSurfaceMode::principal_value;
  cfg.onsurface_side = ex->get("onsurface_side", "exterior") == "interior" ? Side::interior
                                                                           : Side::exterior;

  if (const ConfigSection* s = file.find("qbx")) {
    cfg.qbx.p = s->get_int("p", cfg.qbx.p);
    cfg.qbx.kappa = s->get_int("kappa", cfg.qbx.kappa);
    cfg.qbx.kappa_upsample = s->get_int("kappa_upsample", cfg.qbx.kappa_upsample);
    cfg.qbx.r_c = s->get_double("r_c", cfg.qbx.r_c);
    cfg.qbx.d_qbx = s->get_double("d_qbx", 0.0);
    cfg.qbx.d_up = s->get_double("d_up", 0.0);
    cfg.qbx.q_coeff = s->get_int("q_coeff", cfg.qbx.q_coeff);
  }
  if (const ConfigSection* s = file.find("treecode")) {
    cfg.treecode.p_T = s->get_int("p_T", cfg.treecode.p_T);
    cfg.treecode.eps_T = s->get_double("eps_T", cfg.treecode.eps_T);
    cfg.treecode.leaf_cap = s->get_int("leaf_cap", cfg.treecode.leaf_cap);
  }
  if (const ConfigSection* s = file.find("gmres")) {
    cfg.gmres.tol = s->get_double("tol", cfg.gmres.tol);
    cfg.gmres.max_iter = s->get_int("max_iter", cfg.gmres.max_iter);
    cfg.gmres.restart = s->get_int("restart", cfg.gmres.restart);
  }
  if (const ConfigSection* s = file.find("boundary_data")) {
    std::string type = s->get("type", "eigenfunction");
    if (type == "point_charges") cfg.boundary.type = BoundaryDataSpec::Type::point_charges;
    cfg.boundary.l = s->get_int("l", 2);
    cfg.boundary.m = s->get_int("m", 2);
    cfg.boundary.radius = s->get_double("radius", 0.5);
    cfg.boundary.count_theta = s->get_int("count_theta", 7);
    cfg.boundary.count_phi = s->get_int("count_phi", 7);
  }
  if (const ConfigSection* s = file.find("targets")) {
    cfg.targets.radii = s->get_list("radii");
    cfg.targets.scaled = s->get_list("scaled");
    cfg.targets.sigma_error = s->get_bool("sigma_error", false);
    cfg.targets.grid_theta = s->get_int("grid_theta", 12);
    cfg.targets.grid_phi = s->get_int("grid_phi", 24);
  }
  if (const ConfigSection* s = file.find("sweep")) {
    cfg.sweep_n_theta = s->get_int_list("n_theta");
    cfg.sweep_r_c = s->get_list("r_c");
    cfg.sweep_d_qbx = s->get_list("d_qbx");
    cfg.sweep_distances = s->get_list("distances");
    cfg.sweep_gaps = s->get_list("gaps");
  }
  return cfg;
}

ExperimentConfig load_experiment(const std::string& path) {
  return parse_experiment(ConfigFile::parse_file(path), dirname_of(path));
}

}  // namespace qbx
