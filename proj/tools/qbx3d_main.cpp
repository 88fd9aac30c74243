#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "qbx3d/config.hpp"
#include "qbx3d/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Laplace layer potentials on smooth 3D surfaces via local "
               "target-specific QBX"};
  app.require_subcommand(1);

  std::string config_path, out_override, far_field;
  int threads = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "experiment config file")->required();
    cmd->add_option("--out", out_override, "override the CSV output path");
    cmd->add_option("--far-field", far_field, "far-field engine: direct|treecode")
        ->check(CLI::IsMember({"direct", "treecode"}));
    cmd->add_option("--threads", threads, "worker threads (0 = hardware)");
  };

  CLI::App* run = app.add_subcommand("run", "run the configured experiment");
  add_common(run);
  CLI::App* sweep = app.add_subcommand("sweep", "run a parameter or distance sweep");
  add_common(sweep);

  CLI11_PARSE(app, argc, argv);

  try {
    qbx::set_num_threads(threads);
    qbx::ExperimentConfig cfg = qbx::load_experiment(config_path);
    if (!out_override.empty()) cfg.out_path = out_override;
    if (far_field == "direct") cfg.far_field = qbx::FarField::direct;
    if (far_field == "treecode") cfg.far_field = qbx::FarField::treecode;

    int rc;
    if (sweep->parsed() && cfg.kind == qbx::ExperimentKind::eval_near)
      rc = qbx::run_distance_sweep(cfg);
    else
      rc = qbx::run_experiment(cfg);
    if (rc == 0) std::printf("wrote %s\n", cfg.out_path.c_str());
    return rc;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
