#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ewod/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ewod-sim: diffuse-interface electrowetting-on-dielectric simulator"};
  std::string config_path, preset, out_dir, mode;
  int steps = -1, vtk_every = -1;
  app.add_option("--config", config_path, "path to a key = value config file");
  app.add_option("--preset", preset, "experiment preset: move, split or merge");
  app.add_option("--steps", steps, "number of time steps");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--vtk-every", vtk_every, "write a VTK snapshot every K steps (0 disables)");
  app.add_option("--mode", mode, "time stepping: split (fractional) or coupled (picard)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  ewod::RunConfig cfg;
  try {
    std::string text;
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) {
        std::fprintf(stderr, "error: cannot read config file '%s'\n", config_path.c_str());
        return 2;
      }
      std::stringstream ss;
      ss << f.rdbuf();
      text += ss.str();
      text += "\n";
    }
    // command line flags override the file
    if (!preset.empty()) text += "run.preset = " + preset + "\n";
    if (steps >= 0) text += "run.n_steps = " + std::to_string(steps) + "\n";
    if (vtk_every >= 0) text += "run.vtk_every = " + std::to_string(vtk_every) + "\n";
    if (!out_dir.empty()) text += "run.out_dir = " + out_dir + "\n";
    if (!mode.empty()) text += "scheme.mode = " + mode + "\n";
    cfg = ewod::parse_config(text);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }

  std::printf("ewod-sim: preset=%s mode=%s mesh=%dx%d dt=%g steps=%d out=%s\n",
              ewod::preset_to_string(cfg.preset).c_str(),
              cfg.scheme.mode == ewod::SchemeMode::Split ? "split" : "coupled", cfg.nx,
              cfg.ny_fluid, cfg.scheme.dt, cfg.n_steps, cfg.out_dir.c_str());
  const auto res = ewod::run_simulation(cfg);
  if (res.exit_code != 0) std::fprintf(stderr, "error: %s\n", res.message.c_str());
  return res.exit_code;
}
