#pragma once

#include <functional>
#include <memory>
#include <string>

#include "ewod/config.hpp"
#include "ewod/diagnostics.hpp"

namespace ewod {

struct RunResult {
  int exit_code = 0;  // 0 ok, 2 config, 3 solver, 4 io
  std::string message;
};

/// Builds the discretization described by a config.
std::unique_ptr<Simulator> build_simulator(const RunConfig& cfg);

/// Advances cfg.n_steps steps, writing series.csv and state_NNNN.vtk every
/// cfg.vtk_every steps into cfg.out_dir. The optional callback sees every
/// state (including the initial one) and may stop the run early by returning
/// false.
RunResult run_simulation(const RunConfig& cfg,
                         const std::function<bool(const Simulator&, const State&)>& observer = {});

}  // namespace ewod
