#include "ewod/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ewod/vtk_io.hpp"

namespace ewod {

namespace {

void csv_num(std::string& row, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, ",%.17e", v);
  row += buf;
}

std::string csv_row(const Simulator& sim, const State& s, const DissipationBreakdown& d,
                    const StepReport& rep, double margin) {
  const auto e = energy_total(sim, s);
  const auto o = observables(sim, s);
  char head[40];
  std::snprintf(head, sizeof head, "%.17e", s.t);
  std::string row = head;
  csv_num(row, e.kinetic);
  csv_num(row, e.charge);
  csv_num(row, e.cahn_hilliard);
  csv_num(row, e.electrostatic);
  csv_num(row, e.wall);
  csv_num(row, e.total);
  csv_num(row, d.viscous);
  csv_num(row, d.mobility);
  csv_num(row, d.ohmic);
  csv_num(row, d.slip);
  csv_num(row, d.boundary_relax);
  csv_num(row, o.phase_mass);
  csv_num(row, o.total_charge);
  csv_num(row, o.div_norm);
  csv_num(row, o.droplet_centroid ? o.droplet_centroid->x : std::nan(""));
  csv_num(row, o.droplet_centroid ? o.droplet_centroid->y : std::nan(""));
  csv_num(row, o.interface_length);
  csv_num(row, margin);
  row += "," + std::to_string(count_droplets(sim, s));
  row += "," + std::to_string(rep.potential.iterations);
  row += "," + std::to_string(rep.charge.iterations);
  row += "," + std::to_string(rep.phase.iterations);
  row += "," + std::to_string(rep.velocity.iterations);
  row += "," + std::to_string(rep.pressure.iterations);
  row += "," + std::to_string(rep.picard_iters);
  row += "\n";
  return row;
}

constexpr const char* kCsvHeader =
    "t,e_kinetic,e_charge,e_cahn_hilliard,e_electrostatic,e_wall,e_total,"
    "d_viscous,d_mobility,d_ohmic,d_slip,d_boundary_relax,"
    "phase_mass,total_charge,div_norm,centroid_x,centroid_y,interface_length,"
    "energy_margin,droplet_count,"
    "iter_potential,iter_charge,iter_phase,iter_velocity,iter_pressure,picard_iters\n";

}  // namespace

std::unique_ptr<Simulator> build_simulator(const RunConfig& cfg) {
  cfg.validate();
  Mesh mesh = build_channel_mesh(cfg.geometry, cfg.nx, cfg.ny_fluid, cfg.ny_plate);
  for (int r = 0; r < cfg.refine; ++r) mesh = refine_uniform(mesh);
  return std::make_unique<Simulator>(std::move(mesh), cfg.material, cfg.scheme);
}

RunResult run_simulation(const RunConfig& cfg,
                         const std::function<bool(const Simulator&, const State&)>& observer) {
  std::unique_ptr<Simulator> sim;
  State s;
  try {
    sim = build_simulator(cfg);
    s = sim->init_state(cfg.droplets);
  } catch (const std::exception& e) {
    return {2, e.what()};
  }

  namespace fs = std::filesystem;
  std::ofstream csv;
  try {
    fs::create_directories(cfg.out_dir);
    csv.open(fs::path(cfg.out_dir) / "series.csv", std::ios::binary);
    if (!csv) return {4, "cannot open series.csv in '" + cfg.out_dir + "'"};
  } catch (const std::exception& e) {
    return {4, e.what()};
  }

  auto vtk_path = [&](int n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "state_%04d.vtk", n);
    return (fs::path(cfg.out_dir) / buf).string();
  };
  auto maybe_vtk = [&](const State& st) {
    if (cfg.vtk_every > 0 && st.n % cfg.vtk_every == 0) write_vtk(*sim, st, vtk_path(st.n));
  };

  try {
    csv << kCsvHeader;
    csv << csv_row(*sim, s, DissipationBreakdown{}, StepReport{}, 0.0);
    maybe_vtk(s);
    if (observer && !observer(*sim, s)) return {0, "stopped by observer"};
    for (int k = 0; k < cfg.n_steps; ++k) {
      StepReport rep;
      State s1 = sim->step(s, &rep);
      if (!rep.ok) {
        std::fprintf(stderr, "solver failure at step %d (%s)\n", s.n + 1,
                     rep.failed_step.c_str());
        return {3, "solver failure at step " + std::to_string(s.n + 1) + " in " +
                       rep.failed_step};
      }
      const auto d = dissipation_total(*sim, s, s1);
      const auto audit = energy_law_margin(*sim, s, s1);
      csv << csv_row(*sim, s1, d, rep, audit.margin);
      maybe_vtk(s1);
      s = std::move(s1);
      if (observer && !observer(*sim, s)) break;
    }
    csv.flush();
    if (!csv) return {4, "write failure on series.csv"};
  } catch (const std::exception& e) {
    return {4, e.what()};
  }
  return {0, ""};
}

}  // namespace ewod
