#include "ewod/vtk_io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace ewod {

namespace {

std::vector<int> node_to_dof(const FeSpace& sp) {
  const Mesh& m = *sp.mesh;
  std::vector<int> map(m.n_nodes(), -1);
  for (int si = 0; si < sp.n_support_cells(); ++si) {
    const int c = sp.support_cells[si];
    const int* dofs = sp.cell_dofs(si);
    for (int v = 0; v < 4; ++v) map[m.cells[c][v]] = dofs[v];
  }
  return map;
}

void fmt(std::string& out, const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  out += buf;
}

}  // namespace

std::string vtk_to_string(const Simulator& sim, const State& s) {
  const Mesh& m = sim.mesh();
  std::string out;
  out.reserve(1 << 16);
  out += "# vtk DataFile Version 3.0\n";
  out += "ewod-sim state t=";
  fmt(out, "%.17g", s.t);
  out += "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out += "POINTS " + std::to_string(m.n_nodes()) + " double\n";
  for (const auto& p : m.nodes) {
    fmt(out, "%.17g", p.x);
    out += " ";
    fmt(out, "%.17g", p.y);
    out += " 0\n";
  }
  out += "CELLS " + std::to_string(m.n_cells()) + " " + std::to_string(5 * m.n_cells()) + "\n";
  for (const auto& c : m.cells)
    out += "4 " + std::to_string(c[0]) + " " + std::to_string(c[1]) + " " +
           std::to_string(c[2]) + " " + std::to_string(c[3]) + "\n";
  out += "CELL_TYPES " + std::to_string(m.n_cells()) + "\n";
  for (int c = 0; c < m.n_cells(); ++c) out += "9\n";

  const auto mapW = node_to_dof(sim.spaceW());
  const auto mapQ = node_to_dof(sim.spaceQ());
  const auto mapP = node_to_dof(sim.spaceP());
  const auto mapX = node_to_dof(sim.spaceX());

  out += "POINT_DATA " + std::to_string(m.n_nodes()) + "\n";
  auto scalar = [&](const char* name, const std::vector<int>& map,
                    const std::vector<double>& coeffs) {
    out += std::string("SCALARS ") + name + " double 1\nLOOKUP_TABLE default\n";
    for (int n = 0; n < m.n_nodes(); ++n) {
      fmt(out, "%.17g", map[n] >= 0 ? coeffs[map[n]] : 0.0);
      out += "\n";
    }
  };
  scalar("V", mapW, s.V);
  scalar("phi", mapQ, s.phi);
  scalar("mu", mapQ, s.mu);
  scalar("q", mapQ, s.q);
  scalar("p", mapP, s.p);
  out += "SCALARS fluid_mask int 1\nLOOKUP_TABLE default\n";
  for (int n = 0; n < m.n_nodes(); ++n) out += mapQ[n] >= 0 ? "1\n" : "0\n";
  out += "VECTORS u double\n";
  for (int n = 0; n < m.n_nodes(); ++n) {
    const int d = mapX[n];
    fmt(out, "%.17g", d >= 0 ? s.u[2 * d] : 0.0);
    out += " ";
    fmt(out, "%.17g", d >= 0 ? s.u[2 * d + 1] : 0.0);
    out += " 0\n";
  }
  return out;
}

void write_vtk(const Simulator& sim, const State& s, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  const auto str = vtk_to_string(sim, s);
  f.write(str.data(), static_cast<std::streamsize>(str.size()));
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace ewod
