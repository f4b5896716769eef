#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "ewod/config.hpp"
#include "ewod/runner.hpp"
#include "ewod/vtk_io.hpp"

using namespace ewod;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

fs::path tmpdir(const char* name) {
  auto p = fs::temp_directory_path() / "ewod_test" / name;
  fs::remove_all(p);
  return p;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream f(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(f, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

int column(const std::vector<std::vector<std::string>>& rows, const std::string& name) {
  for (std::size_t i = 0; i < rows[0].size(); ++i)
    if (rows[0][i] == name) return static_cast<int>(i);
  return -1;
}

}  // namespace

TEST_CASE("parse_config: defaults, units, and errors") {
  SUBCASE("empty text gives the coarse move preset") {
    auto c = parse_config("");
    CHECK(c.preset == Preset::Move);
    CHECK(c.nx == 40);
    CHECK(c.ny_fluid == 8);
    CHECK(c.material.delta == doctest::Approx(0.1));
    CHECK(c.scheme.dt == doctest::Approx(1e-3));
    CHECK(c.V00 == doctest::Approx(20.0));
    REQUIRE(c.geometry.electrodes.size() == 1);
    CHECK(c.geometry.electrodes[0].x0 == doctest::Approx(0.0));
    CHECK(c.droplets.size() == 1);
  }
  SUBCASE("degrees convert to radians") {
    auto c = parse_config("material.theta_s_degrees = 120\n");
    CHECK(c.material.theta_s == doctest::Approx(2.0 * M_PI / 3.0));
    // the B bound follows theta_s when not pinned explicitly
    CHECK(c.scheme.B_stab == doctest::Approx(M_PI * M_PI / 32.0));
  }
  SUBCASE("invariant violations name the key") {
    try {
      parse_config("scheme.dt = -1\n");
      FAIL("expected a throw");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.key) == "scheme.dt");
      CHECK(e.line == 1);
    }
  }
  SUBCASE("unknown keys are rejected with key and line") {
    try {
      parse_config("# comment\nmaterial.gamma = 50\nbogus.key = 1\n");
      FAIL("expected a throw");
    } catch (const ConfigError& e) {
      CHECK(e.key == "bogus.key");
      CHECK(e.line == 3);
    }
  }
  SUBCASE("unparseable values name the key") {
    CHECK_THROWS_AS(parse_config("material.gamma = fifty\n"), ConfigError);
  }
  SUBCASE("presets define the paper actuation patterns") {
    auto c = parse_config("run.preset = split\n");
    REQUIRE(c.geometry.electrodes.size() == 2);
    CHECK(c.droplets[0].kind == DropletPrimitive::Kind::Ellipse);
    auto cm = parse_config("run.preset = merge\n");
    CHECK(cm.droplets.size() == 2);
    CHECK(cm.geometry.electrodes.size() == 1);
    CHECK(cm.geometry.electrodes[0].x0 == doctest::Approx(-0.5));
  }
  SUBCASE("V00 override rebuilds preset electrodes") {
    auto c = parse_config("run.V00 = 7\n");
    CHECK(c.geometry.electrodes[0].voltage == doctest::Approx(7.0));
  }
}

TEST_CASE("config round trip is idempotent after one pass") {
  const std::string text =
      "run.preset = merge\nmaterial.gamma = 12.5\nscheme.dt = 5e-4\n"
      "mesh.nx = 24\ndroplet.1 = circle -0.5 0 0.3\ndroplet.2 = circle 0.5 0 0.3\n";
  auto c1 = parse_config(text);
  const auto s1 = serialize_config(c1);
  auto c2 = parse_config(s1);
  const auto s2 = serialize_config(c2);
  CHECK(s1 == s2);
  CHECK(c2.material.gamma == doctest::Approx(12.5));
  CHECK(c2.droplets.size() == 2);
}

TEST_CASE("write_vtk: golden bytes for the single-fluid-cell mesh") {
  ChannelGeometry g;
  g.x_min = 0;
  g.x_max = 1;
  g.y_fluid_min = 0;
  g.y_fluid_max = 1;
  g.plate_thickness = 1;
  Simulator sim(build_channel_mesh(g, 1, 1, 1), MaterialParams{}, SchemeParams{});
  DropletPrimitive d;
  d.radius = 0.4;
  d.center = {0.5, 0.5};
  auto s = sim.init_state({d});
  std::fill(s.phi.begin(), s.phi.end(), 0.0);
  const std::string golden =
      "# vtk DataFile Version 3.0\newod-sim state t=0\nASCII\nDATASET UNSTRUCTURED_GRID\n"
      "POINTS 8 double\n0 -1 0\n1 -1 0\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n0 2 0\n1 2 0\n"
      "CELLS 3 15\n4 0 1 3 2\n4 2 3 5 4\n4 4 5 7 6\nCELL_TYPES 3\n9\n9\n9\n"
      "POINT_DATA 8\n"
      "SCALARS V double 1\nLOOKUP_TABLE default\n0\n0\n0\n0\n0\n0\n0\n0\n"
      "SCALARS phi double 1\nLOOKUP_TABLE default\n0\n0\n0\n0\n0\n0\n0\n0\n"
      "SCALARS mu double 1\nLOOKUP_TABLE default\n0\n0\n0\n0\n0\n0\n0\n0\n"
      "SCALARS q double 1\nLOOKUP_TABLE default\n0\n0\n0\n0\n0\n0\n0\n0\n"
      "SCALARS p double 1\nLOOKUP_TABLE default\n0\n0\n0\n0\n0\n0\n0\n0\n"
      "SCALARS fluid_mask int 1\nLOOKUP_TABLE default\n0\n0\n1\n1\n1\n1\n0\n0\n"
      "VECTORS u double\n0 0 0\n0 0 0\n0 0 0\n0 0 0\n0 0 0\n0 0 0\n0 0 0\n0 0 0\n";
  CHECK(vtk_to_string(sim, s) == golden);
}

TEST_CASE("write_vtk: field count and coordinate round trip") {
  ChannelGeometry g;
  g.x_min = -2;
  g.x_max = 3;
  g.y_fluid_min = 0;
  g.y_fluid_max = 1;
  g.plate_thickness = 0.5;
  Simulator sim(build_channel_mesh(g, 5, 2, 1), MaterialParams{}, SchemeParams{});
  DropletPrimitive d;
  d.radius = 0.4;
  d.center = {0.5, 0.0};
  auto s = sim.init_state({d});
  const auto text = vtk_to_string(sim, s);
  // 6 scalars + 1 vector = 7 point-data arrays
  int nscalars = 0, nvectors = 0;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.rfind("SCALARS", 0) == 0) ++nscalars;
    if (line.rfind("VECTORS", 0) == 0) ++nvectors;
  }
  CHECK(nscalars == 6);
  CHECK(nvectors == 1);
  // independent re-parse of the POINTS block reproduces the node coordinates
  std::stringstream ss2(text);
  while (std::getline(ss2, line))
    if (line.rfind("POINTS", 0) == 0) break;
  const Mesh& m = sim.mesh();
  for (int n = 0; n < m.n_nodes(); ++n) {
    REQUIRE(std::getline(ss2, line));
    std::stringstream ls(line);
    double x, y, z;
    REQUIRE((ls >> x >> y >> z));
    CHECK(x == m.nodes[n].x);
    CHECK(y == m.nodes[n].y);
    CHECK(z == 0.0);
  }
}

TEST_CASE("run_simulation: files, cadence, determinism" * doctest::timeout(600)) {
  auto cfg = make_preset(Preset::Move);
  cfg.nx = 16;
  cfg.ny_fluid = 4;
  cfg.ny_plate = 2;
  cfg.n_steps = 10;
  cfg.vtk_every = 5;
  const auto dir = tmpdir("cadence");
  cfg.out_dir = dir.string();
  auto res = run_simulation(cfg);
  REQUIRE(res.exit_code == 0);
  CHECK(fs::exists(dir / "state_0000.vtk"));
  CHECK(fs::exists(dir / "state_0005.vtk"));
  CHECK(fs::exists(dir / "state_0010.vtk"));
  CHECK(!fs::exists(dir / "state_0001.vtk"));
  const auto csv = slurp(dir / "series.csv");
  CHECK(count_lines(csv) == 1 + 11);  // header + initial + 10 steps
  // bitwise-identical rerun
  const auto dir2 = tmpdir("cadence2");
  cfg.out_dir = dir2.string();
  REQUIRE(run_simulation(cfg).exit_code == 0);
  CHECK(slurp(dir2 / "series.csv") == csv);
}

TEST_CASE("run_simulation: symmetric control stays centered with energy decay" *
          doctest::timeout(600)) {
  auto cfg = make_preset(Preset::Move);
  cfg.nx = 16;
  cfg.ny_fluid = 4;
  cfg.ny_plate = 2;
  cfg.V00 = 0.0;
  cfg.geometry.electrodes.clear();
  cfg.geometry.electrodes.push_back({Plate::Bottom, 0.0, 5.0, 0.0});
  cfg.n_steps = 20;
  cfg.vtk_every = 0;
  const auto dir = tmpdir("control");
  cfg.out_dir = dir.string();
  REQUIRE(run_simulation(cfg).exit_code == 0);
  auto rows = read_csv(dir / "series.csv");
  const int cx = column(rows, "centroid_x");
  const int et = column(rows, "e_total");
  REQUIRE(cx >= 0);
  REQUIRE(et >= 0);
  const double e0 = std::stod(rows[1][et]);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    CHECK(std::abs(std::stod(rows[r][cx])) <= 1e-6);
    if (r > 1)
      CHECK(std::stod(rows[r][et]) <=
            std::stod(rows[r - 1][et]) + 1e-8 * (1.0 + std::abs(e0)));
  }
}

TEST_CASE("run_simulation: failure carries the step index") {
  auto cfg = make_preset(Preset::Move);
  cfg.nx = 8;
  cfg.ny_fluid = 2;
  cfg.ny_plate = 1;
  cfg.n_steps = 3;
  cfg.vtk_every = 0;
  cfg.scheme.max_iter = 1;  // force a solver failure
  const auto dir = tmpdir("fail");
  cfg.out_dir = dir.string();
  auto res = run_simulation(cfg);
  CHECK(res.exit_code == 3);
  CHECK(res.message.find("step 1") != std::string::npos);
}
