#include <cmath>
#include <set>

#include "doctest.h"
#include "ewod/mesh.hpp"

using namespace ewod;

namespace {

ChannelGeometry paper_geom() {
  ChannelGeometry g;
  g.x_min = -5;
  g.x_max = 5;
  g.y_fluid_min = 0;
  g.y_fluid_max = 1;
  g.plate_thickness = 0.5;
  g.electrodes.push_back({Plate::Bottom, 0.0, 5.0, 20.0});
  return g;
}

int count_gamma(const Mesh& m) {
  int n = 0;
  for (const auto& f : m.facets) n += f.tag.gamma ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("channel mesh: counts and tags on the 10x4 example") {
  auto m = build_channel_mesh(paper_geom(), 10, 2, 1);
  CHECK(m.n_cells() == 40);
  int nf = 0, ndi = 0;
  for (int c = 0; c < m.n_cells(); ++c)
    (m.cell_region[c] == Region::Fluid ? nf : ndi)++;
  CHECK(nf == 20);
  CHECK(ndi == 20);
  // 2*10 interface facets + 2*2 channel-end facets
  CHECK(count_gamma(m) == 24);
  int n_neumann = 0;
  for (const auto& f : m.facets)
    if (f.tag.outer_neumann) {
      ++n_neumann;
      CHECK(f.tag.gamma);  // compound role on the channel ends
    }
  CHECK(n_neumann == 4);
}

TEST_CASE("channel mesh: facet classification oracle on a unit fluid square") {
  ChannelGeometry g;
  g.x_min = 0;
  g.x_max = 1;
  g.y_fluid_min = 0;
  g.y_fluid_max = 1;
  g.plate_thickness = 0.25;
  auto m = build_channel_mesh(g, 4, 4, 1);
  // direct classification of every facet from its midpoint coordinates
  for (const auto& f : m.facets) {
    const Vec2 mid = 0.5 * (m.nodes[f.n0] + m.nodes[f.n1]);
    const bool on_fluid_boundary =
        (std::abs(mid.y - 0.0) < 1e-14 || std::abs(mid.y - 1.0) < 1e-14 ||
         std::abs(mid.x - 0.0) < 1e-14 || std::abs(mid.x - 1.0) < 1e-14) &&
        mid.y > -1e-14 && mid.y < 1.0 + 1e-14;
    const bool on_side = std::abs(mid.x - 0.0) < 1e-14 || std::abs(mid.x - 1.0) < 1e-14;
    const bool in_band = mid.y > 0.0 && mid.y < 1.0;
    CHECK(f.tag.gamma == (on_fluid_boundary && (!on_side || in_band)));
    CHECK(f.tag.outer_neumann == (on_side && in_band));
  }
  // exactly one tag role set per facet apart from the compound ends
  for (const auto& f : m.facets) {
    const int roles = int(f.tag.gamma) + int(f.tag.outer_dirichlet);
    CHECK(roles == 1);
    if (f.tag.outer_neumann) CHECK(f.tag.gamma);
  }
}

TEST_CASE("channel mesh: area additivity") {
  auto m = build_channel_mesh(paper_geom(), 7, 3, 2);
  CHECK(m.fluid_area() == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(m.total_area() == doctest::Approx(20.0).epsilon(1e-14));
}

TEST_CASE("refine_uniform: cell and node counts") {
  ChannelGeometry g;
  g.x_min = 0;
  g.x_max = 1;
  g.y_fluid_min = 0;
  g.y_fluid_max = 1;
  g.plate_thickness = 1.0;
  auto m = build_channel_mesh(g, 1, 1, 1);  // 1x3 cells
  auto r = refine_uniform(m);
  CHECK(r.n_cells() == 4 * m.n_cells());
  // nodes + edges + cells
  const int n_edges = m.nx() * (m.ny() + 1) + m.ny() * (m.nx() + 1);
  CHECK(r.n_nodes() == m.n_nodes() + n_edges + m.n_cells());
  auto rr = refine_uniform(r);
  CHECK(rr.n_cells() == 16 * m.n_cells());
  // measures preserved exactly
  CHECK(rr.fluid_area() == m.fluid_area());
  CHECK(rr.total_area() == m.total_area());
}

TEST_CASE("refine_uniform on the 10x4 example gives 160 cells") {
  auto m = build_channel_mesh(paper_geom(), 10, 2, 1);
  CHECK(refine_uniform(m).n_cells() == 160);
}

TEST_CASE("dirichlet_boundary_value: electrode lookup") {
  auto g = paper_geom();
  CHECK(dirichlet_boundary_value(g, {2.0, -0.5}) == 20.0);
  CHECK(dirichlet_boundary_value(g, {-2.0, -0.5}) == 0.0);
  // half-open convention: left endpoint belongs to the segment
  CHECK(dirichlet_boundary_value(g, {0.0, -0.5}) == 20.0);
  // rightmost segment is closed
  CHECK(dirichlet_boundary_value(g, {5.0, -0.5}) == 20.0);
  // top plate and sides are grounded here
  CHECK(dirichlet_boundary_value(g, {2.0, 1.5}) == 0.0);
  CHECK(dirichlet_boundary_value(g, {-5.0, -0.25}) == 0.0);
  CHECK_THROWS(dirichlet_boundary_value(g, {0.0, 0.5}));
}

TEST_CASE("geometry validation") {
  ChannelGeometry g = paper_geom();
  g.x_max = g.x_min;
  CHECK_THROWS(build_channel_mesh(g, 2, 2, 1));
  g = paper_geom();
  g.electrodes.push_back({Plate::Bottom, -1.0, 1.0, 5.0});  // overlaps [0,5]
  CHECK_THROWS(g.validate());
  g = paper_geom();
  g.electrodes[0].x1 = 7.0;  // outside the domain
  CHECK_THROWS(g.validate());
  CHECK_THROWS(build_channel_mesh(paper_geom(), 0, 1, 1));
}
