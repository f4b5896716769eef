#include "ewod/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ewod {

double norm(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }

void ChannelGeometry::validate() const {
  if (!(x_min < x_max)) throw std::invalid_argument("geometry: x_min must be < x_max");
  if (!(y_fluid_min < y_fluid_max))
    throw std::invalid_argument("geometry: y_fluid_min must be < y_fluid_max");
  if (!(plate_thickness > 0.0))
    throw std::invalid_argument("geometry: plate_thickness must be > 0");
  for (std::size_t i = 0; i < electrodes.size(); ++i) {
    const auto& e = electrodes[i];
    if (!(e.x0 < e.x1)) throw std::invalid_argument("electrode: empty x interval");
    if (e.x0 < x_min - 1e-12 || e.x1 > x_max + 1e-12)
      throw std::invalid_argument("electrode: interval outside [x_min, x_max]");
    for (std::size_t j = 0; j < i; ++j) {
      const auto& f = electrodes[j];
      if (f.plate != e.plate) continue;
      if (std::max(e.x0, f.x0) < std::min(e.x1, f.x1) - 1e-14)
        throw std::invalid_argument("electrode: overlapping intervals on one plate");
    }
  }
}

namespace {

// Endpoints set exactly so that region classification can compare bitwise.
std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n + 1);
  for (int i = 0; i <= n; ++i) v[i] = a + (b - a) * (double(i) / n);
  v[0] = a;
  v[n] = b;
  return v;
}

Mesh build_from_grid(const ChannelGeometry& geom, std::vector<double> xs,
                     std::vector<double> ys) {
  Mesh m;
  m.geom = geom;
  m.xs = std::move(xs);
  m.ys = std::move(ys);
  const int nx = m.nx(), ny = m.ny();

  m.nodes.resize((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) m.nodes[j * (nx + 1) + i] = {m.xs[i], m.ys[j]};

  auto nid = [&](int i, int j) { return j * (nx + 1) + i; };
  m.cells.resize(nx * ny);
  m.cell_region.resize(nx * ny);
  std::vector<bool> row_fluid(ny);
  for (int j = 0; j < ny; ++j)
    row_fluid[j] = m.ys[j] >= geom.y_fluid_min && m.ys[j + 1] <= geom.y_fluid_max;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int c = j * nx + i;
      m.cells[c] = {nid(i, j), nid(i + 1, j), nid(i + 1, j + 1), nid(i, j + 1)};
      m.cell_region[c] = row_fluid[j] ? Region::Fluid : Region::Dielectric;
    }

  // Facets. Local edges: 0 bottom (n0,n1), 1 right (n1,n2), 2 top (n2,n3),
  // 3 left (n3,n0). Gamma facets are owned by the fluid cell.
  auto add = [&](int c, int e, FacetTag tag, Vec2 nrm) {
    const auto& q = m.cells[c];
    static const int en[4][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
    m.facets.push_back({c, e, q[en[e][0]], q[en[e][1]], tag, nrm});
  };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int c = j * nx + i;
      const bool fl = row_fluid[j];
      if (fl) {
        // interface with plates (plate_thickness > 0 ensures j-1, j+1 exist
        // whenever the row touches the fluid band edge)
        if (!(j > 0 && row_fluid[j - 1])) add(c, 0, {true, false, false}, {0, -1});
        if (!(j + 1 < ny && row_fluid[j + 1])) add(c, 2, {true, false, false}, {0, 1});
        if (i == 0) add(c, 3, {true, false, true}, {-1, 0});
        if (i == nx - 1) add(c, 1, {true, false, true}, {1, 0});
      } else {
        if (j == 0) add(c, 0, {false, true, false}, {0, -1});
        if (j == ny - 1) add(c, 2, {false, true, false}, {0, 1});
        if (i == 0) add(c, 3, {false, true, false}, {-1, 0});
        if (i == nx - 1) add(c, 1, {false, true, false}, {1, 0});
      }
    }
  return m;
}

}  // namespace

Mesh build_channel_mesh(const ChannelGeometry& geom, int nx, int ny_fluid, int ny_plate) {
  geom.validate();
  if (nx < 1 || ny_fluid < 1 || ny_plate < 1)
    throw std::invalid_argument("build_channel_mesh: cell counts must be >= 1");

  std::vector<double> xs = linspace(geom.x_min, geom.x_max, nx);
  std::vector<double> ys = linspace(geom.y_outer_min(), geom.y_fluid_min, ny_plate);
  {
    auto mid = linspace(geom.y_fluid_min, geom.y_fluid_max, ny_fluid);
    ys.insert(ys.end(), mid.begin() + 1, mid.end());
    auto top = linspace(geom.y_fluid_max, geom.y_outer_max(), ny_plate);
    ys.insert(ys.end(), top.begin() + 1, top.end());
  }
  return build_from_grid(geom, std::move(xs), std::move(ys));
}

Mesh refine_uniform(const Mesh& m) {
  auto split = [](const std::vector<double>& v) {
    std::vector<double> out;
    out.reserve(2 * v.size() - 1);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      out.push_back(v[i]);
      out.push_back(0.5 * (v[i] + v[i + 1]));
    }
    out.push_back(v.back());
    return out;
  };
  return build_from_grid(m.geom, split(m.xs), split(m.ys));
}

double Mesh::fluid_area() const {
  double a = 0.0;
  for (int c = 0; c < n_cells(); ++c)
    if (cell_region[c] == Region::Fluid) a += cell_area(c);
  return a;
}

double Mesh::total_area() const {
  double a = 0.0;
  for (int c = 0; c < n_cells(); ++c) a += cell_area(c);
  return a;
}

double Mesh::facet_length(const Facet& f) const {
  return norm(nodes[f.n1] - nodes[f.n0]);
}

double dirichlet_boundary_value(const ChannelGeometry& geom, Vec2 p) {
  const double tol = 1e-12 * (1.0 + std::abs(geom.x_max - geom.x_min) +
                              std::abs(geom.y_outer_max() - geom.y_outer_min()));
  const bool on_bottom = std::abs(p.y - geom.y_outer_min()) <= tol;
  const bool on_top = std::abs(p.y - geom.y_outer_max()) <= tol;
  const bool on_side = (std::abs(p.x - geom.x_min) <= tol || std::abs(p.x - geom.x_max) <= tol) &&
                       p.y >= geom.y_outer_min() - tol && p.y <= geom.y_outer_max() + tol;
  if (!on_bottom && !on_top && !on_side)
    throw std::invalid_argument("dirichlet_boundary_value: point not on the outer boundary");
  if (!on_bottom && !on_top) return 0.0;

  const Plate plate = on_bottom ? Plate::Bottom : Plate::Top;
  // rightmost segment on this plate is closed at its right end
  double x1_max = -1e300;
  for (const auto& e : geom.electrodes)
    if (e.plate == plate) x1_max = std::max(x1_max, e.x1);
  for (const auto& e : geom.electrodes) {
    if (e.plate != plate) continue;
    const bool rightmost = e.x1 == x1_max;
    if (p.x >= e.x0 && (p.x < e.x1 || (rightmost && p.x <= e.x1))) return e.voltage;
  }
  return 0.0;
}

}  // namespace ewod
