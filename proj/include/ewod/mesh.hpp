#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace ewod {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double norm(Vec2 a);

enum class Region : std::uint8_t { Fluid, Dielectric };

enum class Plate : std::uint8_t { Bottom, Top };

/// One powered (or grounded) strip on the outer face of a dielectric plate.
struct ElectrodeSegment {
  Plate plate = Plate::Bottom;
  double x0 = 0.0;
  double x1 = 0.0;
  double voltage = 0.0;
};

/// Channel of fluid sandwiched between two dielectric plates.
/// Fluid domain: (x_min,x_max) x (y_fluid_min,y_fluid_max); each plate adds
/// plate_thickness above and below.
struct ChannelGeometry {
  double x_min = -5.0, x_max = 5.0;
  double y_fluid_min = 0.0, y_fluid_max = 1.0;
  double plate_thickness = 0.5;
  std::vector<ElectrodeSegment> electrodes;

  double y_outer_min() const { return y_fluid_min - plate_thickness; }
  double y_outer_max() const { return y_fluid_max + plate_thickness; }
  double fluid_width() const { return x_max - x_min; }
  double fluid_height() const { return y_fluid_max - y_fluid_min; }

  void validate() const;  // throws std::invalid_argument
};

/// A facet can be on the fluid boundary Gamma, on the outer Dirichlet
/// boundary, or both roles on the channel ends (Gamma and outer Neumann).
struct FacetTag {
  bool gamma = false;
  bool outer_dirichlet = false;
  bool outer_neumann = false;
};

struct Facet {
  int cell = -1;        // owning cell (fluid side for Gamma facets)
  int local_edge = -1;  // 0 bottom, 1 right, 2 top, 3 left
  int n0 = -1, n1 = -1;
  FacetTag tag;
  Vec2 normal;  // outward w.r.t. fluid for Gamma, w.r.t. Omega* otherwise
};

/// Structured axis-aligned quadrilateral mesh of the composite domain with
/// region tags and classified boundary/interface facets. Immutable after
/// construction.
struct Mesh {
  ChannelGeometry geom;
  std::vector<double> xs, ys;  // tensor grid lines
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 4>> cells;  // counter-clockwise
  std::vector<Region> cell_region;
  std::vector<Facet> facets;

  int nx() const { return static_cast<int>(xs.size()) - 1; }
  int ny() const { return static_cast<int>(ys.size()) - 1; }
  int n_cells() const { return static_cast<int>(cells.size()); }
  int n_nodes() const { return static_cast<int>(nodes.size()); }

  int cell_i(int c) const { return c % nx(); }
  int cell_j(int c) const { return c / nx(); }
  double cell_hx(int c) const { return xs[cell_i(c) + 1] - xs[cell_i(c)]; }
  double cell_hy(int c) const { return ys[cell_j(c) + 1] - ys[cell_j(c)]; }
  double cell_area(int c) const { return cell_hx(c) * cell_hy(c); }
  Vec2 cell_origin(int c) const { return {xs[cell_i(c)], ys[cell_j(c)]}; }

  double fluid_area() const;
  double total_area() const;
  double facet_length(const Facet& f) const;
};

Mesh build_channel_mesh(const ChannelGeometry& geom, int nx, int ny_fluid, int ny_plate);

Mesh refine_uniform(const Mesh& m);

/// Applied voltage at a point of the outer Dirichlet boundary. Electrode
/// segments are half-open on the left (x >= x0, x < x1) except the rightmost
/// segment of each plate, which is closed. Throws if the point is not on the
/// outer boundary.
double dirichlet_boundary_value(const ChannelGeometry& geom, Vec2 p);

}  // namespace ewod
