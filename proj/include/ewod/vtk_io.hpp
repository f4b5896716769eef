#pragma once

#include <string>

#include "ewod/scheme.hpp"

namespace ewod {

/// Legacy ASCII VTK (UNSTRUCTURED_GRID of quads over the composite domain).
/// Point data: scalars V, phi, mu, q, p, fluid_mask and vector u; fields of
/// fluid-only spaces carry 0 at non-fluid points.
void write_vtk(const Simulator& sim, const State& s, const std::string& path);

std::string vtk_to_string(const Simulator& sim, const State& s);

}  // namespace ewod
