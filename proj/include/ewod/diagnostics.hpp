#pragma once

#include <optional>

#include "ewod/scheme.hpp"

namespace ewod {

struct EnergyBreakdown {
  double kinetic = 0.0;        // int 1/2 rho(phi) |u|^2
  double charge = 0.0;         // int lambda/2 q^2
  double cahn_hilliard = 0.0;  // gamma int (delta/2 |grad phi|^2 + W(phi)/delta)
  double electrostatic = 0.0;  // int_{Omega*} 1/2 eps*(phi) |grad V|^2
  double wall = 0.0;           // gamma int_Gamma Theta_fs(phi)
  double total = 0.0;
};

struct DissipationBreakdown {
  double viscous = 0.0;        // int eta |S(u)|^2
  double mobility = 0.0;       // int M |grad mu|^2
  double ohmic = 0.0;          // int K |grad(lambda q + V)|^2
  double slip = 0.0;           // int_Gamma beta |u_tau|^2
  double boundary_relax = 0.0; // alpha int_Gamma |dphi/dt + u_tau psi|^2
};

struct Observables {
  double phase_mass = 0.0;
  double total_charge = 0.0;
  double div_norm = 0.0;
  double interface_length = 0.0;
  std::optional<Vec2> droplet_centroid;
};

/// Per-step audit of the discrete energy inequality: margin = lhs - rhs must
/// be <= solver noise for the coupled scheme with admissible stabilization.
struct StepAudit {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
};

EnergyBreakdown energy_total(const Simulator& sim, const State& s);
DissipationBreakdown dissipation_total(const Simulator& sim, const State& prev,
                                       const State& next);
Observables observables(const Simulator& sim, const State& s);
StepAudit energy_law_margin(const Simulator& sim, const State& prev, const State& next);

/// Connected components of {phi > 0} over fluid cells (4-adjacency, cell
/// averages); detects splitting and merging events.
int count_droplets(const Simulator& sim, const State& s);

}  // namespace ewod
