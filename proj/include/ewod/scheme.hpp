#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ewod/fespace.hpp"
#include "ewod/materials.hpp"

namespace ewod {

struct DropletPrimitive {
  enum class Kind { Circle, Ellipse, HalfPlane };
  Kind kind = Kind::Circle;
  Vec2 center{0.0, 0.0};
  double radius = 0.5;
  Vec2 semi_axes{1.0, 1.0};
  Vec2 normal{0.0, 1.0};  // half-plane: inside where dot(normal, x - center) >= 0
  int sign = +1;          // +1 droplet (phi -> +1 inside), -1 carve-out
};

/// Positive inside; exact for circles and half-planes, first-order
/// normalized for ellipses.
double signed_distance(const DropletPrimitive& p, Vec2 x);

/// One time level. V on the composite domain, everything else on the fluid.
struct State {
  std::vector<double> V, q, phi, mu, u, p, xi;
  double t = 0.0;
  int n = 0;
};

enum class SchemeMode { Split, Coupled };

struct SchemeParams {
  double dt = 1e-3;
  double A_stab = 1.0;
  double B_stab = 0.3084251375340423;  // pi^2 |cos 120deg| / 16
  SchemeMode mode = SchemeMode::Split;
  double picard_tol = 1e-10;
  int picard_max = 500;
  double picard_damping = 1.0;
  double tol_spd = 1e-10;
  double tol_nonsym = 1e-9;
  int max_iter = 50000;
  double cfl_c1 = 0.5, cfl_c2 = 0.5;
};

struct StepReport {
  SolverReport potential, charge, phase, velocity, pressure;
  int picard_iters = 0;
  double picard_residual = 0.0;
  std::vector<double> picard_history;
  bool ok = true;
  std::string failed_step;
};

/// Discretization bundle plus the two time-marching paths: the fractional
/// -step scheme (Split) and the fully coupled scheme iterated with a Picard
/// sweep (Coupled).
class Simulator {
 public:
  Simulator(Mesh mesh, MaterialParams mat, SchemeParams prm);

  State init_state(const std::vector<DropletPrimitive>& droplets) const;

  std::vector<double> step_potential(const State& s, SolverReport* rep = nullptr) const;
  std::vector<double> step_charge(const State& s, const std::vector<double>& V_new,
                                  SolverReport* rep = nullptr) const;
  std::pair<std::vector<double>, std::vector<double>> step_phase(
      const State& s, const std::vector<double>& V_new, SolverReport* rep = nullptr) const;
  std::vector<double> step_velocity(const State& s, const std::vector<double>& phi_new,
                                    const std::vector<double>& mu_new,
                                    const std::vector<double>& q_new,
                                    const std::vector<double>& V_new,
                                    SolverReport* rep = nullptr) const;
  std::pair<std::vector<double>, std::vector<double>> step_pressure(
      const State& s, const std::vector<double>& u_new, SolverReport* rep = nullptr) const;

  State advance(const State& s, StepReport* rep = nullptr) const;       // Split
  State coupled_step(const State& s, StepReport* rep = nullptr) const;  // Picard on the coupled system
  State step(const State& s, StepReport* rep = nullptr) const;          // dispatch on params.mode

  double cfl_suggest(double u_max_estimate = 0.0) const;
  double h_min_fluid() const;

  const Mesh& mesh() const { return mesh_; }
  const MaterialParams& material() const { return mat_; }
  const SchemeParams& params() const { return prm_; }
  SchemeParams& params() { return prm_; }
  const FeSpace& spaceW() const { return W_; }
  const FeSpace& spaceQ() const { return Q_; }
  const FeSpace& spaceX() const { return X_; }
  const FeSpace& spaceP() const { return P_; }
  const std::vector<double>& v0_lift() const { return v0_lift_; }
  const std::vector<double>& pressure_weights() const { return lumpP_; }
  const CsrMatrix& divergence() const { return B_; }

  /// Signed regularized tangential phase derivative on a Gamma facet:
  /// psi(phi) * sgn(d_tau phi), frozen at the given phase field.
  double psi_signed(const Facet& f, int eq, const FieldEval& phi) const;
  /// Slip coefficient at a boundary quadrature point, frozen at the explicit
  /// phase and (for pinning) the explicit velocity's tangential stress.
  double beta_coeff(const Facet& f, int eq, const FieldEval& phi, const FieldEval* u) const;

  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

 private:
  Mesh mesh_;
  MaterialParams mat_;
  SchemeParams prm_;
  FeSpace W_, Q_, X_, P_;
  CsrMatrix B_, Bc_;  // divergence; constrained columns zeroed
  CsrMatrix massQ_, Kp_;
  std::vector<double> lumpP_, onesP_, v0_lift_;

  CsrMatrix phase_coupling_matrix(const State& s, bool implicit_stab) const;
  // Schur solve of [M/dt, A01; A10, -M][phi;mu] = [b0;b1] with mu eliminated
  // through the mass matrix
  std::pair<std::vector<double>, std::vector<double>> solve_phase_schur(
      const CsrMatrix& A01, const CsrMatrix& A10, const std::vector<double>& b0,
      const std::vector<double>& b1, std::vector<double> phi_guess, SolverReport* rep,
      double tol_override = 0.0) const;
};

}  // namespace ewod
