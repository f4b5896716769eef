#pragma once

#include <optional>

namespace ewod {

/// Stress-threshold contact line pinning (numerics-only slip law).
struct PinningParams {
  double T_p = 1.0;             // tangential stress threshold
  double transition_width = 1.0;  // half-width of the blend, in log2(|S|/T_p)
};

/// All coefficients in nondimensional form (every dimensionless group set
/// to one); phase-dependent ones interpolate the two bulk values with the
/// normalized arctan law.
struct MaterialParams {
  double rho1 = 100.0, rho2 = 1.0;
  double eta1 = 10.0, eta2 = 1.0;
  double K1 = 10.0, K2 = 1.0;
  bool K_slaved = true;
  double eps1 = 5.0, eps2 = 1.0;
  double eps_D = 100.0;
  double gamma = 50.0;
  double delta = 0.05;
  double lambda = 0.5;
  double M_mobility = 1e-2;
  double M_mobility2 = 1e-2;  // second bulk value when mobility_slaved
  bool mobility_slaved = false;
  double alpha = 1e-3;
  double beta_const = 10.0;
  double theta_s = 2.0943951023931953;  // radians (120 deg)
  std::optional<PinningParams> pinning;

  void validate() const;  // throws; returns normally with a warning flag below
  bool delta_warning() const;

  double rho(double phi) const;
  double rho_prime(double phi) const;
  double eta(double phi) const;
  double Kcond(double phi) const;
  double eps(double phi) const;
  double eps_prime(double phi) const;
  double mobility(double phi) const;
  double rho_min() const { return rho1 < rho2 ? rho1 : rho2; }
};

/// Normalized arctan interpolation between bulk values:
/// Psi(phi) = (Psi1-Psi2)/2 * (2/pi) atan(phi/delta) + (Psi1+Psi2)/2.
double slave_eval(double v1, double v2, double delta, double phi);
double slave_deriv(double v1, double v2, double delta, double phi);

struct TripleEval {
  double value, d1, d2;
};

/// Ginzburg-Landau double well with quadratic tails; C^1 at +-1.
TripleEval double_well(double phi);

/// Interfacial energy density (cos(theta_s)/2) sin(pi phi/2), argument
/// clamped outside [-1,1] so the second derivative stays bounded.
TripleEval theta_fs(double phi, double theta_s);

/// Regularized tangential-derivative magnitude (1/delta) exp(-phi^2/(2 delta)).
double psi_eval(double phi, double delta);

/// GNBC slip coefficient; constant beta when pinning is disabled, otherwise
/// eta(phi) * l(phi, S) with the three-plateau stress law.
double slip_coefficient(double phi, double S_ntau, const MaterialParams& p);

/// Difference quotient of the permittivity: (eps(a)-eps(b))/(a-b), with the
/// coincident limit eps'(a).
double perm_diff_quotient(double phi1, double phi2, const MaterialParams& p);

struct StabilizationBounds {
  double A_min, B_min;
};

/// A >= 1/2 sup W'', B >= 1/2 sup |Theta_fs''|.
StabilizationBounds stabilization_bounds(const MaterialParams& p);

struct PhysicalScales {
  double rho_scale = 996.93;
  double eta_scale = 8.68e-4;
  double L_scale = 1e-4;
  double u_scale = 0.01;
  double V_scale = 20.0;
  double eps_scale = 78.36 * 8.854e-12;
  double M_scale = 0.01;
  double K_scale = 5.5e-6;
  double gamma = 0.07199;
  double lambda = 0.5;
  double alpha = 1e-3;
};

struct NonDimGroups {
  double Ca, Re, We, Bo_EW, Ie, St_ph, Mo, Ko, Ch;
};

NonDimGroups nondim_groups(const PhysicalScales& s);

}  // namespace ewod
