#include "ewod/materials.hpp"

#include <cmath>
#include <stdexcept>

namespace ewod {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void MaterialParams::validate() const {
  auto pos = [](double v, const char* name) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string("material: ") + name + " must be > 0");
  };
  pos(rho1, "rho1");
  pos(rho2, "rho2");
  pos(eta1, "eta1");
  pos(eta2, "eta2");
  pos(K1, "K1");
  pos(K2, "K2");
  pos(eps1, "eps1");
  pos(eps2, "eps2");
  pos(eps_D, "eps_D");
  pos(gamma, "gamma");
  pos(delta, "delta");
  pos(lambda, "lambda");
  pos(M_mobility, "mobility");
  pos(alpha, "alpha");
  pos(beta_const, "beta");
  if (std::abs(std::cos(theta_s)) > 1.0)
    throw std::invalid_argument("material: theta_s produced |cos| > 1");
  if (pinning) {
    pos(pinning->T_p, "pinning.T_p");
    pos(pinning->transition_width, "pinning.transition_width");
  }
}

bool MaterialParams::delta_warning() const { return delta > 0.25; }

double slave_eval(double v1, double v2, double delta, double phi) {
  return 0.5 * (v1 - v2) * (2.0 / kPi) * std::atan(phi / delta) + 0.5 * (v1 + v2);
}

double slave_deriv(double v1, double v2, double delta, double phi) {
  const double t = phi / delta;
  return (v1 - v2) / (kPi * delta) / (1.0 + t * t);
}

double MaterialParams::rho(double phi) const { return slave_eval(rho1, rho2, delta, phi); }
double MaterialParams::rho_prime(double phi) const { return slave_deriv(rho1, rho2, delta, phi); }
double MaterialParams::eta(double phi) const { return slave_eval(eta1, eta2, delta, phi); }
double MaterialParams::Kcond(double phi) const {
  return K_slaved ? slave_eval(K1, K2, delta, phi) : K1;
}
double MaterialParams::eps(double phi) const { return slave_eval(eps1, eps2, delta, phi); }
double MaterialParams::eps_prime(double phi) const { return slave_deriv(eps1, eps2, delta, phi); }
double MaterialParams::mobility(double phi) const {
  return mobility_slaved ? slave_eval(M_mobility, M_mobility2, delta, phi) : M_mobility;
}

TripleEval double_well(double phi) {
  if (phi < -1.0) {
    const double e = phi + 1.0;
    return {e * e, 2.0 * e, 2.0};
  }
  if (phi > 1.0) {
    const double e = phi - 1.0;
    return {e * e, 2.0 * e, 2.0};
  }
  const double s = 1.0 - phi * phi;
  return {0.25 * s * s, phi * phi * phi - phi, 3.0 * phi * phi - 1.0};
}

TripleEval theta_fs(double phi, double theta_s) {
  const double c = 0.5 * std::cos(theta_s);
  if (phi <= -1.0) return {-c, 0.0, 0.0};
  if (phi >= 1.0) return {c, 0.0, 0.0};
  const double a = 0.5 * kPi * phi;
  return {c * std::sin(a), c * 0.5 * kPi * std::cos(a), -c * 0.25 * kPi * kPi * std::sin(a)};
}

double psi_eval(double phi, double delta) {
  return (1.0 / delta) * std::exp(-phi * phi / (2.0 * delta));
}

namespace {
// C^1 monotone ramp: 0 at t<=0, 1 at t>=1
double smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * (3.0 - 2.0 * t);
}
}  // namespace

double slip_coefficient(double phi, double S_ntau, const MaterialParams& p) {
  if (!p.pinning) return p.beta_const;
  const double etav = p.eta(phi);
  if (std::abs(phi) > 0.5) return etav / p.delta;
  // three plateaus in log2(|S|/T_p): 1/delta below -w, 1 at 0, delta above +w
  const double w = p.pinning->transition_width;
  const double r = std::abs(S_ntau) / p.pinning->T_p;
  double g;  // exponent of delta
  if (r <= 0.0) {
    g = -1.0;
  } else {
    const double s = std::log2(r) / w;
    g = s <= 0.0 ? -1.0 + smoothstep(s + 1.0) : smoothstep(s);
  }
  return etav * std::pow(p.delta, g);
}

double perm_diff_quotient(double phi1, double phi2, const MaterialParams& p) {
  if (std::abs(phi1 - phi2) > 1e-12 * (1.0 + std::abs(phi1) + std::abs(phi2)))
    return (p.eps(phi1) - p.eps(phi2)) / (phi1 - phi2);
  return p.eps_prime(phi1);
}

StabilizationBounds stabilization_bounds(const MaterialParams& p) {
  // sup W'' = 2 (tails and the interior max at phi=+-1); sup |Theta''| =
  // pi^2 |cos theta_s| / 8 on [-1,1], zero on the clamped tails
  return {1.0, kPi * kPi * std::abs(std::cos(p.theta_s)) / 16.0};
}

NonDimGroups nondim_groups(const PhysicalScales& s) {
  NonDimGroups g{};
  const double t_scale = s.L_scale / s.u_scale;
  const double q_scale = s.V_scale / s.lambda;
  g.Ca = s.eta_scale * s.u_scale / s.gamma;
  g.Re = s.rho_scale * s.u_scale * s.L_scale / s.eta_scale;
  g.We = s.rho_scale * s.u_scale * s.u_scale * s.L_scale / s.gamma;
  g.Bo_EW = s.eps_scale * s.V_scale * s.V_scale / (s.L_scale * s.gamma);
  g.Ie = s.rho_scale * s.u_scale * s.u_scale / (q_scale * s.V_scale);
  g.St_ph = s.gamma / (s.alpha / t_scale);
  g.Mo = s.gamma * s.M_scale / (s.L_scale * s.L_scale * s.u_scale);
  g.Ko = s.V_scale * s.K_scale / (s.L_scale * q_scale * s.u_scale);
  g.Ch = q_scale * s.L_scale * s.L_scale / (s.V_scale * s.eps_scale);
  return g;
}

}  // namespace ewod
