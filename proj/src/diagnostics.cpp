#include "ewod/diagnostics.hpp"

#include <cmath>

namespace ewod {

namespace {

// integrate f(cell, q) over the fluid cells
template <typename F>
double quad_fluid(const Simulator& sim, F&& f) {
  const Mesh& m = sim.mesh();
  const auto& qr = quadrature();
  double total = 0.0;
  for (int c = 0; c < m.n_cells(); ++c) {
    if (m.cell_region[c] != Region::Fluid) continue;
    const double jac = 0.25 * m.cell_hx(c) * m.cell_hy(c);
    for (int q = 0; q < QuadratureRule::n_cell; ++q) total += qr.wts[q] * jac * f(c, q);
  }
  return total;
}

template <typename F>
double quad_all(const Simulator& sim, F&& f) {
  const Mesh& m = sim.mesh();
  const auto& qr = quadrature();
  double total = 0.0;
  for (int c = 0; c < m.n_cells(); ++c) {
    const double jac = 0.25 * m.cell_hx(c) * m.cell_hy(c);
    for (int q = 0; q < QuadratureRule::n_cell; ++q) total += qr.wts[q] * jac * f(c, q);
  }
  return total;
}

template <typename F>
double quad_gamma(const Simulator& sim, F&& f) {
  const Mesh& m = sim.mesh();
  const auto& qr = quadrature();
  double total = 0.0;
  for (const auto& fc : m.facets) {
    if (!fc.tag.gamma) continue;
    const double jac = 0.5 * m.facet_length(fc);
    for (int q = 0; q < QuadratureRule::n_edge; ++q) total += qr.edge_wts[q] * jac * f(fc, q);
  }
  return total;
}

double s_norm2(const double g[2][2]) {  // |sym(g)|^2
  const double s00 = g[0][0], s11 = g[1][1], s01 = 0.5 * (g[0][1] + g[1][0]);
  return s00 * s00 + s11 * s11 + 2.0 * s01 * s01;
}

}  // namespace

EnergyBreakdown energy_total(const Simulator& sim, const State& s) {
  const MaterialParams& mt = sim.material();
  FieldEval phi{&sim.spaceQ(), &s.phi}, q{&sim.spaceQ(), &s.q};
  FieldEval u{&sim.spaceX(), &s.u}, V{&sim.spaceW(), &s.V};
  EnergyBreakdown e;
  e.kinetic = quad_fluid(sim, [&](int c, int k) {
    const Vec2 uv = u.value_vec(c, k);
    return 0.5 * mt.rho(phi.value(c, k)) * dot(uv, uv);
  });
  e.charge = quad_fluid(sim, [&](int c, int k) {
    const double qv = q.value(c, k);
    return 0.5 * mt.lambda * qv * qv;
  });
  e.cahn_hilliard = quad_fluid(sim, [&](int c, int k) {
    const Vec2 g = phi.grad(c, k);
    return mt.gamma * (0.5 * mt.delta * dot(g, g) +
                       double_well(phi.value(c, k)).value / mt.delta);
  });
  e.electrostatic = quad_all(sim, [&](int c, int k) {
    const Vec2 g = V.grad(c, k);
    const double eps = sim.mesh().cell_region[c] == Region::Fluid ? mt.eps(phi.value(c, k))
                                                                  : mt.eps_D;
    return 0.5 * eps * dot(g, g);
  });
  e.wall = mt.gamma * quad_gamma(sim, [&](const Facet& f, int k) {
    return theta_fs(phi.edge_value(f, k), mt.theta_s).value;
  });
  e.total = e.kinetic + e.charge + e.cahn_hilliard + e.electrostatic + e.wall;
  return e;
}

DissipationBreakdown dissipation_total(const Simulator& sim, const State& prev,
                                       const State& next) {
  const MaterialParams& mt = sim.material();
  const double dt = sim.params().dt;
  FieldEval phin{&sim.spaceQ(), &prev.phi}, un{&sim.spaceX(), &prev.u};
  FieldEval phi1{&sim.spaceQ(), &next.phi}, mu1{&sim.spaceQ(), &next.mu};
  FieldEval u1{&sim.spaceX(), &next.u};
  auto g1 = inject(sim.spaceW(), next.V, sim.spaceQ());
  for (std::size_t i = 0; i < g1.size(); ++i) g1[i] += mt.lambda * next.q[i];
  FieldEval gf{&sim.spaceQ(), &g1};

  DissipationBreakdown d;
  d.viscous = quad_fluid(sim, [&](int c, int k) {
    double g[2][2];
    u1.grad_vec(c, k, g);
    return mt.eta(phin.value(c, k)) * s_norm2(g);
  });
  d.mobility = quad_fluid(sim, [&](int c, int k) {
    const Vec2 g = mu1.grad(c, k);
    return mt.mobility(phin.value(c, k)) * dot(g, g);
  });
  d.ohmic = quad_fluid(sim, [&](int c, int k) {
    const Vec2 g = gf.grad(c, k);
    return mt.Kcond(phin.value(c, k)) * dot(g, g);
  });
  d.slip = quad_gamma(sim, [&](const Facet& f, int k) {
    const double ut = dot(u1.edge_value_vec(f, k), facet_tangent(f));
    return sim.beta_coeff(f, k, phin, &un) * ut * ut;
  });
  d.boundary_relax = quad_gamma(sim, [&](const Facet& f, int k) {
    const double dphi = (phi1.edge_value(f, k) - phin.edge_value(f, k)) / dt;
    const double ut = dot(u1.edge_value_vec(f, k), facet_tangent(f));
    const double v = dphi + ut * sim.psi_signed(f, k, phin);
    return mt.alpha * v * v;
  });
  return d;
}

Observables observables(const Simulator& sim, const State& s) {
  const MaterialParams& mt = sim.material();
  FieldEval phi{&sim.spaceQ(), &s.phi}, u{&sim.spaceX(), &s.u};
  Observables o;
  o.phase_mass = integrate(sim.spaceQ(), s.phi, Integrand::Value);
  o.total_charge = integrate(sim.spaceQ(), s.q, Integrand::Value);
  o.div_norm = std::sqrt(quad_fluid(sim, [&](int c, int k) {
    double g[2][2];
    u.grad_vec(c, k, g);
    const double dv = g[0][0] + g[1][1];
    return dv * dv;
  }));
  o.interface_length = 3.0 * mt.delta / (2.0 * std::sqrt(2.0)) *
                       integrate(sim.spaceQ(), s.phi, Integrand::GradSquare);
  const double vol = quad_fluid(sim, [&](int c, int k) {
    return 0.5 * (1.0 + phi.value(c, k));
  });
  if (vol > 1e-10 * sim.mesh().fluid_area()) {
    const double cx = quad_fluid(sim, [&](int c, int k) {
      return quad_point(sim.mesh(), c, k).x * 0.5 * (1.0 + phi.value(c, k));
    });
    const double cy = quad_fluid(sim, [&](int c, int k) {
      return quad_point(sim.mesh(), c, k).y * 0.5 * (1.0 + phi.value(c, k));
    });
    o.droplet_centroid = Vec2{cx / vol, cy / vol};
  }
  return o;
}

int count_droplets(const Simulator& sim, const State& s) {
  const Mesh& m = sim.mesh();
  const auto& qr = quadrature();
  FieldEval phi{&sim.spaceQ(), &s.phi};
  std::vector<char> wet(m.n_cells(), 0);
  for (int c = 0; c < m.n_cells(); ++c) {
    if (m.cell_region[c] != Region::Fluid) continue;
    double avg = 0.0;
    for (int q = 0; q < QuadratureRule::n_cell; ++q) avg += qr.wts[q] * phi.value(c, q);
    wet[c] = avg > 0.0;
  }
  const int nx = m.nx();
  std::vector<int> label(m.n_cells(), -1);
  int comps = 0;
  std::vector<int> stack;
  for (int c = 0; c < m.n_cells(); ++c) {
    if (!wet[c] || label[c] >= 0) continue;
    ++comps;
    stack.push_back(c);
    label[c] = comps;
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      const int i = m.cell_i(cur), j = m.cell_j(cur);
      const int nb[4] = {i > 0 ? cur - 1 : -1, i < nx - 1 ? cur + 1 : -1,
                         j > 0 ? cur - nx : -1, j < m.ny() - 1 ? cur + nx : -1};
      for (int t = 0; t < 4; ++t) {
        const int b = nb[t];
        if (b >= 0 && wet[b] && label[b] < 0) {
          label[b] = comps;
          stack.push_back(b);
        }
      }
    }
  }
  return comps;
}

StepAudit energy_law_margin(const Simulator& sim, const State& prev, const State& next) {
  const MaterialParams& mt = sim.material();
  const double dt = sim.params().dt;
  const Mesh& m = sim.mesh();
  FieldEval phin{&sim.spaceQ(), &prev.phi}, phi1{&sim.spaceQ(), &next.phi};
  FieldEval qn{&sim.spaceQ(), &prev.q}, q1{&sim.spaceQ(), &next.q};
  FieldEval un{&sim.spaceX(), &prev.u}, u1{&sim.spaceX(), &next.u};
  FieldEval Vn{&sim.spaceW(), &prev.V}, V1{&sim.spaceW(), &next.V};
  FieldEval lift{&sim.spaceW(), &sim.v0_lift()};

  double lhs = 0.0;
  lhs += quad_fluid(sim, [&](int c, int k) {
    const Vec2 a = u1.value_vec(c, k), b = un.value_vec(c, k);
    const Vec2 d = a - b;
    return mt.rho(phi1.value(c, k)) * dot(a, a) - mt.rho(phin.value(c, k)) * dot(b, b) +
           mt.rho(phin.value(c, k)) * dot(d, d);
  });
  lhs += quad_fluid(sim, [&](int c, int k) {
    const double a = q1.value(c, k), b = qn.value(c, k), d = a - b;
    return mt.lambda * (a * a - b * b + 0.5 * d * d);
  });
  lhs += quad_fluid(sim, [&](int c, int k) {
    const Vec2 a = phi1.grad(c, k), b = phin.grad(c, k), d = a - b;
    return mt.gamma * mt.delta * (dot(a, a) - dot(b, b) + dot(d, d));
  });
  lhs += quad_fluid(sim, [&](int c, int k) {
    return 2.0 * mt.gamma / mt.delta *
           (double_well(phi1.value(c, k)).value - double_well(phin.value(c, k)).value);
  });
  lhs += quad_all(sim, [&](int c, int k) {
    const bool fl = m.cell_region[c] == Region::Fluid;
    const double e1 = fl ? mt.eps(phi1.value(c, k)) : mt.eps_D;
    const double e0 = fl ? mt.eps(phin.value(c, k)) : mt.eps_D;
    const Vec2 a = V1.grad(c, k), b = Vn.grad(c, k), d = a - b;
    return e1 * dot(a, a) - e0 * dot(b, b) + e0 * dot(d, d);
  });
  lhs += 2.0 * mt.gamma * quad_gamma(sim, [&](const Facet& f, int k) {
    return theta_fs(phi1.edge_value(f, k), mt.theta_s).value -
           theta_fs(phin.edge_value(f, k), mt.theta_s).value;
  });
  const auto d = dissipation_total(sim, prev, next);
  lhs += 2.0 * dt * (d.viscous + d.mobility + d.ohmic + d.slip + d.boundary_relax);

  double rhs = 0.0;
  rhs -= 2.0 * quad_fluid(sim, [&](int c, int k) {
    return (q1.value(c, k) - qn.value(c, k)) * lift.value(c, k);
  });
  rhs += 2.0 * quad_all(sim, [&](int c, int k) {
    const bool fl = m.cell_region[c] == Region::Fluid;
    const double e1 = fl ? mt.eps(phi1.value(c, k)) : mt.eps_D;
    const double e0 = fl ? mt.eps(phin.value(c, k)) : mt.eps_D;
    const Vec2 dflux = e1 * V1.grad(c, k) - e0 * Vn.grad(c, k);
    return dot(dflux, lift.grad(c, k));
  });

  return {lhs, rhs, lhs - rhs};
}

}  // namespace ewod
