#include "ewod/scheme.hpp"

#include <cmath>
#include <stdexcept>

namespace ewod {

namespace {

ScalarCoeff unit_coeff() {
  return [](const QuadCtx&) { return 1.0; };
}

std::vector<double> scaled(const std::vector<double>& v, double a) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = a * v[i];
  return out;
}

void add_scaled(std::vector<double>& y, double a, const std::vector<double>& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

std::vector<double> concat(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

double rel_change(const std::vector<double>& now, const std::vector<double>& prev) {
  double d = 0.0, n = 0.0;
  for (std::size_t i = 0; i < now.size(); ++i) {
    const double e = now[i] - prev[i];
    d += e * e;
    n += prev[i] * prev[i];
  }
  return std::sqrt(d) / (1.0 + std::sqrt(n));
}

}  // namespace

double signed_distance(const DropletPrimitive& p, Vec2 x) {
  switch (p.kind) {
    case DropletPrimitive::Kind::Circle:
      return p.radius - norm(x - p.center);
    case DropletPrimitive::Kind::HalfPlane: {
      const double nn = norm(p.normal);
      return dot(p.normal, x - p.center) / (nn > 0 ? nn : 1.0);
    }
    case DropletPrimitive::Kind::Ellipse: {
      const double a = p.semi_axes.x, b = p.semi_axes.y;
      const double dx = x.x - p.center.x, dy = x.y - p.center.y;
      const double f = std::sqrt(dx * dx / (a * a) + dy * dy / (b * b));
      if (f < 1e-12) return std::min(a, b);
      const double g = std::sqrt(dx * dx / (a * a * a * a) + dy * dy / (b * b * b * b));
      return (1.0 - f) * f / g;
    }
  }
  return 0.0;
}

Simulator::Simulator(Mesh mesh, MaterialParams mat, SchemeParams prm)
    : mesh_(std::move(mesh)), mat_(mat), prm_(prm) {
  mat_.validate();
  if (!(prm_.dt > 0.0)) throw std::invalid_argument("scheme: dt must be > 0");
  W_ = make_voltage_space(mesh_);
  Q_ = make_scalar_fluid_space(mesh_);
  X_ = make_velocity_space(mesh_);
  P_ = make_pressure_space(mesh_);
  B_ = assemble_divergence(X_, P_);
  Bc_ = B_;
  {
    std::vector<char> flag(X_.n_dofs(), 0);
    for (const auto& c : X_.constraints) flag[c.dof] = 1;
    for (int r = 0; r < Bc_.n_rows; ++r)
      for (int k = Bc_.row_offsets[r]; k < Bc_.row_offsets[r + 1]; ++k)
        if (flag[Bc_.col_indices[k]]) Bc_.values[k] = 0.0;
  }
  massQ_ = assemble_mass(Q_, unit_coeff());
  Kp_ = assemble_stiffness(P_, unit_coeff());
  lumpP_ = lumped_weights(P_);
  onesP_.assign(P_.n_dofs(), 1.0);
  v0_lift_.assign(W_.n_dofs(), 0.0);
  set_constrained(v0_lift_, W_.constraints);
}

State Simulator::init_state(const std::vector<DropletPrimitive>& droplets) const {
  if (droplets.empty()) throw std::invalid_argument("init_state: empty droplet spec");
  const double dd = mat_.delta;
  State s;
  s.phi = interpolate(Q_, [&](Vec2 x) {
    double dpos = -1e300, dneg = -1e300;
    bool haspos = false, hasneg = false;
    for (const auto& p : droplets) {
      const double d = signed_distance(p, x);
      if (p.sign >= 0) {
        haspos = true;
        dpos = std::max(dpos, d);
      } else {
        hasneg = true;
        dneg = std::max(dneg, d);
      }
    }
    double d;
    if (haspos && hasneg) {
      if (dpos > 2.0 * dd && dneg > 2.0 * dd)
        throw std::invalid_argument("init_state: contradictory overlapping primitives");
      d = std::min(dpos, -dneg);
    } else {
      d = haspos ? dpos : -dneg;
    }
    return std::tanh(d / (std::sqrt(2.0) * dd));
  });
  s.mu.assign(Q_.n_dofs(), 0.0);
  s.q.assign(Q_.n_dofs(), 0.0);
  s.u.assign(X_.n_dofs(), 0.0);
  s.V.assign(W_.n_dofs(), 0.0);  // V^0 = 0, mu^0 = 0 convention
  s.p.assign(P_.n_dofs(), 0.0);
  s.xi.assign(P_.n_dofs(), 0.0);
  return s;
}

double Simulator::psi_signed(const Facet& f, int eq, const FieldEval& phi) const {
  const Vec2 t = facet_tangent(f);
  const double dtau = dot(phi.edge_grad(f, eq), t);
  // orientation carrier: +-1 wherever the interface actually meets the wall
  // (|d_tau phi| = O(1/delta) there), smoothly zero on the bulk plateaus
  // where the gradient is saturation noise
  const double kappa = 1e-6 / mat_.delta;
  return std::tanh(dtau / kappa) * psi_eval(phi.edge_value(f, eq), mat_.delta);
}

double Simulator::beta_coeff(const Facet& f, int eq, const FieldEval& phi,
                             const FieldEval* u) const {
  if (!mat_.pinning) return mat_.beta_const;
  double S_nt = 0.0;
  if (u) {
    double g[2][2];
    u->edge_grad_vec(f, eq, g);
    const Vec2 n = f.normal, t = facet_tangent(f);
    // S = sym(grad u); S_ntau = t . (S n)
    const double Sn0 = 0.5 * (g[0][0] + g[0][0]) * n.x + 0.5 * (g[0][1] + g[1][0]) * n.y;
    const double Sn1 = 0.5 * (g[1][0] + g[0][1]) * n.x + 0.5 * (g[1][1] + g[1][1]) * n.y;
    S_nt = t.x * Sn0 + t.y * Sn1;
  }
  return slip_coefficient(phi.edge_value(f, eq), S_nt, mat_);
}

std::vector<double> Simulator::step_potential(const State& s, SolverReport* rep) const {
  FieldEval phin{&Q_, &s.phi};
  auto A = assemble_stiffness(W_, [&](const QuadCtx& c) {
    return c.region == Region::Fluid ? mat_.eps(phin.value(c.cell, c.q)) : mat_.eps_D;
  });
  FieldEval qn{&Q_, &s.q};
  auto b = assemble_source(W_, [&](const QuadCtx& c) {
    return c.region == Region::Fluid ? qn.value(c.cell, c.q) : 0.0;
  });
  apply_constraints(A, b, W_.constraints);
  std::vector<double> V = s.V;
  set_constrained(V, W_.constraints);
  SolveOpts o;
  o.tol = prm_.tol_spd;
  o.max_iter = prm_.max_iter;
  auto r = cg_solve(A, b, V, o);
  if (rep) *rep = r;
  return V;
}

std::vector<double> Simulator::step_charge(const State& s, const std::vector<double>& V_new,
                                           SolverReport* rep) const {
  FieldEval phin{&Q_, &s.phi}, qn{&Q_, &s.q}, un{&X_, &s.u};
  auto AK = assemble_stiffness(
      Q_, [&](const QuadCtx& c) { return mat_.Kcond(phin.value(c.cell, c.q)); });
  auto A = csr_add(1.0 / prm_.dt, massQ_, mat_.lambda, AK);
  auto b = scaled(massQ_.apply(s.q), 1.0 / prm_.dt);
  auto conv = assemble_grad_source(Q_, [&](const QuadCtx& c) {
    return qn.value(c.cell, c.q) * un.value_vec(c.cell, c.q);
  });
  add_scaled(b, 1.0, conv);
  auto gV = inject(W_, V_new, Q_);
  add_scaled(b, -1.0, AK.apply(gV));
  std::vector<double> q = s.q;
  SolveOpts o;
  o.tol = prm_.tol_spd;
  o.max_iter = prm_.max_iter;
  auto r = cg_solve(A, b, q, o);
  if (rep) *rep = r;
  return q;
}

CsrMatrix Simulator::phase_coupling_matrix(const State& s, bool implicit_stab) const {
  auto K1 = assemble_stiffness(Q_, unit_coeff());
  auto MG = assemble_boundary_mass(Q_, select_gamma(), unit_coeff());
  const double g = mat_.gamma, dd = mat_.delta, dt = prm_.dt, al = mat_.alpha;
  (void)s;
  CsrMatrix A10 = csr_add(g * dd, K1, al / dt + (implicit_stab ? g * prm_.B_stab : 0.0), MG);
  if (implicit_stab) A10 = csr_add(1.0, A10, g * prm_.A_stab / dd, massQ_);
  return A10;
}

std::pair<std::vector<double>, std::vector<double>> Simulator::solve_phase_schur(
    const CsrMatrix& A01, const CsrMatrix& A10, const std::vector<double>& b0,
    const std::vector<double>& b1, std::vector<double> phi_guess, SolverReport* rep,
    double tol_override) const {
  const int n = Q_.n_dofs();
  const double dt = prm_.dt;
  SolveOpts mass_opts;
  mass_opts.tol = 1e-14;
  mass_opts.max_iter = 2000;

  // T = M/dt + A01 M^{-1} A10, applied matrix-free with warm-started mass
  // solves
  std::vector<double> t1(n), t2(n, 0.0), t3(n);
  LinOp T;
  T.n = n;
  T.apply = [&](const double* x, double* y) {
    A10.spmv(x, t1.data());
    cg_solve(massQ_, t1, t2, mass_opts);
    A01.spmv(t2.data(), t3.data());
    massQ_.spmv(x, y);
    for (int i = 0; i < n; ++i) y[i] = y[i] / dt + t3[i];
  };
  {  // Jacobi seed: diag(M)/dt + row_i(A01) . col_i(A10) / diag(M)
    const auto dM = massQ_.diagonal();
    std::vector<std::vector<std::pair<int, double>>> a10cols(n);
    for (int r = 0; r < n; ++r)
      for (int k = A10.row_offsets[r]; k < A10.row_offsets[r + 1]; ++k)
        a10cols[A10.col_indices[k]].push_back({r, A10.values[k]});
    T.diag.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
      double acc = dM[i] / dt;
      for (int k = A01.row_offsets[i]; k < A01.row_offsets[i + 1]; ++k) {
        const int c = A01.col_indices[k];
        for (const auto& [r0, v0] : a10cols[i])
          if (r0 == c) acc += A01.values[k] * v0 / dM[c];
      }
      T.diag[i] = acc;
    }
  }
  // rhs = b0 + A01 M^{-1} b1
  std::vector<double> mb1(n, 0.0);
  cg_solve(massQ_, b1, mb1, mass_opts);
  auto rhs = A01.apply(mb1);
  add_scaled(rhs, 1.0, b0);

  SolveOpts o;
  o.tol = tol_override > 0.0 ? tol_override : prm_.tol_nonsym;
  o.max_iter = prm_.max_iter;
  auto r = bicgstab_solve(T, rhs, phi_guess, o);
  if (rep) *rep = r;

  // mu = M^{-1}(A10 phi - b1)
  auto res = A10.apply(phi_guess);
  add_scaled(res, -1.0, b1);
  std::vector<double> mu(n, 0.0);
  cg_solve(massQ_, res, mu, mass_opts);
  return {std::move(phi_guess), std::move(mu)};
}

std::pair<std::vector<double>, std::vector<double>> Simulator::step_phase(
    const State& s, const std::vector<double>& V_new, SolverReport* rep) const {
  const double g = mat_.gamma, dd = mat_.delta, dt = prm_.dt, al = mat_.alpha;
  FieldEval phin{&Q_, &s.phi}, un{&X_, &s.u};
  FieldEval Vn1{&W_, &V_new};

  auto Amob = assemble_stiffness(
      Q_, [&](const QuadCtx& c) { return mat_.mobility(phin.value(c.cell, c.q)); });
  auto A10 = phase_coupling_matrix(s, /*implicit_stab=*/true);

  auto b0 = scaled(massQ_.apply(s.phi), 1.0 / dt);
  add_scaled(b0, -1.0, assemble_source(Q_, [&](const QuadCtx& c) {
               return dot(un.value_vec(c.cell, c.q), phin.grad(c.cell, c.q));
             }));

  auto MG = assemble_boundary_mass(Q_, select_gamma(), unit_coeff());
  auto b1 = scaled(massQ_.apply(s.phi), g * prm_.A_stab / dd);
  add_scaled(b1, al / dt + g * prm_.B_stab, MG.apply(s.phi));
  add_scaled(b1, -g / dd, assemble_source(Q_, [&](const QuadCtx& c) {
               return double_well(phin.value(c.cell, c.q)).d1;
             }));
  add_scaled(b1, 0.5, assemble_source(Q_, [&](const QuadCtx& c) {
               const Vec2 gv = Vn1.grad(c.cell, c.q);
               return mat_.eps_prime(phin.value(c.cell, c.q)) * dot(gv, gv);
             }));
  add_scaled(b1, -0.5, assemble_source(Q_, [&](const QuadCtx& c) {
               const Vec2 uv = un.value_vec(c.cell, c.q);
               return mat_.rho_prime(phin.value(c.cell, c.q)) * dot(uv, uv);
             }));
  add_scaled(b1, -al, assemble_boundary_source(Q_, select_gamma(), [&](const QuadCtx& c) {
               const Vec2 ut = un.edge_value_vec(*c.facet, c.q);
               return dot(ut, facet_tangent(*c.facet)) * psi_signed(*c.facet, c.q, phin);
             }));
  add_scaled(b1, -g, assemble_boundary_source(Q_, select_gamma(), [&](const QuadCtx& c) {
               return theta_fs(phin.edge_value(*c.facet, c.q), mat_.theta_s).d1;
             }));

  return solve_phase_schur(Amob, A10, b0, b1, s.phi, rep);
}

std::vector<double> Simulator::step_velocity(const State& s, const std::vector<double>& phi_new,
                                             const std::vector<double>& mu_new,
                                             const std::vector<double>& q_new,
                                             const std::vector<double>& V_new,
                                             SolverReport* rep) const {
  const double dt = prm_.dt, al = mat_.alpha, lam = mat_.lambda;
  FieldEval phin{&Q_, &s.phi}, phi1{&Q_, &phi_new}, mu1{&Q_, &mu_new};
  FieldEval qn{&Q_, &s.q}, un{&X_, &s.u};

  auto Mrho = assemble_mass(X_, [&](const QuadCtx& c) {
    return 0.5 * (mat_.rho(phi1.value(c.cell, c.q)) + mat_.rho(phin.value(c.cell, c.q)));
  });
  auto Conv = assemble_convection(
      X_,
      [&](const QuadCtx& c) {
        return mat_.rho(phin.value(c.cell, c.q)) * un.value_vec(c.cell, c.q);
      },
      ConvForm::Skew);
  auto Visc = assemble_viscous(
      X_, [&](const QuadCtx& c) { return mat_.eta(phin.value(c.cell, c.q)); });
  auto Mbeta = assemble_boundary_mass(X_, select_gamma(), [&](const QuadCtx& c) {
    return beta_coeff(*c.facet, c.q, phin, &un);
  });
  auto Mpsi = assemble_boundary_mass(X_, select_gamma(), [&](const QuadCtx& c) {
    const double ps = psi_signed(*c.facet, c.q, phin);
    return al * ps * ps;
  });
  auto A = csr_add(1.0 / dt, Mrho, 1.0, Conv);
  A = csr_add(1.0, A, 1.0, Visc);
  A = csr_add(1.0, A, 1.0, Mbeta);
  A = csr_add(1.0, A, 1.0, Mpsi);

  // lambda q^{n+1} + V^{n+1} in the fluid Q2 space (exact injection)
  auto gfull = inject(W_, V_new, Q_);
  add_scaled(gfull, lam, q_new);
  FieldEval gf{&Q_, &gfull};

  auto rhs = assemble_source_vec(X_, [&](const QuadCtx& c) {
    return (1.0 / dt) * mat_.rho(phin.value(c.cell, c.q)) * un.value_vec(c.cell, c.q);
  });
  // p# = p^n + xi^n enters through the divergence operator
  {
    std::vector<double> psharp = s.p;
    add_scaled(psharp, 1.0, s.xi);
    add_scaled(rhs, 1.0, B_.apply_transpose(psharp));
  }
  add_scaled(rhs, 1.0, assemble_source_vec(X_, [&](const QuadCtx& c) {
               return mu1.value(c.cell, c.q) * phin.grad(c.cell, c.q);
             }));
  add_scaled(rhs, -1.0, assemble_source_vec(X_, [&](const QuadCtx& c) {
               return qn.value(c.cell, c.q) * gf.grad(c.cell, c.q);
             }));
  add_scaled(rhs, 0.5 / dt, assemble_source_vec(X_, [&](const QuadCtx& c) {
               const double dphi = phi1.value(c.cell, c.q) - phin.value(c.cell, c.q);
               return mat_.rho_prime(phin.value(c.cell, c.q)) * dphi * un.value_vec(c.cell, c.q);
             }));
  add_scaled(rhs, -al / dt,
             assemble_boundary_source_tangential(X_, select_gamma(), [&](const QuadCtx& c) {
               const double dphi =
                   phi1.edge_value(*c.facet, c.q) - phin.edge_value(*c.facet, c.q);
               return dphi * psi_signed(*c.facet, c.q, phin);
             }));

  apply_constraints(A, rhs, X_.constraints);
  std::vector<double> u = s.u;
  set_constrained(u, X_.constraints);
  SolveOpts o;
  o.tol = prm_.tol_nonsym;
  o.max_iter = prm_.max_iter;
  auto r = bicgstab_solve(A, rhs, u, o);
  if (rep) *rep = r;
  return u;
}

std::pair<std::vector<double>, std::vector<double>> Simulator::step_pressure(
    const State& s, const std::vector<double>& u_new, SolverReport* rep) const {
  const double rho_min = mat_.rho_min();
  auto rhs = scaled(B_.apply(u_new), -rho_min / prm_.dt);
  // the stiffness operator's null space is plain constants; the L2 zero-mean
  // representative is restored after the solve
  project_zero_mean_inplace(rhs, onesP_);
  std::vector<double> xi = s.xi;
  SolveOpts o;
  o.tol = prm_.tol_spd;
  o.max_iter = prm_.max_iter;
  o.zero_mean_weights = &onesP_;
  auto r = cg_solve(Kp_, rhs, xi, o);
  if (rep) *rep = r;
  project_zero_mean_inplace(xi, lumpP_);
  std::vector<double> p = s.p;
  add_scaled(p, 1.0, xi);
  project_zero_mean_inplace(p, lumpP_);
  return {xi, p};
}

State Simulator::advance(const State& s, StepReport* rep) const {
  StepReport local;
  StepReport& R = rep ? *rep : local;
  R = StepReport{};
  auto fail = [&](const char* step) {
    R.ok = false;
    R.failed_step = step;
    return s;
  };
  auto V1 = step_potential(s, &R.potential);
  if (!R.potential.converged) return fail("potential");
  auto q1 = step_charge(s, V1, &R.charge);
  if (!R.charge.converged) return fail("charge");
  auto [phi1, mu1] = step_phase(s, V1, &R.phase);
  if (!R.phase.converged) return fail("phase");
  auto u1 = step_velocity(s, phi1, mu1, q1, V1, &R.velocity);
  if (!R.velocity.converged) return fail("velocity");
  auto [xi1, p1] = step_pressure(s, u1, &R.pressure);
  if (!R.pressure.converged) return fail("pressure");
  State out;
  out.V = std::move(V1);
  out.q = std::move(q1);
  out.phi = std::move(phi1);
  out.mu = std::move(mu1);
  out.u = std::move(u1);
  out.p = std::move(p1);
  out.xi = std::move(xi1);
  out.t = s.t + prm_.dt;
  out.n = s.n + 1;
  return out;
}

State Simulator::coupled_step(const State& s, StepReport* rep) const {
  const double dt = prm_.dt, g = mat_.gamma, dd = mat_.delta;
  const double al = mat_.alpha, lam = mat_.lambda;
  StepReport local;
  StepReport& R = rep ? *rep : local;
  R = StepReport{};

  FieldEval phin{&Q_, &s.phi}, un{&X_, &s.u}, qn{&Q_, &s.q};

  // matrices frozen at time n
  auto AK_QQ = assemble_stiffness(
      Q_, [&](const QuadCtx& c) { return mat_.Kcond(phin.value(c.cell, c.q)); });
  auto AK_QW = assemble_mixed_stiffness(
      Q_, W_, [&](const QuadCtx& c) { return mat_.Kcond(phin.value(c.cell, c.q)); });
  auto M_WQ = assemble_mixed_mass(W_, Q_, unit_coeff());
  auto Aqq = csr_add(1.0 / dt, massQ_, lam, AK_QQ);
  auto Amob = assemble_stiffness(
      Q_, [&](const QuadCtx& c) { return mat_.mobility(phin.value(c.cell, c.q)); });
  // stabilization terms are kept implicit inside the sweep (same fixed
  // point, contractive map at desk-scale time steps)
  auto A10c = phase_coupling_matrix(s, /*implicit_stab=*/true);
  auto Visc = assemble_viscous(
      X_, [&](const QuadCtx& c) { return mat_.eta(phin.value(c.cell, c.q)); });
  auto Conv = assemble_convection(
      X_,
      [&](const QuadCtx& c) {
        return mat_.rho(phin.value(c.cell, c.q)) * un.value_vec(c.cell, c.q);
      },
      ConvForm::Skew);
  auto Mbeta = assemble_boundary_mass(X_, select_gamma(), [&](const QuadCtx& c) {
    return beta_coeff(*c.facet, c.q, phin, &un);
  });
  auto Mpsi = assemble_boundary_mass(X_, select_gamma(), [&](const QuadCtx& c) {
    const double ps = psi_signed(*c.facet, c.q, phin);
    return al * ps * ps;
  });
  auto MG = assemble_boundary_mass(Q_, select_gamma(), unit_coeff());

  // iterate-independent right-hand-side pieces
  const auto rhs_q_base = scaled(massQ_.apply(s.q), 1.0 / dt);
  const auto rhs_phi_base = scaled(massQ_.apply(s.phi), 1.0 / dt);
  auto rhs_mu_base = scaled(MG.apply(s.phi), al / dt + g * prm_.B_stab);
  add_scaled(rhs_mu_base, g * prm_.A_stab / dd, massQ_.apply(s.phi));
  add_scaled(rhs_mu_base, -g / dd, assemble_source(Q_, [&](const QuadCtx& c) {
               return double_well(phin.value(c.cell, c.q)).d1;
             }));
  add_scaled(rhs_mu_base, -g,
             assemble_boundary_source(Q_, select_gamma(), [&](const QuadCtx& c) {
               return theta_fs(phin.edge_value(*c.facet, c.q), mat_.theta_s).d1;
             }));
  const auto rhs_u_base = assemble_source_vec(X_, [&](const QuadCtx& c) {
    return (1.0 / dt) * mat_.rho(phin.value(c.cell, c.q)) * un.value_vec(c.cell, c.q);
  });

  // inner solves must be tighter than the sweep's convergence target
  const double block_tol = std::min(prm_.tol_nonsym, 0.01 * prm_.picard_tol);

  // Picard iterates
  std::vector<double> Vk = s.V, qk = s.q, phik = s.phi, muk = s.mu, uk = s.u, pk = s.p;
  std::vector<double> Vh, qh, phih, muh, uh, ph;
  std::vector<double> res_vec, res_prev;
  double prev_res = 1e300;
  double omega = prm_.picard_damping;
  bool converged = false;

  for (int it = 1; it <= prm_.picard_max; ++it) {
    FieldEval phikf{&Q_, &phik}, ukf{&X_, &uk}, mukf{&Q_, &muk};

    // potential + charge block
    {
      auto A_VV = assemble_stiffness(W_, [&](const QuadCtx& c) {
        return c.region == Region::Fluid ? mat_.eps(phikf.value(c.cell, c.q)) : mat_.eps_D;
      });
      auto M_WQ_neg = csr_add(-1.0, M_WQ, 0.0, M_WQ);
      auto A = csr_block_2x2(A_VV, M_WQ_neg, AK_QW, Aqq);
      auto rhs_q = rhs_q_base;
      add_scaled(rhs_q, 1.0, assemble_grad_source(Q_, [&](const QuadCtx& c) {
                   return qn.value(c.cell, c.q) * ukf.value_vec(c.cell, c.q);
                 }));
      std::vector<double> b = concat(std::vector<double>(W_.n_dofs(), 0.0), rhs_q);
      apply_constraints(A, b, W_.constraints);
      auto z = concat(Vk, qk);
      set_constrained(z, W_.constraints);
      SolveOpts o;
      o.tol = block_tol;
      o.max_iter = prm_.max_iter;
      auto r = bicgstab_solve(A, b, z, o);
      R.charge = r;
      if (!r.converged) {
        R.ok = false;
        R.failed_step = "picard:voltage-charge";
        return s;
      }
      Vh.assign(z.begin(), z.begin() + W_.n_dofs());
      qh.assign(z.begin() + W_.n_dofs(), z.end());
    }

    // phase + chemical potential block
    {
      FieldEval Vkf{&W_, &Vk}, Vhf{&W_, &Vh};
      auto b0 = rhs_phi_base;
      add_scaled(b0, -1.0, assemble_source(Q_, [&](const QuadCtx& c) {
                   return dot(ukf.value_vec(c.cell, c.q), phin.grad(c.cell, c.q));
                 }));
      auto b1 = rhs_mu_base;
      add_scaled(b1, 0.5, assemble_source(Q_, [&](const QuadCtx& c) {
                   const double E = perm_diff_quotient(phikf.value(c.cell, c.q),
                                                       phin.value(c.cell, c.q), mat_);
                   return E * dot(Vkf.grad(c.cell, c.q), Vhf.grad(c.cell, c.q));
                 }));
      add_scaled(b1, -0.5, assemble_source(Q_, [&](const QuadCtx& c) {
                   return mat_.rho_prime(phin.value(c.cell, c.q)) *
                          dot(un.value_vec(c.cell, c.q), ukf.value_vec(c.cell, c.q));
                 }));
      add_scaled(b1, -al,
                 assemble_boundary_source(Q_, select_gamma(), [&](const QuadCtx& c) {
                   const Vec2 ut = ukf.edge_value_vec(*c.facet, c.q);
                   return dot(ut, facet_tangent(*c.facet)) * psi_signed(*c.facet, c.q, phin);
                 }));
      SolverReport r;
      auto [ph_, mh_] = solve_phase_schur(Amob, A10c, b0, b1, phik, &r, block_tol);
      R.phase = r;
      if (!r.converged) {
        R.ok = false;
        R.failed_step = "picard:phase";
        return s;
      }
      phih = std::move(ph_);
      muh = std::move(mh_);
    }

    // momentum + pressure saddle (Schur complement on the pressure)
    {
      auto Mrho = assemble_mass(X_, [&](const QuadCtx& c) {
        return 0.5 * (mat_.rho(phikf.value(c.cell, c.q)) + mat_.rho(phin.value(c.cell, c.q)));
      });
      auto A = csr_add(1.0 / dt, Mrho, 1.0, Conv);
      A = csr_add(1.0, A, 1.0, Visc);
      A = csr_add(1.0, A, 1.0, Mbeta);
      A = csr_add(1.0, A, 1.0, Mpsi);

      auto gfull = inject(W_, Vk, Q_);
      add_scaled(gfull, lam, qk);
      FieldEval gf{&Q_, &gfull};
      auto rhs = rhs_u_base;
      add_scaled(rhs, 1.0, assemble_source_vec(X_, [&](const QuadCtx& c) {
                   return mukf.value(c.cell, c.q) * phin.grad(c.cell, c.q);
                 }));
      add_scaled(rhs, -1.0, assemble_source_vec(X_, [&](const QuadCtx& c) {
                   return qn.value(c.cell, c.q) * gf.grad(c.cell, c.q);
                 }));
      add_scaled(rhs, 0.5 / dt, assemble_source_vec(X_, [&](const QuadCtx& c) {
                   const double dphi = phikf.value(c.cell, c.q) - phin.value(c.cell, c.q);
                   return mat_.rho_prime(phin.value(c.cell, c.q)) * dphi *
                          un.value_vec(c.cell, c.q);
                 }));
      add_scaled(rhs, -al / dt,
                 assemble_boundary_source_tangential(X_, select_gamma(), [&](const QuadCtx& c) {
                   const double dphi =
                       phikf.edge_value(*c.facet, c.q) - phin.edge_value(*c.facet, c.q);
                   return dphi * psi_signed(*c.facet, c.q, phin);
                 }));
      apply_constraints(A, rhs, X_.constraints);

      SolveOpts inner;
      inner.tol = std::min(1e-12, block_tol);
      inner.max_iter = prm_.max_iter;
      auto solve_A = [&](const std::vector<double>& b, std::vector<double>& x) {
        auto r = bicgstab_solve(A, b, x, inner);
        return r.converged;
      };
      std::vector<double> u0 = uk;
      set_constrained(u0, X_.constraints);
      if (!solve_A(rhs, u0)) {
        R.ok = false;
        R.failed_step = "picard:momentum";
        return s;
      }
      const int np = P_.n_dofs();
      LinOp S;
      S.n = np;
      std::vector<double> wtmp(X_.n_dofs(), 0.0);
      S.apply = [&](const double* pin, double* pout) {
        std::vector<double> pv(pin, pin + np);
        auto btp = Bc_.apply_transpose(pv);
        std::fill(wtmp.begin(), wtmp.end(), 0.0);
        solve_A(btp, wtmp);
        auto bu = Bc_.apply(wtmp);
        std::copy(bu.begin(), bu.end(), pout);
      };
      {  // Jacobi seed for the Schur operator
        auto dA = A.diagonal();
        S.diag.assign(np, 0.0);
        for (int r0 = 0; r0 < Bc_.n_rows; ++r0)
          for (int k = Bc_.row_offsets[r0]; k < Bc_.row_offsets[r0 + 1]; ++k)
            S.diag[r0] += Bc_.values[k] * Bc_.values[k] / dA[Bc_.col_indices[k]];
      }
      auto rhs_S = scaled(Bc_.apply(u0), -1.0);
      project_zero_mean_inplace(rhs_S, onesP_);
      SolveOpts outer;
      outer.tol = std::min(1e-11, 10.0 * block_tol);
      outer.max_iter = 2000;
      outer.zero_mean_weights = &onesP_;
      ph = pk;
      project_zero_mean_inplace(ph, onesP_);
      auto r = bicgstab_solve(S, rhs_S, ph, outer);
      project_zero_mean_inplace(ph, lumpP_);
      R.pressure = r;
      R.velocity.iterations += r.iterations;
      if (!r.converged) {
        R.ok = false;
        R.failed_step = "picard:pressure-schur";
        return s;
      }
      auto btp = Bc_.apply_transpose(ph);
      add_scaled(btp, 1.0, rhs);
      uh = u0;
      if (!solve_A(btp, uh)) {
        R.ok = false;
        R.failed_step = "picard:momentum";
        return s;
      }
    }

    // residual, adaptive relaxation, update
    double res = rel_change(Vh, Vk);
    res = std::max(res, rel_change(qh, qk));
    res = std::max(res, rel_change(phih, phik));
    res = std::max(res, rel_change(muh, muk));
    res = std::max(res, rel_change(uh, uk));
    res = std::max(res, rel_change(ph, pk));
    R.picard_iters = it;
    R.picard_residual = res;
    R.picard_history.push_back(res);
    if (res <= prm_.picard_tol) {
      converged = true;
      Vk = Vh;
      qk = qh;
      phik = phih;
      muk = muh;
      uk = uh;
      pk = ph;
      break;
    }
    // normalized fixed-point residual for the Aitken update
    res_prev = std::move(res_vec);
    res_vec.clear();
    auto push_res = [&](const std::vector<double>& hat, const std::vector<double>& x) {
      const double sc = 1.0 / (1.0 + norm2(x));
      for (std::size_t i = 0; i < x.size(); ++i) res_vec.push_back(sc * (hat[i] - x[i]));
    };
    push_res(Vh, Vk);
    push_res(qh, qk);
    push_res(phih, phik);
    push_res(muh, muk);
    push_res(uh, uk);
    push_res(ph, pk);
    if (!res_prev.empty()) {
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < res_vec.size(); ++i) {
        const double dr = res_vec[i] - res_prev[i];
        num += res_prev[i] * dr;
        den += dr * dr;
      }
      if (den > 0.0) omega = std::min(1.9, std::max(0.05, -omega * num / den));
      if (res > 2.0 * prev_res) omega = 0.5 * prm_.picard_damping;  // safeguard
    }
    prev_res = res;
    auto blend = [&](std::vector<double>& x, const std::vector<double>& hat) {
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += omega * (hat[i] - x[i]);
    };
    blend(Vk, Vh);
    blend(qk, qh);
    blend(phik, phih);
    blend(muk, muh);
    blend(uk, uh);
    blend(pk, ph);
  }

  if (!converged) {
    R.ok = false;
    R.failed_step = "picard:max-iterations";
    return s;
  }
  State out;
  out.V = std::move(Vk);
  out.q = std::move(qk);
  out.phi = std::move(phik);
  out.mu = std::move(muk);
  out.u = std::move(uk);
  out.p = std::move(pk);
  project_zero_mean_inplace(out.p, lumpP_);
  out.xi.assign(P_.n_dofs(), 0.0);
  out.t = s.t + dt;
  out.n = s.n + 1;
  return out;
}

State Simulator::step(const State& s, StepReport* rep) const {
  return prm_.mode == SchemeMode::Split ? advance(s, rep) : coupled_step(s, rep);
}

double Simulator::h_min_fluid() const {
  double h = 1e300;
  for (int c = 0; c < mesh_.n_cells(); ++c)
    if (mesh_.cell_region[c] == Region::Fluid)
      h = std::min(h, std::min(mesh_.cell_hx(c), mesh_.cell_hy(c)));
  return h;
}

double Simulator::cfl_suggest(double u_max_estimate) const {
  const double h = h_min_fluid();
  const double visc_bound = prm_.cfl_c1 * mat_.delta * h;
  if (u_max_estimate <= 0.0) return visc_bound;
  return std::min(visc_bound, prm_.cfl_c2 * h / u_max_estimate);
}

}  // namespace ewod
