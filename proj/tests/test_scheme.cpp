#include <cmath>

#include "doctest.h"
#include "ewod/diagnostics.hpp"
#include "ewod/scheme.hpp"

using namespace ewod;

namespace {

ChannelGeometry small_geom(double V00 = 0.0) {
  ChannelGeometry g;
  g.x_min = -5;
  g.x_max = 5;
  g.y_fluid_min = 0;
  g.y_fluid_max = 1;
  g.plate_thickness = 0.5;
  if (V00 != 0.0) g.electrodes.push_back({Plate::Bottom, 0.0, 5.0, V00});
  return g;
}

MaterialParams coarse_mat() {
  MaterialParams m;
  m.delta = 0.1;
  return m;
}

std::vector<DropletPrimitive> half_circle() {
  DropletPrimitive d;
  d.kind = DropletPrimitive::Kind::Circle;
  d.center = {0.0, 0.0};
  d.radius = 0.5;
  return {d};
}

double linf_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("init_state: tanh profile, level set, and mass oracle") {
  // fine enough mesh that h <= delta
  auto mesh = build_channel_mesh(small_geom(), 100, 10, 2);
  MaterialParams mat = coarse_mat();
  Simulator sim(std::move(mesh), mat, SchemeParams{});
  auto s = sim.init_state(half_circle());
  FieldEval phi{&sim.spaceQ(), &s.phi};
  // far field saturates to -1
  CHECK(s.phi[0] == doctest::Approx(-1.0).epsilon(1e-6));
  // on the zero level set phi = 0: dof at (0.5, 0) is on the circle
  bool found = false;
  for (int i = 0; i < sim.spaceQ().n_scalar; ++i) {
    const Vec2 p = sim.spaceQ().dof_xy[i];
    if (std::abs(p.x - 0.5) < 1e-12 && std::abs(p.y) < 1e-12) {
      CHECK(std::abs(s.phi[i]) <= 1e-12);
      found = true;
    }
  }
  CHECK(found);
  // integral of phi: 2 * (half-disk area) - |Omega|, computed by quadrature
  const double expected = 2.0 * (M_PI * 0.25 / 2.0) - 10.0;
  const double got = integrate(sim.spaceQ(), s.phi, Integrand::Value);
  CHECK(got == doctest::Approx(expected).epsilon(0.02));
  // u, q, mu, V, p all zero
  for (double v : s.u) CHECK(v == 0.0);
  for (double v : s.q) CHECK(v == 0.0);
}

TEST_CASE("init_state: contradictory primitives rejected") {
  auto mesh = build_channel_mesh(small_geom(), 10, 4, 2);
  Simulator sim(std::move(mesh), coarse_mat(), SchemeParams{});
  DropletPrimitive a;           // big droplet at origin
  a.radius = 2.0;
  DropletPrimitive b = a;       // contradicting carve-out on the same spot
  b.sign = -1;
  CHECK_THROWS(sim.init_state({a, b}));
  CHECK_THROWS(sim.init_state({}));
}

TEST_CASE("step_potential: trivial solves") {
  SUBCASE("zero charge, grounded electrodes") {
    auto mesh = build_channel_mesh(small_geom(), 10, 4, 2);
    Simulator sim(std::move(mesh), coarse_mat(), SchemeParams{});
    auto s = sim.init_state(half_circle());
    SolverReport rep;
    auto V = sim.step_potential(s, &rep);
    CHECK(rep.converged);
    for (double v : V) CHECK(std::abs(v) <= 1e-12);
  }
  SUBCASE("constant dirichlet data everywhere gives the constant") {
    ChannelGeometry g = small_geom();
    g.electrodes.push_back({Plate::Bottom, -5.0, 5.0, 7.5});
    g.electrodes.push_back({Plate::Top, -5.0, 5.0, 7.5});
    // side walls of the plates still have V=0 dofs, so restrict the check to
    // a fluid-interior column: instead make all outer dofs carry 7.5 by
    // noting the side dofs read the plates' value only at the corners; use a
    // simpler criterion: residual of the constant vector must vanish.
    auto mesh = build_channel_mesh(g, 10, 4, 2);
    Simulator sim(std::move(mesh), coarse_mat(), SchemeParams{});
    auto s = sim.init_state(half_circle());
    SolverReport rep;
    auto V = sim.step_potential(s, &rep);
    CHECK(rep.converged);
    // the lateral plate boundaries are grounded (value 0), so V is not
    // globally constant; check the electrode rows instead
    for (const auto& c : sim.spaceW().constraints)
      CHECK(V[c.dof] == doctest::Approx(c.value));
  }
}

TEST_CASE("step_charge: constants are preserved and mass is conserved") {
  auto mesh = build_channel_mesh(small_geom(), 10, 4, 2);
  Simulator sim(std::move(mesh), coarse_mat(), SchemeParams{});
  auto s = sim.init_state(half_circle());
  SUBCASE("constant charge with zero velocity and flat V") {
    for (auto& v : s.q) v = 3.0;
    std::vector<double> Vflat(sim.spaceW().n_dofs(), 0.0);
    SolverReport rep;
    auto q1 = sim.step_charge(s, Vflat, &rep);
    CHECK(rep.converged);
    for (double v : q1) CHECK(v == doctest::Approx(3.0).epsilon(1e-9));
  }
  SUBCASE("total charge conserved under a nontrivial solve") {
    // nonuniform charge + the real electrode-driven potential
    for (int i = 0; i < sim.spaceQ().n_scalar; ++i)
      s.q[i] = 0.3 * std::sin(sim.spaceQ().dof_xy[i].x);
    auto V = sim.step_potential(s);
    auto q1 = sim.step_charge(s, V);
    const double m0 = integrate(sim.spaceQ(), s.q, Integrand::Value);
    const double m1 = integrate(sim.spaceQ(), q1, Integrand::Value);
    CHECK(m1 == doctest::Approx(m0).epsilon(1e-9));
  }
}

TEST_CASE("step_phase: uniform bulk is a fixed point and mass is conserved") {
  auto mesh = build_channel_mesh(small_geom(), 10, 4, 2);
  Simulator sim(std::move(mesh), coarse_mat(), SchemeParams{});
  auto s = sim.init_state(half_circle());
  SUBCASE("phi = 1 everywhere stays with mu = 0") {
    std::fill(s.phi.begin(), s.phi.end(), 1.0);
    std::vector<double> Vflat(sim.spaceW().n_dofs(), 0.0);
    SolverReport rep;
    auto [phi1, mu1] = sim.step_phase(s, Vflat, &rep);
    CHECK(rep.converged);
    for (double v : phi1) CHECK(v == doctest::Approx(1.0).epsilon(1e-8));
    for (double v : mu1) CHECK(std::abs(v) <= 1e-8);
  }
  SUBCASE("phase mass conserved with u = 0") {
    std::vector<double> Vflat(sim.spaceW().n_dofs(), 0.0);
    auto [phi1, mu1] = sim.step_phase(s, Vflat);
    const double m0 = integrate(sim.spaceQ(), s.phi, Integrand::Value);
    const double m1 = integrate(sim.spaceQ(), phi1, Integrand::Value);
    CHECK(m1 == doctest::Approx(m0).epsilon(1e-10));
  }
}

TEST_CASE("step_phase: near-equilibrium relaxation is O(tau)") {
  // theta_s = 90 deg, tanh strip, no flow, flat V: the profile only relaxes
  ChannelGeometry g = small_geom();
  auto mesh = build_channel_mesh(g, 20, 8, 2);
  MaterialParams mat = coarse_mat();
  mat.theta_s = M_PI / 2.0;
  SchemeParams prm;
  prm.B_stab = 0.0;
  Simulator sim(std::move(mesh), mat, prm);
  State s;
  {
    DropletPrimitive strip;
    strip.kind = DropletPrimitive::Kind::HalfPlane;
    strip.center = {0.0, 0.0};
    strip.normal = {-1.0, 0.0};  // phi = +1 for x < 0
    s = sim.init_state({strip});
  }
  std::vector<double> Vflat(sim.spaceW().n_dofs(), 0.0);
  auto [phi1, mu1] = sim.step_phase(s, Vflat);
  std::vector<double> diff(phi1.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = phi1[i] - s.phi[i];
  const double l2 = std::sqrt(integrate(sim.spaceQ(), diff, Integrand::Square));
  // regression constant: measured 6.9*dt on this configuration, pinned with
  // headroom
  CHECK(l2 <= 10.0 * sim.params().dt);
}

TEST_CASE("step_velocity and step_pressure: rest state is a fixed point") {
  auto mesh = build_channel_mesh(small_geom(), 10, 4, 2);
  Simulator sim(std::move(mesh), coarse_mat(), SchemeParams{});
  auto s = sim.init_state(half_circle());
  std::fill(s.phi.begin(), s.phi.end(), -1.0);  // flat bulk, no interface forces
  std::vector<double> Vflat(sim.spaceW().n_dofs(), 0.0);
  std::vector<double> mu0(sim.spaceQ().n_dofs(), 0.0);
  SolverReport rep;
  auto u1 = sim.step_velocity(s, s.phi, mu0, s.q, Vflat, &rep);
  CHECK(rep.converged);
  for (double v : u1) CHECK(std::abs(v) <= 1e-10);
  auto [xi1, p1] = sim.step_pressure(s, u1, &rep);
  CHECK(rep.converged);
  for (double v : xi1) CHECK(std::abs(v) <= 1e-9);
}

TEST_CASE("step_pressure: constant-divergence oracle") {
  auto mesh = build_channel_mesh(small_geom(), 10, 4, 2);
  MaterialParams mat = coarse_mat();
  Simulator sim(std::move(mesh), mat, SchemeParams{});
  auto s = sim.init_state(half_circle());
  CHECK(mat.rho_min() == 1.0);  // rho1=100, rho2=1 ratio normalization
  auto u = interpolate_vec(sim.spaceX(), [](Vec2 p) { return Vec2{p.x, 0.0}; });
  SolverReport rep;
  auto [xi, p] = sim.step_pressure(s, u, &rep);
  CHECK(rep.converged);
  // assembled-system oracle: K xi = -(rho_min/dt) B u, both sides zero-mean
  auto resid = sim.divergence().apply(u);
  for (auto& v : resid) v *= -mat.rho_min() / sim.params().dt;
  // the solvable representative removes the plain constant component (the
  // operator's null space); the L2 zero mean applies to xi itself
  std::vector<double> ones(resid.size(), 1.0);
  project_zero_mean_inplace(resid, ones);
  // subtract K xi
  std::vector<double> Kxi(xi.size());
  {
    auto K = assemble_stiffness(sim.spaceP(), [](const QuadCtx&) { return 1.0; });
    Kxi = K.apply(xi);
  }
  for (std::size_t i = 0; i < resid.size(); ++i)
    CHECK(Kxi[i] == doctest::Approx(resid[i]).epsilon(1e-6).scale(1.0));
  // zero weighted mean
  double mean = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    mean += sim.pressure_weights()[i] * xi[i];
    wsum += sim.pressure_weights()[i];
  }
  CHECK(std::abs(mean / wsum) <= 1e-12);
}

TEST_CASE("step_velocity: manufactured viscous solve converges at second order") {
  // u_exact = curl of (x^2-25)^2 (y^2-y)^2, zero on the whole boundary
  auto stream_u = [](Vec2 p) {
    const double fx = (p.x * p.x - 25.0) * (p.x * p.x - 25.0);
    const double dgy = 2.0 * (p.y * p.y - p.y) * (2.0 * p.y - 1.0);
    const double dfx = 4.0 * p.x * (p.x * p.x - 25.0);
    const double gy = (p.y * p.y - p.y) * (p.y * p.y - p.y);
    return Vec2{fx * dgy, -dfx * gy};
  };
  // f = -div(eta S(u)) for constant eta: -(eta/2)(lap u + grad div u),
  // div u = 0 so f = -(eta/2) lap u ... with S = sym grad, div(eta S(u)) =
  // (eta/2)(lap u + grad(div u)) = (eta/2) lap u
  auto lap_u = [](Vec2 p) {
    const double fx = (p.x * p.x - 25.0) * (p.x * p.x - 25.0);
    const double dfx = 4.0 * p.x * (p.x * p.x - 25.0);
    const double d2fx = 12.0 * p.x * p.x - 100.0;
    const double d3fx = 24.0 * p.x;
    const double gy = (p.y * p.y - p.y) * (p.y * p.y - p.y);
    const double dgy = 2.0 * (p.y * p.y - p.y) * (2.0 * p.y - 1.0);
    const double d2gy = 2.0 * ((2.0 * p.y - 1.0) * (2.0 * p.y - 1.0) +
                               2.0 * (p.y * p.y - p.y));
    const double d3gy = 12.0 * (2.0 * p.y - 1.0);
    return Vec2{d2fx * dgy + fx * d3gy, -(d3fx * gy + dfx * d2gy)};
  };
  std::vector<double> errs;
  for (int nx : {16, 32}) {
    auto mesh = build_channel_mesh(small_geom(), nx, nx / 8, 2);
    MaterialParams mat = coarse_mat();
    SchemeParams prm;
    prm.dt = 1e7;  // the mass term becomes negligible
    prm.tol_nonsym = 1e-12;
    Simulator sim(std::move(mesh), mat, prm);
    auto s = sim.init_state(half_circle());
    std::fill(s.phi.begin(), s.phi.end(), 1.0);  // constant eta = eta(1)
    const double eta = mat.eta(1.0);
    // body force via mu grad(phi) is unavailable; instead solve the raw
    // system by assembling through step_velocity's operator with a custom
    // rhs: build it here directly
    auto Visc = assemble_viscous(sim.spaceX(), [&](const QuadCtx&) { return eta; });
    auto Mb = assemble_boundary_mass(sim.spaceX(), select_gamma(),
                                     [&](const QuadCtx&) { return mat.beta_const; });
    auto Mrho = assemble_mass(sim.spaceX(), [&](const QuadCtx&) { return 1.0 / prm.dt; });
    auto A = csr_add(1.0, Visc, 1.0, Mb);
    A = csr_add(1.0, A, 1.0, Mrho);
    auto rhs = assemble_source_vec(sim.spaceX(), [&](const QuadCtx& c) {
      return -0.5 * eta * lap_u(c.x);
    });
    // natural-BC correction: eta S(u_exact) n . tau on Gamma (u_exact has a
    // zero trace there, so no beta term); analytic gradient
    auto grad_exact = [](Vec2 p, double g[2][2]) {
      const double fx = (p.x * p.x - 25.0) * (p.x * p.x - 25.0);
      const double dfx = 4.0 * p.x * (p.x * p.x - 25.0);
      const double d2fx = 12.0 * p.x * p.x - 100.0;
      const double gy = (p.y * p.y - p.y) * (p.y * p.y - p.y);
      const double dgy = 2.0 * (p.y * p.y - p.y) * (2.0 * p.y - 1.0);
      const double d2gy = 2.0 * (2.0 * p.y - 1.0) * (2.0 * p.y - 1.0) +
                          4.0 * (p.y * p.y - p.y);
      g[0][0] = dfx * dgy;    // d_x u_x
      g[0][1] = -d2fx * gy;   // d_x u_y
      g[1][0] = fx * d2gy;    // d_y u_x
      g[1][1] = -dfx * dgy;   // d_y u_y
    };
    {
      auto corr = assemble_boundary_source_tangential(
          sim.spaceX(), select_gamma(), [&](const QuadCtx& c) {
            double g[2][2];
            grad_exact(c.x, g);
            const Vec2 n = c.facet->normal, t = facet_tangent(*c.facet);
            const double Sn0 = g[0][0] * n.x + 0.5 * (g[0][1] + g[1][0]) * n.y;
            const double Sn1 = 0.5 * (g[1][0] + g[0][1]) * n.x + g[1][1] * n.y;
            return eta * (t.x * Sn0 + t.y * Sn1);
          });
      for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += corr[i];
    }
    apply_constraints(A, rhs, sim.spaceX().constraints);
    std::vector<double> u;
    SolveOpts o;
    o.tol = 1e-12;
    o.max_iter = 100000;
    auto rep = bicgstab_solve(A, rhs, u, o);
    CHECK(rep.converged);
    // L2 error against the exact field by quadrature
    FieldEval uh{&sim.spaceX(), &u};
    double e2 = 0.0;
    const auto& qr = quadrature();
    const Mesh& m = sim.mesh();
    for (int c = 0; c < m.n_cells(); ++c) {
      if (m.cell_region[c] != Region::Fluid) continue;
      const double jac = 0.25 * m.cell_hx(c) * m.cell_hy(c);
      for (int q = 0; q < 9; ++q) {
        const Vec2 d = uh.value_vec(c, q) - stream_u(quad_point(m, c, q));
        e2 += qr.wts[q] * jac * dot(d, d);
      }
    }
    errs.push_back(std::sqrt(e2));
  }
  CHECK(errs[1] <= errs[0] / 3.5);  // at least second order
}

TEST_CASE("advance: quiescent uniform state is a fixed point") {
  auto mesh = build_channel_mesh(small_geom(), 10, 4, 2);
  Simulator sim(std::move(mesh), coarse_mat(), SchemeParams{});
  auto s = sim.init_state(half_circle());
  std::fill(s.phi.begin(), s.phi.end(), -1.0);
  StepReport rep;
  auto s1 = sim.advance(s, &rep);
  CHECK(rep.ok);
  CHECK(linf_diff(s1.phi, s.phi) <= 1e-8);
  CHECK(linf_diff(s1.u, s.u) <= 1e-9);
  CHECK(linf_diff(s1.q, s.q) <= 1e-10);
  CHECK(linf_diff(s1.p, s.p) <= 1e-8);
}

TEST_CASE("advance: energy decays without voltage" * doctest::timeout(300)) {
  auto mesh = build_channel_mesh(small_geom(0.0), 20, 4, 2);
  Simulator sim(std::move(mesh), coarse_mat(), SchemeParams{});
  auto s = sim.init_state(half_circle());
  const auto e0 = energy_total(sim, s);
  double prev = e0.total;
  for (int k = 0; k < 20; ++k) {
    StepReport rep;
    s = sim.advance(s, &rep);
    REQUIRE(rep.ok);
    const auto e = energy_total(sim, s);
    CHECK(e.total <= prev + 1e-8 * (1.0 + std::abs(e0.total)));
    prev = e.total;
    // state invariants: u.n on Gamma and the pressure mean vanish
    for (const auto& c : sim.spaceX().constraints) CHECK(s.u[c.dof] == 0.0);
    const auto& w = sim.pressure_weights();
    double mean = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < s.p.size(); ++i) {
      mean += w[i] * s.p[i];
      wsum += w[i];
    }
    CHECK(std::abs(mean / wsum) <= 1e-12);
  }
}

TEST_CASE("advance: charge stays conserved along a driven run" * doctest::timeout(300)) {
  auto mesh = build_channel_mesh(small_geom(20.0), 20, 4, 2);
  Simulator sim(std::move(mesh), coarse_mat(), SchemeParams{});
  auto s = sim.init_state(half_circle());
  const double q0 = integrate(sim.spaceQ(), s.q, Integrand::Value);
  for (int k = 0; k < 10; ++k) {
    StepReport rep;
    s = sim.advance(s, &rep);
    REQUIRE(rep.ok);
  }
  const double q1 = integrate(sim.spaceQ(), s.q, Integrand::Value);
  CHECK(std::abs(q1 - q0) <= 1e-9);
  // charge actually develops (the solve is nontrivial)
  CHECK(std::sqrt(integrate(sim.spaceQ(), s.q, Integrand::Square)) > 1e-6);
}

TEST_CASE("mirror symmetry: reflection commutes with advance" * doctest::timeout(300)) {
  // driven, asymmetric: electrode on the right half only
  auto mk = [](bool mirrored) {
    ChannelGeometry g;
    g.x_min = -5;
    g.x_max = 5;
    g.y_fluid_min = 0;
    g.y_fluid_max = 1;
    g.plate_thickness = 0.5;
    if (!mirrored)
      g.electrodes.push_back({Plate::Bottom, 0.0, 5.0, 20.0});
    else
      g.electrodes.push_back({Plate::Bottom, -5.0, 0.0, 20.0});
    return g;
  };
  SchemeParams prm;
  prm.tol_spd = 1e-13;
  prm.tol_nonsym = 1e-13;
  auto simA = Simulator(build_channel_mesh(mk(false), 12, 4, 2), coarse_mat(), prm);
  auto simB = Simulator(build_channel_mesh(mk(true), 12, 4, 2), coarse_mat(), prm);
  // droplet offset to the left so the state is asymmetric too
  DropletPrimitive d;
  d.center = {-0.7, 0.0};
  d.radius = 0.5;
  DropletPrimitive dm = d;
  dm.center.x = 0.7;
  auto sA = simA.init_state({d});
  auto sB = simB.init_state({dm});
  for (int k = 0; k < 3; ++k) {
    StepReport ra, rb;
    sA = simA.advance(sA, &ra);
    sB = simB.advance(sB, &rb);
    REQUIRE(ra.ok);
    REQUIRE(rb.ok);
  }
  // compare: field_B(x) must equal field_A(-x) (u_x flips sign)
  auto find_scalar = [](const FeSpace& sp, Vec2 p) {
    for (int i = 0; i < sp.n_scalar; ++i)
      if (std::abs(sp.dof_xy[i].x - p.x) < 1e-12 && std::abs(sp.dof_xy[i].y - p.y) < 1e-12)
        return i;
    return -1;
  };
  double worst = 0.0;
  for (int i = 0; i < simA.spaceQ().n_scalar; ++i) {
    const Vec2 p = simA.spaceQ().dof_xy[i];
    const int j = find_scalar(simB.spaceQ(), {-p.x, p.y});
    REQUIRE(j >= 0);
    worst = std::max(worst, std::abs(sA.phi[i] - sB.phi[j]));
    worst = std::max(worst, std::abs(sA.q[i] - sB.q[j]));
    worst = std::max(worst, std::abs(sA.mu[i] - sB.mu[j]));
  }
  for (int i = 0; i < simA.spaceX().n_scalar; ++i) {
    const Vec2 p = simA.spaceX().dof_xy[i];
    const int j = find_scalar(simB.spaceX(), {-p.x, p.y});
    REQUIRE(j >= 0);
    worst = std::max(worst, std::abs(sA.u[2 * i] + sB.u[2 * j]));      // u_x odd
    worst = std::max(worst, std::abs(sA.u[2 * i + 1] - sB.u[2 * j + 1]));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("coupled_step: quiescent state converges in one picard iteration") {
  auto mesh = build_channel_mesh(small_geom(), 10, 4, 2);
  SchemeParams prm;
  prm.mode = SchemeMode::Coupled;
  Simulator sim(std::move(mesh), coarse_mat(), prm);
  auto s = sim.init_state(half_circle());
  std::fill(s.phi.begin(), s.phi.end(), -1.0);
  StepReport rep;
  auto s1 = sim.coupled_step(s, &rep);
  CHECK(rep.ok);
  CHECK(rep.picard_iters == 1);
  CHECK(linf_diff(s1.phi, s.phi) <= 1e-9);
}

TEST_CASE("coupled_step: per-step energy inequality holds" * doctest::timeout(600)) {
  auto mesh = build_channel_mesh(small_geom(20.0), 12, 4, 2);
  SchemeParams prm;
  prm.mode = SchemeMode::Coupled;
  prm.dt = 1e-2;
  prm.picard_tol = 1e-10;
  Simulator sim(std::move(mesh), coarse_mat(), prm);
  auto s = sim.init_state(half_circle());
  const double e0 = std::abs(energy_total(sim, s).total);
  for (int k = 0; k < 3; ++k) {
    StepReport rep;
    auto s1 = sim.coupled_step(s, &rep);
    REQUIRE(rep.ok);
    const auto audit = energy_law_margin(sim, s, s1);
    CHECK(audit.margin <= 1e-8 * (1.0 + e0));
    s = s1;
  }
}

TEST_CASE("cfl_suggest") {
  auto mesh = build_channel_mesh(small_geom(), 320, 32, 8);
  MaterialParams mat;
  mat.delta = 0.05;
  Simulator sim(std::move(mesh), mat, SchemeParams{});
  CHECK(sim.h_min_fluid() == doctest::Approx(0.03125));
  CHECK(sim.cfl_suggest() == doctest::Approx(7.8125e-4));
  CHECK(sim.cfl_suggest(0.0) == doctest::Approx(7.8125e-4));
  // velocity bound kicks in
  CHECK(sim.cfl_suggest(100.0) == doctest::Approx(0.5 * 0.03125 / 100.0));
  // doubling h doubles the bound
  auto mesh2 = build_channel_mesh(small_geom(), 160, 16, 4);
  Simulator sim2(std::move(mesh2), mat, SchemeParams{});
  CHECK(sim2.cfl_suggest() == doctest::Approx(2.0 * 7.8125e-4));
}
