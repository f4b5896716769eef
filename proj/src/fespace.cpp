#include "ewod/fespace.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace ewod {

namespace {

constexpr double kG = 0.7745966692414834;  // sqrt(3/5)
constexpr double kW0 = 5.0 / 9.0, kW1 = 8.0 / 9.0;

QuadratureRule make_quadrature() {
  QuadratureRule q{};
  const double p[3] = {-kG, 0.0, kG};
  const double w[3] = {kW0, kW1, kW0};
  int k = 0;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) {
      q.pts[k][0] = p[i];
      q.pts[k][1] = p[j];
      q.wts[k] = w[i] * w[j];
      ++k;
    }
  for (int i = 0; i < 3; ++i) {
    q.edge_pts[i] = p[i];
    q.edge_wts[i] = w[i];
  }
  return q;
}

// reference coordinates of the local nodes
const double kQ1Nodes[4][2] = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
const double kQ2Nodes[9][2] = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}, {0, -1},
                               {1, 0},   {0, 1},  {-1, 0}, {0, 0}};

double lag2(double node, double t) {
  if (node < -0.5) return 0.5 * t * (t - 1.0);
  if (node > 0.5) return 0.5 * t * (t + 1.0);
  return 1.0 - t * t;
}
double dlag2(double node, double t) {
  if (node < -0.5) return t - 0.5;
  if (node > 0.5) return t + 0.5;
  return -2.0 * t;
}

void eval_shapes(int degree, double xi, double eta, double* N, double dN[][2]) {
  if (degree == 1) {
    for (int i = 0; i < 4; ++i) {
      const double xi_i = kQ1Nodes[i][0], eta_i = kQ1Nodes[i][1];
      N[i] = 0.25 * (1.0 + xi_i * xi) * (1.0 + eta_i * eta);
      dN[i][0] = 0.25 * xi_i * (1.0 + eta_i * eta);
      dN[i][1] = 0.25 * eta_i * (1.0 + xi_i * xi);
    }
  } else {
    for (int i = 0; i < 9; ++i) {
      const double a = kQ2Nodes[i][0], b = kQ2Nodes[i][1];
      N[i] = lag2(a, xi) * lag2(b, eta);
      dN[i][0] = dlag2(a, xi) * lag2(b, eta);
      dN[i][1] = lag2(a, xi) * dlag2(b, eta);
    }
  }
}

// edge parameter t in [-1,1] from first corner to second
void edge_ref_point(int edge, double t, double& xi, double& eta) {
  switch (edge) {
    case 0: xi = t; eta = -1.0; break;
    case 1: xi = 1.0; eta = t; break;
    case 2: xi = -t; eta = 1.0; break;
    default: xi = -1.0; eta = -t; break;
  }
}

ShapeTable make_shapes(int degree) {
  ShapeTable s{};
  s.ndofs = degree == 1 ? 4 : 9;
  s.n_edge_dofs = degree == 1 ? 2 : 3;
  const auto& q = quadrature();
  for (int k = 0; k < QuadratureRule::n_cell; ++k)
    eval_shapes(degree, q.pts[k][0], q.pts[k][1], s.N[k], s.dN[k]);
  const int ed[4][3] = {{0, 1, 4}, {1, 2, 5}, {2, 3, 6}, {3, 0, 7}};
  for (int e = 0; e < 4; ++e) {
    for (int d = 0; d < 3; ++d) s.edge_dofs[e][d] = ed[e][d];
    for (int k = 0; k < QuadratureRule::n_edge; ++k) {
      double xi, eta;
      edge_ref_point(e, q.edge_pts[k], xi, eta);
      eval_shapes(degree, xi, eta, s.eN[e][k], s.edN[e][k]);
    }
  }
  return s;
}

}  // namespace

const QuadratureRule& quadrature() {
  static const QuadratureRule q = make_quadrature();
  return q;
}

const ShapeTable& shapes(int degree) {
  static const ShapeTable s1 = make_shapes(1);
  static const ShapeTable s2 = make_shapes(2);
  return degree == 1 ? s1 : s2;
}

Vec2 quad_point(const Mesh& mesh, int cell, int q) {
  const auto& qr = quadrature();
  const Vec2 o = mesh.cell_origin(cell);
  return {o.x + 0.5 * (qr.pts[q][0] + 1.0) * mesh.cell_hx(cell),
          o.y + 0.5 * (qr.pts[q][1] + 1.0) * mesh.cell_hy(cell)};
}

Vec2 edge_quad_point(const Mesh& mesh, const Facet& f, int eq) {
  const auto& qr = quadrature();
  const Vec2 a = mesh.nodes[f.n0], b = mesh.nodes[f.n1];
  const double t = 0.5 * (qr.edge_pts[eq] + 1.0);
  return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
}

Vec2 facet_tangent(const Facet& f) {
  return f.normal.y != 0.0 ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
}

FeSpace make_space(const Mesh& mesh, int degree, int components, Support support) {
  if (degree != 1 && degree != 2) throw std::invalid_argument("make_space: degree must be 1 or 2");
  FeSpace sp;
  sp.mesh = &mesh;
  sp.degree = degree;
  sp.components = components;
  sp.support = support;
  sp.cell_to_support.assign(mesh.n_cells(), -1);

  std::map<std::pair<long, long>, int> entity;  // key: (kind*big+id, id2)
  auto get_dof = [&](long kind, long a, long b, Vec2 xy) {
    auto key = std::make_pair(kind * 100000000L + a, b);
    auto it = entity.find(key);
    if (it != entity.end()) return it->second;
    const int id = sp.n_scalar++;
    entity.emplace(key, id);
    sp.dof_xy.push_back(xy);
    return id;
  };

  for (int c = 0; c < mesh.n_cells(); ++c) {
    if (support == Support::Fluid && mesh.cell_region[c] != Region::Fluid) continue;
    sp.cell_to_support[c] = static_cast<int>(sp.support_cells.size());
    sp.support_cells.push_back(c);
    const auto& quad = mesh.cells[c];
    auto vxy = [&](int ln) { return mesh.nodes[quad[ln]]; };
    int local[9];
    for (int v = 0; v < 4; ++v) local[v] = get_dof(0, quad[v], 0, vxy(v));
    if (degree == 2) {
      for (int e = 0; e < 4; ++e) {
        const int a = quad[e], b = quad[(e + 1) % 4];
        const Vec2 mid = 0.5 * (vxy(e) + vxy((e + 1) % 4));
        local[4 + e] = get_dof(1, std::min(a, b), std::max(a, b), mid);
      }
      const Vec2 ctr = 0.5 * (vxy(0) + vxy(2));
      local[8] = get_dof(2, c, 0, ctr);
    }
    for (int i = 0; i < sp.ndofs_per_cell(); ++i) sp.cell_dofs_flat.push_back(local[i]);
  }
  return sp;
}

FeSpace make_voltage_space(const Mesh& mesh) {
  FeSpace sp = make_space(mesh, 1, 1, Support::All);
  std::vector<char> seen(sp.n_scalar, 0);
  const auto& st = shapes(1);
  for (const auto& f : mesh.facets) {
    if (!f.tag.outer_dirichlet) continue;
    const int si = sp.cell_to_support[f.cell];
    const int* dofs = sp.cell_dofs(si);
    for (int d = 0; d < 2; ++d) {
      const int gd = dofs[st.edge_dofs[f.local_edge][d]];
      if (seen[gd]) continue;
      seen[gd] = 1;
      sp.constraints.push_back({gd, dirichlet_boundary_value(mesh.geom, sp.dof_xy[gd])});
    }
  }
  return sp;
}

FeSpace make_scalar_fluid_space(const Mesh& mesh) {
  return make_space(mesh, 2, 1, Support::Fluid);
}

FeSpace make_velocity_space(const Mesh& mesh) {
  FeSpace sp = make_space(mesh, 2, 2, Support::Fluid);
  std::vector<char> seen(sp.n_dofs(), 0);
  const auto& st = shapes(2);
  for (const auto& f : mesh.facets) {
    if (!f.tag.gamma) continue;
    const int comp = f.normal.x != 0.0 ? 0 : 1;  // normal component vanishes
    const int si = sp.cell_to_support[f.cell];
    const int* dofs = sp.cell_dofs(si);
    for (int d = 0; d < st.n_edge_dofs; ++d) {
      const int gd = 2 * dofs[st.edge_dofs[f.local_edge][d]] + comp;
      if (seen[gd]) continue;
      seen[gd] = 1;
      sp.constraints.push_back({gd, 0.0});
    }
  }
  return sp;
}

FeSpace make_pressure_space(const Mesh& mesh) {
  FeSpace sp = make_space(mesh, 1, 1, Support::Fluid);
  sp.zero_mean = true;
  return sp;
}

FacetSelector select_gamma() {
  return [](const Facet& f) { return f.tag.gamma; };
}
FacetSelector select_outer_dirichlet() {
  return [](const Facet& f) { return f.tag.outer_dirichlet; };
}

namespace {

struct CellCtx {
  int cell, si;
  double hx, hy, jac;
  double gx, gy;  // reference-to-physical gradient scaling
  const int* dofs;
};

template <typename F>
void for_support_cells(const FeSpace& sp, F&& body) {
  const Mesh& m = *sp.mesh;
  for (int si = 0; si < sp.n_support_cells(); ++si) {
    const int c = sp.support_cells[si];
    CellCtx ctx;
    ctx.cell = c;
    ctx.si = si;
    ctx.hx = m.cell_hx(c);
    ctx.hy = m.cell_hy(c);
    ctx.jac = 0.25 * ctx.hx * ctx.hy;
    ctx.gx = 2.0 / ctx.hx;
    ctx.gy = 2.0 / ctx.hy;
    ctx.dofs = sp.cell_dofs(si);
    body(ctx);
  }
}

QuadCtx make_qctx(const FeSpace& sp, const CellCtx& c, int q) {
  return {c.cell, q, quad_point(*sp.mesh, c.cell, q), sp.mesh->cell_region[c.cell]};
}

}  // namespace

CsrMatrix assemble_mass(const FeSpace& sp, const ScalarCoeff& coeff) {
  const auto& st = shapes(sp.degree);
  const auto& qr = quadrature();
  const int nd = st.ndofs, nc = sp.components;
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(sp.n_support_cells()) * nd * nd * nc);
  for_support_cells(sp, [&](const CellCtx& c) {
    double loc[9][9] = {};
    for (int q = 0; q < QuadratureRule::n_cell; ++q) {
      const double w = qr.wts[q] * c.jac * coeff(make_qctx(sp, c, q));
      if (w == 0.0) continue;
      for (int i = 0; i < nd; ++i)
        for (int j = 0; j < nd; ++j) loc[i][j] += w * st.N[q][i] * st.N[q][j];
    }
    for (int i = 0; i < nd; ++i)
      for (int j = 0; j < nd; ++j)
        for (int comp = 0; comp < nc; ++comp)
          t.push_back({nc * c.dofs[i] + comp, nc * c.dofs[j] + comp, loc[i][j]});
  });
  return CsrMatrix::from_triplets(sp.n_dofs(), sp.n_dofs(), std::move(t));
}

CsrMatrix assemble_stiffness(const FeSpace& sp, const ScalarCoeff& coeff) {
  const auto& st = shapes(sp.degree);
  const auto& qr = quadrature();
  const int nd = st.ndofs, nc = sp.components;
  std::vector<Triplet> t;
  for_support_cells(sp, [&](const CellCtx& c) {
    double loc[9][9] = {};
    for (int q = 0; q < QuadratureRule::n_cell; ++q) {
      const double w = qr.wts[q] * c.jac * coeff(make_qctx(sp, c, q));
      if (w == 0.0) continue;
      for (int i = 0; i < nd; ++i) {
        const double gxi = st.dN[q][i][0] * c.gx, gyi = st.dN[q][i][1] * c.gy;
        for (int j = 0; j < nd; ++j)
          loc[i][j] += w * (gxi * st.dN[q][j][0] * c.gx + gyi * st.dN[q][j][1] * c.gy);
      }
    }
    for (int i = 0; i < nd; ++i)
      for (int j = 0; j < nd; ++j)
        for (int comp = 0; comp < nc; ++comp)
          t.push_back({nc * c.dofs[i] + comp, nc * c.dofs[j] + comp, loc[i][j]});
  });
  return CsrMatrix::from_triplets(sp.n_dofs(), sp.n_dofs(), std::move(t));
}

CsrMatrix assemble_viscous(const FeSpace& sp, const ScalarCoeff& eta) {
  if (sp.components != 2) throw std::invalid_argument("assemble_viscous: vector space required");
  const auto& st = shapes(sp.degree);
  const auto& qr = quadrature();
  const int nd = st.ndofs;
  std::vector<Triplet> t;
  for_support_cells(sp, [&](const CellCtx& c) {
    double g[9][2];
    double loc[18][18] = {};
    for (int q = 0; q < QuadratureRule::n_cell; ++q) {
      const double w = qr.wts[q] * c.jac * eta(make_qctx(sp, c, q));
      for (int i = 0; i < nd; ++i) {
        g[i][0] = st.dN[q][i][0] * c.gx;
        g[i][1] = st.dN[q][i][1] * c.gy;
      }
      // S(u):S(w) for trial (b,d), test (a,cc):
      // 0.5 [ delta_{cc d} grad_a . grad_b + dN_b/dx_cc * dN_a/dx_d ]
      for (int a = 0; a < nd; ++a)
        for (int cc = 0; cc < 2; ++cc)
          for (int b = 0; b < nd; ++b)
            for (int d = 0; d < 2; ++d) {
              double v = 0.5 * g[b][cc] * g[a][d];
              if (cc == d) v += 0.5 * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
              loc[2 * a + cc][2 * b + d] += w * v;
            }
    }
    for (int a = 0; a < nd; ++a)
      for (int cc = 0; cc < 2; ++cc)
        for (int b = 0; b < nd; ++b)
          for (int d = 0; d < 2; ++d)
            t.push_back({2 * c.dofs[a] + cc, 2 * c.dofs[b] + d, loc[2 * a + cc][2 * b + d]});
  });
  return CsrMatrix::from_triplets(sp.n_dofs(), sp.n_dofs(), std::move(t));
}

CsrMatrix assemble_convection(const FeSpace& sp, const VectorCoeff& wind, ConvForm form) {
  const auto& st = shapes(sp.degree);
  const auto& qr = quadrature();
  const int nd = st.ndofs;
  std::vector<Triplet> t;
  for_support_cells(sp, [&](const CellCtx& c) {
    double loc[9][9] = {};
    for (int q = 0; q < QuadratureRule::n_cell; ++q) {
      const Vec2 w = wind(make_qctx(sp, c, q));
      const double ww = qr.wts[q] * c.jac;
      for (int j = 0; j < nd; ++j) {
        const double adv = w.x * st.dN[q][j][0] * c.gx + w.y * st.dN[q][j][1] * c.gy;
        for (int i = 0; i < nd; ++i) loc[i][j] += ww * adv * st.N[q][i];
      }
    }
    if (form == ConvForm::Grad) {
      if (sp.components != 1)
        throw std::invalid_argument("assemble_convection: grad form is scalar");
      for (int i = 0; i < nd; ++i)
        for (int j = 0; j < nd; ++j) t.push_back({c.dofs[i], c.dofs[j], loc[i][j]});
    } else {
      if (sp.components != 2)
        throw std::invalid_argument("assemble_convection: skew form is vector");
      for (int i = 0; i < nd; ++i)
        for (int j = 0; j < nd; ++j) {
          const double v = 0.5 * (loc[i][j] - loc[j][i]);
          for (int comp = 0; comp < 2; ++comp)
            t.push_back({2 * c.dofs[i] + comp, 2 * c.dofs[j] + comp, v});
        }
    }
  });
  return CsrMatrix::from_triplets(sp.n_dofs(), sp.n_dofs(), std::move(t));
}

namespace {

template <typename F>
void for_facets(const FeSpace& sp, const FacetSelector& sel, F&& body) {
  const Mesh& m = *sp.mesh;
  for (const auto& f : m.facets) {
    if (!sel(f)) continue;
    const int si = sp.cell_to_support[f.cell];
    if (si < 0) throw std::runtime_error("facet assembly: owning cell outside space support");
    body(f, si);
  }
}

}  // namespace

CsrMatrix assemble_boundary_mass(const FeSpace& sp, const FacetSelector& sel,
                                 const ScalarCoeff& coeff) {
  const auto& st = shapes(sp.degree);
  const auto& qr = quadrature();
  const Mesh& m = *sp.mesh;
  std::vector<Triplet> t;
  for_facets(sp, sel, [&](const Facet& f, int si) {
    const int* dofs = sp.cell_dofs(si);
    const double jac = 0.5 * m.facet_length(f);
    const int e = f.local_edge;
    double loc[3][3] = {};
    for (int q = 0; q < QuadratureRule::n_edge; ++q) {
      QuadCtx ctx{f.cell, q, edge_quad_point(m, f, q), m.cell_region[f.cell], &f};
      const double w = qr.edge_wts[q] * jac * coeff(ctx);
      for (int a = 0; a < st.n_edge_dofs; ++a)
        for (int b = 0; b < st.n_edge_dofs; ++b)
          loc[a][b] += w * st.eN[e][q][st.edge_dofs[e][a]] * st.eN[e][q][st.edge_dofs[e][b]];
    }
    const int comp = sp.components == 2 ? (f.normal.x != 0.0 ? 1 : 0) : 0;  // tangential
    const int nc = sp.components;
    for (int a = 0; a < st.n_edge_dofs; ++a)
      for (int b = 0; b < st.n_edge_dofs; ++b)
        t.push_back({nc * dofs[st.edge_dofs[e][a]] + comp, nc * dofs[st.edge_dofs[e][b]] + comp,
                     loc[a][b]});
  });
  return CsrMatrix::from_triplets(sp.n_dofs(), sp.n_dofs(), std::move(t));
}

CsrMatrix assemble_divergence(const FeSpace& vel, const FeSpace& pres) {
  if (vel.mesh != pres.mesh) throw std::invalid_argument("assemble_divergence: mesh mismatch");
  const auto& stv = shapes(vel.degree);
  const auto& stp = shapes(pres.degree);
  const auto& qr = quadrature();
  std::vector<Triplet> t;
  for_support_cells(vel, [&](const CellCtx& c) {
    const int sip = pres.cell_to_support[c.cell];
    if (sip < 0) return;
    const int* pdofs = pres.cell_dofs(sip);
    double loc[4][18] = {};
    for (int q = 0; q < QuadratureRule::n_cell; ++q) {
      const double w = qr.wts[q] * c.jac;
      for (int a = 0; a < stp.ndofs; ++a)
        for (int b = 0; b < stv.ndofs; ++b) {
          loc[a][2 * b + 0] += w * stp.N[q][a] * stv.dN[q][b][0] * c.gx;
          loc[a][2 * b + 1] += w * stp.N[q][a] * stv.dN[q][b][1] * c.gy;
        }
    }
    for (int a = 0; a < stp.ndofs; ++a)
      for (int b = 0; b < stv.ndofs; ++b)
        for (int comp = 0; comp < 2; ++comp)
          t.push_back({pdofs[a], 2 * c.dofs[b] + comp, loc[a][2 * b + comp]});
  });
  return CsrMatrix::from_triplets(pres.n_dofs(), vel.n_dofs(), std::move(t));
}

namespace {

template <bool Stiff>
CsrMatrix assemble_mixed(const FeSpace& rows, const FeSpace& cols, const ScalarCoeff& coeff) {
  if (rows.mesh != cols.mesh) throw std::invalid_argument("assemble_mixed: mesh mismatch");
  if (rows.components != 1 || cols.components != 1)
    throw std::invalid_argument("assemble_mixed: scalar spaces required");
  const auto& str = shapes(rows.degree);
  const auto& stc = shapes(cols.degree);
  const auto& qr = quadrature();
  std::vector<Triplet> t;
  const Mesh& m = *rows.mesh;
  for (int c = 0; c < m.n_cells(); ++c) {
    const int sir = rows.cell_to_support[c], sic = cols.cell_to_support[c];
    if (sir < 0 || sic < 0) continue;
    const int* rd = rows.cell_dofs(sir);
    const int* cd = cols.cell_dofs(sic);
    const double hx = m.cell_hx(c), hy = m.cell_hy(c);
    const double jac = 0.25 * hx * hy, gx = 2.0 / hx, gy = 2.0 / hy;
    double loc[9][9] = {};
    for (int q = 0; q < QuadratureRule::n_cell; ++q) {
      QuadCtx ctx{c, q, quad_point(m, c, q), m.cell_region[c]};
      const double w = qr.wts[q] * jac * coeff(ctx);
      if (w == 0.0) continue;
      for (int i = 0; i < str.ndofs; ++i)
        for (int j = 0; j < stc.ndofs; ++j) {
          if constexpr (Stiff)
            loc[i][j] += w * (str.dN[q][i][0] * gx * stc.dN[q][j][0] * gx +
                              str.dN[q][i][1] * gy * stc.dN[q][j][1] * gy);
          else
            loc[i][j] += w * str.N[q][i] * stc.N[q][j];
        }
    }
    for (int i = 0; i < str.ndofs; ++i)
      for (int j = 0; j < stc.ndofs; ++j) t.push_back({rd[i], cd[j], loc[i][j]});
  }
  return CsrMatrix::from_triplets(rows.n_dofs(), cols.n_dofs(), std::move(t));
}

}  // namespace

CsrMatrix assemble_mixed_mass(const FeSpace& rows, const FeSpace& cols, const ScalarCoeff& coeff) {
  return assemble_mixed<false>(rows, cols, coeff);
}

CsrMatrix assemble_mixed_stiffness(const FeSpace& rows, const FeSpace& cols,
                                   const ScalarCoeff& coeff) {
  return assemble_mixed<true>(rows, cols, coeff);
}

std::vector<double> assemble_source(const FeSpace& sp, const ScalarCoeff& f) {
  const auto& st = shapes(sp.degree);
  const auto& qr = quadrature();
  std::vector<double> r(sp.n_dofs(), 0.0);
  for_support_cells(sp, [&](const CellCtx& c) {
    for (int q = 0; q < QuadratureRule::n_cell; ++q) {
      const double w = qr.wts[q] * c.jac * f(make_qctx(sp, c, q));
      for (int i = 0; i < st.ndofs; ++i) r[c.dofs[i]] += w * st.N[q][i];
    }
  });
  return r;
}

std::vector<double> assemble_source_vec(const FeSpace& sp, const VectorCoeff& f) {
  const auto& st = shapes(sp.degree);
  const auto& qr = quadrature();
  std::vector<double> r(sp.n_dofs(), 0.0);
  for_support_cells(sp, [&](const CellCtx& c) {
    for (int q = 0; q < QuadratureRule::n_cell; ++q) {
      const Vec2 v = f(make_qctx(sp, c, q));
      const double w = qr.wts[q] * c.jac;
      for (int i = 0; i < st.ndofs; ++i) {
        r[2 * c.dofs[i] + 0] += w * v.x * st.N[q][i];
        r[2 * c.dofs[i] + 1] += w * v.y * st.N[q][i];
      }
    }
  });
  return r;
}

std::vector<double> assemble_grad_source(const FeSpace& sp, const VectorCoeff& f) {
  const auto& st = shapes(sp.degree);
  const auto& qr = quadrature();
  std::vector<double> r(sp.n_dofs(), 0.0);
  for_support_cells(sp, [&](const CellCtx& c) {
    for (int q = 0; q < QuadratureRule::n_cell; ++q) {
      const Vec2 v = f(make_qctx(sp, c, q));
      const double w = qr.wts[q] * c.jac;
      for (int i = 0; i < st.ndofs; ++i)
        r[c.dofs[i]] += w * (v.x * st.dN[q][i][0] * c.gx + v.y * st.dN[q][i][1] * c.gy);
    }
  });
  return r;
}

std::vector<double> assemble_boundary_source_tangential(const FeSpace& sp,
                                                        const FacetSelector& sel,
                                                        const ScalarCoeff& g) {
  if (sp.components != 2) throw std::invalid_argument("tangential source: vector space required");
  const auto& st = shapes(sp.degree);
  const auto& qr = quadrature();
  const Mesh& m = *sp.mesh;
  std::vector<double> r(sp.n_dofs(), 0.0);
  for_facets(sp, sel, [&](const Facet& f, int si) {
    const int* dofs = sp.cell_dofs(si);
    const double jac = 0.5 * m.facet_length(f);
    const int e = f.local_edge;
    const int comp = f.normal.x != 0.0 ? 1 : 0;
    for (int q = 0; q < QuadratureRule::n_edge; ++q) {
      QuadCtx ctx{f.cell, q, edge_quad_point(m, f, q), m.cell_region[f.cell], &f};
      const double w = qr.edge_wts[q] * jac * g(ctx);
      for (int a = 0; a < st.n_edge_dofs; ++a)
        r[2 * dofs[st.edge_dofs[e][a]] + comp] += w * st.eN[e][q][st.edge_dofs[e][a]];
    }
  });
  return r;
}

std::vector<double> assemble_boundary_source(const FeSpace& sp, const FacetSelector& sel,
                                             const ScalarCoeff& g) {
  const auto& st = shapes(sp.degree);
  const auto& qr = quadrature();
  const Mesh& m = *sp.mesh;
  std::vector<double> r(sp.n_dofs(), 0.0);
  for_facets(sp, sel, [&](const Facet& f, int si) {
    const int* dofs = sp.cell_dofs(si);
    const double jac = 0.5 * m.facet_length(f);
    const int e = f.local_edge;
    for (int q = 0; q < QuadratureRule::n_edge; ++q) {
      QuadCtx ctx{f.cell, q, edge_quad_point(m, f, q), m.cell_region[f.cell], &f};
      const double w = qr.edge_wts[q] * jac * g(ctx);
      for (int a = 0; a < st.n_edge_dofs; ++a)
        r[dofs[st.edge_dofs[e][a]]] += w * st.eN[e][q][st.edge_dofs[e][a]];
    }
  });
  return r;
}

std::vector<double> interpolate(const FeSpace& sp, const std::function<double(Vec2)>& f) {
  std::vector<double> c(sp.n_scalar);
  for (int i = 0; i < sp.n_scalar; ++i) c[i] = f(sp.dof_xy[i]);
  return c;
}

std::vector<double> interpolate_vec(const FeSpace& sp, const std::function<Vec2(Vec2)>& f) {
  std::vector<double> c(2 * sp.n_scalar);
  for (int i = 0; i < sp.n_scalar; ++i) {
    const Vec2 v = f(sp.dof_xy[i]);
    c[2 * i] = v.x;
    c[2 * i + 1] = v.y;
  }
  return c;
}

double integrate(const FeSpace& sp, const std::vector<double>& coeffs, Integrand what) {
  if (sp.components != 1) throw std::invalid_argument("integrate: scalar space required");
  const auto& st = shapes(sp.degree);
  const auto& qr = quadrature();
  double total = 0.0;
  for_support_cells(sp, [&](const CellCtx& c) {
    for (int q = 0; q < QuadratureRule::n_cell; ++q) {
      double acc = 0.0;
      if (what == Integrand::GradSquare) {
        double gx = 0.0, gy = 0.0;
        for (int i = 0; i < st.ndofs; ++i) {
          gx += coeffs[c.dofs[i]] * st.dN[q][i][0] * c.gx;
          gy += coeffs[c.dofs[i]] * st.dN[q][i][1] * c.gy;
        }
        acc = gx * gx + gy * gy;
      } else {
        double v = 0.0;
        for (int i = 0; i < st.ndofs; ++i) v += coeffs[c.dofs[i]] * st.N[q][i];
        acc = what == Integrand::Value ? v : v * v;
      }
      total += qr.wts[q] * c.jac * acc;
    }
  });
  return total;
}

std::vector<double> lumped_weights(const FeSpace& sp) {
  return assemble_source(sp, [](const QuadCtx&) { return 1.0; });
}

void apply_constraints(CsrMatrix& A, std::vector<double>& b, const std::vector<Constraint>& cs) {
  std::vector<char> flag(A.n_rows, 0);
  std::vector<double> val(A.n_rows, 0.0);
  for (const auto& c : cs) {
    flag[c.dof] = 1;
    val[c.dof] = c.value;
  }
  for (int r = 0; r < A.n_rows; ++r) {
    if (flag[r]) {
      bool has_diag = false;
      for (int k = A.row_offsets[r]; k < A.row_offsets[r + 1]; ++k) {
        if (A.col_indices[k] == r) {
          A.values[k] = 1.0;
          has_diag = true;
        } else {
          A.values[k] = 0.0;
        }
      }
      if (!has_diag) throw std::runtime_error("apply_constraints: missing diagonal entry");
      b[r] = val[r];
    } else {
      for (int k = A.row_offsets[r]; k < A.row_offsets[r + 1]; ++k) {
        const int c = A.col_indices[k];
        if (flag[c]) {
          b[r] -= A.values[k] * val[c];
          A.values[k] = 0.0;
        }
      }
    }
  }
}

void set_constrained(std::vector<double>& x, const std::vector<Constraint>& cs) {
  for (const auto& c : cs) x[c.dof] = c.value;
}

std::vector<Constraint> shift_constraints(const std::vector<Constraint>& cs, int offset) {
  std::vector<Constraint> out = cs;
  for (auto& c : out) c.dof += offset;
  return out;
}

std::vector<double> inject(const FeSpace& from, const std::vector<double>& coeffs,
                           const FeSpace& to) {
  if (from.mesh != to.mesh) throw std::invalid_argument("inject: mesh mismatch");
  if (from.degree > to.degree) throw std::invalid_argument("inject: target degree too low");
  std::vector<double> out(to.n_scalar, 0.0);
  const auto& stf = shapes(from.degree);
  for (int si = 0; si < to.n_support_cells(); ++si) {
    const int c = to.support_cells[si];
    const int sif = from.cell_to_support[c];
    const int* fdofs = from.cell_dofs(sif);
    const int* tdofs = to.cell_dofs(si);
    for (int i = 0; i < to.ndofs_per_cell(); ++i) {
      const double* ref = to.degree == 1 ? kQ1Nodes[i] : kQ2Nodes[i];
      double N[9], dN[9][2];
      eval_shapes(from.degree, ref[0], ref[1], N, dN);
      double v = 0.0;
      for (int j = 0; j < stf.ndofs; ++j) v += coeffs[fdofs[j]] * N[j];
      out[tdofs[i]] = v;
    }
  }
  return out;
}

double FieldEval::value(int mesh_cell, int q) const {
  const auto& st = shapes(sp->degree);
  const int si = sp->cell_to_support[mesh_cell];
  const int* dofs = sp->cell_dofs(si);
  double v = 0.0;
  for (int i = 0; i < st.ndofs; ++i) v += (*coeffs)[dofs[i]] * st.N[q][i];
  return v;
}

Vec2 FieldEval::grad(int mesh_cell, int q) const {
  const auto& st = shapes(sp->degree);
  const Mesh& m = *sp->mesh;
  const int si = sp->cell_to_support[mesh_cell];
  const int* dofs = sp->cell_dofs(si);
  const double gx = 2.0 / m.cell_hx(mesh_cell), gy = 2.0 / m.cell_hy(mesh_cell);
  Vec2 g{0.0, 0.0};
  for (int i = 0; i < st.ndofs; ++i) {
    g.x += (*coeffs)[dofs[i]] * st.dN[q][i][0] * gx;
    g.y += (*coeffs)[dofs[i]] * st.dN[q][i][1] * gy;
  }
  return g;
}

Vec2 FieldEval::value_vec(int mesh_cell, int q) const {
  const auto& st = shapes(sp->degree);
  const int si = sp->cell_to_support[mesh_cell];
  const int* dofs = sp->cell_dofs(si);
  Vec2 v{0.0, 0.0};
  for (int i = 0; i < st.ndofs; ++i) {
    v.x += (*coeffs)[2 * dofs[i]] * st.N[q][i];
    v.y += (*coeffs)[2 * dofs[i] + 1] * st.N[q][i];
  }
  return v;
}

void FieldEval::grad_vec(int mesh_cell, int q, double g[2][2]) const {
  const auto& st = shapes(sp->degree);
  const Mesh& m = *sp->mesh;
  const int si = sp->cell_to_support[mesh_cell];
  const int* dofs = sp->cell_dofs(si);
  const double sc[2] = {2.0 / m.cell_hx(mesh_cell), 2.0 / m.cell_hy(mesh_cell)};
  g[0][0] = g[0][1] = g[1][0] = g[1][1] = 0.0;
  for (int i = 0; i < st.ndofs; ++i)
    for (int k = 0; k < 2; ++k) {
      const double d = st.dN[q][i][k] * sc[k];
      g[k][0] += (*coeffs)[2 * dofs[i]] * d;
      g[k][1] += (*coeffs)[2 * dofs[i] + 1] * d;
    }
}

double FieldEval::edge_value(const Facet& f, int eq) const {
  const auto& st = shapes(sp->degree);
  const int si = sp->cell_to_support[f.cell];
  const int* dofs = sp->cell_dofs(si);
  double v = 0.0;
  for (int i = 0; i < st.ndofs; ++i) v += (*coeffs)[dofs[i]] * st.eN[f.local_edge][eq][i];
  return v;
}

Vec2 FieldEval::edge_value_vec(const Facet& f, int eq) const {
  const auto& st = shapes(sp->degree);
  const int si = sp->cell_to_support[f.cell];
  const int* dofs = sp->cell_dofs(si);
  Vec2 v{0.0, 0.0};
  for (int i = 0; i < st.ndofs; ++i) {
    v.x += (*coeffs)[2 * dofs[i]] * st.eN[f.local_edge][eq][i];
    v.y += (*coeffs)[2 * dofs[i] + 1] * st.eN[f.local_edge][eq][i];
  }
  return v;
}

Vec2 FieldEval::edge_grad(const Facet& f, int eq) const {
  const auto& st = shapes(sp->degree);
  const Mesh& m = *sp->mesh;
  const int si = sp->cell_to_support[f.cell];
  const int* dofs = sp->cell_dofs(si);
  const double gx = 2.0 / m.cell_hx(f.cell), gy = 2.0 / m.cell_hy(f.cell);
  Vec2 g{0.0, 0.0};
  for (int i = 0; i < st.ndofs; ++i) {
    g.x += (*coeffs)[dofs[i]] * st.edN[f.local_edge][eq][i][0] * gx;
    g.y += (*coeffs)[dofs[i]] * st.edN[f.local_edge][eq][i][1] * gy;
  }
  return g;
}

void FieldEval::edge_grad_vec(const Facet& f, int eq, double g[2][2]) const {
  const auto& st = shapes(sp->degree);
  const Mesh& m = *sp->mesh;
  const int si = sp->cell_to_support[f.cell];
  const int* dofs = sp->cell_dofs(si);
  const double sc[2] = {2.0 / m.cell_hx(f.cell), 2.0 / m.cell_hy(f.cell)};
  g[0][0] = g[0][1] = g[1][0] = g[1][1] = 0.0;
  for (int i = 0; i < st.ndofs; ++i)
    for (int k = 0; k < 2; ++k) {
      const double d = st.edN[f.local_edge][eq][i][k] * sc[k];
      g[k][0] += (*coeffs)[2 * dofs[i]] * d;
      g[k][1] += (*coeffs)[2 * dofs[i] + 1] * d;
    }
}

}  // namespace ewod
