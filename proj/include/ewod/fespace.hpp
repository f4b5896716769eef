#pragma once

#include <functional>
#include <vector>

#include "ewod/la.hpp"
#include "ewod/mesh.hpp"

namespace ewod {

enum class Support { Fluid, All };

struct Constraint {
  int dof;  // vector-space constraints index the component dof (2*s + c)
  double value;
};

/// 3x3 Gauss rule on the reference square [-1,1]^2 (exact through degree 5)
/// and the matching 3-point rule on reference edges.
struct QuadratureRule {
  static constexpr int n_cell = 9;
  static constexpr int n_edge = 3;
  double pts[n_cell][2];
  double wts[n_cell];
  double edge_pts[n_edge];
  double edge_wts[n_edge];
};
const QuadratureRule& quadrature();

/// Reference shape values/gradients tabulated at the cell quadrature points
/// and at the edge quadrature points of each local edge.
struct ShapeTable {
  int ndofs;                       // 4 (Q1) or 9 (Q2)
  double N[9][9];                  // [q][i]
  double dN[9][9][2];              // [q][i][xi/eta]
  double eN[4][3][9];              // [edge][eq][i]
  double edN[4][3][9][2];          // [edge][eq][i][..]
  int edge_dofs[4][3];             // local dofs with support on each edge
  int n_edge_dofs;                 // 2 (Q1) or 3 (Q2)
};
const ShapeTable& shapes(int degree);

/// Scalar or 2-vector Lagrange space (Q1/Q2) over the fluid cells or the
/// whole composite mesh. Vector dofs interleave components: 2*s + c.
struct FeSpace {
  const Mesh* mesh = nullptr;
  int degree = 1;
  int components = 1;
  Support support = Support::All;

  int n_scalar = 0;
  std::vector<Vec2> dof_xy;           // per scalar dof
  std::vector<int> support_cells;     // mesh cell ids
  std::vector<int> cell_to_support;   // mesh cell -> support index, -1 if out
  std::vector<int> cell_dofs_flat;    // per support cell, ndofs_per_cell ids
  std::vector<Constraint> constraints;
  bool zero_mean = false;

  int n_dofs() const { return n_scalar * components; }
  int ndofs_per_cell() const { return degree == 1 ? 4 : 9; }
  const int* cell_dofs(int support_idx) const {
    return cell_dofs_flat.data() + static_cast<std::size_t>(support_idx) * ndofs_per_cell();
  }
  int n_support_cells() const { return static_cast<int>(support_cells.size()); }
};

FeSpace make_space(const Mesh& mesh, int degree, int components, Support support);

// Role factories with the constraint sets the scheme uses.
FeSpace make_voltage_space(const Mesh& mesh);   // Q1/All, Dirichlet from electrodes
FeSpace make_scalar_fluid_space(const Mesh& mesh);  // Q2/Fluid (charge, phase, mu)
FeSpace make_velocity_space(const Mesh& mesh);  // Q2 vector/Fluid, u.n = 0 on Gamma
FeSpace make_pressure_space(const Mesh& mesh);  // Q1/Fluid, zero mean

/// Evaluation context handed to coefficient callbacks. For facet integrals,
/// q indexes the edge rule and facet is set.
struct QuadCtx {
  int cell;  // mesh cell id
  int q;     // quadrature point index on the cell (or edge)
  Vec2 x;
  Region region;
  const Facet* facet = nullptr;
};
using ScalarCoeff = std::function<double(const QuadCtx&)>;
using VectorCoeff = std::function<Vec2(const QuadCtx&)>;
using FacetSelector = std::function<bool(const Facet&)>;

FacetSelector select_gamma();
FacetSelector select_outer_dirichlet();

enum class ConvForm { Grad, Skew };

CsrMatrix assemble_mass(const FeSpace& sp, const ScalarCoeff& coeff);
CsrMatrix assemble_stiffness(const FeSpace& sp, const ScalarCoeff& coeff);
/// <eta S(u), S(w)> on a vector space.
CsrMatrix assemble_viscous(const FeSpace& sp, const ScalarCoeff& eta);
/// Grad: <w.grad(phi_j), phi_i> (scalar spaces). Skew: exact skew part
/// (1/2)(G - G^T) of G_ij = <wind.grad(phi_j), phi_i> per component (vector
/// spaces); coincides with the paper's skew-symmetrized form when wind.n = 0.
CsrMatrix assemble_convection(const FeSpace& sp, const VectorCoeff& wind, ConvForm form);
/// Facet mass; tangential components only for vector spaces.
CsrMatrix assemble_boundary_mass(const FeSpace& sp, const FacetSelector& sel,
                                 const ScalarCoeff& coeff);
/// B_ij = int q_i div(w_j), rows pressure, cols velocity.
CsrMatrix assemble_divergence(const FeSpace& vel, const FeSpace& pres);
/// Mixed mass/stiffness between two scalar spaces over the intersection of
/// their supports (rows test, cols trial).
CsrMatrix assemble_mixed_mass(const FeSpace& rows, const FeSpace& cols, const ScalarCoeff& coeff);
CsrMatrix assemble_mixed_stiffness(const FeSpace& rows, const FeSpace& cols,
                                   const ScalarCoeff& coeff);

std::vector<double> assemble_source(const FeSpace& sp, const ScalarCoeff& f);
std::vector<double> assemble_source_vec(const FeSpace& sp, const VectorCoeff& f);
/// int f . grad(phi_i)
std::vector<double> assemble_grad_source(const FeSpace& sp, const VectorCoeff& f);
/// int_facets g * (w_i)_tau  (vector space; tangent = complementary axis)
std::vector<double> assemble_boundary_source_tangential(const FeSpace& sp,
                                                        const FacetSelector& sel,
                                                        const ScalarCoeff& g);
/// int_facets g * phi_i (scalar space)
std::vector<double> assemble_boundary_source(const FeSpace& sp, const FacetSelector& sel,
                                             const ScalarCoeff& g);

std::vector<double> interpolate(const FeSpace& sp, const std::function<double(Vec2)>& f);
std::vector<double> interpolate_vec(const FeSpace& sp, const std::function<Vec2(Vec2)>& f);

enum class Integrand { Value, Square, GradSquare };
double integrate(const FeSpace& sp, const std::vector<double>& coeffs, Integrand what);

/// Weights int phi_i (consistent "lumped mass"); weighted means equal exact
/// L2 means of FE functions.
std::vector<double> lumped_weights(const FeSpace& sp);

/// Row/column elimination with RHS lift; unit diagonal on constrained rows.
void apply_constraints(CsrMatrix& A, std::vector<double>& b,
                       const std::vector<Constraint>& cs);
void set_constrained(std::vector<double>& x, const std::vector<Constraint>& cs);
std::vector<Constraint> shift_constraints(const std::vector<Constraint>& cs, int offset);

/// Pointwise-exact injection of a Q1/All function into a Q2/Fluid space
/// (the voltage-into-charge-space compatibility map).
std::vector<double> inject(const FeSpace& from, const std::vector<double>& coeffs,
                           const FeSpace& to);

/// Field evaluation at quadrature points (values cached via shape tables).
struct FieldEval {
  const FeSpace* sp;
  const std::vector<double>* coeffs;

  double value(int mesh_cell, int q) const;
  Vec2 grad(int mesh_cell, int q) const;
  Vec2 value_vec(int mesh_cell, int q) const;
  // full gradient tensor g[k][l] = d_k u_l
  void grad_vec(int mesh_cell, int q, double g[2][2]) const;

  double edge_value(const Facet& f, int eq) const;
  Vec2 edge_value_vec(const Facet& f, int eq) const;
  Vec2 edge_grad(const Facet& f, int eq) const;
  void edge_grad_vec(const Facet& f, int eq, double g[2][2]) const;
};

/// Quadrature point location helpers.
Vec2 quad_point(const Mesh& mesh, int cell, int q);
Vec2 edge_quad_point(const Mesh& mesh, const Facet& f, int eq);
/// Global tangent of an axis-aligned facet: +x for horizontal, +y for
/// vertical facets.
Vec2 facet_tangent(const Facet& f);

}  // namespace ewod
