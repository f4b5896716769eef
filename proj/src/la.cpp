#include "ewod/la.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ewod {

CsrMatrix CsrMatrix::from_triplets(int n_rows, int n_cols, std::vector<Triplet> t) {
  std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  CsrMatrix A;
  A.n_rows = n_rows;
  A.n_cols = n_cols;
  A.row_offsets.assign(n_rows + 1, 0);
  A.col_indices.reserve(t.size());
  A.values.reserve(t.size());
  std::size_t k = 0;
  for (int r = 0; r < n_rows; ++r) {
    while (k < t.size() && t[k].row == r) {
      int c = t[k].col;
      double v = 0.0;
      while (k < t.size() && t[k].row == r && t[k].col == c) v += t[k++].val;
      A.col_indices.push_back(c);
      A.values.push_back(v);
    }
    A.row_offsets[r + 1] = static_cast<int>(A.col_indices.size());
  }
  if (k != t.size()) throw std::invalid_argument("from_triplets: row index out of range");
  return A;
}

void CsrMatrix::spmv(const double* x, double* y) const {
  for (int r = 0; r < n_rows; ++r) {
    double s = 0.0;
    for (int k = row_offsets[r]; k < row_offsets[r + 1]; ++k) s += values[k] * x[col_indices[k]];
    y[r] = s;
  }
}

void CsrMatrix::spmv_transpose(const double* x, double* y) const {
  std::fill(y, y + n_cols, 0.0);
  for (int r = 0; r < n_rows; ++r)
    for (int k = row_offsets[r]; k < row_offsets[r + 1]; ++k) y[col_indices[k]] += values[k] * x[r];
}

std::vector<double> CsrMatrix::apply(const std::vector<double>& x) const {
  std::vector<double> y(n_rows);
  spmv(x.data(), y.data());
  return y;
}

std::vector<double> CsrMatrix::apply_transpose(const std::vector<double>& x) const {
  std::vector<double> y(n_cols);
  spmv_transpose(x.data(), y.data());
  return y;
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(n_rows, 0.0);
  for (int r = 0; r < n_rows; ++r)
    for (int k = row_offsets[r]; k < row_offsets[r + 1]; ++k)
      if (col_indices[k] == r) d[r] = values[k];
  return d;
}

CsrMatrix csr_add(double a, const CsrMatrix& A, double b, const CsrMatrix& B) {
  if (A.n_rows != B.n_rows || A.n_cols != B.n_cols)
    throw std::invalid_argument("csr_add: shape mismatch");
  std::vector<Triplet> t;
  t.reserve(A.values.size() + B.values.size());
  for (int r = 0; r < A.n_rows; ++r) {
    for (int k = A.row_offsets[r]; k < A.row_offsets[r + 1]; ++k)
      t.push_back({r, A.col_indices[k], a * A.values[k]});
    for (int k = B.row_offsets[r]; k < B.row_offsets[r + 1]; ++k)
      t.push_back({r, B.col_indices[k], b * B.values[k]});
  }
  return CsrMatrix::from_triplets(A.n_rows, A.n_cols, std::move(t));
}

CsrMatrix csr_block_2x2(const CsrMatrix& A00, const CsrMatrix& A01, const CsrMatrix& A10,
                        const CsrMatrix& A11) {
  const int n0 = A00.n_rows > 0 ? A00.n_rows : A01.n_rows;
  const int n1 = A11.n_rows > 0 ? A11.n_rows : A10.n_rows;
  const int m0 = A00.n_cols > 0 ? A00.n_cols : A10.n_cols;
  const int m1 = A11.n_cols > 0 ? A11.n_cols : A01.n_cols;
  std::vector<Triplet> t;
  auto push = [&](const CsrMatrix& M, int ro, int co) {
    for (int r = 0; r < M.n_rows; ++r)
      for (int k = M.row_offsets[r]; k < M.row_offsets[r + 1]; ++k)
        t.push_back({r + ro, M.col_indices[k] + co, M.values[k]});
  };
  push(A00, 0, 0);
  push(A01, 0, m0);
  push(A10, n0, 0);
  push(A11, n0, m0);
  return CsrMatrix::from_triplets(n0 + n1, m0 + m1, std::move(t));
}

LinOp as_linop(const CsrMatrix& A) {
  if (A.n_rows != A.n_cols) throw std::invalid_argument("as_linop: matrix must be square");
  LinOp op;
  op.n = A.n_rows;
  op.apply = [&A](const double* x, double* y) { A.spmv(x, y); };
  op.diag = A.diagonal();
  return op;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

void axpy(double a, const std::vector<double>& x, std::vector<double>& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void project_zero_mean_inplace(std::vector<double>& v, const std::vector<double>& m) {
  double wsum = 0.0, s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    wsum += m[i];
    s += m[i] * v[i];
  }
  const double mean = s / wsum;
  for (auto& vi : v) vi -= mean;
}

std::vector<double> project_zero_mean(const std::vector<double>& v, const std::vector<double>& m) {
  std::vector<double> out = v;
  project_zero_mean_inplace(out, m);
  return out;
}

namespace {

std::vector<double> inv_diag(const LinOp& A, Precond p) {
  std::vector<double> d(A.n, 1.0);
  if (p == Precond::Jacobi && !A.diag.empty())
    for (int i = 0; i < A.n; ++i) d[i] = A.diag[i] != 0.0 ? 1.0 / A.diag[i] : 1.0;
  return d;
}

void maybe_project(std::vector<double>& v, const SolveOpts& o) {
  if (o.zero_mean_weights) project_zero_mean_inplace(v, *o.zero_mean_weights);
}

}  // namespace

SolverReport cg_solve(const LinOp& A, const std::vector<double>& b, std::vector<double>& x,
                      const SolveOpts& opts) {
  const int n = A.n;
  x.resize(n, 0.0);
  SolverReport rep;
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    rep.converged = true;
    return rep;
  }
  const auto idg = inv_diag(A, opts.precond);
  maybe_project(x, opts);
  std::vector<double> r(n), z(n), p(n), Ap(n);
  A.apply(x.data(), r.data());
  for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
  maybe_project(r, opts);
  for (int i = 0; i < n; ++i) z[i] = idg[i] * r[i];
  maybe_project(z, opts);
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= opts.max_iter; ++it) {
    A.apply(p.data(), Ap.data());
    maybe_project(Ap, opts);
    const double pAp = dot(p, Ap);
    if (pAp == 0.0) break;
    const double alpha = rz / pAp;
    axpy(alpha, p, x);
    axpy(-alpha, Ap, r);
    rep.iterations = it;
    rep.final_residual = norm2(r) / bnorm;
    if (rep.final_residual <= opts.tol) {
      rep.converged = true;
      break;
    }
    for (int i = 0; i < n; ++i) z[i] = idg[i] * r[i];
    maybe_project(z, opts);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  maybe_project(x, opts);
  return rep;
}

SolverReport bicgstab_solve(const LinOp& A, const std::vector<double>& b, std::vector<double>& x,
                            const SolveOpts& opts) {
  const int n = A.n;
  x.resize(n, 0.0);
  SolverReport rep;
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    rep.converged = true;
    return rep;
  }
  const auto idg = inv_diag(A, opts.precond);
  maybe_project(x, opts);
  std::vector<double> r(n), r0(n), p(n, 0.0), v(n, 0.0), s(n), t(n), ph(n), sh(n);
  A.apply(x.data(), r.data());
  for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
  maybe_project(r, opts);
  r0 = r;
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    const double rho_new = dot(r0, r);
    if (rho_new == 0.0) break;
    if (it == 1) {
      p = r;
    } else {
      const double beta = (rho_new / rho) * (alpha / omega);
      for (int i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    }
    rho = rho_new;
    for (int i = 0; i < n; ++i) ph[i] = idg[i] * p[i];
    maybe_project(ph, opts);
    A.apply(ph.data(), v.data());
    maybe_project(v, opts);
    const double r0v = dot(r0, v);
    if (r0v == 0.0) break;
    alpha = rho / r0v;
    for (int i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    rep.iterations = it;
    if (norm2(s) / bnorm <= opts.tol) {
      axpy(alpha, ph, x);
      rep.final_residual = norm2(s) / bnorm;
      rep.converged = true;
      maybe_project(x, opts);
      return rep;
    }
    for (int i = 0; i < n; ++i) sh[i] = idg[i] * s[i];
    maybe_project(sh, opts);
    A.apply(sh.data(), t.data());
    maybe_project(t, opts);
    const double tt = dot(t, t);
    if (tt == 0.0) break;
    omega = dot(t, s) / tt;
    for (int i = 0; i < n; ++i) x[i] += alpha * ph[i] + omega * sh[i];
    for (int i = 0; i < n; ++i) r[i] = s[i] - omega * t[i];
    rep.final_residual = norm2(r) / bnorm;
    if (rep.final_residual <= opts.tol) {
      rep.converged = true;
      break;
    }
    if (omega == 0.0) break;
  }
  maybe_project(x, opts);
  return rep;
}

SolverReport cg_solve(const CsrMatrix& A, const std::vector<double>& b, std::vector<double>& x,
                      const SolveOpts& opts) {
  return cg_solve(as_linop(A), b, x, opts);
}

SolverReport bicgstab_solve(const CsrMatrix& A, const std::vector<double>& b,
                            std::vector<double>& x, const SolveOpts& opts) {
  return bicgstab_solve(as_linop(A), b, x, opts);
}

}  // namespace ewod
