#pragma once

#include <functional>
#include <vector>

namespace ewod {

struct Triplet {
  int row, col;
  double val;
};

struct CsrMatrix {
  int n_rows = 0, n_cols = 0;
  std::vector<int> row_offsets;  // size n_rows+1
  std::vector<int> col_indices;  // sorted, unique per row
  std::vector<double> values;

  static CsrMatrix from_triplets(int n_rows, int n_cols, std::vector<Triplet> t);

  void spmv(const double* x, double* y) const;            // y = A x
  void spmv_transpose(const double* x, double* y) const;  // y = A^T x
  std::vector<double> apply(const std::vector<double>& x) const;
  std::vector<double> apply_transpose(const std::vector<double>& x) const;
  std::vector<double> diagonal() const;
  int nnz() const { return static_cast<int>(values.size()); }
};

/// C = a*A + b*B (sparsity union).
CsrMatrix csr_add(double a, const CsrMatrix& A, double b, const CsrMatrix& B);

/// [A00 A01; A10 A11]; any block may be empty (treated as zero) as long as
/// the block dimensions are consistent.
CsrMatrix csr_block_2x2(const CsrMatrix& A00, const CsrMatrix& A01, const CsrMatrix& A10,
                        const CsrMatrix& A11);

struct SolverReport {
  int iterations = 0;
  double final_residual = 0.0;  // relative, ||b - A x|| / ||b||
  bool converged = false;
};

enum class Precond { None, Jacobi };

/// Generic operator for matrix-free solves.
struct LinOp {
  int n = 0;
  std::function<void(const double*, double*)> apply;
  std::vector<double> diag;  // optional, for Jacobi
};

LinOp as_linop(const CsrMatrix& A);

struct SolveOpts {
  double tol = 1e-10;
  int max_iter = 10000;
  Precond precond = Precond::Jacobi;
  // weights of the constant null-space component to project out each
  // iteration (pure-Neumann systems); empty = no projection
  const std::vector<double>* zero_mean_weights = nullptr;
};

SolverReport cg_solve(const LinOp& A, const std::vector<double>& b, std::vector<double>& x,
                      const SolveOpts& opts);
SolverReport bicgstab_solve(const LinOp& A, const std::vector<double>& b, std::vector<double>& x,
                            const SolveOpts& opts);

SolverReport cg_solve(const CsrMatrix& A, const std::vector<double>& b, std::vector<double>& x,
                      const SolveOpts& opts);
SolverReport bicgstab_solve(const CsrMatrix& A, const std::vector<double>& b,
                            std::vector<double>& x, const SolveOpts& opts);

/// v - (sum m_i v_i / sum m_i) * 1
std::vector<double> project_zero_mean(const std::vector<double>& v, const std::vector<double>& m);
void project_zero_mean_inplace(std::vector<double>& v, const std::vector<double>& m);

double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm2(const std::vector<double>& a);
void axpy(double a, const std::vector<double>& x, std::vector<double>& y);  // y += a x

}  // namespace ewod
