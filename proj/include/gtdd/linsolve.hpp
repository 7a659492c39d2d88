#pragma once

#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace gtdd {

/// Triplet-assembled sparse matrix; duplicate entries are summed when the
/// matrix is finalized.
class SparseMatrix {
public:
  SparseMatrix(int rows, int cols);
  ~SparseMatrix();
  SparseMatrix(SparseMatrix&&) noexcept;
  SparseMatrix& operator=(SparseMatrix&&) noexcept;

  void add(int row, int col, double value);
  void finalize();
  bool finalized() const;

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  long nnz() const;

  std::vector<double> multiply(std::span<const double> x) const;

private:
  friend class LuFactorization;
  struct Impl;
  int rows_, cols_;
  std::unique_ptr<Impl> impl_;
};

/// Direct sparse LU of a square matrix; immutable after construction and
/// shareable across threads for concurrent solves.
class LuFactorization {
public:
  explicit LuFactorization(const SparseMatrix& A);
  ~LuFactorization();
  LuFactorization(LuFactorization&&) noexcept;

  void solve(std::span<const double> b, std::span<double> x) const;
  std::vector<double> solve(const std::vector<double>& b) const;
  int size() const { return n_; }

private:
  struct Impl;
  int n_;
  std::unique_ptr<Impl> impl_;
};

struct KrylovReport {
  int iterations = 0;
  std::vector<double> residual_history; // relative, one entry per iteration incl. start
  bool converged = false;
  long subdomain_solve_count = 0; // accumulated by the caller's operator
};

struct GmresOptions {
  double tol = 1e-6;
  int max_iter = 200;
  int restart = 0; // 0 = full memory
  /// Optional diagonal weight defining the inner product (discrete L2);
  /// residual norms are reported in this metric.
  const std::vector<double>* inner_weight = nullptr;
};

using LinearOp = std::function<std::vector<double>(const std::vector<double>&)>;

/// Restarted GMRES on a matrix-free operator with optional right
/// preconditioning; reported residuals are unpreconditioned. Modified
/// Gram-Schmidt with one reorthogonalization pass when the orthogonality
/// defect exceeds 1e-8. Non-convergence returns the best iterate with
/// converged=false.
std::pair<std::vector<double>, KrylovReport>
gmres(const LinearOp& apply, const std::vector<double>& b, const std::vector<double>& x0,
      const GmresOptions& opt = {}, const LinearOp* right_precond = nullptr);

} // namespace gtdd
