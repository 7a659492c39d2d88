#include "gtdd/linsolve.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>

#include "gtdd/errors.hpp"

namespace gtdd {

struct SparseMatrix::Impl {
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::SparseMatrix<double> mat;
  bool finalized = false;
};

SparseMatrix::SparseMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), impl_(std::make_unique<Impl>()) {}
SparseMatrix::~SparseMatrix() = default;
SparseMatrix::SparseMatrix(SparseMatrix&&) noexcept = default;
SparseMatrix& SparseMatrix::operator=(SparseMatrix&&) noexcept = default;

void SparseMatrix::add(int row, int col, double value) {
  if (impl_->finalized) throw SolverError("cannot add entries to a finalized matrix");
  if (row < 0 || row >= rows_ || col < 0 || col >= cols_)
    throw IndexError("sparse entry out of range");
  impl_->triplets.emplace_back(row, col, value);
}

void SparseMatrix::finalize() {
  if (impl_->finalized) return;
  impl_->mat.resize(rows_, cols_);
  impl_->mat.setFromTriplets(impl_->triplets.begin(), impl_->triplets.end());
  impl_->mat.makeCompressed();
  impl_->triplets.clear();
  impl_->triplets.shrink_to_fit();
  impl_->finalized = true;
}

bool SparseMatrix::finalized() const { return impl_->finalized; }

long SparseMatrix::nnz() const {
  return impl_->finalized ? static_cast<long>(impl_->mat.nonZeros())
                          : static_cast<long>(impl_->triplets.size());
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  if (!impl_->finalized) throw SolverError("finalize before multiply");
  Eigen::Map<const Eigen::VectorXd> xv(x.data(), x.size());
  Eigen::VectorXd y = impl_->mat * xv;
  return {y.data(), y.data() + y.size()};
}

struct LuFactorization::Impl {
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
};

LuFactorization::LuFactorization(const SparseMatrix& A)
    : n_(A.rows()), impl_(std::make_unique<Impl>()) {
  if (A.rows() != A.cols()) throw SolverError("LU needs a square matrix");
  if (!A.finalized()) throw SolverError("finalize before factorizing");
  impl_->lu.compute(A.impl_->mat);
  if (impl_->lu.info() != Eigen::Success)
    throw SingularMatrix("sparse LU factorization failed (singular matrix?)");
}

LuFactorization::~LuFactorization() = default;
LuFactorization::LuFactorization(LuFactorization&&) noexcept = default;

void LuFactorization::solve(std::span<const double> b, std::span<double> x) const {
  Eigen::Map<const Eigen::VectorXd> bv(b.data(), b.size());
  Eigen::VectorXd xv = impl_->lu.solve(bv);
  if (impl_->lu.info() != Eigen::Success) throw SingularMatrix("sparse LU solve failed");
  for (int i = 0; i < n_; ++i) x[i] = xv[i];
}

std::vector<double> LuFactorization::solve(const std::vector<double>& b) const {
  std::vector<double> x(b.size());
  solve(b, x);
  return x;
}

namespace {

double wdot(const std::vector<double>& w, const std::vector<double>& a,
            const std::vector<double>& b) {
  double s = 0.0;
  if (w.empty()) {
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  } else {
    for (size_t i = 0; i < a.size(); ++i) s += w[i] * a[i] * b[i];
  }
  return s;
}

} // namespace

std::pair<std::vector<double>, KrylovReport>
gmres(const LinearOp& apply, const std::vector<double>& b, const std::vector<double>& x0,
      const GmresOptions& opt, const LinearOp* right_precond) {
  const size_t n = b.size();
  if (!(opt.tol > 0)) throw SolverError("gmres needs tol > 0");
  std::vector<double> w = opt.inner_weight ? *opt.inner_weight : std::vector<double>{};
  auto norm = [&](const std::vector<double>& v) { return std::sqrt(wdot(w, v, v)); };

  KrylovReport rep;
  std::vector<double> x = x0.empty() ? std::vector<double>(n, 0.0) : x0;

  auto residual = [&](const std::vector<double>& xi) {
    std::vector<double> r = b;
    bool xzero = true;
    for (double v : xi)
      if (v != 0.0) { xzero = false; break; }
    if (!xzero) {
      std::vector<double> ax = apply(xi);
      for (size_t i = 0; i < n; ++i) r[i] -= ax[i];
    }
    return r;
  };

  std::vector<double> r = residual(x);
  const double bnorm = norm(b);
  double r0norm = norm(r);
  const double scale = bnorm > 0 ? bnorm : r0norm;
  if (scale == 0.0) { // zero data, zero guess
    rep.converged = true;
    rep.residual_history.push_back(0.0);
    return {x, rep};
  }
  rep.residual_history.push_back(r0norm / scale);
  if (r0norm / scale <= opt.tol) {
    rep.converged = true;
    return {x, rep};
  }

  const int m_max = opt.restart > 0 ? opt.restart : opt.max_iter;

  while (rep.iterations < opt.max_iter) {
    const double beta = norm(r);
    std::vector<std::vector<double>> V;
    std::vector<std::vector<double>> Z; // preconditioned basis (right precond)
    V.reserve(m_max + 1);
    {
      std::vector<double> v0 = r;
      for (double& vi : v0) vi /= beta;
      V.push_back(std::move(v0));
    }
    // Hessenberg stored column-wise, plus Givens-rotated least squares.
    std::vector<std::vector<double>> H;
    std::vector<double> cs, sn, g;
    g.push_back(beta);

    int k = 0;
    bool cycle_converged = false;
    while (k < m_max && rep.iterations < opt.max_iter) {
      std::vector<double> z = right_precond ? (*right_precond)(V[k]) : V[k];
      std::vector<double> wv = apply(z);
      if (right_precond) Z.push_back(std::move(z));
      ++rep.iterations;

      std::vector<double> h(k + 2, 0.0);
      for (int i = 0; i <= k; ++i) {
        h[i] = wdot(w, wv, V[i]);
        for (size_t j = 0; j < n; ++j) wv[j] -= h[i] * V[i][j];
      }
      // One reorthogonalization pass if the defect is above 1e-8.
      double defect = 0.0;
      const double wnorm = norm(wv);
      if (wnorm > 0) {
        for (int i = 0; i <= k; ++i)
          defect = std::max(defect, std::abs(wdot(w, wv, V[i])) / wnorm);
      }
      if (defect > 1e-8) {
        for (int i = 0; i <= k; ++i) {
          const double c = wdot(w, wv, V[i]);
          h[i] += c;
          for (size_t j = 0; j < n; ++j) wv[j] -= c * V[i][j];
        }
      }
      h[k + 1] = norm(wv);

      if (h[k + 1] > 0) {
        std::vector<double> vk = wv;
        for (double& vi : vk) vi /= h[k + 1];
        V.push_back(std::move(vk));
      }

      // Apply accumulated Givens rotations, then form a new one.
      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * h[i] + sn[i] * h[i + 1];
        h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
        h[i] = t;
      }
      const double delta = std::hypot(h[k], h[k + 1]);
      const double c = delta > 0 ? h[k] / delta : 1.0;
      const double s = delta > 0 ? h[k + 1] / delta : 0.0;
      cs.push_back(c);
      sn.push_back(s);
      h[k] = c * h[k] + s * h[k + 1];
      h[k + 1] = 0.0;
      g.push_back(-s * g[k]);
      g[k] = c * g[k];
      H.push_back(std::move(h));
      ++k;

      const double rel = std::abs(g[k]) / scale;
      rep.residual_history.push_back(rel);
      if (rel <= opt.tol) {
        cycle_converged = true;
        break;
      }
      if (V.size() == static_cast<size_t>(k)) break; // breakdown: exact solution reached
    }

    // Back-substitute y from the triangularized Hessenberg and update x.
    std::vector<double> y(k, 0.0);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= H[j][i] * y[j];
      y[i] = s / H[i][i];
    }
    for (int j = 0; j < k; ++j) {
      const std::vector<double>& dir = right_precond ? Z[j] : V[j];
      for (size_t i = 0; i < n; ++i) x[i] += y[j] * dir[i];
    }

    if (cycle_converged) {
      rep.converged = true;
      return {x, rep};
    }
    if (rep.iterations >= opt.max_iter) break;
    // restart from the true residual
    r = residual(x);
    const double rel = norm(r) / scale;
    if (rel <= opt.tol) {
      rep.converged = true;
      rep.residual_history.push_back(rel);
      return {x, rep};
    }
  }

  rep.converged = false;
  return {x, rep};
}

} // namespace gtdd
