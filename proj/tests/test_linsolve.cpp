#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gtdd/errors.hpp"
#include "gtdd/linsolve.hpp"

using namespace gtdd;

namespace {

// Dense Gaussian elimination with partial pivoting; the test-side oracle.
std::vector<double> dense_solve(std::vector<std::vector<double>> A, std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(A[i][k]) > std::abs(A[piv][k])) piv = i;
    std::swap(A[k], A[piv]);
    std::swap(b[k], b[piv]);
    for (int i = k + 1; i < n; ++i) {
      const double f = A[i][k] / A[k][k];
      for (int j = k; j < n; ++j) A[i][j] -= f * A[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= A[i][j] * x[j];
    x[i] = s / A[i][i];
  }
  return x;
}

} // namespace

TEST_CASE("LU: identity and diagonal") {
  SparseMatrix I(3, 3);
  for (int i = 0; i < 3; ++i) I.add(i, i, 1.0);
  I.finalize();
  LuFactorization f(I);
  std::vector<double> b{1, -2, 3};
  CHECK(f.solve(b) == b);

  SparseMatrix D(2, 2);
  D.add(0, 0, 2.0);
  D.add(1, 1, 4.0);
  D.finalize();
  LuFactorization fd(D);
  auto x = fd.solve({2, 8});
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(2.0));
}

TEST_CASE("LU matches the dense oracle on a random SPD system") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  const int n = 50;
  std::vector<std::vector<double>> M(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M[i][j] = u(rng);
  // A = M^T M + n I  (SPD, well conditioned)
  std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) A[i][j] += M[k][i] * M[k][j];
      if (i == j) A[i][j] += n;
    }
  SparseMatrix S(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) S.add(i, j, A[i][j]);
  S.finalize();
  std::vector<double> b(n);
  for (double& v : b) v = u(rng);
  LuFactorization f(S);
  auto x = f.solve(b);
  auto xe = dense_solve(A, b);
  double bn = 0, en = 0;
  for (int i = 0; i < n; ++i) {
    bn += xe[i] * xe[i];
    en += (x[i] - xe[i]) * (x[i] - xe[i]);
  }
  CHECK(std::sqrt(en) <= 1e-10 * std::sqrt(bn));
}

TEST_CASE("structurally singular matrix is reported") {
  SparseMatrix S(3, 3);
  S.add(0, 0, 1.0);
  S.add(1, 1, 1.0); // row/col 2 empty
  S.finalize();
  CHECK_THROWS_AS(LuFactorization{S}, SingularMatrix);
}

TEST_CASE("duplicate triplets are summed") {
  SparseMatrix S(2, 2);
  S.add(0, 0, 1.0);
  S.add(0, 0, 1.0);
  S.add(1, 1, 1.0);
  S.finalize();
  auto y = S.multiply(std::vector<double>{1.0, 1.0});
  CHECK(y[0] == 2.0);
  CHECK(y[1] == 1.0);
}

TEST_CASE("gmres: identity operator converges in one iteration") {
  LinearOp op = [](const std::vector<double>& v) { return v; };
  std::vector<double> b{1, 2, 3};
  auto [x, rep] = gmres(op, b, {});
  CHECK(rep.converged);
  CHECK(rep.iterations == 1);
  for (int i = 0; i < 3; ++i) CHECK(x[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("gmres: diagonal operator matches the direct solve") {
  LinearOp op = [](const std::vector<double>& v) {
    std::vector<double> y(v.size());
    for (size_t i = 0; i < v.size(); ++i) y[i] = (1.0 + static_cast<double>(i)) * v[i];
    return y;
  };
  std::vector<double> b(10, 1.0);
  GmresOptions o;
  o.tol = 1e-12;
  o.max_iter = 50;
  auto [x, rep] = gmres(op, b, {}, o);
  CHECK(rep.converged);
  for (int i = 0; i < 10; ++i) CHECK(x[i] == doctest::Approx(1.0 / (1 + i)).epsilon(1e-9));
}

TEST_CASE("gmres: zero right-hand side returns zero with no iterations") {
  LinearOp op = [](const std::vector<double>& v) { return v; };
  auto [x, rep] = gmres(op, std::vector<double>(4, 0.0), {});
  CHECK(rep.converged);
  CHECK(rep.iterations == 0);
  for (double v : x) CHECK(v == 0.0);
}

TEST_CASE("gmres converges within n iterations and history is nonincreasing") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  const int n = 12;
  std::vector<std::vector<double>> A(n, std::vector<double>(n));
  for (auto& row : A)
    for (double& v : row) v = u(rng);
  for (int i = 0; i < n; ++i) A[i][i] += 4;
  LinearOp op = [&](const std::vector<double>& v) {
    std::vector<double> y(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) y[i] += A[i][j] * v[j];
    return y;
  };
  std::vector<double> b(n);
  for (double& v : b) v = u(rng);
  GmresOptions o;
  o.tol = 1e-13;
  o.max_iter = 2 * n;
  auto [x, rep] = gmres(op, b, {}, o);
  CHECK(rep.converged);
  CHECK(rep.iterations <= n);
  for (size_t i = 1; i < rep.residual_history.size(); ++i)
    CHECK(rep.residual_history[i] <= rep.residual_history[i - 1] * (1 + 1e-12));

  // exact-inverse right preconditioner: one iteration
  LinearOp inv = [&](const std::vector<double>& v) {
    std::vector<std::vector<double>> Ac = A;
    std::vector<double> rhs = v;
    return dense_solve(Ac, rhs);
  };
  auto [x2, rep2] = gmres(op, b, {}, o, &inv);
  CHECK(rep2.converged);
  CHECK(rep2.iterations == 1);
}

TEST_CASE("gmres honors a weighted inner product") {
  LinearOp op = [](const std::vector<double>& v) {
    std::vector<double> y(v.size());
    for (size_t i = 0; i < v.size(); ++i) y[i] = (i % 2 ? 3.0 : 0.5) * v[i];
    return y;
  };
  std::vector<double> w{0.1, 2.0, 0.4, 1.5};
  GmresOptions o;
  o.tol = 1e-11;
  o.max_iter = 10;
  o.inner_weight = &w;
  std::vector<double> b{1, 1, 1, 1};
  auto [x, rep] = gmres(op, b, {}, o);
  CHECK(rep.converged);
  CHECK(x[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(x[1] == doctest::Approx(1.0 / 3).epsilon(1e-9));
}

TEST_CASE("gmres reports non-convergence without throwing") {
  LinearOp op = [](const std::vector<double>& v) {
    std::vector<double> y(v.size());
    for (size_t i = 0; i < v.size(); ++i) y[i] = (1.0 + 1000.0 * i) * v[i];
    return y;
  };
  std::vector<double> b(30, 1.0);
  GmresOptions o;
  o.tol = 1e-14;
  o.max_iter = 3;
  auto [x, rep] = gmres(op, b, {}, o);
  CHECK_FALSE(rep.converged);
  CHECK(rep.iterations == 3);
}
