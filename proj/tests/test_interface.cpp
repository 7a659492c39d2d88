#include <doctest.h>

#include <cmath>
#include <random>

#include "gtdd/cases.hpp"
#include "gtdd/interface.hpp"
#include "gtdd/runner.hpp"

using namespace gtdd;

namespace {

double rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double e2 = 0, n2 = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    e2 += (a[i] - b[i]) * (a[i] - b[i]);
    n2 += b[i] * b[i];
  }
  return std::sqrt(e2 / std::max(n2, 1e-300));
}

} // namespace

TEST_CASE("Schur operator: zero maps to zero, homogeneity, dense-assembly oracle") {
  MultiDomainProblem P = make_test1(4, 0.1, 2, 2);
  SchurSystem S(P);
  const int n = S.size();
  CHECK(n == 4 * 2); // 4 interface edges x 2 master intervals

  auto zero = S.apply(std::vector<double>(n, 0.0));
  for (double v : zero) CHECK(v == 0.0);

  std::vector<double> lam = random_vector(n, 99);
  auto y1 = S.apply(lam);
  std::vector<double> lam2 = lam;
  for (double& v : lam2) v *= -3.0;
  auto y2 = S.apply(lam2);
  for (int i = 0; i < n; ++i) CHECK(y2[i] == doctest::Approx(-3.0 * y1[i]).epsilon(1e-9).scale(1.0));

  // dense matrix assembled column-by-column from unit vectors
  std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
  for (int j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    auto col = S.apply(e);
    for (int i = 0; i < n; ++i) dense[i][j] = col[i];
  }
  std::vector<double> want(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) want[i] += dense[i][j] * lam[j];
  for (int i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(want[i]).epsilon(1e-9).scale(1.0));
}

TEST_CASE("Schur rhs vanishes for zero data") {
  MultiDomainProblem P = make_test2('a', 4, 1.0, 2, 2, /*error_equation=*/true);
  SchurSystem S(P);
  for (double v : S.rhs()) CHECK(v == 0.0);
  for (double v : S.precondition(std::vector<double>(S.size(), 0.0))) CHECK(v == 0.0);
}

TEST_CASE("Robin operator: dense oracle on nonconforming grids") {
  MultiDomainProblem P = make_test1(4, 0.1, 2, 3);
  for (auto& a : P.alpha) a = {2.0, 3.0};
  RobinSystem R(P);
  const int n = R.size();
  CHECK(n == 4 * 2 + 4 * 3);
  auto zero = R.apply(std::vector<double>(n, 0.0));
  for (double v : zero) CHECK(v == 0.0);

  std::vector<double> zeta = random_vector(n, 5);
  auto y = R.apply(zeta);
  std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
  for (int j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    auto col = R.apply(e);
    for (int i = 0; i < n; ++i) dense[i][j] = col[i];
  }
  std::vector<double> want(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) want[i] += dense[i][j] * zeta[j];
  for (int i = 0; i < n; ++i) CHECK(y[i] == doctest::Approx(want[i]).epsilon(1e-9).scale(1.0));
}

TEST_CASE("preconditioning reduces the Schur iteration count") {
  MultiDomainProblem P = make_test1(16, 0.1, 8, 6);
  SchurSystem S(P);
  auto plain = S.solve(1e-6, 200, false);
  auto prec = S.solve(1e-6, 200, true);
  CHECK(plain.report.converged);
  CHECK(prec.report.converged);
  CHECK(prec.report.iterations < plain.report.iterations);
}

TEST_CASE("conforming grids: all three methods match the monodomain solve") {
  const int n = 8, steps = 8;
  const double T = 0.1;
  SubdomainProblem mono = make_test1_monodomain(n, T, steps);
  SpaceTimeSolution ref = solve_monodomain(mono);

  for (Method m : {Method::GtpSchur, Method::GtpSchurNN, Method::GtoSchwarzGmres}) {
    MultiDomainProblem P = make_test1(n, T, steps, steps);
    for (auto& a : P.alpha) a = optimize_parameters(make_interface_model(P, 0));
    WindowRun run = run_time_windows(P, m, 1, 1e-10, 400);
    CHECK(run.converged_all);
    CHECK(rel_diff(run.final_c, ref.last.c) <= 1e-8);
  }
}

TEST_CASE("Schur and Robin converge to the same fields on conforming grids") {
  const int n = 8, steps = 6;
  MultiDomainProblem P1 = make_test1(n, 0.1, steps, steps);
  SchurSystem S(P1);
  auto rs = S.solve(1e-10, 300, true);
  MultiDomainProblem P2 = make_test1(n, 0.1, steps, steps);
  for (auto& a : P2.alpha) a = {4.0, 4.0};
  RobinSystem R(P2);
  auto rr = R.solve(1e-10, 300);
  CHECK(rs.report.converged);
  CHECK(rr.report.converged);
  CHECK(rel_diff(global_concentration(P1, rs.fields), global_concentration(P2, rr.fields)) <=
        1e-8);
}

TEST_CASE("OSWR: zero data and zero guess converge at iteration zero") {
  MultiDomainProblem P = make_test2('a', 4, 1.0, 2, 2, true);
  RobinSystem R(P);
  auto res = R.jacobi({}, 1e-6, 50);
  CHECK(res.converged);
  CHECK(res.iterations == 0);
}

TEST_CASE("OSWR with equal parameters: B^k is nonincreasing and matches GMRES") {
  MultiDomainProblem P = make_test2('b', 12, 1.0, 8, 6, true);
  for (auto& a : P.alpha) a = {1.0, 1.0};
  RobinSystem R(P);
  std::vector<double> g0 = random_vector(R.size(), 42);
  auto res = R.jacobi(g0, 1e-9, 400, 0, true);
  CHECK(res.converged);
  for (size_t k = 1; k < res.B_history.size(); ++k)
    CHECK(res.B_history[k] <= res.B_history[k - 1] * (1 + 1e-10));
  // the error equation's fixed point is zero
  for (double v : global_concentration(P, res.fields)) CHECK(std::abs(v) <= 1e-7);
}

TEST_CASE("two sequential windows reproduce the single long window") {
  const int n = 8;
  MultiDomainProblem Pw = make_test1(n, 0.05, 4, 3);
  WindowRun two = run_time_windows(Pw, Method::GtpSchurNN, 2, 1e-12, 200);
  MultiDomainProblem Pl = make_test1(n, 0.1, 8, 6);
  WindowRun one = run_time_windows(Pl, Method::GtpSchurNN, 1, 1e-12, 200);
  CHECK(two.converged_all);
  CHECK(one.converged_all);
  CHECK(rel_diff(two.final_c, one.final_c) <= 1e-8);
  CHECK(two.mass_at_bounds.size() == 3);
}

TEST_CASE("interface model extracts side data along the i->j normal") {
  MultiDomainProblem P = make_test2('c', 8, 1.0, 4, 3, true);
  InterfaceModel M = make_interface_model(P, 0);
  CHECK(M.d1 == doctest::Approx(0.02));
  CHECK(M.d2 == doctest::Approx(0.002));
  CHECK(M.a1 == doctest::Approx(0.5)); // u . x-normal from both sides
  CHECK(M.a2 == doctest::Approx(0.5));
  CHECK(M.omega1 == doctest::Approx(1.0));
  CHECK(M.freq_min == doctest::Approx(M_PI / 1.0));
  CHECK(M.freq_max == doctest::Approx(M_PI / (1.0 / 4)));
}
