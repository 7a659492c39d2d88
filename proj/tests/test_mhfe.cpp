#include <doctest.h>

#include <cmath>
#include <random>

#include "gtdd/errors.hpp"
#include "gtdd/mhfe.hpp"

using namespace gtdd;

TEST_CASE("RT0 mass matrix on the unit square") {
  Element K{0, 1, 0, 1, {0, 1, 2, 3}};
  auto A = local_mass_matrix(K, 1.0);
  CHECK(A[kLeft][kLeft] == doctest::Approx(1.0 / 3));
  CHECK(A[kRight][kRight] == doctest::Approx(1.0 / 3));
  CHECK(A[kLeft][kRight] == doctest::Approx(-1.0 / 6));
  CHECK(A[kBottom][kBottom] == doctest::Approx(1.0 / 3));
  CHECK(A[kBottom][kTop] == doctest::Approx(-1.0 / 6));
  CHECK(A[kLeft][kBottom] == 0.0);
  CHECK(A[kRight][kTop] == 0.0);

  auto A2 = local_mass_matrix(K, 2.0);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) CHECK(A2[a][b] == doctest::Approx(0.5 * A[a][b]));
}

TEST_CASE("RT0 mass matrix scales with the aspect ratio") {
  // Exact integrals: x-block a/(3b), -a/(6b); y-block b/(3a), -b/(6a).
  Element K{0, 2, 0, 0.5, {0, 1, 2, 3}};
  auto A = local_mass_matrix(K, 1.0);
  CHECK(A[kLeft][kLeft] == doctest::Approx(2.0 / (3 * 0.5)));
  CHECK(A[kLeft][kRight] == doctest::Approx(-2.0 / (6 * 0.5)));
  CHECK(A[kBottom][kBottom] == doctest::Approx(0.5 / (3 * 2.0)));
  CHECK(A[kBottom][kTop] == doctest::Approx(-0.5 / (6 * 2.0)));
}

TEST_CASE("RT0 mass matrix is symmetric positive definite") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.05, 4.0);
  for (int trial = 0; trial < 50; ++trial) {
    Element K{0, u(rng), 0, u(rng), {0, 1, 2, 3}};
    const double d = u(rng);
    auto A = local_mass_matrix(K, d);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) CHECK(A[a][b] == A[b][a]);
    std::uniform_real_distribution<double> z(-1, 1);
    for (int rep = 0; rep < 5; ++rep) {
      std::array<double, 4> v{z(rng), z(rng), z(rng), z(rng)};
      double q = 0;
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) q += v[a] * A[a][b] * v[b];
      double n = v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3];
      if (n > 1e-12) CHECK(q > 0);
    }
  }
  CHECK_THROWS_AS(local_mass_matrix(Element{0, 0, 0, 1, {0, 1, 2, 3}}, 1.0),
                  DegenerateElement);
  CHECK_THROWS_AS(local_mass_matrix(Element{0, 1, 0, 1, {0, 1, 2, 3}}, 0.0),
                  DegenerateElement);
}

TEST_CASE("upwind values") {
  CHECK(upwind_value(2, 5, 1, UpwindMode::FullUpwind) == 2);
  CHECK(upwind_value(2, 5, -1, UpwindMode::FullUpwind) == 8);
  CHECK(upwind_value(2, 5, -1, UpwindMode::CenteredTheta) == 5);
  CHECK(upwind_value(2, 5, 1, UpwindMode::CenteredTheta) == 5);
}

TEST_CASE("upwind values satisfy |U - c| <= C |theta - c|") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int t = 0; t < 500; ++t) {
    const double c = u(rng), th = u(rng), vel = u(rng);
    CHECK(std::abs(upwind_value(c, th, vel, UpwindMode::FullUpwind) - c) <=
          2.0 * std::abs(th - c) + 1e-14);
    CHECK(std::abs(upwind_value(c, th, vel, UpwindMode::CenteredTheta) - c) <=
          1.0 * std::abs(th - c) + 1e-14);
  }
}

TEST_CASE("velocity projection of a constant field") {
  Mesh m = Mesh::uniform(1, 1, 0, 1, 0, 1, {});
  std::vector<int> elems{0};
  std::vector<std::array<double, 4>> ue;
  project_velocity(m, elems, [](double, double) { return std::array<double, 2>{1, 1}; }, ue);
  CHECK(ue[0][kLeft] == doctest::Approx(-1.0));
  CHECK(ue[0][kRight] == doctest::Approx(1.0));
  CHECK(ue[0][kBottom] == doctest::Approx(-1.0));
  CHECK(ue[0][kTop] == doctest::Approx(1.0));
  project_velocity(m, elems, [](double, double) { return std::array<double, 2>{0, 0}; }, ue);
  for (int s = 0; s < 4; ++s) CHECK(ue[0][s] == 0.0);
}

TEST_CASE("velocity projection is antisymmetric across interior edges") {
  Mesh m = Mesh::uniform(3, 3, 0, 1, 0, 1, {});
  std::vector<int> elems(m.n_elements());
  for (int k = 0; k < m.n_elements(); ++k) elems[k] = k;
  std::vector<std::array<double, 4>> ue;
  project_velocity(m, elems,
                   [](double x, double y) {
                     return std::array<double, 2>{std::sin(3 * x) + y, std::cos(2 * y) - x};
                   },
                   ue);
  for (int e = 0; e < m.n_edges(); ++e) {
    const Edge& E = m.edges[e];
    if (E.boundary()) continue;
    int sa = -1, sb = -1;
    for (int s = 0; s < 4; ++s) {
      if (m.elements[E.elem_neg].edge[s] == e) sa = s;
      if (m.elements[E.elem_pos].edge[s] == e) sb = s;
    }
    CHECK(ue[E.elem_neg][sa] == doctest::Approx(-ue[E.elem_pos][sb]).epsilon(1e-13));
  }
}

namespace {
struct OneCell {
  Mesh mesh = Mesh::uniform(1, 1, 0, 1, 0, 1, {});
  SubdomainGeometry g = SubdomainGeometry::whole(mesh);
  Coefficients coef;
  OneCell() {
    coef.omega = {1.0};
    coef.d = {1.0};
    coef.u_edge = {{0, 0, 0, 0}};
  }
};
} // namespace

TEST_CASE("single-element step solves the hand-eliminated system") {
  // u=0, d=1, dt=1, omega=1, int f = 1, theta = 0 on all four edges:
  // flux rows give phi = A^{-1} 1 c with row sums 6c, so mass row reads
  // c + 24 c = 1.
  OneCell oc;
  StepSystem sys(oc.g, oc.coef, 1.0, InterfaceBC::None);
  std::vector<double> f{1.0}, c0{0.0};
  FieldState s = sys.step(f, c0, {}, {});
  CHECK(s.c[0] == doctest::Approx(1.0 / 25).epsilon(1e-12));
  for (int sl = 0; sl < 4; ++sl) CHECK(s.phi[0][sl] == doctest::Approx(6.0 / 25).epsilon(1e-12));
  sys.validate(s, f, c0);
}

TEST_CASE("zero data gives the zero solution") {
  OneCell oc;
  StepSystem sys(oc.g, oc.coef, 0.25, InterfaceBC::None);
  FieldState s = sys.step({}, {}, {}, {});
  CHECK(s.c[0] == 0.0);
  for (int sl = 0; sl < 4; ++sl) CHECK(s.phi[0][sl] == 0.0);
}

TEST_CASE("pure diffusion is independent of the upwind mode") {
  Mesh m = Mesh::uniform(4, 3, 0, 1, 0, 1, {});
  SubdomainGeometry g = SubdomainGeometry::whole(m);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  Coefficients c1;
  c1.omega.assign(g.n_elems(), 1.0);
  c1.d.assign(g.n_elems(), 0.7);
  c1.u_edge.assign(g.n_elems(), {0, 0, 0, 0});
  Coefficients c2 = c1;
  c1.mode = UpwindMode::CenteredTheta;
  c2.mode = UpwindMode::FullUpwind;
  std::vector<double> f(g.n_elems()), c0(g.n_elems());
  for (auto& v : f) v = u(rng);
  for (auto& v : c0) v = u(rng);
  StepSystem s1(g, c1, 0.1, InterfaceBC::None), s2(g, c2, 0.1, InterfaceBC::None);
  FieldState a = s1.step(f, c0, {}, {}), b = s2.step(f, c0, {}, {});
  for (int k = 0; k < g.n_elems(); ++k) CHECK(a.c[k] == doctest::Approx(b.c[k]).epsilon(1e-12));
}

TEST_CASE("full residual of a random advective step is at solver accuracy") {
  Mesh m = Mesh::uniform(5, 4, 0, 1.3, 0, 0.9, {});
  SubdomainGeometry g = SubdomainGeometry::whole(m);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1, 1);
  Coefficients coef;
  coef.mode = UpwindMode::FullUpwind;
  coef.omega.assign(g.n_elems(), 0.0);
  coef.d.assign(g.n_elems(), 0.0);
  std::vector<int> all(g.n_elems());
  for (int k = 0; k < g.n_elems(); ++k) all[k] = k;
  for (int k = 0; k < g.n_elems(); ++k) {
    coef.omega[k] = 0.5 + 0.5 * std::abs(u(rng));
    coef.d[k] = 0.2 + std::abs(u(rng));
  }
  project_velocity(m, all,
                   [](double x, double y) {
                     return std::array<double, 2>{1.5 - y, 0.5 + x};
                   },
                   coef.u_edge);
  const double dt = 0.05;
  StepSystem sys(g, coef, dt, InterfaceBC::None);
  std::vector<double> f(g.n_elems()), c0(g.n_elems());
  for (auto& v : f) v = u(rng);
  for (auto& v : c0) v = u(rng);
  FieldState s = sys.step(f, c0, {}, {});
  sys.validate(s, f, c0);

  // independent residual recomputation, straight from the discrete equations
  for (int k = 0; k < g.n_elems(); ++k) {
    const Element& K = m.elements[g.elems[k]];
    const auto A = local_mass_matrix(K, coef.d[k]);
    for (int sl = 0; sl < 4; ++sl) {
      double r = -s.c[k] + s.theta[g.elem_edges[k][sl]];
      for (int sp = 0; sp < 4; ++sp) {
        r += A[sl][sp] * s.phi[k][sp];
        r -= A[sl][sp] * g.edges[g.elem_edges[k][sp]].length * coef.u_edge[k][sp] *
             upwind_value(s.c[k], s.theta[g.elem_edges[k][sp]], coef.u_edge[k][sp], coef.mode);
      }
      CHECK(std::abs(r) <= 1e-10);
    }
  }
}

TEST_CASE("constant concentration is reproduced exactly under constant advection") {
  // c == cbar with matching boundary data and f = 0 is an exact solution;
  // the advective and diffusive flux contributions must cancel in every row.
  Mesh m = Mesh::uniform(3, 2, 0, 1.2, 0, 0.8, {});
  SubdomainGeometry g = SubdomainGeometry::whole(m);
  Coefficients coef;
  coef.omega.assign(g.n_elems(), 1.0);
  coef.d.assign(g.n_elems(), 0.5);
  std::vector<int> all(g.n_elems());
  for (int k = 0; k < g.n_elems(); ++k) all[k] = k;
  project_velocity(m, all, [](double, double) { return std::array<double, 2>{0.7, -0.3}; },
                   coef.u_edge);
  for (UpwindMode mode : {UpwindMode::CenteredTheta, UpwindMode::FullUpwind}) {
    coef.mode = mode;
    StepSystem sys(g, coef, 0.2, InterfaceBC::None);
    const double cbar = 1.7;
    std::vector<double> c0(g.n_elems(), cbar), ext(g.n_edges(), cbar);
    FieldState s = sys.step({}, c0, {}, ext);
    for (int k = 0; k < g.n_elems(); ++k) {
      CHECK(s.c[k] == doctest::Approx(cbar).epsilon(1e-12));
      for (int sl = 0; sl < 4; ++sl) {
        const LocalEdge& L = g.edges[g.elem_edges[k][sl]];
        CHECK(s.phi[k][sl] ==
              doctest::Approx(L.length * coef.u_edge[k][sl] * cbar).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("steady state is a fixed point of the unsteady step") {
  Mesh m = Mesh::uniform(4, 4, 0, 1, 0, 1, {});
  SubdomainGeometry g = SubdomainGeometry::whole(m);
  Coefficients coef;
  coef.omega.assign(g.n_elems(), 1.0);
  coef.d.assign(g.n_elems(), 1.0);
  coef.u_edge.assign(g.n_elems(), {0, 0, 0, 0});
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> f(g.n_elems());
  for (auto& v : f) v = u(rng);
  StepSystem steady(g, coef, 1.0, InterfaceBC::None, {}, true);
  FieldState st = steady.step(f, {}, {}, {});
  StepSystem unsteady(g, coef, 0.01, InterfaceBC::None);
  FieldState next = unsteady.step(f, st.c, {}, {});
  for (int k = 0; k < g.n_elems(); ++k)
    CHECK(next.c[k] == doctest::Approx(st.c[k]).epsilon(1e-9));
}

TEST_CASE("Robin parameters are validated") {
  Mesh m = Mesh::uniform(2, 2, 0, 1, 0, 1, {});
  Decomposition d = Decomposition::build(m, {{0, 0.5, 0, 1}, {0.5, 1, 0, 1}});
  SubdomainGeometry g = SubdomainGeometry::restrict_to(m, d, 0);
  Coefficients coef;
  coef.omega.assign(g.n_elems(), 1.0);
  coef.d.assign(g.n_elems(), 1.0);
  coef.u_edge.assign(g.n_elems(), {0, 0, 0, 0});
  std::vector<double> bad{1.0, -2.0};
  CHECK_THROWS_AS(StepSystem(g, coef, 0.1, InterfaceBC::Robin, bad), InvalidRobinParameter);
  std::vector<double> good{1.0, 2.0};
  CHECK_NOTHROW(StepSystem(g, coef, 0.1, InterfaceBC::Robin, good));
}
