#pragma once

#include <array>

#include "gtdd/interface.hpp"

namespace gtdd {

// --- Analytical test problem on the unit square -----------------------------
// c(x,y,t) = exp(-4t) sin(pi x) sin(pi y), omega = 1, u = (1,1), d = 1.

double test1_exact(double x, double y, double t);
std::array<double, 2> test1_exact_flux(double x, double y, double t);
double test1_source(double x, double y, double t);

/// Two-subdomain split of the unit square at x = 0.5 with the analytical
/// data; n is 1/h, steps1/steps2 the per-subdomain interval counts.
MultiDomainProblem make_test1(int n, double T, int steps1, int steps2);
SubdomainProblem make_test1_monodomain(int n, double T, int steps);

// --- Discontinuous-coefficient problem --------------------------------------

struct Test2Data {
  double d1, d2;
  std::array<double, 2> u1, u2;
};
Test2Data test2_data(char variant); // 'a' diffusion, 'b' mixed, 'c' advection dominance

double test2_source(double x, double y, double t);
double test2_initial(double x, double y);

/// Same two-subdomain split; error_equation drops f and c0 (iteration
/// studies run on the error equation with a nonzero initial guess).
MultiDomainProblem make_test2(char variant, int n, double T, int steps1, int steps2,
                              bool error_equation);

// --- Nuclear-waste storage prototype ----------------------------------------

/// Zone-based geometry approximating the storage layout with nested
/// axis-aligned rectangles; coordinates are best-effort config data, the
/// physical zone table is exact.
struct Test3Setup {
  std::shared_ptr<const Mesh> mesh;
  std::vector<Box> subdomain_boxes;
  std::vector<double> conductivity; // per element, m/year
  std::vector<double> omega;        // per element
  std::vector<double> d_eff;        // per element, omega * d_m
  std::vector<int> zone_of;         // per element, index into zone_names
  std::vector<std::string> zone_names;
  BoundarySpec transport_bc; // Dirichlet top/bottom, Neumann left/right
  BoundarySpec flow_bc;      // same tags; heads 10 (top) / 9.998 (bottom)
  double head_top = 10.0, head_bottom = 9.998;
};

Test3Setup make_test3(int nx = 171, int ny = 158);

/// Darcy pre-solve plus the decomposed transport problem over one time
/// window of length T_window with steps3 intervals in the diffusive
/// subdomain and steps_other elsewhere.
MultiDomainProblem make_test3_transport(const Test3Setup& setup, double T_window,
                                        int steps3, int steps_other);

/// Initial concentration: 1 in the waste zones, 0 elsewhere.
ScalarField test3_initial(const Test3Setup& setup);

} // namespace gtdd
