#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "gtdd/geometry.hpp"
#include "gtdd/linsolve.hpp"

namespace gtdd {

enum class UpwindMode { CenteredTheta, FullUpwind };

/// Per-element data of the transport operator on one subdomain (or the
/// whole mesh): porosity, isotropic diffusion and the RT0-projected
/// normal velocity u_KE per local edge slot (outward).
struct Coefficients {
  std::vector<double> omega;
  std::vector<double> d;
  std::vector<std::array<double, 4>> u_edge;
  UpwindMode mode = UpwindMode::CenteredTheta;
};

/// Elemental RT0 mass matrix int_K (D^-1 w_E') . w_E for an isotropic
/// D = d I on a rectangle; slots ordered L,R,B,T.
std::array<std::array<double, 4>, 4> local_mass_matrix(const Element& K, double d);

/// Upwind value U_KE(c_K, theta_E): the multiplier itself, or the
/// flow-direction pick c_K / 2 theta_E - c_K.
double upwind_value(double c_K, double theta_E, double u_KE, UpwindMode mode);

/// Fills u_edge from an analytic velocity field by 2-point Gauss
/// quadrature of u . n_K over each edge (exact for affine u).
void project_velocity(const Mesh& mesh, std::span<const int> elems,
                      const std::function<std::array<double, 2>(double, double)>& u,
                      std::vector<std::array<double, 4>>& u_edge);

enum class EdgeClass { Interior, ExtDirichlet, ExtNeumann, Interface };

struct LocalEdge {
  int gid = -1;
  double length = 0, mx = 0, my = 0;
  EdgeClass cls = EdgeClass::Interior;
  int elem_a = -1, slot_a = -1; // first incident local element
  int elem_b = -1, slot_b = -1; // second one (Interior only)
  int pair = -1, pair_pos = -1; // decomposition pair id / index within it
};

/// Restriction of the mesh to one subdomain: local element/edge indexing,
/// edge classification and the canonical interface-edge layout (ordered by
/// pair id, then by the pair's global edge order).
struct SubdomainGeometry {
  const Mesh* mesh = nullptr;
  int index = -1;
  std::vector<int> elems;
  std::vector<int> elem_g2l;
  std::vector<LocalEdge> edges;
  std::vector<int> edge_g2l;
  std::vector<std::array<int, 4>> elem_edges;
  std::vector<int> iface_edges; // local edge ids, pair-major order
  std::vector<int> pairs;       // pair ids touching this subdomain, ascending
  std::vector<std::pair<int, int>> pair_span; // [begin,end) into iface_edges per entry of `pairs`

  int n_elems() const { return static_cast<int>(elems.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }
  int n_iface() const { return static_cast<int>(iface_edges.size()); }

  static SubdomainGeometry whole(const Mesh& mesh);
  static SubdomainGeometry whole(const Mesh& mesh, const BoundarySpec& bc);
  static SubdomainGeometry restrict_to(const Mesh& mesh, const Decomposition& d, int i);
  static SubdomainGeometry restrict_to(const Mesh& mesh, const Decomposition& d, int i,
                                       const BoundarySpec& bc);
};

enum class InterfaceBC { None, Dirichlet, Neumann, Robin };

struct FieldState {
  std::vector<double> c;
  std::vector<std::array<double, 4>> phi; // outward integrated flux per (elem, slot)
  std::vector<double> theta;
};

/// One backward-Euler step of the upwind mixed-hybrid system as a sparse
/// linear solve in (c, phi, theta). The matrix depends only on (geometry,
/// coefficients, dt, interface condition, Robin parameters), so one
/// factorization serves every step and outer iteration.
class StepSystem {
public:
  StepSystem(const SubdomainGeometry& g, const Coefficients& coef, double dt,
             InterfaceBC ibc, std::span<const double> robin_alpha = {},
             bool steady = false);

  /// Solves one step. f_int: int_K f per element; c_prev: previous
  /// concentrations; iface: per interface edge (pointwise trace data whose
  /// meaning follows the interface condition); ext_bc: per local edge,
  /// read only at exterior boundary rows.
  FieldState step(std::span<const double> f_int, std::span<const double> c_prev,
                  std::span<const double> iface, std::span<const double> ext_bc) const;

  /// Discrete mass balance and interior-flux antisymmetry check
  /// (1e-10 of the dominant term); throws SolverError on violation.
  void validate(const FieldState& s, std::span<const double> f_int,
                std::span<const double> c_prev) const;

  const SubdomainGeometry& geom() const { return *g_; }
  double dt() const { return dt_; }
  InterfaceBC interface_bc() const { return ibc_; }
  int n_unknowns() const { return n_; }

  int idx_c(int k) const { return k; }
  int idx_phi(int k, int slot) const { return ne_ + 4 * k + slot; }
  int idx_theta(int e) const { return 5 * ne_ + e; }

private:
  const SubdomainGeometry* g_;
  const Coefficients* coef_;
  double dt_;
  InterfaceBC ibc_;
  bool steady_;
  int ne_, n_;
  std::vector<double> alpha_; // per interface edge (Robin)
  std::unique_ptr<LuFactorization> lu_;
};

} // namespace gtdd
