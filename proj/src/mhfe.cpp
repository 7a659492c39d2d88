#include "gtdd/mhfe.hpp"

#include <algorithm>
#include <cmath>

#include "gtdd/errors.hpp"

namespace gtdd {

std::array<std::array<double, 4>, 4> local_mass_matrix(const Element& K, double d) {
  const double a = K.width(), b = K.height();
  if (!(a > 0) || !(b > 0)) throw DegenerateElement("element with nonpositive extent");
  if (!(d > 0)) throw DegenerateElement("diffusion coefficient must be positive");
  std::array<std::array<double, 4>, 4> A{};
  const double axx = a / (3.0 * b * d), axy = -a / (6.0 * b * d);
  const double ayy = b / (3.0 * a * d), ayx = -b / (6.0 * a * d);
  A[kLeft][kLeft] = A[kRight][kRight] = axx;
  A[kLeft][kRight] = A[kRight][kLeft] = axy;
  A[kBottom][kBottom] = A[kTop][kTop] = ayy;
  A[kBottom][kTop] = A[kTop][kBottom] = ayx;
  return A;
}

double upwind_value(double c_K, double theta_E, double u_KE, UpwindMode mode) {
  if (mode == UpwindMode::CenteredTheta) return theta_E;
  return u_KE >= 0 ? c_K : 2.0 * theta_E - c_K;
}

void project_velocity(const Mesh& mesh, std::span<const int> elems,
                      const std::function<std::array<double, 2>(double, double)>& u,
                      std::vector<std::array<double, 4>>& u_edge) {
  u_edge.assign(elems.size(), {});
  const double gp = 0.5 / std::sqrt(3.0); // 2-point Gauss offsets on (-1/2, 1/2)
  for (size_t k = 0; k < elems.size(); ++k) {
    const Element& K = mesh.elements[elems[k]];
    for (int s = 0; s < 4; ++s) {
      const Edge& E = mesh.edges[K.edge[s]];
      double un = 0.0;
      for (double t : {-gp, gp}) {
        double x = E.mx, y = E.my;
        if (E.vertical)
          y += t * E.length;
        else
          x += t * E.length;
        auto v = u(x, y);
        un += 0.5 * (E.vertical ? v[0] : v[1]);
      }
      u_edge[k][s] = kOutwardSign[s] * un;
    }
  }
}

namespace {

SubdomainGeometry build_geometry(const Mesh& mesh, const Decomposition* d, int sub,
                                 const BoundarySpec& bc) {
  SubdomainGeometry g;
  g.mesh = &mesh;
  g.index = sub;
  if (d) {
    g.elems = d->elems_of[sub];
  } else {
    g.elems.resize(mesh.n_elements());
    for (int k = 0; k < mesh.n_elements(); ++k) g.elems[k] = k;
  }
  g.elem_g2l.assign(mesh.n_elements(), -1);
  for (size_t k = 0; k < g.elems.size(); ++k) g.elem_g2l[g.elems[k]] = static_cast<int>(k);

  // Collect incident edges (ascending gid since elements and slots scan all).
  g.edge_g2l.assign(mesh.n_edges(), -1);
  std::vector<int> gids;
  for (int ge = 0; ge < mesh.n_edges(); ++ge) {
    const Edge& E = mesh.edges[ge];
    const bool in_a = E.elem_neg >= 0 && g.elem_g2l[E.elem_neg] >= 0;
    const bool in_b = E.elem_pos >= 0 && g.elem_g2l[E.elem_pos] >= 0;
    if (in_a || in_b) {
      g.edge_g2l[ge] = static_cast<int>(gids.size());
      gids.push_back(ge);
    }
  }

  g.edges.resize(gids.size());
  for (size_t le = 0; le < gids.size(); ++le) {
    const int ge = gids[le];
    const Edge& E = mesh.edges[ge];
    LocalEdge& L = g.edges[le];
    L.gid = ge;
    L.length = E.length;
    L.mx = E.mx;
    L.my = E.my;
    const int la = E.elem_neg >= 0 ? g.elem_g2l[E.elem_neg] : -1;
    const int lb = E.elem_pos >= 0 ? g.elem_g2l[E.elem_pos] : -1;
    if (la >= 0 && lb >= 0) {
      L.cls = EdgeClass::Interior;
      L.elem_a = la;
      L.elem_b = lb;
    } else {
      L.elem_a = la >= 0 ? la : lb;
      if (E.boundary()) {
        ExteriorBC tag;
        if (E.vertical)
          tag = (E.elem_neg < 0) ? bc.left : bc.right;
        else
          tag = (E.elem_neg < 0) ? bc.bottom : bc.top;
        L.cls = tag == ExteriorBC::Dirichlet ? EdgeClass::ExtDirichlet : EdgeClass::ExtNeumann;
      } else {
        L.cls = EdgeClass::Interface;
        L.pair = d ? d->pair_index(sub, d->subdomain_of[la >= 0 ? E.elem_pos : E.elem_neg])
                   : -1;
      }
    }
  }

  // Slots within incident elements.
  g.elem_edges.resize(g.elems.size());
  for (size_t k = 0; k < g.elems.size(); ++k) {
    const Element& K = mesh.elements[g.elems[k]];
    for (int s = 0; s < 4; ++s) {
      const int le = g.edge_g2l[K.edge[s]];
      g.elem_edges[k][s] = le;
      LocalEdge& L = g.edges[le];
      if (L.elem_a == static_cast<int>(k) && L.slot_a < 0)
        L.slot_a = s;
      else if (L.elem_b == static_cast<int>(k))
        L.slot_b = s;
    }
  }

  // Canonical interface layout: by pair id, then the pair's edge order.
  if (d) {
    for (int p = 0; p < static_cast<int>(d->pairs.size()); ++p) {
      const InterfacePair& pr = d->pairs[p];
      if (pr.i != sub && pr.j != sub) continue;
      const int begin = static_cast<int>(g.iface_edges.size());
      for (size_t q = 0; q < pr.edges.size(); ++q) {
        const int le = g.edge_g2l[pr.edges[q]];
        g.edges[le].pair_pos = static_cast<int>(q);
        g.iface_edges.push_back(le);
      }
      g.pairs.push_back(p);
      g.pair_span.emplace_back(begin, static_cast<int>(g.iface_edges.size()));
    }
  }
  return g;
}

} // namespace

SubdomainGeometry SubdomainGeometry::whole(const Mesh& mesh) {
  return build_geometry(mesh, nullptr, -1, mesh.boundary_spec);
}
SubdomainGeometry SubdomainGeometry::whole(const Mesh& mesh, const BoundarySpec& bc) {
  return build_geometry(mesh, nullptr, -1, bc);
}
SubdomainGeometry SubdomainGeometry::restrict_to(const Mesh& mesh, const Decomposition& d,
                                                 int i) {
  return build_geometry(mesh, &d, i, mesh.boundary_spec);
}
SubdomainGeometry SubdomainGeometry::restrict_to(const Mesh& mesh, const Decomposition& d,
                                                 int i, const BoundarySpec& bc) {
  return build_geometry(mesh, &d, i, bc);
}

StepSystem::StepSystem(const SubdomainGeometry& g, const Coefficients& coef, double dt,
                       InterfaceBC ibc, std::span<const double> robin_alpha, bool steady)
    : g_(&g), coef_(&coef), dt_(dt), ibc_(ibc), steady_(steady), ne_(g.n_elems()),
      n_(5 * g.n_elems() + g.n_edges()) {
  if (!steady && !(dt > 0)) throw SolverError("time step must be positive");
  if (ibc == InterfaceBC::Robin) {
    if (static_cast<int>(robin_alpha.size()) != g.n_iface())
      throw InvalidRobinParameter("one Robin parameter per interface edge required");
    for (double a : robin_alpha)
      if (!(a > 0)) throw InvalidRobinParameter("Robin parameters must be positive");
    alpha_.assign(robin_alpha.begin(), robin_alpha.end());
  } else if (ibc != InterfaceBC::None && g.n_iface() == 0) {
    throw IndexError("interface condition requested on a subdomain without interface edges");
  }

  SparseMatrix A(n_, n_);
  const UpwindMode mode = coef.mode;
  for (int k = 0; k < ne_; ++k) {
    const Element& K = g.mesh->elements[g.elems[k]];
    // Mass conservation row.
    if (!steady_) A.add(idx_c(k), idx_c(k), K.area() * coef.omega[k] / dt_);
    for (int s = 0; s < 4; ++s) A.add(idx_c(k), idx_phi(k, s), 1.0);

    // Flux rows. The advective sum carries the RT0 coefficient of the
    // velocity interpolant, i.e. the integrated edge flux |E'| u_KE'.
    const auto Ak = local_mass_matrix(K, coef.d[k]);
    for (int s = 0; s < 4; ++s) {
      const int row = idx_phi(k, s);
      double c_coef = -1.0;
      for (int sp = 0; sp < 4; ++sp) {
        A.add(row, idx_phi(k, sp), Ak[s][sp]);
        const double au =
            Ak[s][sp] * coef.u_edge[k][sp] * g.edges[g.elem_edges[k][sp]].length;
        if (au != 0.0) {
          const int th = idx_theta(g.elem_edges[k][sp]);
          if (mode == UpwindMode::CenteredTheta) {
            A.add(row, th, -au);
          } else if (coef.u_edge[k][sp] >= 0) {
            c_coef -= au;
          } else {
            A.add(row, th, -2.0 * au);
            c_coef += au;
          }
        }
      }
      A.add(row, idx_c(k), c_coef);
      A.add(row, idx_theta(g.elem_edges[k][s]), 1.0);
    }
  }

  for (int e = 0; e < g.n_edges(); ++e) {
    const LocalEdge& L = g.edges[e];
    const int row = idx_theta(e);
    switch (L.cls) {
    case EdgeClass::Interior:
      A.add(row, idx_phi(L.elem_a, L.slot_a), 1.0);
      A.add(row, idx_phi(L.elem_b, L.slot_b), 1.0);
      break;
    case EdgeClass::ExtDirichlet:
      A.add(row, idx_theta(e), 1.0);
      break;
    case EdgeClass::ExtNeumann:
      A.add(row, idx_phi(L.elem_a, L.slot_a), 1.0);
      break;
    case EdgeClass::Interface:
      switch (ibc_) {
      case InterfaceBC::Dirichlet:
        A.add(row, idx_theta(e), 1.0);
        break;
      case InterfaceBC::Neumann:
        A.add(row, idx_phi(L.elem_a, L.slot_a), 1.0);
        break;
      case InterfaceBC::Robin: {
        // -phi.n_i + alpha theta = zeta, scaled by |E|.
        int pos = -1;
        for (size_t q = 0; q < g.iface_edges.size(); ++q)
          if (g.iface_edges[q] == e) { pos = static_cast<int>(q); break; }
        A.add(row, idx_phi(L.elem_a, L.slot_a), -1.0);
        A.add(row, idx_theta(e), alpha_[pos] * L.length);
        break;
      }
      case InterfaceBC::None:
        throw IndexError("interface edge in a problem assembled without interface condition");
      }
      break;
    }
  }

  A.finalize();
  lu_ = std::make_unique<LuFactorization>(A);
}

FieldState StepSystem::step(std::span<const double> f_int, std::span<const double> c_prev,
                            std::span<const double> iface,
                            std::span<const double> ext_bc) const {
  const SubdomainGeometry& g = *g_;
  std::vector<double> rhs(n_, 0.0);
  for (int k = 0; k < ne_; ++k) {
    double v = f_int.empty() ? 0.0 : f_int[k];
    if (!steady_ && !c_prev.empty()) {
      const Element& K = g.mesh->elements[g.elems[k]];
      v += K.area() * coef_->omega[k] / dt_ * c_prev[k];
    }
    rhs[idx_c(k)] = v;
  }
  for (int q = 0; q < g.n_iface(); ++q) {
    const LocalEdge& L = g.edges[g.iface_edges[q]];
    const double v = iface.empty() ? 0.0 : iface[q];
    const int row = idx_theta(g.iface_edges[q]);
    rhs[row] = (ibc_ == InterfaceBC::Dirichlet) ? v : L.length * v;
  }
  if (!ext_bc.empty()) {
    for (int e = 0; e < g.n_edges(); ++e) {
      const LocalEdge& L = g.edges[e];
      if (L.cls == EdgeClass::ExtDirichlet)
        rhs[idx_theta(e)] = ext_bc[e];
      else if (L.cls == EdgeClass::ExtNeumann)
        rhs[idx_theta(e)] = L.length * ext_bc[e];
    }
  }

  std::vector<double> x = lu_->solve(rhs);
  FieldState s;
  s.c.assign(x.begin(), x.begin() + ne_);
  s.phi.resize(ne_);
  for (int k = 0; k < ne_; ++k)
    for (int sl = 0; sl < 4; ++sl) s.phi[k][sl] = x[idx_phi(k, sl)];
  s.theta.assign(x.begin() + 5 * ne_, x.end());
  return s;
}

void StepSystem::validate(const FieldState& s, std::span<const double> f_int,
                          std::span<const double> c_prev) const {
  const SubdomainGeometry& g = *g_;
  // Residuals are checked against the step's dominant balance term; the
  // direct solve's backward error is relative to the global solution scale.
  auto rate_of = [&](int k) {
    if (steady_) return 0.0;
    const Element& K = g.mesh->elements[g.elems[k]];
    return K.area() * coef_->omega[k] / dt_ * (s.c[k] - (c_prev.empty() ? 0.0 : c_prev[k]));
  };
  double scale = 1e-300;
  for (int k = 0; k < ne_; ++k) {
    scale = std::max(scale, std::abs(rate_of(k)));
    for (int sl = 0; sl < 4; ++sl) scale = std::max(scale, std::abs(s.phi[k][sl]));
    if (!f_int.empty()) scale = std::max(scale, std::abs(f_int[k]));
  }
  for (int k = 0; k < ne_; ++k) {
    double flux = 0.0;
    for (int sl = 0; sl < 4; ++sl) flux += s.phi[k][sl];
    const double src = f_int.empty() ? 0.0 : f_int[k];
    if (std::abs(rate_of(k) + flux - src) > 1e-10 * scale)
      throw SolverError("local mass balance violated");
  }
  for (const LocalEdge& L : g.edges)
    if (L.cls == EdgeClass::Interior)
      if (std::abs(s.phi[L.elem_a][L.slot_a] + s.phi[L.elem_b][L.slot_b]) > 1e-10 * scale)
        throw SolverError("interior flux antisymmetry violated");
}

} // namespace gtdd
