#include "gtdd/propagate.hpp"

#include <algorithm>
#include <cmath>

#include "gtdd/errors.hpp"

namespace gtdd {

const StepSystem& FactorCache::get(const SubdomainGeometry& g, const Coefficients& c,
                                   double dt, InterfaceBC ibc, std::span<const double> alpha,
                                   bool steady) {
  std::vector<double> akey(alpha.begin(), alpha.end());
  const long long qdt = steady ? -1 : static_cast<long long>(std::llround(dt / quantum_));
  auto key = std::make_tuple(qdt, static_cast<int>(ibc), std::move(akey));
  std::scoped_lock lock(mutex_);
  auto it = store_.find(key);
  if (it == store_.end()) {
    auto sys = std::make_unique<StepSystem>(g, c, steady ? 1.0 : dt, ibc, alpha, steady);
    it = store_.emplace(std::move(key), std::move(sys)).first;
  }
  return *it->second;
}

void FactorCache::clear() {
  std::scoped_lock lock(mutex_);
  store_.clear();
}

const StepSystem& SubdomainProblem::system(double dt, InterfaceBC ibc,
                                           std::span<const double> alpha) const {
  return cache->get(geom, coef, dt, ibc, alpha, false);
}

SubdomainProblem make_subproblem(std::shared_ptr<const Mesh> mesh, const Decomposition* decomp,
                                 int index, const Coefficients& global_coef,
                                 const ExteriorValues& ext, ScalarFieldT source,
                                 const ScalarField& c0, TimeGrid grid) {
  SubdomainProblem sub;
  sub.index = index;
  sub.mesh = std::move(mesh);
  sub.geom = decomp ? SubdomainGeometry::restrict_to(*sub.mesh, *decomp, index)
                    : SubdomainGeometry::whole(*sub.mesh);
  const auto& elems = sub.geom.elems;
  sub.coef.mode = global_coef.mode;
  sub.coef.omega.resize(elems.size());
  sub.coef.d.resize(elems.size());
  sub.coef.u_edge.resize(elems.size());
  sub.c0.resize(elems.size());
  for (size_t k = 0; k < elems.size(); ++k) {
    sub.coef.omega[k] = global_coef.omega[elems[k]];
    sub.coef.d[k] = global_coef.d[elems[k]];
    sub.coef.u_edge[k] = global_coef.u_edge[elems[k]];
    const Element& K = sub.mesh->elements[elems[k]];
    sub.c0[k] = c0 ? c0(K.xc(), K.yc()) : 0.0;
  }
  sub.ext = ext;
  sub.source = std::move(source);
  sub.grid = std::move(grid);
  sub.cache = std::make_unique<FactorCache>(sub.grid.horizon());
  return sub;
}

SpaceTimeSolution march(const SubdomainProblem& sub, InterfaceBC ibc,
                        const TimeSeries* iface_data, std::span<const double> alpha,
                        const MarchOptions& opt) {
  const SubdomainGeometry& g = sub.geom;
  const int M = sub.grid.intervals();
  const int nif = g.n_iface();
  if (iface_data) {
    if (!iface_data->grid().conforming_with(sub.grid))
      throw GridMismatch("interface data must live on the subdomain's own grid");
    if (iface_data->width() != nif)
      throw GridMismatch("interface data width does not match the interface edge count");
  }

  SpaceTimeSolution out;
  out.grid = sub.grid;
  out.minus_flux_trace = TimeSeries(sub.grid, nif);
  out.theta_trace = TimeSeries(sub.grid, nif);
  out.mass_history.resize(M);
  if (opt.store_fields) out.fields.reserve(M);

  std::vector<double> c_prev =
      opt.with_data ? sub.c0 : std::vector<double>(g.n_elems(), 0.0);
  std::vector<double> f_int(g.n_elems(), 0.0);
  std::vector<double> ext_bc;
  const bool has_ext = opt.with_data && (sub.ext.dirichlet || sub.ext.neumann);
  if (has_ext) ext_bc.assign(g.n_edges(), 0.0);

  for (int m = 0; m < M; ++m) {
    const double dt = sub.grid.dt(m);
    const double tm = sub.time_offset + sub.grid.t_end(m);
    const StepSystem& sys = sub.cache->get(g, sub.coef, dt, ibc, alpha, false);

    if (opt.with_data && sub.source) {
      for (int k = 0; k < g.n_elems(); ++k) {
        const Element& K = g.mesh->elements[g.elems[k]];
        f_int[k] = K.area() * sub.source(K.xc(), K.yc(), tm);
      }
    }
    if (has_ext) {
      for (int e = 0; e < g.n_edges(); ++e) {
        const LocalEdge& L = g.edges[e];
        if (L.cls == EdgeClass::ExtDirichlet && sub.ext.dirichlet)
          ext_bc[e] = sub.ext.dirichlet(L.mx, L.my, tm);
        else if (L.cls == EdgeClass::ExtNeumann && sub.ext.neumann)
          ext_bc[e] = sub.ext.neumann(L.mx, L.my, tm);
      }
    }

    FieldState s = sys.step(f_int, c_prev, iface_data ? iface_data->row(m) : std::span<const double>{},
                            ext_bc);
    if (opt.validate) sys.validate(s, f_int, c_prev);

    for (int q = 0; q < nif; ++q) {
      const LocalEdge& L = g.edges[g.iface_edges[q]];
      out.minus_flux_trace.at(m, q) = -s.phi[L.elem_a][L.slot_a] / L.length;
      out.theta_trace.at(m, q) = s.theta[g.iface_edges[q]];
    }
    double mass = 0.0;
    for (int k = 0; k < g.n_elems(); ++k)
      mass += g.mesh->elements[g.elems[k]].area() * sub.coef.omega[k] * s.c[k];
    out.mass_history[m] = mass;

    c_prev = s.c;
    for (double tau : opt.snapshot_times) {
      if (std::abs(tm - tau) <= 1e-9 * std::max(1.0, std::abs(tau))) {
        out.snapshots.emplace(m, s);
        break;
      }
    }
    if (opt.store_fields) out.fields.push_back(std::move(s));
    if (m == M - 1) out.last = opt.store_fields ? out.fields.back() : std::move(s);
  }
  return out;
}

std::pair<SpaceTimeSolution, InterfaceTrace>
solve_dirichlet(const SubdomainProblem& sub, const InterfaceTrace& lambda,
                const MarchOptions& opt) {
  SpaceTimeSolution sol = march(sub, InterfaceBC::Dirichlet, &lambda.data, {}, opt);
  InterfaceTrace tr{TraceKind::FluxVal, sol.minus_flux_trace};
  return {std::move(sol), std::move(tr)};
}

std::pair<SpaceTimeSolution, InterfaceTrace>
solve_neumann(const SubdomainProblem& sub, const InterfaceTrace& flux,
              const MarchOptions& opt) {
  SpaceTimeSolution sol = march(sub, InterfaceBC::Neumann, &flux.data, {}, opt);
  InterfaceTrace tr{TraceKind::MultiplierVal, sol.theta_trace};
  return {std::move(sol), std::move(tr)};
}

std::pair<SpaceTimeSolution, InterfaceTrace>
solve_robin(const SubdomainProblem& sub, const InterfaceTrace& zeta,
            std::span<const double> alpha_own, std::span<const double> alpha_return,
            const MarchOptions& opt) {
  SpaceTimeSolution sol = march(sub, InterfaceBC::Robin, &zeta.data, alpha_own, opt);
  const int nif = sub.geom.n_iface();
  InterfaceTrace ret{TraceKind::RobinVal, TimeSeries(sub.grid, nif)};
  for (int m = 0; m < sub.grid.intervals(); ++m)
    for (int q = 0; q < nif; ++q)
      ret.data.at(m, q) =
          -sol.minus_flux_trace.at(m, q) + alpha_return[q] * sol.theta_trace.at(m, q);

  if (opt.validate) {
    // Robin identity: -phi . n_i + alpha theta = zeta per edge and interval,
    // scaled by the dominant term (the two sides may nearly cancel).
    double scale = 1e-300;
    for (double v : zeta.data.raw()) scale = std::max(scale, std::abs(v));
    for (int m = 0; m < sub.grid.intervals(); ++m)
      for (int q = 0; q < nif; ++q) {
        scale = std::max({scale, std::abs(sol.minus_flux_trace.at(m, q)),
                          std::abs(alpha_own[q] * sol.theta_trace.at(m, q))});
      }
    for (int m = 0; m < sub.grid.intervals(); ++m)
      for (int q = 0; q < nif; ++q) {
        const double got =
            sol.minus_flux_trace.at(m, q) + alpha_own[q] * sol.theta_trace.at(m, q);
        if (std::abs(got - zeta.data.at(m, q)) > 1e-10 * scale)
          throw SolverError("Robin interface identity violated");
      }
  }
  return {std::move(sol), std::move(ret)};
}

SpaceTimeSolution solve_monodomain(const SubdomainProblem& whole, const MarchOptions& opt) {
  return march(whole, InterfaceBC::None, nullptr, {}, opt);
}

DarcyResult solve_darcy(const Mesh& mesh, std::span<const double> conductivity,
                        const BoundarySpec& bc, const ScalarFieldT& head_bc) {
  for (double k : conductivity)
    if (!(k > 0)) throw SolverError("hydraulic conductivity must be positive");

  SubdomainGeometry g = SubdomainGeometry::whole(mesh, bc);
  bool any_dirichlet = false;
  for (const LocalEdge& L : g.edges)
    if (L.cls == EdgeClass::ExtDirichlet) any_dirichlet = true;
  if (!any_dirichlet)
    throw SingularMatrix("steady flow with all-Neumann boundary leaves the head undetermined");
  Coefficients coef;
  coef.omega.assign(g.n_elems(), 1.0);
  coef.d.assign(conductivity.begin(), conductivity.end());
  coef.u_edge.assign(g.n_elems(), {});
  StepSystem sys(g, coef, 1.0, InterfaceBC::None, {}, /*steady=*/true);

  std::vector<double> ext(g.n_edges(), 0.0);
  for (int e = 0; e < g.n_edges(); ++e) {
    const LocalEdge& L = g.edges[e];
    if (L.cls == EdgeClass::ExtDirichlet && head_bc) ext[e] = head_bc(L.mx, L.my, 0.0);
  }
  FieldState s = sys.step({}, {}, {}, ext);

  DarcyResult r;
  r.head = std::move(s.c);
  r.u_edge.resize(g.n_elems());
  for (int k = 0; k < g.n_elems(); ++k) {
    double div = 0.0;
    for (int sl = 0; sl < 4; ++sl) {
      const LocalEdge& L = g.edges[g.elem_edges[k][sl]];
      r.u_edge[k][sl] = s.phi[k][sl] / L.length;
      div += s.phi[k][sl];
    }
    r.max_abs_divergence = std::max(r.max_abs_divergence, std::abs(div));
  }
  return r;
}

} // namespace gtdd
