#include "gtdd/interface.hpp"

#include <algorithm>
#include <cmath>

#include "gtdd/errors.hpp"

namespace gtdd {

namespace {

// Extracts the columns of one pair from a subdomain-layout series.
TimeSeries pair_columns(const SubdomainGeometry& g, int pair, const TimeSeries& sub_series) {
  int entry = -1;
  for (size_t q = 0; q < g.pairs.size(); ++q)
    if (g.pairs[q] == pair) entry = static_cast<int>(q);
  if (entry < 0) throw IndexError("subdomain does not touch the requested pair");
  const auto [b, e] = g.pair_span[entry];
  TimeSeries out(sub_series.grid(), e - b);
  for (int m = 0; m < sub_series.intervals(); ++m)
    for (int q = b; q < e; ++q) out.at(m, q - b) = sub_series.at(m, q);
  return out;
}

void scatter_pair_columns(const SubdomainGeometry& g, int pair, const TimeSeries& block,
                          TimeSeries& sub_series) {
  int entry = -1;
  for (size_t q = 0; q < g.pairs.size(); ++q)
    if (g.pairs[q] == pair) entry = static_cast<int>(q);
  if (entry < 0) throw IndexError("subdomain does not touch the requested pair");
  const auto [b, e] = g.pair_span[entry];
  for (int m = 0; m < sub_series.intervals(); ++m)
    for (int q = b; q < e; ++q) sub_series.at(m, q) = block.at(m, q - b);
}

// sigma_ij per edge of a pair, built from the adjacent elements' diffusion.
std::pair<std::vector<double>, std::vector<double>>
nn_weights(const MultiDomainProblem& P, int pair) {
  const InterfacePair& pr = P.decomp.pairs[pair];
  const auto& ci = P.subs[pr.i].coef;
  const auto& cj = P.subs[pr.j].coef;
  const auto& gi = P.subs[pr.i].geom;
  const auto& gj = P.subs[pr.j].geom;
  std::vector<double> sij(pr.edges.size()), sji(pr.edges.size());
  for (size_t q = 0; q < pr.edges.size(); ++q) {
    const double di = ci.d[gi.elem_g2l[pr.elem_in_i[q]]];
    const double dj = cj.d[gj.elem_g2l[pr.elem_in_j[q]]];
    double a = (di / (di + dj)) * (di / (di + dj));
    double b = (dj / (di + dj)) * (dj / (di + dj));
    if (P.normalized_weights) {
      const double s = a + b;
      a /= s;
      b /= s;
    }
    sij[q] = a;
    sji[q] = b;
  }
  return {std::move(sij), std::move(sji)};
}

} // namespace

const TimeGrid& MultiDomainProblem::master_grid(int pair) const {
  const InterfacePair& pr = decomp.pairs[pair];
  return master == MasterSide::Lower ? subs[pr.i].grid : subs[pr.j].grid;
}

MultiDomainProblem make_multidomain(std::shared_ptr<const Mesh> mesh, Decomposition decomp,
                                    const Coefficients& global_coef,
                                    const ExteriorValues& ext, ScalarFieldT source,
                                    const ScalarField& c0, std::vector<TimeGrid> grids) {
  if (static_cast<int>(grids.size()) != decomp.n_subdomains())
    throw GridMismatch("one time grid per subdomain required");
  for (size_t s = 1; s < grids.size(); ++s)
    if (!grids[s].same_horizon(grids[0]))
      throw GridMismatch("subdomain time grids must share the horizon");
  MultiDomainProblem P;
  P.mesh = std::move(mesh);
  P.decomp = std::move(decomp);
  for (int s = 0; s < P.decomp.n_subdomains(); ++s)
    P.subs.push_back(make_subproblem(P.mesh, &P.decomp, s, global_coef, ext, source, c0,
                                     std::move(grids[s])));
  P.alpha.assign(P.decomp.pairs.size(), {1.0, 1.0});
  return P;
}

InterfaceModel make_interface_model(const MultiDomainProblem& P, int pair) {
  const InterfacePair& pr = P.decomp.pairs[pair];
  const auto& gi = P.subs[pr.i].geom;
  const auto& gj = P.subs[pr.j].geom;
  InterfaceModel M;
  double len = 0, d1 = 0, d2 = 0, w1 = 0, w2 = 0, a1 = 0, a2 = 0, t1 = 0, t2 = 0;
  for (size_t q = 0; q < pr.edges.size(); ++q) {
    const double L = P.mesh->edges[pr.edges[q]].length;
    const int ki = gi.elem_g2l[pr.elem_in_i[q]];
    const int kj = gj.elem_g2l[pr.elem_in_j[q]];
    const int le_i = gi.edge_g2l[pr.edges[q]];
    const int le_j = gj.edge_g2l[pr.edges[q]];
    const int si = gi.edges[le_i].slot_a >= 0 && gi.edges[le_i].elem_a == ki
                       ? gi.edges[le_i].slot_a
                       : gi.edges[le_i].slot_b;
    const int sj = gj.edges[le_j].slot_a >= 0 && gj.edges[le_j].elem_a == kj
                       ? gj.edges[le_j].slot_a
                       : gj.edges[le_j].slot_b;
    len += L;
    d1 += L * P.subs[pr.i].coef.d[ki];
    d2 += L * P.subs[pr.j].coef.d[kj];
    w1 += L * P.subs[pr.i].coef.omega[ki];
    w2 += L * P.subs[pr.j].coef.omega[kj];
    // u . n with n oriented from i to j: outward for i, inward for j.
    a1 += L * P.subs[pr.i].coef.u_edge[ki][si];
    a2 -= L * P.subs[pr.j].coef.u_edge[kj][sj];
    // tangential component, from the perpendicular slots
    const auto& ui = P.subs[pr.i].coef.u_edge[ki];
    const auto& uj = P.subs[pr.j].coef.u_edge[kj];
    const bool vertical = P.mesh->edges[pr.edges[q]].vertical;
    t1 += L * 0.5 * (vertical ? (ui[kTop] - ui[kBottom]) : (ui[kRight] - ui[kLeft]));
    t2 += L * 0.5 * (vertical ? (uj[kTop] - uj[kBottom]) : (uj[kRight] - uj[kLeft]));
  }
  M.d1 = d1 / len;
  M.d2 = d2 / len;
  M.omega1 = w1 / len;
  M.omega2 = w2 / len;
  M.a1 = a1 / len;
  M.a2 = a2 / len;
  M.a_tan1 = t1 / len;
  M.a_tan2 = t2 / len;
  const double T = P.subs[pr.i].grid.horizon();
  double dtmin = T;
  for (int s : {pr.i, pr.j}) {
    const TimeGrid& g = P.subs[s].grid;
    for (int m = 0; m < g.intervals(); ++m) dtmin = std::min(dtmin, g.dt(m));
  }
  constexpr double pi = 3.14159265358979323846;
  M.freq_min = pi / T;
  M.freq_max = pi / dtmin;
  double emin = len;
  for (int e : pr.edges) emin = std::min(emin, P.mesh->edges[e].length);
  M.k_min = pi / len;
  M.k_max = pi / emin;
  return M;
}

// ---------------------------------------------------------------------------
// SchurSystem

SchurSystem::SchurSystem(MultiDomainProblem& P) : P_(&P) {
  offset_.resize(P.decomp.pairs.size());
  for (size_t p = 0; p < P.decomp.pairs.size(); ++p) {
    offset_[p] = size_;
    size_ += static_cast<int>(P.decomp.pairs[p].edges.size()) *
             P.master_grid(static_cast<int>(p)).intervals();
  }
}

TimeSeries SchurSystem::block(const std::vector<double>& vec, int pair) const {
  const TimeGrid& g = P_->master_grid(pair);
  const int ne = static_cast<int>(P_->decomp.pairs[pair].edges.size());
  TimeSeries s(g, ne);
  std::copy_n(vec.begin() + offset_[pair], static_cast<size_t>(ne) * g.intervals(),
              s.raw().begin());
  return s;
}

void SchurSystem::add_block(std::vector<double>& vec, int pair, const TimeSeries& s) const {
  const int n = static_cast<int>(s.raw().size());
  for (int k = 0; k < n; ++k) vec[offset_[pair] + k] += s.raw()[k];
}

std::vector<double> SchurSystem::gather_for_sub(int s, const std::vector<double>& vec) const {
  // Returns the subdomain-layout series (flattened) on the subdomain grid.
  const SubdomainProblem& sub = P_->subs[s];
  TimeSeries mine(sub.grid, sub.geom.n_iface());
  for (size_t e = 0; e < sub.geom.pairs.size(); ++e) {
    const int pair = sub.geom.pairs[e];
    TimeSeries b = block(vec, pair);
    TimeSeries proj = project(b, sub.grid);
    scatter_pair_columns(sub.geom, pair, proj, mine);
  }
  return mine.raw();
}

std::vector<double> SchurSystem::apply(const std::vector<double>& lambda) {
  std::vector<double> out(size_, 0.0);
  std::vector<TimeSeries> traces(P_->subs.size());
  for (size_t s = 0; s < P_->subs.size(); ++s) {
    const SubdomainProblem& sub = P_->subs[s];
    TimeSeries lam(sub.grid, sub.geom.n_iface());
    lam.raw() = gather_for_sub(static_cast<int>(s), lambda);
    InterfaceTrace tr{TraceKind::DirichletVal, std::move(lam)};
    MarchOptions opt;
    opt.with_data = false;
    auto [sol, flux] = solve_dirichlet(sub, tr, opt);
    traces[s] = std::move(flux.data);
  }
  for (size_t p = 0; p < P_->decomp.pairs.size(); ++p) {
    const InterfacePair& pr = P_->decomp.pairs[p];
    for (int s : {pr.i, pr.j}) {
      TimeSeries cols = pair_columns(P_->subs[s].geom, static_cast<int>(p), traces[s]);
      add_block(out, static_cast<int>(p), project(cols, P_->master_grid(static_cast<int>(p))));
    }
  }
  return out;
}

std::vector<double> SchurSystem::rhs() {
  std::vector<double> out(size_, 0.0);
  for (size_t s = 0; s < P_->subs.size(); ++s) {
    const SubdomainProblem& sub = P_->subs[s];
    InterfaceTrace tr{TraceKind::DirichletVal, TimeSeries(sub.grid, sub.geom.n_iface())};
    MarchOptions opt;
    auto [sol, flux] = solve_dirichlet(sub, tr, opt);
    for (size_t e = 0; e < sub.geom.pairs.size(); ++e) {
      const int pair = sub.geom.pairs[e];
      TimeSeries cols = pair_columns(sub.geom, pair, flux.data);
      for (double& v : cols.raw()) v = -v; // chi = +phi . n_i
      add_block(out, pair, project(cols, P_->master_grid(pair)));
    }
  }
  return out;
}

std::vector<double> SchurSystem::precondition(const std::vector<double>& r) {
  std::vector<double> out(size_, 0.0);
  std::vector<TimeSeries> traces(P_->subs.size());
  for (size_t s = 0; s < P_->subs.size(); ++s) {
    const SubdomainProblem& sub = P_->subs[s];
    TimeSeries psi(sub.grid, sub.geom.n_iface());
    psi.raw() = gather_for_sub(static_cast<int>(s), r);
    // N_i imposes -phi . n_i = psi, realizing the pseudo-inverse of S_i.
    for (double& v : psi.raw()) v = -v;
    InterfaceTrace tr{TraceKind::FluxVal, std::move(psi)};
    MarchOptions opt;
    opt.with_data = false;
    auto [sol, theta] = solve_neumann(sub, tr, opt);
    traces[s] = std::move(theta.data);
  }
  for (size_t p = 0; p < P_->decomp.pairs.size(); ++p) {
    const InterfacePair& pr = P_->decomp.pairs[p];
    auto [sij, sji] = nn_weights(*P_, static_cast<int>(p));
    for (int side = 0; side < 2; ++side) {
      const int s = side == 0 ? pr.i : pr.j;
      const auto& w = side == 0 ? sij : sji;
      TimeSeries cols = pair_columns(P_->subs[s].geom, static_cast<int>(p), traces[s]);
      for (int m = 0; m < cols.intervals(); ++m)
        for (int q = 0; q < cols.width(); ++q) cols.at(m, q) *= w[q];
      add_block(out, static_cast<int>(p), project(cols, P_->master_grid(static_cast<int>(p))));
    }
  }
  return out;
}

std::vector<double> SchurSystem::weights() const {
  std::vector<double> w(size_);
  for (size_t p = 0; p < P_->decomp.pairs.size(); ++p) {
    const InterfacePair& pr = P_->decomp.pairs[p];
    const TimeGrid& g = P_->master_grid(static_cast<int>(p));
    int k = offset_[p];
    for (int m = 0; m < g.intervals(); ++m)
      for (size_t q = 0; q < pr.edges.size(); ++q)
        w[k++] = g.dt(m) * P_->mesh->edges[pr.edges[q]].length;
  }
  return w;
}

std::vector<SpaceTimeSolution> SchurSystem::reconstruct(const std::vector<double>& lambda,
                                                        const MarchOptions& opts) {
  std::vector<SpaceTimeSolution> fields;
  fields.reserve(P_->subs.size());
  for (size_t s = 0; s < P_->subs.size(); ++s) {
    const SubdomainProblem& sub = P_->subs[s];
    TimeSeries lam(sub.grid, sub.geom.n_iface());
    lam.raw() = gather_for_sub(static_cast<int>(s), lambda);
    InterfaceTrace tr{TraceKind::DirichletVal, std::move(lam)};
    fields.push_back(solve_dirichlet(sub, tr, opts).first);
  }
  return fields;
}

SchurSystem::Result SchurSystem::solve(double tol, int max_iter, bool precondition_nn,
                                       const std::vector<double>* x0,
                                       const MarchOptions& final_opts) {
  std::vector<double> b = rhs();
  GmresOptions opt;
  opt.tol = tol;
  opt.max_iter = max_iter;
  std::vector<double> w = weights();
  opt.inner_weight = &w;
  LinearOp op = [this](const std::vector<double>& v) { return apply(v); };
  LinearOp prec = [this](const std::vector<double>& v) { return precondition(v); };
  auto [lam, rep] =
      gmres(op, b, x0 ? *x0 : std::vector<double>(size_, 0.0), opt,
            precondition_nn ? &prec : nullptr);
  rep.subdomain_solve_count = static_cast<long>(rep.iterations) * (precondition_nn ? 2 : 1);
  Result res;
  res.fields = reconstruct(lam, final_opts);
  res.lambda = std::move(lam);
  res.report = std::move(rep);
  return res;
}

// ---------------------------------------------------------------------------
// RobinSystem

RobinSystem::RobinSystem(MultiDomainProblem& P) : P_(&P) {
  offset_.resize(P.decomp.pairs.size());
  for (size_t p = 0; p < P.decomp.pairs.size(); ++p) {
    const InterfacePair& pr = P.decomp.pairs[p];
    const int ne = static_cast<int>(pr.edges.size());
    offset_[p].first = size_;
    size_ += ne * P.subs[pr.i].grid.intervals();
    offset_[p].second = size_;
    size_ += ne * P.subs[pr.j].grid.intervals();
    if (!(P.alpha[p].first > 0) || !(P.alpha[p].second > 0))
      throw InvalidRobinParameter("Robin parameters must be positive");
  }
}

std::vector<double> RobinSystem::gather_for_sub(int s, const std::vector<double>& vec) const {
  const SubdomainProblem& sub = P_->subs[s];
  TimeSeries mine(sub.grid, sub.geom.n_iface());
  for (size_t e = 0; e < sub.geom.pairs.size(); ++e) {
    const int pair = sub.geom.pairs[e];
    const InterfacePair& pr = P_->decomp.pairs[pair];
    const int ne = static_cast<int>(pr.edges.size());
    const int off = (pr.i == s) ? offset_[pair].first : offset_[pair].second;
    TimeSeries b(sub.grid, ne);
    std::copy_n(vec.begin() + off, static_cast<size_t>(ne) * sub.grid.intervals(),
                b.raw().begin());
    scatter_pair_columns(sub.geom, pair, b, mine);
  }
  return mine.raw();
}

RobinSystem::SweepOut RobinSystem::sweep(const std::vector<double>* zeta, bool with_data,
                                         std::vector<SpaceTimeSolution>* fields,
                                         const MarchOptions* opts) {
  SweepOut out;
  out.returns.resize(P_->subs.size());
  if (fields) fields->clear();
  for (size_t s = 0; s < P_->subs.size(); ++s) {
    const SubdomainProblem& sub = P_->subs[s];
    const int nif = sub.geom.n_iface();
    TimeSeries z(sub.grid, nif);
    if (zeta) z.raw() = gather_for_sub(static_cast<int>(s), *zeta);
    std::vector<double> a_own(nif), a_ret(nif);
    for (size_t e = 0; e < sub.geom.pairs.size(); ++e) {
      const int pair = sub.geom.pairs[e];
      const InterfacePair& pr = P_->decomp.pairs[pair];
      const auto [b, eend] = sub.geom.pair_span[e];
      const double own = (pr.i == static_cast<int>(s)) ? P_->alpha[pair].first
                                                       : P_->alpha[pair].second;
      const double ret = (pr.i == static_cast<int>(s)) ? P_->alpha[pair].second
                                                       : P_->alpha[pair].first;
      for (int q = b; q < eend; ++q) {
        a_own[q] = own;
        a_ret[q] = ret;
      }
    }
    MarchOptions mo = opts ? *opts : MarchOptions{};
    mo.with_data = with_data;
    InterfaceTrace tr{TraceKind::RobinVal, std::move(z)};
    auto [sol, retr] = solve_robin(sub, tr, a_own, a_ret, mo);
    out.returns[s] = std::move(retr.data);
    if (fields) fields->push_back(std::move(sol));
  }
  return out;
}

std::vector<double> RobinSystem::apply(const std::vector<double>& zeta) {
  SweepOut sw = sweep(&zeta, /*with_data=*/false, nullptr, nullptr);
  std::vector<double> out = zeta;
  for (size_t p = 0; p < P_->decomp.pairs.size(); ++p) {
    const InterfacePair& pr = P_->decomp.pairs[p];
    // block (i,j) -= Pi_i<-j(return of j); block (j,i) -= Pi_j<-i(return of i)
    for (int side = 0; side < 2; ++side) {
      const int rcv = side == 0 ? pr.i : pr.j;
      const int snd = side == 0 ? pr.j : pr.i;
      TimeSeries cols = pair_columns(P_->subs[snd].geom, static_cast<int>(p), sw.returns[snd]);
      TimeSeries proj = project(cols, P_->subs[rcv].grid);
      const int off = side == 0 ? offset_[p].first : offset_[p].second;
      for (size_t k = 0; k < proj.raw().size(); ++k) out[off + k] -= proj.raw()[k];
    }
  }
  return out;
}

std::vector<double> RobinSystem::rhs() {
  SweepOut sw = sweep(nullptr, /*with_data=*/true, nullptr, nullptr);
  std::vector<double> out(size_, 0.0);
  for (size_t p = 0; p < P_->decomp.pairs.size(); ++p) {
    const InterfacePair& pr = P_->decomp.pairs[p];
    for (int side = 0; side < 2; ++side) {
      const int rcv = side == 0 ? pr.i : pr.j;
      const int snd = side == 0 ? pr.j : pr.i;
      TimeSeries cols = pair_columns(P_->subs[snd].geom, static_cast<int>(p), sw.returns[snd]);
      TimeSeries proj = project(cols, P_->subs[rcv].grid);
      const int off = side == 0 ? offset_[p].first : offset_[p].second;
      for (size_t k = 0; k < proj.raw().size(); ++k) out[off + k] += proj.raw()[k];
    }
  }
  return out;
}

std::vector<double> RobinSystem::weights() const {
  std::vector<double> w(size_);
  for (size_t p = 0; p < P_->decomp.pairs.size(); ++p) {
    const InterfacePair& pr = P_->decomp.pairs[p];
    for (int side = 0; side < 2; ++side) {
      const TimeGrid& g = P_->subs[side == 0 ? pr.i : pr.j].grid;
      int k = side == 0 ? offset_[p].first : offset_[p].second;
      for (int m = 0; m < g.intervals(); ++m)
        for (size_t q = 0; q < pr.edges.size(); ++q)
          w[k++] = g.dt(m) * P_->mesh->edges[pr.edges[q]].length;
    }
  }
  return w;
}

double RobinSystem::B_of(const SweepOut& sw) const {
  // B = sum over directed pairs of the squared |E| dt norm of the
  // unprojected return traces.
  double B = 0.0;
  for (size_t p = 0; p < P_->decomp.pairs.size(); ++p) {
    const InterfacePair& pr = P_->decomp.pairs[p];
    for (int snd : {pr.j, pr.i}) {
      TimeSeries cols = pair_columns(P_->subs[snd].geom, static_cast<int>(p), sw.returns[snd]);
      const TimeGrid& g = P_->subs[snd].grid;
      for (int m = 0; m < cols.intervals(); ++m)
        for (int q = 0; q < cols.width(); ++q)
          B += g.dt(m) * P_->mesh->edges[pr.edges[static_cast<size_t>(q)]].length *
               cols.at(m, q) * cols.at(m, q);
    }
  }
  return B;
}

std::vector<SpaceTimeSolution> RobinSystem::reconstruct(const std::vector<double>& zeta,
                                                        const MarchOptions& opts) {
  std::vector<SpaceTimeSolution> fields;
  sweep(&zeta, /*with_data=*/true, &fields, &opts);
  return fields;
}

RobinSystem::Result RobinSystem::solve(double tol, int max_iter,
                                       const std::vector<double>* x0,
                                       const MarchOptions& final_opts) {
  std::vector<double> b = rhs();
  GmresOptions opt;
  opt.tol = tol;
  opt.max_iter = max_iter;
  std::vector<double> w = weights();
  opt.inner_weight = &w;
  LinearOp op = [this](const std::vector<double>& v) { return apply(v); };
  auto [zeta, rep] = gmres(op, b, x0 ? *x0 : std::vector<double>(size_, 0.0), opt);
  rep.subdomain_solve_count = rep.iterations;
  Result res;
  res.fields = reconstruct(zeta, final_opts);
  res.zeta = std::move(zeta);
  res.report = std::move(rep);
  return res;
}

RobinSystem::JacobiResult RobinSystem::jacobi(const std::vector<double>& initial, double tol,
                                              int max_iter, int fixed_iterations,
                                              bool reconstruct_fields,
                                              const MarchOptions& final_opts) {
  JacobiResult res;
  std::vector<double> zeta = initial.empty() ? std::vector<double>(size_, 0.0) : initial;
  const std::vector<double> w = weights();
  auto wnorm = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (size_t k = 0; k < v.size(); ++k) s += w[k] * v[k] * v[k];
    return std::sqrt(s);
  };

  // Reference scale: ||chi|| when the data is nonzero, else the first update.
  double ref = 0.0;
  {
    SweepOut sw0 = sweep(nullptr, true, nullptr, nullptr);
    std::vector<double> chi(size_, 0.0);
    for (size_t p = 0; p < P_->decomp.pairs.size(); ++p) {
      const InterfacePair& pr = P_->decomp.pairs[p];
      for (int side = 0; side < 2; ++side) {
        const int rcv = side == 0 ? pr.i : pr.j;
        const int snd = side == 0 ? pr.j : pr.i;
        TimeSeries cols =
            pair_columns(P_->subs[snd].geom, static_cast<int>(p), sw0.returns[snd]);
        TimeSeries proj = project(cols, P_->subs[rcv].grid);
        const int off = side == 0 ? offset_[p].first : offset_[p].second;
        for (size_t k = 0; k < proj.raw().size(); ++k) chi[off + k] += proj.raw()[k];
      }
    }
    ref = wnorm(chi);
  }
  if (ref == 0.0 && std::all_of(zeta.begin(), zeta.end(), [](double v) { return v == 0.0; })) {
    // Zero data and zero guess: already at the fixed point.
    res.converged = true;
    res.zeta = std::move(zeta);
    if (reconstruct_fields) res.fields = reconstruct(res.zeta, final_opts);
    return res;
  }

  const int iters = fixed_iterations > 0 ? fixed_iterations : max_iter;
  for (int k = 0; k < iters; ++k) {
    SweepOut sw = sweep(&zeta, /*with_data=*/true, nullptr, nullptr);
    res.B_history.push_back(B_of(sw));
    std::vector<double> next(size_, 0.0);
    for (size_t p = 0; p < P_->decomp.pairs.size(); ++p) {
      const InterfacePair& pr = P_->decomp.pairs[p];
      for (int side = 0; side < 2; ++side) {
        const int rcv = side == 0 ? pr.i : pr.j;
        const int snd = side == 0 ? pr.j : pr.i;
        TimeSeries cols = pair_columns(P_->subs[snd].geom, static_cast<int>(p), sw.returns[snd]);
        TimeSeries proj = project(cols, P_->subs[rcv].grid);
        const int off = side == 0 ? offset_[p].first : offset_[p].second;
        for (size_t q = 0; q < proj.raw().size(); ++q) next[off + q] += proj.raw()[q];
      }
    }
    std::vector<double> diff(size_);
    for (int q = 0; q < size_; ++q) diff[q] = next[q] - zeta[q];
    const double up = wnorm(diff);
    if (ref == 0.0) ref = up;
    const double rel = ref > 0 ? up / ref : 0.0;
    res.residual_history.push_back(rel);
    zeta = std::move(next);
    res.iterations = k + 1;
    if (fixed_iterations == 0 && rel <= tol) {
      res.converged = true;
      break;
    }
  }
  if (fixed_iterations > 0) res.converged = true;
  if (reconstruct_fields) res.fields = reconstruct(zeta, final_opts);
  res.zeta = std::move(zeta);
  return res;
}

// ---------------------------------------------------------------------------

std::vector<double> global_concentration(const MultiDomainProblem& P,
                                         const std::vector<SpaceTimeSolution>& fields) {
  std::vector<double> c(P.mesh->n_elements(), 0.0);
  for (size_t s = 0; s < P.subs.size(); ++s) {
    const auto& elems = P.subs[s].geom.elems;
    for (size_t k = 0; k < elems.size(); ++k) c[elems[k]] = fields[s].last.c[k];
  }
  return c;
}

WindowRun run_time_windows(MultiDomainProblem& P, Method method, int windows, double tol,
                           int max_iter, const std::vector<double>& snapshot_times) {
  if (windows < 1) throw SolverError("need at least one time window");
  WindowRun run;
  const double Tw = P.subs.empty() ? 0.0 : P.subs[0].grid.horizon();

  double mass0 = 0.0;
  for (auto& sub : P.subs)
    for (int k = 0; k < sub.geom.n_elems(); ++k)
      mass0 += sub.geom.mesh->elements[sub.geom.elems[k]].area() * sub.coef.omega[k] *
               sub.c0[k];
  run.mass_at_bounds.push_back(mass0);

  std::vector<double> seed; // interface initial guess carried across windows
  for (int wdx = 0; wdx < windows; ++wdx) {
    for (auto& sub : P.subs) sub.time_offset = wdx * Tw;
    MarchOptions fo;
    fo.snapshot_times = snapshot_times;

    std::vector<SpaceTimeSolution> fields;
    KrylovReport rep;
    if (method == Method::GtpSchur || method == Method::GtpSchurNN) {
      SchurSystem S(P);
      auto r = S.solve(tol, max_iter, method == Method::GtpSchurNN,
                       seed.empty() ? nullptr : &seed, fo);
      fields = std::move(r.fields);
      rep = std::move(r.report);
      seed = std::move(r.lambda);
    } else if (method == Method::GtoSchwarzGmres) {
      RobinSystem R(P);
      auto r = R.solve(tol, max_iter, seed.empty() ? nullptr : &seed, fo);
      fields = std::move(r.fields);
      rep = std::move(r.report);
      seed = std::move(r.zeta);
    } else if (method == Method::OswrJacobi) {
      RobinSystem R(P);
      auto r = R.jacobi(seed, tol, max_iter, 0, true, fo);
      fields = std::move(r.fields);
      rep.iterations = r.iterations;
      rep.converged = r.converged;
      rep.residual_history = std::move(r.residual_history);
      rep.subdomain_solve_count = r.iterations;
      seed = std::move(r.zeta);
    } else {
      throw SolverError("run_time_windows drives decomposed methods only");
    }
    run.converged_all = run.converged_all && rep.converged;
    run.reports.push_back(std::move(rep));

    double mass = 0.0;
    for (size_t s = 0; s < P.subs.size(); ++s) mass += fields[s].mass_history.back();
    run.mass_at_bounds.push_back(mass);

    for (size_t s = 0; s < P.subs.size(); ++s)
      for (auto& [m, f] : fields[s].snapshots) {
        const double t = P.subs[s].time_offset + P.subs[s].grid.t_end(m);
        auto it = std::find_if(run.snapshots.begin(), run.snapshots.end(),
                               [&](const auto& sn) { return std::abs(sn.first - t) < 1e-9 * std::max(1.0, t); });
        if (it == run.snapshots.end()) {
          run.snapshots.emplace_back(t, std::vector<double>(P.mesh->n_elements(), 0.0));
          it = std::prev(run.snapshots.end());
        }
        const auto& elems = P.subs[s].geom.elems;
        for (size_t k = 0; k < elems.size(); ++k) it->second[elems[k]] = f.c[k];
      }

    for (size_t s = 0; s < P.subs.size(); ++s) P.subs[s].c0 = fields[s].last.c;
    if (wdx == windows - 1) {
      run.final_c = global_concentration(P, fields);
      run.last_window_fields = std::move(fields);
    }
  }
  std::sort(run.snapshots.begin(), run.snapshots.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return run;
}

} // namespace gtdd
