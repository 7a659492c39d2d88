#include "gtdd/runner.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "gtdd/errors.hpp"

namespace gtdd {

GlobalField assemble_global(const MultiDomainProblem& P,
                            const std::vector<SpaceTimeSolution>& fields) {
  GlobalField g;
  g.c.assign(P.mesh->n_elements(), 0.0);
  g.phi.assign(P.mesh->n_elements(), {});
  for (size_t s = 0; s < P.subs.size(); ++s) {
    const auto& elems = P.subs[s].geom.elems;
    for (size_t k = 0; k < elems.size(); ++k) {
      g.c[elems[k]] = fields[s].last.c[k];
      g.phi[elems[k]] = fields[s].last.phi[k];
    }
  }
  return g;
}

GlobalField from_state(const FieldState& s) { return {s.c, s.phi}; }

namespace {

double flux_seminorm(const Mesh& mesh, const std::vector<std::array<double, 4>>& coefs) {
  double s = 0.0;
  for (int k = 0; k < mesh.n_elements(); ++k) {
    const auto A = local_mass_matrix(mesh.elements[k], 1.0);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) s += coefs[k][a] * A[a][b] * coefs[k][b];
  }
  return std::sqrt(s);
}

} // namespace

ErrorReport error_norms(const Mesh& mesh, const GlobalField& computed,
                        const ScalarFieldT& exact_c, const FluxFieldT& exact_flux, double t) {
  // True L2(Omega) distances between the discrete fields (P0 / RT0) and the
  // smooth reference, by 3x3 Gauss quadrature per element.
  static const double gp[3] = {-std::sqrt(3.0 / 5.0), 0.0, std::sqrt(3.0 / 5.0)};
  static const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  ErrorReport r;
  double ce2 = 0, cn2 = 0, fe2 = 0, fn2 = 0;
  for (int k = 0; k < mesh.n_elements(); ++k) {
    const Element& K = mesh.elements[k];
    const double a = K.width(), b = K.height(), inv_ab = 1.0 / (a * b);
    for (int qi = 0; qi < 3; ++qi)
      for (int qj = 0; qj < 3; ++qj) {
        const double x = K.xc() + 0.5 * a * gp[qi];
        const double y = K.yc() + 0.5 * b * gp[qj];
        const double w = 0.25 * K.area() * gw[qi] * gw[qj];
        const double ce = exact_c(x, y, t);
        ce2 += w * (computed.c[k] - ce) * (computed.c[k] - ce);
        cn2 += w * ce * ce;
        if (exact_flux) {
          // RT0 field from the edge coefficients (integral-normalized basis)
          const auto& p = computed.phi[k];
          const double px = (p[kLeft] * (x - K.x1) + p[kRight] * (x - K.x0)) * inv_ab;
          const double py = (p[kBottom] * (y - K.y1) + p[kTop] * (y - K.y0)) * inv_ab;
          const auto f = exact_flux(x, y, t);
          fe2 += w * ((px - f[0]) * (px - f[0]) + (py - f[1]) * (py - f[1]));
          fn2 += w * (f[0] * f[0] + f[1] * f[1]);
        }
      }
  }
  r.c_error = std::sqrt(ce2 / cn2);
  if (exact_flux) r.flux_error = std::sqrt(fe2 / fn2);
  return r;
}

ErrorReport error_norms(const Mesh& mesh, const GlobalField& computed,
                        const GlobalField& reference) {
  ErrorReport r;
  double e2 = 0, n2 = 0;
  for (int k = 0; k < mesh.n_elements(); ++k) {
    const double a = mesh.elements[k].area();
    e2 += a * (computed.c[k] - reference.c[k]) * (computed.c[k] - reference.c[k]);
    n2 += a * reference.c[k] * reference.c[k];
  }
  r.c_error = std::sqrt(e2 / n2);
  std::vector<std::array<double, 4>> diff(reference.phi.size());
  for (size_t k = 0; k < reference.phi.size(); ++k)
    for (int s = 0; s < 4; ++s) diff[k][s] = computed.phi[k][s] - reference.phi[k][s];
  r.flux_error = flux_seminorm(mesh, diff) / flux_seminorm(mesh, reference.phi);
  return r;
}

std::vector<double> rates_of(const std::vector<double>& errors) {
  std::vector<double> rates;
  for (size_t i = 1; i < errors.size(); ++i)
    rates.push_back(std::log2(errors[i - 1] / errors[i]));
  return rates;
}

Method method_from_name(const std::string& name) {
  if (name == "monodomain") return Method::Monodomain;
  if (name == "gtp-schur") return Method::GtpSchur;
  if (name == "gtp-schur-nn") return Method::GtpSchurNN;
  if (name == "gto-schwarz-gmres") return Method::GtoSchwarzGmres;
  if (name == "oswr-jacobi") return Method::OswrJacobi;
  throw ConfigError("unknown method: " + name);
}

std::vector<double> random_vector(size_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

namespace {

int zone_at(const RunConfig& cfg, double x, double y) {
  int z = -1;
  for (size_t i = 0; i < cfg.zones.size(); ++i)
    if (cfg.zones[i].box.contains(x, y)) z = static_cast<int>(i);
  return z;
}

ScalarFieldT make_source(const RunConfig& cfg) {
  if (cfg.source_kind == "none") return nullptr;
  if (cfg.source_kind == "test1") return test1_source;
  if (cfg.source_kind == "gaussian") {
    if (cfg.source_params.size() != 4)
      throw ConfigError("source.params: gaussian needs amplitude cx cy rate");
    const double a = cfg.source_params[0], cx = cfg.source_params[1],
                 cy = cfg.source_params[2], rate = cfg.source_params[3];
    return [a, cx, cy, rate](double x, double y, double) {
      return a * std::exp(-rate * ((x - cx) * (x - cx) + (y - cy) * (y - cy)));
    };
  }
  throw ConfigError("source.kind: unknown '" + cfg.source_kind + "'");
}

ScalarField make_initial(const RunConfig& cfg) {
  if (cfg.initial_kind == "none") return nullptr;
  if (cfg.initial_kind == "test1")
    return [](double x, double y) { return test1_exact(x, y, 0.0); };
  if (cfg.initial_kind == "gaussian-poly") return test2_initial;
  if (cfg.initial_kind == "zones") {
    RunConfig local = cfg;
    return [local](double x, double y) {
      const int z = zone_at(local, x, y);
      if (z < 0) return 0.0;
      for (const auto& n : local.initial_zones)
        if (local.zones[z].name == n) return 1.0;
      return 0.0;
    };
  }
  throw ConfigError("initial.kind: unknown '" + cfg.initial_kind + "'");
}

} // namespace

BuiltProblem build_problem(const RunConfig& cfg) {
  BuiltProblem bp;
  Mesh mesh = cfg.x_coords.empty()
                  ? Mesh::uniform(cfg.nx, cfg.ny, cfg.x0, cfg.x1, cfg.y0, cfg.y1, cfg.bc)
                  : Mesh::build(cfg.x_coords, cfg.y_coords, cfg.bc);
  bp.mesh = std::make_shared<const Mesh>(std::move(mesh));
  const Mesh& m = *bp.mesh;

  Coefficients coef;
  coef.mode = cfg.upwind;
  const int ne = m.n_elements();
  coef.omega.resize(ne);
  coef.d.resize(ne);
  std::vector<double> conductivity(ne, 0.0);
  for (int k = 0; k < ne; ++k) {
    const int z = zone_at(cfg, m.elements[k].xc(), m.elements[k].yc());
    if (z < 0)
      throw ConfigError("zones: element at (" + std::to_string(m.elements[k].xc()) + ", " +
                        std::to_string(m.elements[k].yc()) + ") not covered by any zone");
    coef.omega[k] = cfg.zones[z].omega;
    coef.d[k] = cfg.darcy ? cfg.zones[z].omega * cfg.zones[z].d : cfg.zones[z].d;
    conductivity[k] = cfg.zones[z].K;
  }
  if (cfg.darcy) {
    DarcyResult darcy = solve_darcy(m, conductivity, cfg.bc, [&](double, double y, double) {
      return y > 0.5 * (m.ys.front() + m.ys.back()) ? cfg.head_top : cfg.head_bottom;
    });
    coef.u_edge = std::move(darcy.u_edge);
  } else {
    std::vector<int> all(ne);
    for (int k = 0; k < ne; ++k) all[k] = k;
    project_velocity(m, all,
                     [&](double x, double y) -> std::array<double, 2> {
                       const int z = zone_at(cfg, x, y);
                       if (z < 0) return {0.0, 0.0};
                       return {cfg.zones[z].ux, cfg.zones[z].uy};
                     },
                     coef.u_edge);
  }

  ScalarFieldT source = make_source(cfg);
  ScalarField initial = make_initial(cfg);
  if (cfg.reference == "test1-exact") {
    bp.exact_c = test1_exact;
    bp.exact_flux = [](double x, double y, double t) { return test1_exact_flux(x, y, t); };
  } else if (cfg.reference != "none") {
    throw ConfigError("reference.kind: unknown '" + cfg.reference + "'");
  }

  if (cfg.method == "monodomain") {
    bp.decomposed = false;
    bp.mono = make_subproblem(bp.mesh, nullptr, -1, coef, {}, source, initial,
                              TimeGrid::uniform(cfg.horizon, cfg.steps[0]));
  } else {
    bp.decomposed = true;
    Decomposition decomp = Decomposition::build(m, cfg.boxes);
    std::vector<TimeGrid> grids;
    for (size_t s = 0; s < cfg.steps.size(); ++s)
      grids.push_back(TimeGrid::uniform(cfg.horizon, cfg.steps[s]));
    bp.multi = make_multidomain(bp.mesh, std::move(decomp), coef, {}, source, initial,
                                std::move(grids));
    bp.multi.master = cfg.master == "lower" ? MasterSide::Lower : MasterSide::Upper;
    bp.multi.normalized_weights = cfg.normalized_weights;
  }
  return bp;
}

void resolve_alpha(MultiDomainProblem& P, const RunConfig& cfg) {
  for (size_t p = 0; p < P.decomp.pairs.size(); ++p) {
    if (cfg.alpha_mode == "explicit") {
      P.alpha[p] = {cfg.alpha12, cfg.alpha21};
    } else if (cfg.alpha_mode == "optimized") {
      P.alpha[p] = optimize_parameters(make_interface_model(P, static_cast<int>(p)));
    } else if (cfg.alpha_mode == "optimized-onesided") {
      const double a = optimize_parameter_onesided(make_interface_model(P, static_cast<int>(p)));
      P.alpha[p] = {a, a};
    } else {
      throw ConfigError("method.alpha: unknown mode '" + cfg.alpha_mode + "'");
    }
  }
}

namespace {

void write_metadata(const RunConfig& cfg, const MultiDomainProblem* P, uint64_t seed,
                    const std::string& outdir) {
  std::ofstream f(outdir + "/metadata.txt");
  f << "method = " << cfg.method << "\n";
  f << "tol = " << cfg.tol << "\n";
  f << "max_iter = " << cfg.max_iter << "\n";
  f << "horizon = " << cfg.horizon << "\n";
  f << "windows = " << cfg.windows << "\n";
  f << "upwind = " << (cfg.upwind == UpwindMode::CenteredTheta ? "centered" : "full") << "\n";
  f << "seed = " << seed << "\n";
  f << "steps =";
  for (int s : cfg.steps) f << ' ' << s;
  f << "\n";
  if (P) {
    f << "master_grid = " << cfg.master << "\n";
    f << "normalized_weights = " << (cfg.normalized_weights ? "true" : "false") << "\n";
    for (size_t p = 0; p < P->alpha.size(); ++p)
      f << "alpha_pair" << p << " = " << P->alpha[p].first << ' ' << P->alpha[p].second
        << "\n";
    f << "frequency_band = interface-normal 1D reduction, [pi/T, pi/min dt], tangential "
         "frequencies omitted\n";
  }
}

void write_residuals(const std::string& path, const KrylovReport& rep, int solves_per_iter) {
  std::ofstream f(path);
  f << "iteration,relative_residual,cumulative_subdomain_solves\n";
  for (size_t i = 0; i < rep.residual_history.size(); ++i)
    f << i << ',' << rep.residual_history[i] << ',' << i * solves_per_iter << "\n";
}

void write_field(const std::string& path, const Mesh& mesh, const std::vector<double>& c) {
  std::ofstream f(path);
  f << "x_center,y_center,value\n";
  for (int k = 0; k < mesh.n_elements(); ++k)
    f << mesh.elements[k].xc() << ',' << mesh.elements[k].yc() << ',' << c[k] << "\n";
}

std::string time_tag(double t) {
  std::ostringstream os;
  os << t;
  std::string s = os.str();
  for (char& ch : s)
    if (ch == '.') ch = 'p';
  return s;
}

} // namespace

int run_command(const RunConfig& cfg, const std::string& outdir, uint64_t seed) {
  std::filesystem::create_directories(outdir);
  BuiltProblem bp = build_problem(cfg);

  if (!bp.decomposed) {
    MarchOptions opt;
    opt.snapshot_times = cfg.snapshot_times;
    SpaceTimeSolution sol;
    if (cfg.windows == 1) {
      sol = solve_monodomain(bp.mono, opt);
    } else {
      for (int w = 0; w < cfg.windows; ++w) {
        bp.mono.time_offset = w * cfg.horizon;
        sol = solve_monodomain(bp.mono, opt);
        bp.mono.c0 = sol.last.c;
      }
    }
    write_metadata(cfg, nullptr, seed, outdir);
    for (auto& [m, f] : sol.snapshots)
      write_field(outdir + "/field_t" + time_tag(bp.mono.time_offset + sol.grid.t_end(m)) +
                      ".csv",
                  *bp.mesh, f.c);
    write_field(outdir + "/field_final.csv", *bp.mesh, sol.last.c);
    if (bp.exact_c) {
      ErrorReport er = error_norms(*bp.mesh, from_state(sol.last), bp.exact_c, bp.exact_flux,
                                   cfg.windows * cfg.horizon);
      std::ofstream f(outdir + "/errors.csv");
      f << "c_error,flux_error\n" << er.c_error << ',' << er.flux_error << "\n";
      std::cout << "c_error = " << er.c_error << ", flux_error = " << er.flux_error << "\n";
    }
    return 0;
  }

  MultiDomainProblem& P = bp.multi;
  resolve_alpha(P, cfg);
  write_metadata(cfg, &P, seed, outdir);
  const Method method = method_from_name(cfg.method);

  // The error-equation studies use a random interface guess; with data the
  // guess is zero (or carried across windows).
  const bool random_guess = cfg.initial_guess == "random";

  WindowRun run;
  if (cfg.windows == 1 && random_guess) {
    MarchOptions fo;
    fo.snapshot_times = cfg.snapshot_times;
    KrylovReport rep;
    std::vector<SpaceTimeSolution> fields;
    if (method == Method::GtpSchur || method == Method::GtpSchurNN) {
      SchurSystem S(P);
      std::vector<double> x0 = random_vector(S.size(), seed);
      auto r = S.solve(cfg.tol, cfg.max_iter, method == Method::GtpSchurNN, &x0, fo);
      rep = std::move(r.report);
      fields = std::move(r.fields);
    } else if (method == Method::GtoSchwarzGmres) {
      RobinSystem R(P);
      std::vector<double> x0 = random_vector(R.size(), seed);
      auto r = R.solve(cfg.tol, cfg.max_iter, &x0, fo);
      rep = std::move(r.report);
      fields = std::move(r.fields);
    } else if (method == Method::OswrJacobi) {
      RobinSystem R(P);
      std::vector<double> x0 = random_vector(R.size(), seed);
      auto r = R.jacobi(x0, cfg.tol, cfg.max_iter, 0, true, fo);
      rep.iterations = r.iterations;
      rep.converged = r.converged;
      rep.residual_history = std::move(r.residual_history);
      rep.subdomain_solve_count = r.iterations;
      fields = std::move(r.fields);
    } else {
      throw ConfigError("random initial guess applies to decomposed methods");
    }
    run.converged_all = rep.converged;
    run.reports.push_back(std::move(rep));
    run.final_c = global_concentration(P, fields);
    run.last_window_fields = std::move(fields);
  } else {
    run = run_time_windows(P, method, cfg.windows, cfg.tol, cfg.max_iter, cfg.snapshot_times);
  }

  const int factor = method == Method::GtpSchurNN ? 2 : 1;
  for (size_t w = 0; w < run.reports.size(); ++w)
    write_residuals(outdir + "/residuals_window" + std::to_string(w) + ".csv", run.reports[w],
                    factor);
  for (auto& [t, c] : run.snapshots)
    write_field(outdir + "/field_t" + time_tag(t) + ".csv", *bp.mesh, c);
  write_field(outdir + "/field_final.csv", *bp.mesh, run.final_c);

  if (bp.exact_c) {
    GlobalField g = assemble_global(P, run.last_window_fields);
    ErrorReport er =
        error_norms(*bp.mesh, g, bp.exact_c, bp.exact_flux, cfg.windows * cfg.horizon);
    std::ofstream f(outdir + "/errors.csv");
    f << "c_error,flux_error\n" << er.c_error << ',' << er.flux_error << "\n";
    std::cout << "c_error = " << er.c_error << ", flux_error = " << er.flux_error << "\n";
  }
  long solves = 0;
  for (const auto& rep : run.reports) solves += rep.subdomain_solve_count;
  std::cout << "windows = " << run.reports.size() << ", subdomain solves = " << solves
            << (run.converged_all ? "" : " (NOT CONVERGED)") << "\n";
  return run.converged_all ? 0 : 2;
}

int study_command(const RunConfig& cfg, const std::string& axis, const std::string& outdir) {
  std::filesystem::create_directories(outdir);
  std::ofstream out(outdir + "/study.csv");
  if (axis == "space") {
    if (cfg.reference != "test1-exact")
      throw ConfigError("study --axis space needs reference.kind = test1-exact");
    out << "level,h,c_error,flux_error,c_rate,subdomain_solves\n";
    std::vector<double> cerrs, ferrs;
    std::vector<long> solves;
    for (int lvl = 0; lvl < cfg.study_levels; ++lvl) {
      RunConfig c2 = cfg;
      c2.nx = cfg.nx << lvl;
      c2.ny = cfg.ny << lvl;
      BuiltProblem bp = build_problem(c2);
      ErrorReport er;
      long sv = 0;
      if (!bp.decomposed) {
        SpaceTimeSolution sol = solve_monodomain(bp.mono);
        er = error_norms(*bp.mesh, from_state(sol.last), bp.exact_c, bp.exact_flux,
                         cfg.horizon);
      } else {
        resolve_alpha(bp.multi, c2);
        const Method m = method_from_name(cfg.method);
        WindowRun run = run_time_windows(bp.multi, m, 1, cfg.tol, cfg.max_iter);
        GlobalField g = assemble_global(bp.multi, run.last_window_fields);
        er = error_norms(*bp.mesh, g, bp.exact_c, bp.exact_flux, cfg.horizon);
        sv = run.reports[0].subdomain_solve_count;
      }
      cerrs.push_back(er.c_error);
      ferrs.push_back(er.flux_error);
      solves.push_back(sv);
      const double rate = cerrs.size() > 1 ? std::log2(cerrs[cerrs.size() - 2] / er.c_error)
                                           : std::nan("");
      out << lvl << ',' << 1.0 / c2.nx << ',' << er.c_error << ',' << er.flux_error << ','
          << rate << ',' << sv << "\n";
      std::cout << "h = 1/" << c2.nx << "  c_error = " << er.c_error
                << "  flux_error = " << er.flux_error << "  solves = " << sv << "\n";
    }
    return 0;
  }
  if (axis != "time") throw ConfigError("study axis must be space or time");

  // Four base grid configurations, refined by 2 per level; errors against a
  // monodomain reference on a much finer grid.
  out << "grid_config,level,dt_max,c_error,flux_error\n";
  RunConfig ref_cfg = cfg;
  ref_cfg.method = "monodomain";
  ref_cfg.steps = {cfg.steps_fine * cfg.reference_refine};
  BuiltProblem ref_bp = build_problem(ref_cfg);
  SpaceTimeSolution ref_sol = solve_monodomain(ref_bp.mono);
  GlobalField ref = from_state(ref_sol.last);

  const std::array<std::pair<int, int>, 4> combos{
      std::pair{cfg.steps_coarse, cfg.steps_coarse}, {cfg.steps_coarse, cfg.steps_fine},
      {cfg.steps_fine, cfg.steps_coarse}, {cfg.steps_fine, cfg.steps_fine}};
  const char* names[4] = {"coarse-coarse", "coarse-fine", "fine-coarse", "fine-fine"};
  for (int cdx = 0; cdx < 4; ++cdx) {
    for (int lvl = 0; lvl < cfg.study_levels; ++lvl) {
      RunConfig c2 = cfg;
      c2.steps = {combos[cdx].first << lvl, combos[cdx].second << lvl};
      BuiltProblem bp = build_problem(c2);
      resolve_alpha(bp.multi, c2);
      WindowRun run = run_time_windows(bp.multi, method_from_name(cfg.method), 1, cfg.tol,
                                       cfg.max_iter);
      GlobalField g = assemble_global(bp.multi, run.last_window_fields);
      ErrorReport er = error_norms(*bp.mesh, g, ref);
      const double dtmax = cfg.horizon / std::min(c2.steps[0], c2.steps[1]);
      out << names[cdx] << ',' << lvl << ',' << dtmax << ',' << er.c_error << ','
          << er.flux_error << "\n";
      std::cout << names[cdx] << " level " << lvl << ": c_error = " << er.c_error
                << "  flux_error = " << er.flux_error << "\n";
    }
  }
  return 0;
}

int sweep_command(const RunConfig& cfg, const std::string& outdir, uint64_t seed) {
  std::filesystem::create_directories(outdir);
  BuiltProblem bp = build_problem(cfg);
  if (!bp.decomposed) throw ConfigError("sweep needs a decomposed method");
  MultiDomainProblem& P = bp.multi;
  resolve_alpha(P, cfg);
  const auto opt_pair = P.alpha[0];

  double lo = cfg.sweep_min, hi = cfg.sweep_max;
  if (!(lo > 0) || !(hi > lo)) {
    lo = 0.1 * std::min(opt_pair.first, opt_pair.second);
    hi = 10.0 * std::max(opt_pair.first, opt_pair.second);
  }
  std::vector<double> vals(cfg.sweep_n);
  for (int i = 0; i < cfg.sweep_n; ++i)
    vals[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (cfg.sweep_n - 1));

  RobinSystem R(P);
  std::vector<double> guess = random_vector(R.size(), seed);
  auto surface = parameter_sweep(P, vals, vals, cfg.sweep_iterations, guess);

  std::ofstream f(outdir + "/sweep.csv");
  f << "alpha12,alpha21,relative_residual\n";
  for (const auto& pt : surface)
    f << pt.a12 << ',' << pt.a21 << ',' << pt.relative_residual << "\n";

  // The optimizer's pair, evaluated on the same iteration budget.
  for (auto& al : P.alpha) al = opt_pair;
  RobinSystem R2(P);
  auto res = R2.jacobi(guess, 0.0, cfg.sweep_iterations, cfg.sweep_iterations);
  const double opt_res = res.residual_history.empty() ? 0.0 : res.residual_history.back();
  std::ofstream g(outdir + "/sweep_optimized.csv");
  g << "alpha12,alpha21,relative_residual\n";
  g << opt_pair.first << ',' << opt_pair.second << ',' << opt_res << "\n";
  std::cout << "optimized pair (" << opt_pair.first << ", " << opt_pair.second
            << ") residual " << opt_res << "\n";
  return 0;
}

} // namespace gtdd
