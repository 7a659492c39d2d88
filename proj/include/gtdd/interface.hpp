#pragma once

#include <optional>
#include <vector>

#include "gtdd/geometry.hpp"
#include "gtdd/linsolve.hpp"
#include "gtdd/propagate.hpp"

namespace gtdd {

enum class Method { Monodomain, GtpSchur, GtpSchurNN, GtoSchwarzGmres, OswrJacobi };

enum class MasterSide { Lower, Upper };

/// The decomposed transport problem: per-subdomain solvers, per-pair Robin
/// parameters and the Neumann-Neumann weight convention.
struct MultiDomainProblem {
  std::shared_ptr<const Mesh> mesh;
  Decomposition decomp;
  std::vector<SubdomainProblem> subs;
  std::vector<std::pair<double, double>> alpha; // per pair: (alpha_ij, alpha_ji), i < j
  MasterSide master = MasterSide::Lower;
  bool normalized_weights = false; // rescale sigma_ij so sigma_ij + sigma_ji = 1

  const TimeGrid& master_grid(int pair) const;
};

MultiDomainProblem make_multidomain(std::shared_ptr<const Mesh> mesh, Decomposition decomp,
                                    const Coefficients& global_coef,
                                    const ExteriorValues& ext, ScalarFieldT source,
                                    const ScalarField& c0, std::vector<TimeGrid> grids);

/// Data for the two-half-plane reduction used to optimize the Robin
/// parameters of one interface pair; built from interface-adjacent elements.
/// The frequency band covers the resolvable time frequencies and, for the
/// full 2D reduction, the tangential spatial frequencies of the interface.
struct InterfaceModel {
  double d1 = 1, d2 = 1;         // diffusion per side
  double omega1 = 1, omega2 = 1; // porosity per side
  double a1 = 0, a2 = 0;         // advection along the i->j normal per side
  double a_tan1 = 0, a_tan2 = 0; // tangential advection per side
  double freq_min = 1, freq_max = 10; // time band [pi/T, pi/min dt]
  double k_min = 0, k_max = 0;        // tangential band [pi/|Gamma|, pi/min |E|]
};

InterfaceModel make_interface_model(const MultiDomainProblem& P, int pair);

/// Global-in-time Schur interface problem: lambda lives per pair on the
/// designated master grid; apply computes the (negated) flux jump of the
/// homogeneous Dirichlet subdomain solves.
class SchurSystem {
public:
  explicit SchurSystem(MultiDomainProblem& P);

  int size() const { return size_; }
  std::vector<double> apply(const std::vector<double>& lambda);
  std::vector<double> rhs();
  std::vector<double> precondition(const std::vector<double>& r); // Neumann-Neumann
  std::vector<double> weights() const;                            // |E| dt metric

  struct Result {
    std::vector<double> lambda;
    KrylovReport report;
    std::vector<SpaceTimeSolution> fields; // final sweep, per subdomain
  };
  Result solve(double tol, int max_iter, bool precondition_nn,
               const std::vector<double>* x0 = nullptr, const MarchOptions& final_opts = {});

  /// Subdomain sweep with full data at a given interface iterate.
  std::vector<SpaceTimeSolution> reconstruct(const std::vector<double>& lambda,
                                             const MarchOptions& opts);

  std::vector<double> gather_for_sub(int s, const std::vector<double>& vec) const;

private:
  MultiDomainProblem* P_;
  int size_ = 0;
  std::vector<int> offset_; // per pair
  TimeSeries block(const std::vector<double>& vec, int pair) const;
  void add_block(std::vector<double>& vec, int pair, const TimeSeries& s) const;
};

/// Global-in-time Robin (optimized Schwarz) interface problem; one block of
/// Robin data per ordered pair direction, each on the owner's grid.
class RobinSystem {
public:
  explicit RobinSystem(MultiDomainProblem& P);

  int size() const { return size_; }
  std::vector<double> apply(const std::vector<double>& zeta);
  std::vector<double> rhs();
  std::vector<double> weights() const;

  struct Result {
    std::vector<double> zeta;
    KrylovReport report;
    std::vector<SpaceTimeSolution> fields;
  };
  Result solve(double tol, int max_iter, const std::vector<double>* x0 = nullptr,
               const MarchOptions& final_opts = {});

  struct JacobiResult {
    std::vector<double> zeta;
    std::vector<double> residual_history; // relative trace-update norms
    std::vector<double> B_history;        // summed squared Robin return traces
    int iterations = 0;
    bool converged = false;
    std::vector<SpaceTimeSolution> fields;
  };
  /// OSWR: Jacobi sweeps from the initial guess; stops at the relative
  /// update tolerance or after exactly `fixed_iterations` sweeps (tol
  /// ignored then). Set reconstruct_fields for a final data sweep.
  JacobiResult jacobi(const std::vector<double>& initial, double tol, int max_iter,
                      int fixed_iterations = 0, bool reconstruct_fields = false,
                      const MarchOptions& final_opts = {});

  std::vector<SpaceTimeSolution> reconstruct(const std::vector<double>& zeta,
                                             const MarchOptions& opts);

  std::vector<double> gather_for_sub(int s, const std::vector<double>& vec) const;

private:
  MultiDomainProblem* P_;
  int size_ = 0;
  std::vector<std::pair<int, int>> offset_; // per pair: block (i,j), block (j,i)
  struct SweepOut {
    std::vector<TimeSeries> returns; // per subdomain, width n_iface, own grid
  };
  SweepOut sweep(const std::vector<double>* zeta, bool with_data,
                 std::vector<SpaceTimeSolution>* fields, const MarchOptions* opts);
  double B_of(const SweepOut& s) const;
};

struct WindowRun {
  bool converged_all = true;
  std::vector<KrylovReport> reports;  // per window
  std::vector<double> mass_at_bounds; // global mass at window boundaries
  std::vector<std::pair<double, std::vector<double>>> snapshots; // (time, global c)
  std::vector<SpaceTimeSolution> last_window_fields;
  std::vector<double> final_c; // global element layout
};

/// Sequential time windows: c at a window's end seeds the next window's
/// initial condition, the converged interface data seeds the next initial
/// guess. Subdomain grids in P span a single window.
WindowRun run_time_windows(MultiDomainProblem& P, Method method, int windows, double tol,
                           int max_iter, const std::vector<double>& snapshot_times = {});

/// Assembles per-subdomain element values into mesh-global layout.
std::vector<double> global_concentration(const MultiDomainProblem& P,
                                         const std::vector<SpaceTimeSolution>& fields);

} // namespace gtdd
