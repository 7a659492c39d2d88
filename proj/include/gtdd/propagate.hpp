#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "gtdd/geometry.hpp"
#include "gtdd/mhfe.hpp"
#include "gtdd/timegrid.hpp"

namespace gtdd {

using ScalarField = std::function<double(double, double)>;
using ScalarFieldT = std::function<double(double, double, double)>;

/// Exterior boundary data; null members mean homogeneous.
struct ExteriorValues {
  ScalarFieldT dirichlet; // trace value at (x, y, t)
  ScalarFieldT neumann;   // pointwise outward normal flux at (x, y, t)
};

enum class TraceKind { DirichletVal, FluxVal, RobinVal, MultiplierVal };

/// Per-interface-edge, per-time-interval scalar data on a subdomain's own
/// grid, laid out in the subdomain's canonical interface-edge order.
struct InterfaceTrace {
  TraceKind kind = TraceKind::DirichletVal;
  TimeSeries data;
};

/// Keyed store of step factorizations: one per (dt, interface condition,
/// Robin parameters). dt is quantized at 1e-12 of the horizon so a uniform
/// grid maps to a single factorization.
class FactorCache {
public:
  explicit FactorCache(double horizon) : quantum_(1e-12 * horizon) {}
  const StepSystem& get(const SubdomainGeometry& g, const Coefficients& c, double dt,
                        InterfaceBC ibc, std::span<const double> alpha, bool steady);
  size_t size() const { return store_.size(); }
  void clear();

private:
  double quantum_;
  std::map<std::tuple<long long, int, std::vector<double>>, std::unique_ptr<StepSystem>> store_;
  std::mutex mutex_;
};

/// One subdomain's time-dependent transport problem; immutable geometry and
/// coefficients, per-run data (f, c0), and its own time grid.
struct SubdomainProblem {
  int index = -1;
  std::shared_ptr<const Mesh> mesh; // keeps the geometry views alive
  SubdomainGeometry geom;
  Coefficients coef;
  ExteriorValues ext;
  ScalarFieldT source; // f(x, y, t); null means zero
  std::vector<double> c0;
  TimeGrid grid;
  double time_offset = 0.0; // absolute time of the grid origin (time windows)
  std::unique_ptr<FactorCache> cache;

  const StepSystem& system(double dt, InterfaceBC ibc, std::span<const double> alpha = {}) const;
};

SubdomainProblem make_subproblem(std::shared_ptr<const Mesh> mesh, const Decomposition* decomp,
                                 int index, const Coefficients& global_coef,
                                 const ExteriorValues& ext, ScalarFieldT source,
                                 const ScalarField& c0, TimeGrid grid);

/// Sequence of field states over a subdomain's grid plus extracted traces.
struct SpaceTimeSolution {
  TimeGrid grid;
  FieldState last;                       // state at the final interval
  std::vector<FieldState> fields;        // all intervals (when requested)
  TimeSeries minus_flux_trace;           // -phi . n_i per interface edge, pointwise
  TimeSeries theta_trace;                // multiplier trace per interface edge
  std::vector<double> mass_history;      // sum_K |K| omega c per interval
  std::map<int, FieldState> snapshots;   // interval index -> state
};

struct MarchOptions {
  bool with_data = true;   // include f, c0 and inhomogeneous exterior data
  bool store_fields = false;
  bool validate = true;
  std::vector<double> snapshot_times; // absolute times
};

/// Backward-Euler march over the subdomain's own grid with the given
/// interface condition and data (on the subdomain's grid and edge layout).
SpaceTimeSolution march(const SubdomainProblem& sub, InterfaceBC ibc,
                        const TimeSeries* iface_data, std::span<const double> alpha,
                        const MarchOptions& opt = {});

/// Dirichlet-interface solve; returns the Dirichlet-to-Neumann trace
/// -phi . n_i on the interface.
std::pair<SpaceTimeSolution, InterfaceTrace>
solve_dirichlet(const SubdomainProblem& sub, const InterfaceTrace& lambda,
                const MarchOptions& opt = {});

/// Neumann-interface solve (imposes phi . n_i); returns the multiplier trace.
std::pair<SpaceTimeSolution, InterfaceTrace>
solve_neumann(const SubdomainProblem& sub, const InterfaceTrace& flux,
              const MarchOptions& opt = {});

/// Robin-interface solve with parameter alpha_own per interface edge;
/// returns the outgoing trace toward the neighbours, -phi . n_j +
/// alpha_return theta, per edge.
std::pair<SpaceTimeSolution, InterfaceTrace>
solve_robin(const SubdomainProblem& sub, const InterfaceTrace& zeta,
            std::span<const double> alpha_own, std::span<const double> alpha_return,
            const MarchOptions& opt = {});

/// Reference solver on the undecomposed mesh.
SpaceTimeSolution solve_monodomain(const SubdomainProblem& whole, const MarchOptions& opt = {});

struct DarcyResult {
  std::vector<double> head;                   // per element
  std::vector<std::array<double, 4>> u_edge;  // outward normal velocity per (elem, slot)
  double max_abs_divergence = 0.0;            // max_K |sum_E |E| u_KE|
};

/// Steady mixed-hybrid Darcy solve: same hybrid system with d -> K, no time
/// term and no advection; heads imposed through `bc`/`head_bc`.
DarcyResult solve_darcy(const Mesh& mesh, std::span<const double> conductivity,
                        const BoundarySpec& bc, const ScalarFieldT& head_bc);

} // namespace gtdd
