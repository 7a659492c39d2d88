#pragma once

#include <cstdint>
#include <string>

#include "gtdd/cases.hpp"
#include "gtdd/config.hpp"
#include "gtdd/interface.hpp"
#include "gtdd/optim.hpp"

namespace gtdd {

/// Mesh-global concentration and flux coefficients at one time.
struct GlobalField {
  std::vector<double> c;
  std::vector<std::array<double, 4>> phi;
};

GlobalField assemble_global(const MultiDomainProblem& P,
                            const std::vector<SpaceTimeSolution>& fields);
GlobalField from_state(const FieldState& s);

using FluxFieldT = std::function<std::array<double, 2>(double, double, double)>;

struct ErrorReport {
  double c_error = 0;    // relative L2(Omega)
  double flux_error = 0; // relative L2(Omega), RT0 mass-matrix metric
};

ErrorReport error_norms(const Mesh& mesh, const GlobalField& computed,
                        const ScalarFieldT& exact_c, const FluxFieldT& exact_flux, double t);
ErrorReport error_norms(const Mesh& mesh, const GlobalField& computed,
                        const GlobalField& reference);

/// Convergence rate log2(coarse/fine) between successive refinement errors;
/// NaN where undefined.
std::vector<double> rates_of(const std::vector<double>& errors);

Method method_from_name(const std::string& name);

/// Everything the drivers need, built from a config.
struct BuiltProblem {
  std::shared_ptr<const Mesh> mesh;
  bool decomposed = false;
  MultiDomainProblem multi;   // valid when decomposed
  SubdomainProblem mono;      // valid otherwise
  ScalarFieldT exact_c;       // optional
  FluxFieldT exact_flux;      // optional
};

BuiltProblem build_problem(const RunConfig& cfg);

/// Resolves [method].alpha for every pair (optimizer or explicit values).
void resolve_alpha(MultiDomainProblem& P, const RunConfig& cfg);

int run_command(const RunConfig& cfg, const std::string& outdir, uint64_t seed);
int study_command(const RunConfig& cfg, const std::string& axis, const std::string& outdir);
int sweep_command(const RunConfig& cfg, const std::string& outdir, uint64_t seed);

std::vector<double> random_vector(size_t n, uint64_t seed);

} // namespace gtdd
