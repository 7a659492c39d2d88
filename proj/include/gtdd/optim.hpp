#pragma once

#include <complex>
#include <vector>

#include "gtdd/interface.hpp"

namespace gtdd {

/// Flux symbol of side i of the two-half-plane reduction at time frequency
/// `freq` and tangential frequency `k`; sign = +1 for the side whose
/// outward normal points along the i->j axis (side 1), -1 for the other.
std::complex<double> flux_symbol(double d, double omega_por, double a_normal,
                                 double a_tangential, double sign, double freq, double k);

/// Convergence factor of one OSWR double sweep at a single time frequency
/// (1D reduction, no tangential component).
double convergence_factor(const InterfaceModel& model, double a12, double a21, double freq);

/// Full reduction at a (time, tangential) frequency pair.
double convergence_factor(const InterfaceModel& model, double a12, double a21, double freq,
                          double k);

/// max over the model's frequency band (log-spaced samples; both tangential
/// signs when the model carries a tangential band).
double convergence_factor_band_max(const InterfaceModel& model, double a12, double a21,
                                   int samples = 48);

/// Two-sided optimized Robin parameters: argmin over (a12, a21) of the band
/// maximum of the convergence factor; coarse log-grid search followed by
/// Nelder-Mead refinement. Deterministic; mirror-symmetric landscapes
/// return the canonically ordered pair.
std::pair<double, double> optimize_parameters(const InterfaceModel& model);

/// One-sided variant (a12 = a21), used where the convergence theory
/// requires equal parameters.
double optimize_parameter_onesided(const InterfaceModel& model);

struct SweepPoint {
  double a12, a21;
  double relative_residual;
};

/// Residual surface of the OSWR Jacobi iteration after a fixed number of
/// sweeps over a grid of Robin parameter pairs. Grid points are processed
/// in a deterministic order and factor caches purged after each point.
std::vector<SweepPoint> parameter_sweep(MultiDomainProblem& P,
                                        const std::vector<double>& a12_values,
                                        const std::vector<double>& a21_values,
                                        int jacobi_iterations,
                                        const std::vector<double>& initial_guess = {});

} // namespace gtdd
