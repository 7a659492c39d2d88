#include "gtdd/optim.hpp"

#include <algorithm>
#include <cmath>

#include "gtdd/errors.hpp"

namespace gtdd {

std::complex<double> flux_symbol(double d, double omega_por, double a_normal,
                                 double a_tangential, double sign, double freq, double k) {
  const std::complex<double> mu(d * k * k, omega_por * freq + a_tangential * k);
  std::complex<double> root =
      std::sqrt(std::complex<double>(a_normal * a_normal, 0.0) + 4.0 * d * mu);
  if (root.real() < 0) root = -root; // principal branch, positive real part
  return 0.5 * (root - sign * a_normal);
}

double convergence_factor(const InterfaceModel& model, double a12, double a21, double freq,
                          double k) {
  if (!(a12 > 0) || !(a21 > 0))
    throw InvalidRobinParameter("convergence factor needs positive Robin parameters");
  const std::complex<double> z1 =
      flux_symbol(model.d1, model.omega1, model.a1, model.a_tan1, +1.0, freq, k);
  const std::complex<double> z2 =
      flux_symbol(model.d2, model.omega2, model.a2, model.a_tan2, -1.0, freq, k);
  const double num = std::abs(a12 - z2) * std::abs(a21 - z1);
  const double den = std::abs(a12 + z1) * std::abs(a21 + z2);
  return num / den;
}

double convergence_factor(const InterfaceModel& model, double a12, double a21, double freq) {
  return convergence_factor(model, a12, a21, freq, 0.0);
}

double convergence_factor_band_max(const InterfaceModel& model, double a12, double a21,
                                   int samples) {
  const double lo = std::log(model.freq_min), hi = std::log(model.freq_max);
  double worst = 0.0;
  const bool with_k = model.k_max > 0;
  const double klo = with_k ? std::log(model.k_min) : 0.0;
  const double khi = with_k ? std::log(model.k_max) : 0.0;
  for (int i = 0; i < samples; ++i) {
    const double f = std::exp(lo + (hi - lo) * i / (samples - 1));
    if (!with_k) {
      worst = std::max(worst, convergence_factor(model, a12, a21, f, 0.0));
      continue;
    }
    for (int j = 0; j < samples; ++j) {
      const double k = std::exp(klo + (khi - klo) * j / (samples - 1));
      worst = std::max(worst, convergence_factor(model, a12, a21, f, k));
      worst = std::max(worst, convergence_factor(model, a12, a21, f, -k));
    }
  }
  return worst;
}

namespace {

// Nelder-Mead in log-parameter space, fixed iteration budget.
std::pair<std::array<double, 2>, double>
nelder_mead(const std::function<double(double, double)>& f, std::array<double, 2> start,
            double spread, int iterations) {
  using P = std::array<double, 2>;
  std::array<P, 3> x{P{start[0], start[1]},
                     P{start[0] + spread, start[1]},
                     P{start[0], start[1] + spread}};
  std::array<double, 3> v;
  for (int i = 0; i < 3; ++i) v[i] = f(x[i][0], x[i][1]);
  for (int it = 0; it < iterations; ++it) {
    std::array<int, 3> ord{0, 1, 2};
    std::sort(ord.begin(), ord.end(), [&](int a, int b) { return v[a] < v[b]; });
    const P &best = x[ord[0]], &worst = x[ord[2]];
    const P mid{0.5 * (x[ord[0]][0] + x[ord[1]][0]), 0.5 * (x[ord[0]][1] + x[ord[1]][1])};
    P refl{2 * mid[0] - worst[0], 2 * mid[1] - worst[1]};
    double vr = f(refl[0], refl[1]);
    if (vr < v[ord[0]]) {
      P exp_{3 * mid[0] - 2 * worst[0], 3 * mid[1] - 2 * worst[1]};
      double ve = f(exp_[0], exp_[1]);
      if (ve < vr) {
        x[ord[2]] = exp_;
        v[ord[2]] = ve;
      } else {
        x[ord[2]] = refl;
        v[ord[2]] = vr;
      }
    } else if (vr < v[ord[1]]) {
      x[ord[2]] = refl;
      v[ord[2]] = vr;
    } else {
      P con{0.5 * (mid[0] + worst[0]), 0.5 * (mid[1] + worst[1])};
      double vc = f(con[0], con[1]);
      if (vc < v[ord[2]]) {
        x[ord[2]] = con;
        v[ord[2]] = vc;
      } else {
        for (int i : {ord[1], ord[2]}) {
          x[i] = {0.5 * (x[i][0] + best[0]), 0.5 * (x[i][1] + best[1])};
          v[i] = f(x[i][0], x[i][1]);
        }
      }
    }
  }
  int bi = 0;
  for (int i = 1; i < 3; ++i)
    if (v[i] < v[bi]) bi = i;
  return {x[bi], v[bi]};
}

} // namespace

std::pair<double, double> optimize_parameters(const InterfaceModel& model) {
  // Parameter range anchored at the flux-symbol magnitudes over the band.
  const double zlo =
      std::min({std::abs(flux_symbol(model.d1, model.omega1, model.a1, model.a_tan1, 1,
                                     model.freq_min, 0.0)),
                std::abs(flux_symbol(model.d2, model.omega2, model.a2, model.a_tan2, -1,
                                     model.freq_min, 0.0))});
  const double zhi =
      std::max({std::abs(flux_symbol(model.d1, model.omega1, model.a1, model.a_tan1, 1,
                                     model.freq_max, model.k_max)),
                std::abs(flux_symbol(model.d2, model.omega2, model.a2, model.a_tan2, -1,
                                     model.freq_max, model.k_max))});
  const double lo = std::log(0.3 * std::max(zlo, 1e-14));
  const double hi = std::log(3.0 * zhi);
  const int n = 24;
  double best1 = lo, best2 = lo, bestv = 1e300;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double l1 = lo + (hi - lo) * i / (n - 1);
      const double l2 = lo + (hi - lo) * j / (n - 1);
      const double v = convergence_factor_band_max(model, std::exp(l1), std::exp(l2));
      if (v < bestv) {
        bestv = v;
        best1 = l1;
        best2 = l2;
      }
    }
  auto objective = [&](double l1, double l2) {
    return convergence_factor_band_max(model, std::exp(l1), std::exp(l2));
  };
  const double step = (hi - lo) / (n - 1);
  auto [pt, val] = nelder_mead(objective, {best1, best2}, step, 200);
  double a12 = std::exp(pt[0]), a21 = std::exp(pt[1]);
  // Mirror-symmetric landscapes carry two swapped global minima; order the
  // returned pair canonically so the result is deterministic.
  const double swapped = convergence_factor_band_max(model, a21, a12);
  if (std::abs(swapped - val) <= 1e-9 * val && a21 < a12) std::swap(a12, a21);
  return {a12, a21};
}

double optimize_parameter_onesided(const InterfaceModel& model) {
  const double zlo =
      std::min({std::abs(flux_symbol(model.d1, model.omega1, model.a1, model.a_tan1, 1,
                                     model.freq_min, 0.0)),
                std::abs(flux_symbol(model.d2, model.omega2, model.a2, model.a_tan2, -1,
                                     model.freq_min, 0.0))});
  const double zhi =
      std::max({std::abs(flux_symbol(model.d1, model.omega1, model.a1, model.a_tan1, 1,
                                     model.freq_max, model.k_max)),
                std::abs(flux_symbol(model.d2, model.omega2, model.a2, model.a_tan2, -1,
                                     model.freq_max, model.k_max))});
  const double lo = std::log(0.3 * std::max(zlo, 1e-14));
  const double hi = std::log(3.0 * zhi);
  double best = lo, bestv = 1e300;
  const int n = 96;
  for (int i = 0; i < n; ++i) {
    const double l = lo + (hi - lo) * i / (n - 1);
    const double v = convergence_factor_band_max(model, std::exp(l), std::exp(l));
    if (v < bestv) {
      bestv = v;
      best = l;
    }
  }
  // golden-section refinement around the grid minimum
  double a = best - (hi - lo) / (n - 1), b = best + (hi - lo) / (n - 1);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = convergence_factor_band_max(model, std::exp(c), std::exp(c));
  double fd = convergence_factor_band_max(model, std::exp(d), std::exp(d));
  for (int it = 0; it < 60; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = convergence_factor_band_max(model, std::exp(c), std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = convergence_factor_band_max(model, std::exp(d), std::exp(d));
    }
  }
  return std::exp(0.5 * (a + b));
}

std::vector<SweepPoint> parameter_sweep(MultiDomainProblem& P,
                                        const std::vector<double>& a12_values,
                                        const std::vector<double>& a21_values,
                                        int jacobi_iterations,
                                        const std::vector<double>& initial_guess) {
  std::vector<SweepPoint> out;
  out.reserve(a12_values.size() * a21_values.size());
  for (double a12 : a12_values)
    for (double a21 : a21_values) {
      for (auto& al : P.alpha) al = {a12, a21};
      RobinSystem R(P);
      auto res = R.jacobi(initial_guess, 0.0, jacobi_iterations, jacobi_iterations);
      const double rel = res.residual_history.empty() ? 0.0 : res.residual_history.back();
      out.push_back({a12, a21, rel});
      for (auto& sub : P.subs) sub.cache->clear();
    }
  return out;
}

} // namespace gtdd
