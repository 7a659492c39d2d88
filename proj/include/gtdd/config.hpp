#pragma once

#include <istream>
#include <string>
#include <vector>

#include "gtdd/geometry.hpp"
#include "gtdd/mhfe.hpp"

namespace gtdd {

struct ZoneSpec {
  std::string name;
  Box box;
  double omega = 1.0;
  double d = 1.0;     // diffusion (transport mode) or molecular diffusion d_m (darcy mode)
  double ux = 0, uy = 0; // constant velocity (transport mode)
  double K = 0;          // hydraulic conductivity (darcy mode)
};

/// Parsed run configuration; flat INI-style file, later zones override
/// earlier ones where they overlap.
struct RunConfig {
  // [domain]
  int nx = 0, ny = 0;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  std::vector<double> x_coords, y_coords; // optional non-uniform grid lines

  // [bc] transport boundary tags
  BoundarySpec bc;

  // [zones]
  std::vector<ZoneSpec> zones;
  UpwindMode upwind = UpwindMode::CenteredTheta;

  // [darcy] (presence switches the velocity source to a Darcy pre-solve;
  // zone lines then carry K and d_m, with d_eff = omega * d_m)
  bool darcy = false;
  double head_top = 0, head_bottom = 0;

  // [decomposition]
  std::vector<Box> boxes;
  std::vector<int> steps; // per-subdomain intervals per window
  std::string master = "lower";

  // [time]
  double horizon = 1.0; // window length
  int windows = 1;

  // [method]
  std::string method = "monodomain";
  double tol = 1e-6;
  int max_iter = 400;
  std::string alpha_mode = "optimized"; // optimized | optimized-onesided | explicit
  double alpha12 = 0, alpha21 = 0;
  bool normalized_weights = false;
  std::string initial_guess = "zero"; // zero | random

  // [source] / [initial] / [reference]
  std::string source_kind = "none"; // none | test1 | gaussian
  std::vector<double> source_params; // gaussian: amplitude cx cy rate
  std::string initial_kind = "none"; // none | test1 | gaussian-poly | zones
  std::vector<std::string> initial_zones;
  std::string reference = "none"; // none | test1-exact

  // [output]
  std::vector<double> snapshot_times;

  // [sweep]
  int sweep_n = 10;
  int sweep_iterations = 25;
  double sweep_min = 0, sweep_max = 0; // 0,0: centered on the optimized pair

  // [study]
  int study_levels = 3;
  int reference_refine = 128; // time-axis reference: steps_fine * this
  int steps_coarse = 12, steps_fine = 16;

  void validate() const; // throws ConfigError with a field path
};

RunConfig parse_config(std::istream& in);
RunConfig parse_config_file(const std::string& path);

} // namespace gtdd
