#include "gtdd/config.hpp"

#include <fstream>
#include <sstream>

#include "gtdd/errors.hpp"

namespace gtdd {

namespace {

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

double num(const std::string& t, const std::string& where) {
  try {
    size_t pos = 0;
    const double v = std::stod(t, &pos);
    if (pos != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected a number, got '" + t + "'");
  }
}

ExteriorBC bc_kind(const std::string& t, const std::string& where) {
  if (t == "dirichlet") return ExteriorBC::Dirichlet;
  if (t == "neumann") return ExteriorBC::Neumann;
  throw ConfigError(where + ": expected dirichlet|neumann, got '" + t + "'");
}

} // namespace

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    auto toks_all = tokens(line);
    if (toks_all.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    if (line.find('[') != std::string::npos) {
      auto b = line.find('['), e = line.find(']');
      if (e == std::string::npos) throw ConfigError(where + ": unterminated section header");
      section = line.substr(b + 1, e - b - 1);
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    auto keyt = tokens(line.substr(0, eq));
    if (keyt.size() != 1) throw ConfigError(where + ": malformed key");
    const std::string key = keyt[0];
    const auto val = tokens(line.substr(eq + 1));
    if (val.empty()) throw ConfigError(where + ": missing value for " + key);
    const std::string path = section + "." + key;

    auto need = [&](size_t n) {
      if (val.size() != n)
        throw ConfigError(path + ": expected " + std::to_string(n) + " values");
    };

    if (section == "domain") {
      if (key == "nx") { need(1); cfg.nx = static_cast<int>(num(val[0], path)); }
      else if (key == "ny") { need(1); cfg.ny = static_cast<int>(num(val[0], path)); }
      else if (key == "x") { need(2); cfg.x0 = num(val[0], path); cfg.x1 = num(val[1], path); }
      else if (key == "y") { need(2); cfg.y0 = num(val[0], path); cfg.y1 = num(val[1], path); }
      else if (key == "x_coords") { for (auto& t : val) cfg.x_coords.push_back(num(t, path)); }
      else if (key == "y_coords") { for (auto& t : val) cfg.y_coords.push_back(num(t, path)); }
      else throw ConfigError(path + ": unknown key");
    } else if (section == "bc") {
      need(1);
      if (key == "left") cfg.bc.left = bc_kind(val[0], path);
      else if (key == "right") cfg.bc.right = bc_kind(val[0], path);
      else if (key == "bottom") cfg.bc.bottom = bc_kind(val[0], path);
      else if (key == "top") cfg.bc.top = bc_kind(val[0], path);
      else throw ConfigError(path + ": unknown key");
    } else if (section == "zones") {
      if (key == "zone") {
        // name x0 x1 y0 y1 omega d ux uy   |   name x0 x1 y0 y1 omega d_m K
        if (val.size() != 9 && val.size() != 8)
          throw ConfigError(path + ": zone needs 8 (darcy) or 9 (velocity) columns");
        ZoneSpec z;
        z.name = val[0];
        z.box = {num(val[1], path), num(val[2], path), num(val[3], path), num(val[4], path)};
        z.omega = num(val[5], path);
        z.d = num(val[6], path);
        if (val.size() == 9) {
          z.ux = num(val[7], path);
          z.uy = num(val[8], path);
        } else {
          z.K = num(val[7], path);
        }
        cfg.zones.push_back(std::move(z));
      } else if (key == "upwind") {
        need(1);
        if (val[0] == "centered") cfg.upwind = UpwindMode::CenteredTheta;
        else if (val[0] == "full") cfg.upwind = UpwindMode::FullUpwind;
        else throw ConfigError(path + ": expected centered|full");
      } else throw ConfigError(path + ": unknown key");
    } else if (section == "darcy") {
      need(1);
      cfg.darcy = true;
      if (key == "head_top") cfg.head_top = num(val[0], path);
      else if (key == "head_bottom") cfg.head_bottom = num(val[0], path);
      else throw ConfigError(path + ": unknown key");
    } else if (section == "decomposition") {
      if (key == "box") {
        need(4);
        cfg.boxes.push_back({num(val[0], path), num(val[1], path), num(val[2], path),
                             num(val[3], path)});
      } else if (key == "steps") {
        for (auto& t : val) cfg.steps.push_back(static_cast<int>(num(t, path)));
      } else if (key == "master") {
        need(1);
        cfg.master = val[0];
      } else throw ConfigError(path + ": unknown key");
    } else if (section == "time") {
      need(1);
      if (key == "horizon") cfg.horizon = num(val[0], path);
      else if (key == "windows") cfg.windows = static_cast<int>(num(val[0], path));
      else throw ConfigError(path + ": unknown key");
    } else if (section == "method") {
      if (key == "name") { need(1); cfg.method = val[0]; }
      else if (key == "tol") { need(1); cfg.tol = num(val[0], path); }
      else if (key == "max_iter") { need(1); cfg.max_iter = static_cast<int>(num(val[0], path)); }
      else if (key == "alpha") {
        if (val.size() == 1 && (val[0] == "optimized" || val[0] == "optimized-onesided")) {
          cfg.alpha_mode = val[0];
        } else if (val.size() == 2) {
          cfg.alpha_mode = "explicit";
          cfg.alpha12 = num(val[0], path);
          cfg.alpha21 = num(val[1], path);
        } else throw ConfigError(path + ": expected 'optimized', 'optimized-onesided' or two numbers");
      } else if (key == "normalized_weights") {
        need(1);
        cfg.normalized_weights = val[0] == "true" || val[0] == "1";
      } else if (key == "initial_guess") {
        need(1);
        cfg.initial_guess = val[0];
      } else throw ConfigError(path + ": unknown key");
    } else if (section == "source") {
      if (key == "kind") { need(1); cfg.source_kind = val[0]; }
      else if (key == "params") { for (auto& t : val) cfg.source_params.push_back(num(t, path)); }
      else throw ConfigError(path + ": unknown key");
    } else if (section == "initial") {
      if (key == "kind") { need(1); cfg.initial_kind = val[0]; }
      else if (key == "zones") { cfg.initial_zones.assign(val.begin(), val.end()); }
      else throw ConfigError(path + ": unknown key");
    } else if (section == "reference") {
      need(1);
      if (key == "kind") cfg.reference = val[0];
      else throw ConfigError(path + ": unknown key");
    } else if (section == "output") {
      if (key == "snapshots") { for (auto& t : val) cfg.snapshot_times.push_back(num(t, path)); }
      else throw ConfigError(path + ": unknown key");
    } else if (section == "sweep") {
      need(1);
      if (key == "n") cfg.sweep_n = static_cast<int>(num(val[0], path));
      else if (key == "iterations") cfg.sweep_iterations = static_cast<int>(num(val[0], path));
      else if (key == "min") cfg.sweep_min = num(val[0], path);
      else if (key == "max") cfg.sweep_max = num(val[0], path);
      else throw ConfigError(path + ": unknown key");
    } else if (section == "study") {
      need(1);
      if (key == "levels") cfg.study_levels = static_cast<int>(num(val[0], path));
      else if (key == "reference_refine") cfg.reference_refine = static_cast<int>(num(val[0], path));
      else if (key == "steps_coarse") cfg.steps_coarse = static_cast<int>(num(val[0], path));
      else if (key == "steps_fine") cfg.steps_fine = static_cast<int>(num(val[0], path));
      else throw ConfigError(path + ": unknown key");
    } else {
      throw ConfigError(where + ": unknown section [" + section + "]");
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config(in);
}

void RunConfig::validate() const {
  if (x_coords.empty() && nx < 1) throw ConfigError("domain.nx: missing or < 1");
  if (y_coords.empty() && ny < 1) throw ConfigError("domain.ny: missing or < 1");
  if (!(horizon > 0)) throw ConfigError("time.horizon: must be positive");
  if (windows < 1) throw ConfigError("time.windows: must be >= 1");
  if (zones.empty()) throw ConfigError("zones: at least one zone required");
  if (method != "monodomain" && method != "gtp-schur" && method != "gtp-schur-nn" &&
      method != "gto-schwarz-gmres" && method != "oswr-jacobi")
    throw ConfigError("method.name: unknown method '" + method + "'");
  if (method != "monodomain" && boxes.size() < 2)
    throw ConfigError("decomposition.box: decomposed methods need >= 2 boxes");
  const size_t nsub = method == "monodomain" ? 1 : boxes.size();
  if (steps.size() != nsub)
    throw ConfigError("decomposition.steps: one interval count per subdomain required");
  for (int s : steps)
    if (s < 1) throw ConfigError("decomposition.steps: counts must be >= 1");
  if (!(tol > 0)) throw ConfigError("method.tol: must be positive");
  if (alpha_mode == "explicit" && (!(alpha12 > 0) || !(alpha21 > 0)))
    throw ConfigError("method.alpha: explicit Robin parameters must be positive");
  if (master != "lower" && master != "upper")
    throw ConfigError("decomposition.master: expected lower|upper");
  if (darcy) {
    for (const auto& z : zones)
      if (!(z.K > 0)) throw ConfigError("zones.zone." + z.name + ": darcy mode needs K > 0");
  }
  if (initial_kind == "zones" && initial_zones.empty())
    throw ConfigError("initial.zones: zone names required");
}

} // namespace gtdd
