#include "lsl/config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lsl/csvfmt.hpp"
#include "lsl/errors.hpp"

namespace lsl {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, int line) {
  try {
    std::size_t used = 0;
    double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    throw ParseError("line " + std::to_string(line) + ": expected a number, got '" + v + "'");
  }
}

long parse_long(const std::string& v, int line) {
  try {
    std::size_t used = 0;
    long x = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    throw ParseError("line " + std::to_string(line) + ": expected an integer, got '" + v + "'");
  }
}

std::vector<double> parse_list(const std::string& v, int line) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item), line));
  if (out.empty()) throw ParseError("line " + std::to_string(line) + ": empty list");
  return out;
}

Vec parse_vec(const std::string& v, int line) {
  std::vector<double> list = parse_list(v, line);
  if (list.size() > 3) throw ParseError("line " + std::to_string(line) + ": too many components");
  Vec out = vec0();
  for (std::size_t i = 0; i < list.size(); ++i) out[i] = list[i];
  return out;
}

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value, int line) {
  if (key == "run.id") cfg.run_id = value;
  else if (key == "dimension") cfg.dimension = static_cast<int>(parse_long(value, line));
  else if (key == "field.id") cfg.field_id = value;
  else if (key == "field.amplitude") cfg.field_amplitude = parse_double(value, line);
  else if (key == "field.period") cfg.field_period = parse_double(value, line);
  else if (key == "phi0.shape") cfg.phi0_shape = value;
  else if (key == "phi0.center") cfg.phi0_center = parse_vec(value, line);
  else if (key == "phi0.radius") cfg.phi0_radius = parse_double(value, line);
  else if (key == "phi0.axes") cfg.phi0_axes = parse_vec(value, line);
  else if (key == "phi0.normal") cfg.phi0_normal = parse_vec(value, line);
  else if (key == "phi0.offset") cfg.phi0_offset = parse_double(value, line);
  else if (key == "phi0.saturation") cfg.phi0_saturation = parse_double(value, line);
  else if (key == "mode") {
    if (value == "linear_transport") cfg.mode.kind = SourceKind::linear_transport;
    else if (value == "grad_preserving") cfg.mode.kind = SourceKind::grad_preserving;
    else if (value == "grad_bounding") cfg.mode.kind = SourceKind::grad_bounding;
    else throw ParseError("line " + std::to_string(line) + ": unknown mode '" + value + "'");
  } else if (key == "mode.beta") cfg.mode.beta = parse_double(value, line);
  else if (key == "grid.n") cfg.grid_n = static_cast<int>(parse_long(value, line));
  else if (key == "time.T") cfg.T = parse_double(value, line);
  else if (key == "output_times") cfg.output_times = parse_list(value, line);
  else if (key == "tube.band") cfg.band = parse_double(value, line);
  else if (key == "tube.spacing") cfg.spacing = parse_double(value, line);
  else if (key == "tube.reseed_det") cfg.reseed_det = parse_double(value, line);
  else if (key == "ode.method") {
    if (value == "rk4_fixed") cfg.ode.method = OdeOptions::Method::rk4_fixed;
    else if (value == "rk45_adaptive") cfg.ode.method = OdeOptions::Method::rk45_adaptive;
    else throw ParseError("line " + std::to_string(line) + ": unknown ode method '" + value + "'");
  } else if (key == "ode.step") cfg.ode.step = parse_double(value, line);
  else if (key == "ode.abs_tol") cfg.ode.abs_tol = parse_double(value, line);
  else if (key == "ode.rel_tol") cfg.ode.rel_tol = parse_double(value, line);
  else if (key == "ode.max_steps") cfg.ode.max_steps = parse_long(value, line);
  else if (key == "scheme.cfl") cfg.cfl = parse_double(value, line);
  else if (key == "scheme.integrator") {
    if (value == "euler") cfg.integrator = SchemeConfig::Integrator::euler;
    else if (value == "rk2_tvd") cfg.integrator = SchemeConfig::Integrator::rk2_tvd;
    else throw ParseError("line " + std::to_string(line) + ": unknown integrator '" + value + "'");
  } else if (key == "cutoff.eps") cfg.cutoff_eps = parse_double(value, line);
  else if (key == "analysis.m0") cfg.m0 = parse_double(value, line);
  else if (key == "checks") cfg.checks = value;
  else if (key == "seed") cfg.seed = static_cast<unsigned long>(parse_long(value, line));
  else throw UnknownKey("line " + std::to_string(line) + ": unknown key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> tokenize(const std::string& text,
                                                          std::vector<int>* lines) {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::stringstream ss(text);
  std::string raw;
  int line = 0;
  while (std::getline(ss, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(line) + ": expected 'key = value'");
    pairs.emplace_back(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    lines->push_back(line);
  }
  return pairs;
}

const std::map<std::string, std::pair<std::string, std::string>>& preset_registry() {
  static const std::map<std::string, std::pair<std::string, std::string>> reg = {
      {"zero-field-smoke",
       {"stationary sanity run: zero velocity, everything must stay put",
        "run.id = zero-field-smoke\n"
        "dimension = 2\n"
        "field.id = zero\n"
        "phi0.shape = circle\n"
        "phi0.center = 0.5,0.5\n"
        "phi0.radius = 0.2\n"
        "phi0.saturation = 0.05\n"
        "mode = linear_transport\n"
        "grid.n = 32\n"
        "time.T = 0.5\n"
        "output_times = 0.25,0.5\n"
        "tube.band = 0.03\n"
        "tube.spacing = 0.01\n"}},
      {"rotation2d",
       {"rigid rotation (bump-localized) of an off-center circle, gradient-preserving",
        "run.id = rotation2d\n"
        "dimension = 2\n"
        "field.id = rotation-bump\n"
        "field.amplitude = 1\n"
        "phi0.shape = circle\n"
        "phi0.center = 0.5,0.65\n"
        "phi0.radius = 0.12\n"
        "phi0.saturation = 0.05\n"
        "mode = grad_preserving\n"
        "grid.n = 128\n"
        "time.T = 1\n"
        "output_times = 0.25,0.5,1\n"
        "tube.band = 0.04\n"
        "tube.spacing = 0.008\n"}},
      {"vortex2d",
       {"steady single-vortex deformation of a circle, gradient-preserving",
        "run.id = vortex2d\n"
        "dimension = 2\n"
        "field.id = vortex\n"
        "field.amplitude = 0.25\n"
        "field.period = 0\n"
        "phi0.shape = circle\n"
        "phi0.center = 0.5,0.7\n"
        "phi0.radius = 0.15\n"
        "phi0.saturation = 0.05\n"
        "mode = grad_preserving\n"
        "grid.n = 128\n"
        "time.T = 1\n"
        "output_times = 0.25,0.5,1\n"
        "tube.band = 0.04\n"
        "tube.spacing = 0.008\n"
        "analysis.m0 = 0.01\n"}},
      {"vortex2d-reversal",
       {"time-reversing vortex: the interface must return to the initial circle",
        "run.id = vortex2d-reversal\n"
        "dimension = 2\n"
        "field.id = vortex\n"
        "field.amplitude = 0.25\n"
        "field.period = 2\n"
        "phi0.shape = circle\n"
        "phi0.center = 0.5,0.7\n"
        "phi0.radius = 0.15\n"
        "phi0.saturation = 0.05\n"
        "mode = linear_transport\n"
        "grid.n = 128\n"
        "time.T = 2\n"
        "output_times = 0.25,0.5,1,2\n"
        "tube.band = 0.04\n"
        "tube.spacing = 0.008\n"}},
      {"shear2d",
       {"horizontal shear of a centered circle, gradient-preserving",
        "run.id = shear2d\n"
        "dimension = 2\n"
        "field.id = shear\n"
        "field.amplitude = 0.35\n"
        "phi0.shape = circle\n"
        "phi0.center = 0.5,0.5\n"
        "phi0.radius = 0.2\n"
        "phi0.saturation = 0.05\n"
        "mode = grad_preserving\n"
        "grid.n = 128\n"
        "time.T = 1\n"
        "output_times = 0.25,0.5,1\n"
        "tube.band = 0.04\n"
        "tube.spacing = 0.008\n"}},
      {"vortex3d-smoke",
       {"3D deformation-field transport of a sphere (short horizon)",
        "run.id = vortex3d-smoke\n"
        "dimension = 3\n"
        "field.id = vortex\n"
        "field.amplitude = 0.3\n"
        "field.period = 0\n"
        "phi0.shape = sphere\n"
        "phi0.center = 0.35,0.35,0.35\n"
        "phi0.radius = 0.15\n"
        "phi0.saturation = 0.05\n"
        "mode = linear_transport\n"
        "grid.n = 64\n"
        "time.T = 0.5\n"
        "output_times = 0.25,0.5\n"
        "tube.band = 0.03\n"
        "tube.spacing = 0.015\n"}},
      {"gradbound2d",
       {"gradient-bounding source under a mild shear; |grad phi| pinned near beta",
        "run.id = gradbound2d\n"
        "dimension = 2\n"
        "field.id = shear\n"
        "field.amplitude = 0.25\n"
        "phi0.shape = circle\n"
        "phi0.center = 0.5,0.5\n"
        "phi0.radius = 0.2\n"
        "phi0.saturation = 0.05\n"
        "mode = grad_bounding\n"
        "mode.beta = 1\n"
        "grid.n = 128\n"
        "time.T = 1\n"
        "output_times = 0.25,0.5,1\n"
        "tube.band = 0.04\n"
        "tube.spacing = 0.008\n"}},
  };
  return reg;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  std::vector<int> lines;
  auto pairs = tokenize(text, &lines);

  RunConfig cfg;
  // resolve a preset first, if any
  std::string preset;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].first != "preset") continue;
    if (!preset.empty())
      throw ParseError("line " + std::to_string(lines[i]) + ": duplicate preset key");
    preset = pairs[i].second;
  }
  if (!preset.empty()) {
    cfg = parse_config(preset_text(preset));
    cfg.preset_name = preset;
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].first == "preset") continue;
    apply_key(cfg, pairs[i].first, pairs[i].second, lines[i]);
  }
  cfg.validate();
  return cfg;
}

void RunConfig::validate() const {
  if (dimension != 2 && dimension != 3) throw ValidationError("dimension must be 2 or 3");
  if (grid_n < 8) throw ValidationError("grid.n must be >= 8");
  if (!(T > 0)) throw ValidationError("time.T must be > 0");
  if (output_times.empty()) throw ValidationError("output_times must be nonempty");
  for (std::size_t i = 0; i < output_times.size(); ++i) {
    if (output_times[i] < 0 || output_times[i] > T + 1e-12)
      throw ValidationError("output_times must lie in [0, T]");
    if (i > 0 && !(output_times[i] > output_times[i - 1]))
      throw ValidationError("output_times must be strictly increasing");
  }
  if (!(band > 0)) throw ValidationError("tube.band must be > 0");
  if (!(spacing > 0)) throw ValidationError("tube.spacing must be > 0");
  if (!(cfl > 0) || cfl > 0.9) throw ValidationError("scheme.cfl must be in (0, 0.9]");
  if (mode.kind == SourceKind::grad_bounding && !(mode.beta > 0))
    throw ValidationError("mode.beta must be > 0");
  if (phi0_saturation < 0) throw ValidationError("phi0.saturation must be >= 0");
  if (cutoff_eps < 0) throw ValidationError("cutoff.eps must be >= 0");
  if (m0 < 0) throw ValidationError("analysis.m0 must be >= 0");
  ode.validate();
  static const char* fields[] = {"zero", "rotation-bump", "vortex", "shear"};
  if (std::find_if(std::begin(fields), std::end(fields),
                   [&](const char* f) { return field_id == f; }) == std::end(fields))
    throw ValidationError("unknown field.id '" + field_id + "'");
  static const char* shapes[] = {"circle", "sphere", "ellipse", "affine"};
  if (std::find_if(std::begin(shapes), std::end(shapes),
                   [&](const char* s) { return phi0_shape == s; }) == std::end(shapes))
    throw ValidationError("unknown phi0.shape '" + phi0_shape + "'");
}

DomainSpec RunConfig::make_domain() const { return DomainSpec::unit_box(dimension); }

VelocityFieldModel RunConfig::make_field() const {
  Vec c = vec0();
  for (int i = 0; i < dimension; ++i) c[i] = 0.5;
  if (field_id == "zero") return zero_field(dimension);
  if (field_id == "rotation-bump")
    return rotation_bump_field(dimension, c, field_amplitude, 0.30, 0.49);
  if (field_id == "vortex")
    return dimension == 2 ? vortex_field_2d(field_amplitude, field_period)
                          : vortex_field_3d(field_amplitude, field_period);
  if (field_id == "shear") return shear_field(dimension, field_amplitude);
  throw ValidationError("unknown field.id '" + field_id + "'");
}

LevelSetModel RunConfig::make_phi0() const {
  LevelSetModel m;
  if (phi0_shape == "circle" || phi0_shape == "sphere")
    m = circle_levelset(dimension, phi0_center, phi0_radius);
  else if (phi0_shape == "ellipse")
    m = ellipse_levelset(dimension, phi0_center, phi0_axes);
  else
    m = affine_levelset(dimension, phi0_normal, phi0_offset);
  if (phi0_saturation > 0) m = saturate(std::move(m), phi0_saturation);
  return m;
}

std::map<std::string, std::string> RunConfig::echo() const {
  auto vec_str = [&](const Vec& v) {
    std::string s = g17(v[0]);
    for (int i = 1; i < dimension; ++i) s += "," + g17(v[i]);
    return s;
  };
  std::map<std::string, std::string> e;
  if (!preset_name.empty()) e["preset"] = preset_name;
  e["run.id"] = run_id;
  e["dimension"] = std::to_string(dimension);
  e["field.id"] = field_id;
  e["field.amplitude"] = g17(field_amplitude);
  e["field.period"] = g17(field_period);
  e["phi0.shape"] = phi0_shape;
  e["phi0.center"] = vec_str(phi0_center);
  e["phi0.radius"] = g17(phi0_radius);
  if (phi0_shape == "ellipse") e["phi0.axes"] = vec_str(phi0_axes);
  if (phi0_shape == "affine") {
    e["phi0.normal"] = vec_str(phi0_normal);
    e["phi0.offset"] = g17(phi0_offset);
  }
  e["phi0.saturation"] = g17(phi0_saturation);
  e["mode"] = mode.kind == SourceKind::linear_transport ? "linear_transport"
              : mode.kind == SourceKind::grad_preserving ? "grad_preserving"
                                                         : "grad_bounding";
  if (mode.kind == SourceKind::grad_bounding) e["mode.beta"] = g17(mode.beta);
  e["grid.n"] = std::to_string(grid_n);
  e["time.T"] = g17(T);
  std::string ot = g17(output_times[0]);
  for (std::size_t i = 1; i < output_times.size(); ++i) ot += "," + g17(output_times[i]);
  e["output_times"] = ot;
  e["tube.band"] = g17(band);
  e["tube.spacing"] = g17(spacing);
  e["tube.reseed_det"] = g17(reseed_det);
  e["ode.method"] = ode.method == OdeOptions::Method::rk4_fixed ? "rk4_fixed" : "rk45_adaptive";
  e["ode.step"] = g17(ode.step);
  e["ode.abs_tol"] = g17(ode.abs_tol);
  e["ode.rel_tol"] = g17(ode.rel_tol);
  e["ode.max_steps"] = std::to_string(ode.max_steps);
  e["scheme.cfl"] = g17(cfl);
  e["scheme.integrator"] = integrator == SchemeConfig::Integrator::euler ? "euler" : "rk2_tvd";
  e["cutoff.eps"] = g17(cutoff_eps);
  e["analysis.m0"] = g17(m0);
  e["checks"] = checks;
  e["seed"] = std::to_string(seed);
  return e;
}

std::vector<PresetInfo> list_presets() {
  std::vector<PresetInfo> out;
  for (const auto& [name, entry] : preset_registry()) out.push_back({name, entry.first});
  return out;
}

const std::string& preset_text(const std::string& name) {
  const auto& reg = preset_registry();
  auto it = reg.find(name);
  if (it == reg.end()) throw UnknownKey("unknown preset '" + name + "'");
  return it->second.second;
}

}  // namespace lsl
