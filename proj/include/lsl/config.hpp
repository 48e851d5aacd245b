#pragma once

#include <map>
#include <string>
#include <vector>

#include "lsl/characteristics.hpp"
#include "lsl/domain.hpp"
#include "lsl/eulerian.hpp"
#include "lsl/levelset.hpp"
#include "lsl/ode.hpp"
#include "lsl/velocity.hpp"

namespace lsl {

// A fully resolved experiment description. Parsed from a flat dotted-key
// text format (one `key = value` per line, `#` comments); a `preset` key
// loads one of the registered preset texts first, subsequent keys override.
struct RunConfig {
  std::string preset_name;
  std::string run_id = "run";
  int dimension = 2;

  std::string field_id = "zero";
  double field_amplitude = 1.0;
  double field_period = 0;  // > 0: multiply by cos(pi t / period)

  std::string phi0_shape = "circle";
  Vec phi0_center = {0.5, 0.5, 0.5};
  double phi0_radius = 0.2;
  Vec phi0_axes = {0.2, 0.1, 0.1};
  Vec phi0_normal = {1, 0, 0};
  double phi0_offset = -0.5;
  double phi0_saturation = 0;  // 0: off

  SourceMode mode = SourceMode::linear_transport();
  int grid_n = 64;
  double T = 1.0;
  std::vector<double> output_times = {1.0};

  double band = 0.05;
  double spacing = 0.01;
  double reseed_det = 0.1;

  OdeOptions ode;
  double cfl = 0.4;
  SchemeConfig::Integrator integrator = SchemeConfig::Integrator::rk2_tvd;
  double cutoff_eps = 0;  // 0: auto (quarter of the minimal interface-orbit boundary distance)
  double m0 = 0;          // 0: auto (half the band's value range)
  std::string checks = "all";
  unsigned long seed = 1;

  void validate() const;
  DomainSpec make_domain() const;  // unit box
  VelocityFieldModel make_field() const;
  LevelSetModel make_phi0() const;
  std::map<std::string, std::string> echo() const;  // resolved key/value pairs
};

RunConfig parse_config(const std::string& text);

struct PresetInfo {
  std::string name;
  std::string description;
};

std::vector<PresetInfo> list_presets();
const std::string& preset_text(const std::string& name);  // UnknownKey if absent

}  // namespace lsl
