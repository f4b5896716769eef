#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ewod/scheme.hpp"

namespace ewod {

enum class Preset { Move, Split, Merge, Custom };

struct RunConfig {
  Preset preset = Preset::Move;
  ChannelGeometry geometry;
  int nx = 40, ny_fluid = 8, ny_plate = 4, refine = 0;
  MaterialParams material;
  SchemeParams scheme;
  std::vector<DropletPrimitive> droplets;
  double V00 = 20.0;
  bool desk_scale = true;
  int n_steps = 500;
  int vtk_every = 100;
  std::string out_dir = "out";
  unsigned long seed = 0;  // reserved; the physics is deterministic

  void validate() const;
};

struct ConfigError : std::runtime_error {
  std::string key;
  int line;
  ConfigError(const std::string& k, int ln, const std::string& what)
      : std::runtime_error("config error at line " + std::to_string(ln) + ", key '" + k +
                           "': " + what),
        key(k),
        line(ln) {}
};

RunConfig make_preset(Preset p);
Preset preset_from_string(const std::string& s);  // throws std::invalid_argument
std::string preset_to_string(Preset p);

/// Line-oriented `key = value` format with `#` comments and dotted section
/// keys. Unknown keys are rejected with the offending key and line named.
RunConfig parse_config(const std::string& text);
std::string serialize_config(const RunConfig& cfg);

}  // namespace ewod
