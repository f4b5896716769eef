#include "ewod/config.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace ewod {

namespace {
constexpr double kPi = 3.14159265358979323846;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, int line, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key, line, "cannot parse '" + v + "' as a number");
  }
}

long parse_int(const std::string& key, int line, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key, line, "cannot parse '" + v + "' as an integer");
  }
}

bool parse_bool(const std::string& key, int line, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError(key, line, "cannot parse '" + v + "' as a boolean");
}

std::vector<ElectrodeSegment> parse_electrodes(const std::string& key, int line,
                                               const std::string& v, Plate plate) {
  // "x0 x1 V; x0 x1 V; ..."
  std::vector<ElectrodeSegment> out;
  std::stringstream ss(v);
  std::string seg;
  while (std::getline(ss, seg, ';')) {
    seg = trim(seg);
    if (seg.empty()) continue;
    std::stringstream fs(seg);
    double x0, x1, V;
    if (!(fs >> x0 >> x1 >> V))
      throw ConfigError(key, line, "electrode segment must be 'x0 x1 V', got '" + seg + "'");
    std::string rest;
    if (fs >> rest) throw ConfigError(key, line, "trailing characters in '" + seg + "'");
    out.push_back({plate, x0, x1, V});
  }
  if (out.empty()) throw ConfigError(key, line, "no segments given");
  return out;
}

DropletPrimitive parse_droplet(const std::string& key, int line, const std::string& v) {
  std::stringstream fs(v);
  std::string kind;
  fs >> kind;
  DropletPrimitive d;
  int sign = +1;
  if (!kind.empty() && kind[0] == '-') {
    sign = -1;
    kind = kind.substr(1);
  }
  d.sign = sign;
  bool ok = false;
  if (kind == "circle") {
    ok = bool(fs >> d.center.x >> d.center.y >> d.radius);
    d.kind = DropletPrimitive::Kind::Circle;
  } else if (kind == "ellipse") {
    ok = bool(fs >> d.center.x >> d.center.y >> d.semi_axes.x >> d.semi_axes.y);
    d.kind = DropletPrimitive::Kind::Ellipse;
  } else if (kind == "halfplane") {
    ok = bool(fs >> d.center.x >> d.center.y >> d.normal.x >> d.normal.y);
    d.kind = DropletPrimitive::Kind::HalfPlane;
  } else {
    throw ConfigError(key, line, "unknown droplet kind '" + kind + "'");
  }
  std::string rest;
  if (!ok || (fs >> rest))
    throw ConfigError(key, line, "cannot parse droplet spec '" + v + "'");
  return d;
}

void apply_preset_actuation(RunConfig& c) {
  c.geometry.electrodes.clear();
  switch (c.preset) {
    case Preset::Move:
      c.geometry.electrodes.push_back({Plate::Bottom, 0.0, 5.0, c.V00});
      break;
    case Preset::Split:
      c.geometry.electrodes.push_back({Plate::Bottom, -5.0, -1.5, c.V00});
      c.geometry.electrodes.push_back({Plate::Bottom, 1.5, 5.0, c.V00});
      break;
    case Preset::Merge:
      c.geometry.electrodes.push_back({Plate::Bottom, -0.5, 0.5, c.V00});
      break;
    case Preset::Custom:
      break;
  }
}

}  // namespace

Preset preset_from_string(const std::string& s) {
  if (s == "move") return Preset::Move;
  if (s == "split") return Preset::Split;
  if (s == "merge") return Preset::Merge;
  if (s == "custom") return Preset::Custom;
  throw std::invalid_argument("unknown preset '" + s + "'");
}

std::string preset_to_string(Preset p) {
  switch (p) {
    case Preset::Move: return "move";
    case Preset::Split: return "split";
    case Preset::Merge: return "merge";
    default: return "custom";
  }
}

RunConfig make_preset(Preset p) {
  RunConfig c;
  c.preset = p;
  c.geometry.x_min = -5;
  c.geometry.x_max = 5;
  c.geometry.y_fluid_min = 0;
  c.geometry.y_fluid_max = 1;
  c.geometry.plate_thickness = 0.5;
  c.material.delta = 0.1;  // desk-scale interface thickness
  c.material.theta_s = 2.0 * kPi / 3.0;
  c.scheme.dt = 1e-3;
  c.scheme.A_stab = 1.0;
  c.scheme.B_stab = stabilization_bounds(c.material).B_min;
  switch (p) {
    case Preset::Move: {
      DropletPrimitive d;
      d.kind = DropletPrimitive::Kind::Circle;
      d.center = {0.0, 0.0};
      d.radius = 0.5;
      c.droplets = {d};
      c.n_steps = 500;
      break;
    }
    case Preset::Split: {
      DropletPrimitive d;
      d.kind = DropletPrimitive::Kind::Ellipse;
      d.center = {0.0, 0.0};
      d.semi_axes = {2.5, 0.5};
      c.droplets = {d};
      c.n_steps = 3000;
      break;
    }
    case Preset::Merge: {
      DropletPrimitive a, b;
      a.center = {-0.7, 0.0};
      a.radius = 0.5;
      b.center = {0.7, 0.0};
      b.radius = 0.5;
      c.droplets = {a, b};
      c.n_steps = 3000;
      break;
    }
    case Preset::Custom:
      c.droplets.clear();
      c.n_steps = 10;
      break;
  }
  apply_preset_actuation(c);
  return c;
}

void RunConfig::validate() const {
  geometry.validate();
  material.validate();
  if (!(scheme.dt > 0)) throw std::invalid_argument("scheme.dt must be > 0");
  if (nx < 1 || ny_fluid < 1 || ny_plate < 1)
    throw std::invalid_argument("mesh resolution must be >= 1");
  if (refine < 0) throw std::invalid_argument("mesh.refine must be >= 0");
  if (n_steps < 0) throw std::invalid_argument("run.n_steps must be >= 0");
  if (vtk_every < 0) throw std::invalid_argument("run.vtk_every must be >= 0");
  if (scheme.picard_max < 1) throw std::invalid_argument("scheme.picard_max must be >= 1");
  const auto bounds = stabilization_bounds(material);
  if (scheme.A_stab < bounds.A_min || scheme.B_stab < bounds.B_min)
    std::fprintf(stderr,
                 "warning: stabilization below the admissible bound "
                 "(A=%g >= %g, B=%g >= %g expected); the energy law may fail\n",
                 scheme.A_stab, bounds.A_min, scheme.B_stab, bounds.B_min);
  if (material.delta_warning())
    std::fprintf(stderr, "warning: interface thickness delta=%g is large for this channel\n",
                 material.delta);
}

RunConfig parse_config(const std::string& text) {
  // first pass: preset selection shapes the defaults
  std::istringstream in0(text);
  std::string line;
  Preset preset = Preset::Move;
  {
    int ln = 0;
    while (std::getline(in0, line)) {
      ++ln;
      auto s = trim(line.substr(0, line.find('#')));
      if (s.empty()) continue;
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError(s, ln, "expected 'key = value'");
      const auto key = trim(s.substr(0, eq));
      const auto val = trim(s.substr(eq + 1));
      if (key == "run.preset") {
        try {
          preset = preset_from_string(val);
        } catch (const std::exception& e) {
          throw ConfigError(key, ln, e.what());
        }
      }
    }
  }
  RunConfig c = make_preset(preset);
  bool bstab_set = false, electrodes_set = false, droplets_cleared = false, v00_set = false;

  std::istringstream in(text);
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    auto s = trim(line.substr(0, line.find('#')));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(s, ln, "expected 'key = value'");
    const auto key = trim(s.substr(0, eq));
    const auto val = trim(s.substr(eq + 1));
    if (val.empty()) throw ConfigError(key, ln, "empty value");

    auto num = [&] { return parse_double(key, ln, val); };
    auto integer = [&] { return parse_int(key, ln, val); };
    auto pos = [&](double x) {
      if (!(x > 0.0)) throw ConfigError(key, ln, "value must be > 0");
      return x;
    };

    if (key == "run.preset") {
      // handled in the first pass
    } else if (key == "run.n_steps") {
      c.n_steps = static_cast<int>(integer());
      if (c.n_steps < 0) throw ConfigError(key, ln, "value must be >= 0");
    } else if (key == "run.vtk_every") {
      c.vtk_every = static_cast<int>(integer());
      if (c.vtk_every < 0) throw ConfigError(key, ln, "value must be >= 0");
    } else if (key == "run.out_dir") {
      c.out_dir = val;
    } else if (key == "run.seed") {
      c.seed = static_cast<unsigned long>(integer());
    } else if (key == "run.desk_scale") {
      c.desk_scale = parse_bool(key, ln, val);
      if (!c.desk_scale) {
        c.material.delta = 0.05;
        c.nx = 160;
        c.ny_fluid = 16;
        c.ny_plate = 8;
      }
    } else if (key == "run.V00") {
      c.V00 = num();
      v00_set = true;
    } else if (key == "geometry.x_min") {
      c.geometry.x_min = num();
    } else if (key == "geometry.x_max") {
      c.geometry.x_max = num();
    } else if (key == "geometry.y_min") {
      c.geometry.y_fluid_min = num();
    } else if (key == "geometry.y_max") {
      c.geometry.y_fluid_max = num();
    } else if (key == "geometry.plate_thickness") {
      c.geometry.plate_thickness = pos(num());
    } else if (key == "mesh.nx") {
      c.nx = static_cast<int>(integer());
    } else if (key == "mesh.ny_fluid") {
      c.ny_fluid = static_cast<int>(integer());
    } else if (key == "mesh.ny_plate") {
      c.ny_plate = static_cast<int>(integer());
    } else if (key == "mesh.refine") {
      c.refine = static_cast<int>(integer());
    } else if (key == "material.rho1") {
      c.material.rho1 = pos(num());
    } else if (key == "material.rho2") {
      c.material.rho2 = pos(num());
    } else if (key == "material.eta1") {
      c.material.eta1 = pos(num());
    } else if (key == "material.eta2") {
      c.material.eta2 = pos(num());
    } else if (key == "material.K1") {
      c.material.K1 = pos(num());
    } else if (key == "material.K2") {
      c.material.K2 = pos(num());
    } else if (key == "material.K_slaved") {
      c.material.K_slaved = parse_bool(key, ln, val);
    } else if (key == "material.eps1") {
      c.material.eps1 = pos(num());
    } else if (key == "material.eps2") {
      c.material.eps2 = pos(num());
    } else if (key == "material.eps_D") {
      c.material.eps_D = pos(num());
    } else if (key == "material.gamma") {
      c.material.gamma = pos(num());
    } else if (key == "material.delta") {
      c.material.delta = pos(num());
    } else if (key == "material.lambda") {
      c.material.lambda = pos(num());
    } else if (key == "material.mobility") {
      c.material.M_mobility = pos(num());
    } else if (key == "material.mobility2") {
      c.material.M_mobility2 = pos(num());
    } else if (key == "material.mobility_slaved") {
      c.material.mobility_slaved = parse_bool(key, ln, val);
    } else if (key == "material.alpha") {
      c.material.alpha = pos(num());
    } else if (key == "material.beta") {
      c.material.beta_const = pos(num());
    } else if (key == "material.theta_s_degrees") {
      c.material.theta_s = num() * kPi / 180.0;
    } else if (key == "material.theta_s_rad") {
      c.material.theta_s = num();
    } else if (key == "material.pinning.enabled") {
      if (parse_bool(key, ln, val)) {
        if (!c.material.pinning) c.material.pinning = PinningParams{};
      } else {
        c.material.pinning.reset();
      }
    } else if (key == "material.pinning.T_p") {
      if (!c.material.pinning) c.material.pinning = PinningParams{};
      c.material.pinning->T_p = pos(num());
    } else if (key == "material.pinning.width") {
      if (!c.material.pinning) c.material.pinning = PinningParams{};
      c.material.pinning->transition_width = pos(num());
    } else if (key == "scheme.dt") {
      c.scheme.dt = pos(num());
    } else if (key == "scheme.A_stab") {
      c.scheme.A_stab = num();
    } else if (key == "scheme.B_stab") {
      c.scheme.B_stab = num();
      bstab_set = true;
    } else if (key == "scheme.mode") {
      if (val == "split") c.scheme.mode = SchemeMode::Split;
      else if (val == "coupled") c.scheme.mode = SchemeMode::Coupled;
      else throw ConfigError(key, ln, "mode must be 'split' or 'coupled'");
    } else if (key == "scheme.picard_tol") {
      c.scheme.picard_tol = pos(num());
    } else if (key == "scheme.picard_max") {
      c.scheme.picard_max = static_cast<int>(integer());
    } else if (key == "scheme.picard_damping") {
      c.scheme.picard_damping = pos(num());
    } else if (key == "scheme.tol_spd") {
      c.scheme.tol_spd = pos(num());
    } else if (key == "scheme.tol_nonsym") {
      c.scheme.tol_nonsym = pos(num());
    } else if (key == "scheme.max_iter") {
      c.scheme.max_iter = static_cast<int>(integer());
    } else if (key == "scheme.cfl_c1") {
      c.scheme.cfl_c1 = pos(num());
    } else if (key == "scheme.cfl_c2") {
      c.scheme.cfl_c2 = pos(num());
    } else if (key == "electrode.bottom") {
      if (!electrodes_set) {
        c.geometry.electrodes.clear();
        electrodes_set = true;
      }
      for (auto& e : parse_electrodes(key, ln, val, Plate::Bottom))
        c.geometry.electrodes.push_back(e);
    } else if (key == "electrode.top") {
      if (!electrodes_set) {
        c.geometry.electrodes.clear();
        electrodes_set = true;
      }
      for (auto& e : parse_electrodes(key, ln, val, Plate::Top))
        c.geometry.electrodes.push_back(e);
    } else if (key.rfind("droplet.", 0) == 0) {
      if (!droplets_cleared) {
        c.droplets.clear();
        droplets_cleared = true;
      }
      c.droplets.push_back(parse_droplet(key, ln, val));
    } else {
      throw ConfigError(key, ln, "unknown key");
    }
  }

  if (v00_set && !electrodes_set) apply_preset_actuation(c);
  if (!bstab_set) c.scheme.B_stab = stabilization_bounds(c.material).B_min;
  try {
    c.validate();
  } catch (const std::exception& e) {
    throw ConfigError("(config)", 0, e.what());
  }
  return c;
}

std::string serialize_config(const RunConfig& c) {
  char buf[128];
  std::string out;
  auto num = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s = %.17g\n", key, v);
    out += buf;
  };
  auto integer = [&](const char* key, long v) {
    std::snprintf(buf, sizeof buf, "%s = %ld\n", key, v);
    out += buf;
  };
  auto str = [&](const char* key, const std::string& v) { out += std::string(key) + " = " + v + "\n"; };

  str("run.preset", "custom");  // everything below is explicit
  integer("run.n_steps", c.n_steps);
  integer("run.vtk_every", c.vtk_every);
  str("run.out_dir", c.out_dir);
  integer("run.seed", static_cast<long>(c.seed));
  str("run.desk_scale", c.desk_scale ? "true" : "false");
  num("run.V00", c.V00);
  num("geometry.x_min", c.geometry.x_min);
  num("geometry.x_max", c.geometry.x_max);
  num("geometry.y_min", c.geometry.y_fluid_min);
  num("geometry.y_max", c.geometry.y_fluid_max);
  num("geometry.plate_thickness", c.geometry.plate_thickness);
  integer("mesh.nx", c.nx);
  integer("mesh.ny_fluid", c.ny_fluid);
  integer("mesh.ny_plate", c.ny_plate);
  integer("mesh.refine", c.refine);
  num("material.rho1", c.material.rho1);
  num("material.rho2", c.material.rho2);
  num("material.eta1", c.material.eta1);
  num("material.eta2", c.material.eta2);
  num("material.K1", c.material.K1);
  num("material.K2", c.material.K2);
  str("material.K_slaved", c.material.K_slaved ? "true" : "false");
  num("material.eps1", c.material.eps1);
  num("material.eps2", c.material.eps2);
  num("material.eps_D", c.material.eps_D);
  num("material.gamma", c.material.gamma);
  num("material.delta", c.material.delta);
  num("material.lambda", c.material.lambda);
  num("material.mobility", c.material.M_mobility);
  num("material.mobility2", c.material.M_mobility2);
  str("material.mobility_slaved", c.material.mobility_slaved ? "true" : "false");
  num("material.alpha", c.material.alpha);
  num("material.beta", c.material.beta_const);
  num("material.theta_s_rad", c.material.theta_s);
  str("material.pinning.enabled", c.material.pinning ? "true" : "false");
  if (c.material.pinning) {
    num("material.pinning.T_p", c.material.pinning->T_p);
    num("material.pinning.width", c.material.pinning->transition_width);
  }
  num("scheme.dt", c.scheme.dt);
  num("scheme.A_stab", c.scheme.A_stab);
  num("scheme.B_stab", c.scheme.B_stab);
  str("scheme.mode", c.scheme.mode == SchemeMode::Split ? "split" : "coupled");
  num("scheme.picard_tol", c.scheme.picard_tol);
  integer("scheme.picard_max", c.scheme.picard_max);
  num("scheme.picard_damping", c.scheme.picard_damping);
  num("scheme.tol_spd", c.scheme.tol_spd);
  num("scheme.tol_nonsym", c.scheme.tol_nonsym);
  integer("scheme.max_iter", c.scheme.max_iter);
  num("scheme.cfl_c1", c.scheme.cfl_c1);
  num("scheme.cfl_c2", c.scheme.cfl_c2);
  auto emit_electrodes = [&](Plate p, const char* key) {
    std::string v;
    for (const auto& e : c.geometry.electrodes) {
      if (e.plate != p) continue;
      std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g; ", e.x0, e.x1, e.voltage);
      v += buf;
    }
    if (!v.empty()) str(key, v.substr(0, v.size() - 2));
  };
  emit_electrodes(Plate::Bottom, "electrode.bottom");
  emit_electrodes(Plate::Top, "electrode.top");
  int di = 0;
  for (const auto& d : c.droplets) {
    std::string key = "droplet." + std::to_string(++di);
    const char* sgn = d.sign < 0 ? "-" : "";
    switch (d.kind) {
      case DropletPrimitive::Kind::Circle:
        std::snprintf(buf, sizeof buf, "%scircle %.17g %.17g %.17g", sgn, d.center.x,
                      d.center.y, d.radius);
        break;
      case DropletPrimitive::Kind::Ellipse:
        std::snprintf(buf, sizeof buf, "%sellipse %.17g %.17g %.17g %.17g", sgn, d.center.x,
                      d.center.y, d.semi_axes.x, d.semi_axes.y);
        break;
      case DropletPrimitive::Kind::HalfPlane:
        std::snprintf(buf, sizeof buf, "%shalfplane %.17g %.17g %.17g %.17g", sgn, d.center.x,
                      d.center.y, d.normal.x, d.normal.y);
        break;
    }
    str(key.c_str(), buf);
  }
  return out;
}

}  // namespace ewod
