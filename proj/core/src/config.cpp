#include "slide/config.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <set>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "slide/errors.hpp"

namespace slide {

int SimParams::n_steps() const {
  return static_cast<int>(std::llround(duration_s / dt_s));
}

void SimParams::validate() const {
  if (!(dt_s > 0.0) || !std::isfinite(dt_s))
    throw InvalidInput("dt_s must be positive");
  if (!(duration_s >= dt_s))
    throw InvalidInput("duration_s must cover at least one step");
  if (!(rho_inf >= 0.0) || !(rho_inf <= 1.0))
    throw InvalidInput("rho_inf must lie in [0, 1]");
}

namespace {

namespace pt = boost::property_tree;

double parse_number(const std::string& key, const std::string& raw) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(raw, &pos);
  } catch (const std::exception&) {
    throw InvalidInput("config key " + key + ": not a number: '" + raw + "'");
  }
  while (pos < raw.size() &&
         std::isspace(static_cast<unsigned char>(raw[pos])))
    ++pos;
  if (pos != raw.size() || !std::isfinite(v))
    throw InvalidInput("config key " + key + ": not a number: '" + raw + "'");
  return v;
}

// One INI section with typo detection: every key must be consumed.
class Section {
 public:
  Section(const pt::ptree& root, std::string name) : name_(std::move(name)) {
    if (const auto child = root.get_child_optional(name_)) tree_ = &*child;
  }

  bool present() const { return tree_ != nullptr; }

  std::optional<std::string> raw(const std::string& key) {
    if (!tree_) return std::nullopt;
    seen_.insert(key);
    const auto value = tree_->get_optional<std::string>(key);
    if (!value) return std::nullopt;
    return *value;
  }

  void number(const std::string& key, double& out) {
    if (const auto v = raw(key)) out = parse_number(name_ + "." + key, *v);
  }

  void integer(const std::string& key, int& out) {
    if (const auto v = raw(key)) {
      const double d = parse_number(name_ + "." + key, *v);
      if (d != std::floor(d) || std::abs(d) > 1e9)
        throw InvalidInput("config key " + name_ + "." + key +
                           ": not an integer: '" + *v + "'");
      out = static_cast<int>(d);
    }
  }

  // pressure with a _pa/_bar key pair; giving both is ambiguous
  void pressure(const std::string& stem, double& out) {
    const auto pa = raw(stem + "_pa");
    const auto bar = raw(stem + "_bar");
    if (pa && bar)
      throw InvalidInput("config gives both " + stem + "_pa and " + stem +
                         "_bar");
    if (pa) out = parse_number(name_ + "." + stem + "_pa", *pa);
    if (bar) out = 1e5 * parse_number(name_ + "." + stem + "_bar", *bar);
  }

  void check_consumed() const {
    if (!tree_) return;
    for (const auto& [key, unused] : *tree_)
      if (!seen_.count(key))
        throw InvalidInput("unknown config key [" + name_ + "] " + key);
  }

 private:
  const pt::ptree* tree_ = nullptr;
  std::string name_;
  std::set<std::string> seen_;
};

std::vector<SubVolume> parse_sub_volumes(const std::string& raw) {
  std::vector<SubVolume> out;
  std::size_t start = 0;
  while (start < raw.size()) {
    std::size_t end = raw.find(',', start);
    if (end == std::string::npos) end = raw.size();
    const std::string item = raw.substr(start, end - start);
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw InvalidInput("sub_volumes entries are volume:bulk, got '" + item +
                         "'");
    SubVolume sv;
    sv.volume_m3 = parse_number("sub_volumes volume", item.substr(0, colon));
    sv.bulk_pa = parse_number("sub_volumes bulk", item.substr(colon + 1));
    out.push_back(sv);
    start = end + 1;
  }
  return out;
}

constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

Config load_config(const std::string& path) {
  pt::ptree root;
  try {
    pt::read_ini(path, root);
  } catch (const pt::ptree_error& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }

  for (const auto& [section, unused] : root)
    if (section != "fem" && section != "hydraulics" &&
        section != "geometry" && section != "sim")
      throw InvalidInput("unknown config section [" + section + "]");

  Config cfg;

  Section fem(root, "fem");
  fem.number("length_m", cfg.beam.length_m);
  fem.integer("n_elements", cfg.beam.n_elements);
  fem.number("elastic_modulus_pa", cfg.beam.elastic_modulus_pa);
  fem.number("density_kgm3", cfg.beam.density_kgm3);
  fem.number("cross_area_m2", cfg.beam.cross_area_m2);
  fem.number("second_moment_m4", cfg.beam.second_moment_m4);
  fem.number("rayleigh_beta_s", cfg.beam.rayleigh_beta);
  fem.integer("n_modes", cfg.n_modes);
  fem.number("target_f1_hz", cfg.target_f1_hz);
  fem.check_consumed();

  Section hyd(root, "hydraulics");
  hyd.pressure("pump_pressure", cfg.hydraulics.pump_pressure_pa);
  hyd.pressure("tank_pressure", cfg.hydraulics.tank_pressure_pa);
  hyd.number("bore_diameter_m", cfg.hydraulics.bore_m);
  hyd.number("rod_diameter_m", cfg.hydraulics.rod_m);
  hyd.number("cylinder_length_m", cfg.hydraulics.cylinder_length_m);
  hyd.number("stroke_m", cfg.hydraulics.stroke_m);
  hyd.pressure("oil_bulk_modulus", cfg.hydraulics.oil_bulk_pa);
  hyd.number("valve_coeff", cfg.hydraulics.valve_coeff);
  hyd.number("dead_volume_m3", cfg.hydraulics.dead_volume_m3);
  if (const auto sv = hyd.raw("sub_volumes"))
    cfg.hydraulics.sub_volumes = parse_sub_volumes(*sv);
  hyd.number("friction_coulomb_n", cfg.hydraulics.friction.coulomb_n);
  hyd.number("friction_static_n", cfg.hydraulics.friction.static_n);
  hyd.number("friction_viscous_nsm", cfg.hydraulics.friction.viscous_ns_m);
  hyd.number("friction_stribeck_ms",
             cfg.hydraulics.friction.stribeck_velocity_ms);
  hyd.number("friction_smoothing_ms",
             cfg.hydraulics.friction.smoothing_velocity_ms);
  hyd.check_consumed();

  Section geo(root, "geometry");
  if (geo.present()) {
    HydraulicSpec sized = cfg.hydraulics;
    sized.finalize();
    double theta_min_deg = -10.0;
    double theta_max_deg = 50.0;
    geo.number("theta_min_deg", theta_min_deg);
    geo.number("theta_max_deg", theta_max_deg);
    LiftGeometry g =
        fit_lift_geometry(sized.max_length(), theta_min_deg * kDegToRad,
                          theta_max_deg * kDegToRad, cfg.beam.length_m,
                          cfg.beam.length_m);
    geo.number("anchor_x_m", g.anchor_x_m);
    geo.number("anchor_y_m", g.anchor_y_m);
    geo.number("attach_x_m", g.attach_x_m);
    geo.number("sensor_x_m", g.sensor_x_m);
    geo.number("payload_x_m", g.payload_x_m);
    cfg.geometry = g;
  }
  geo.check_consumed();

  Section sim(root, "sim");
  sim.number("dt_s", cfg.sim.dt_s);
  sim.number("duration_s", cfg.sim.duration_s);
  sim.number("rho_inf", cfg.sim.rho_inf);
  sim.check_consumed();

  cfg.sim.validate();
  return cfg;
}

BuiltModels build_models(const Config& config) {
  config.sim.validate();
  if (config.n_modes < 1) throw InvalidInput("n_modes must be positive");

  BuiltModels built;
  built.sim = config.sim;

  built.beam = config.beam;
  built.beam.validate();
  if (config.target_f1_hz > 0.0)
    built.beam = tune_first_mode(config.target_f1_hz, built.beam);
  built.fe = build_beam_model(built.beam);

  HydraulicSpec hyd = config.hydraulics;
  hyd.finalize();
  hyd.validate();

  LiftGeometry geom =
      config.geometry.value_or(default_geometry(built.beam.length_m,
                                                hyd.max_length()));
  geom.validate(built.beam.length_m);

  const ModalModel modal =
      modal_reduce(built.fe, config.n_modes, geom.sensor_x_m, geom.attach_x_m,
                   geom.payload_x_m);
  built.plant = make_plant(built.beam, modal, geom, hyd);
  return built;
}

SimRunConfig make_run_config(const SimParams& sim) {
  sim.validate();
  SimRunConfig run;
  run.dt_s = sim.dt_s;
  run.n_steps = sim.n_steps();
  run.step.rho_inf = sim.rho_inf;
  return run;
}

}  // namespace slide
