#pragma once

#include <optional>
#include <string>

#include "slide/acquisition.hpp"
#include "slide/beam.hpp"
#include "slide/dynamics.hpp"
#include "slide/geometry.hpp"
#include "slide/hydraulics.hpp"

namespace slide {

struct SimParams {
  double dt_s = 0.005;
  double duration_s = 1.0;
  double rho_inf = 0.8;

  int n_steps() const;
  void validate() const;
};

// Full plant description. The geometry is normally fitted from the cylinder
// envelope; an explicit [geometry] section overrides it key by key.
struct Config {
  BeamSpec beam;
  int n_modes = 8;
  double target_f1_hz = 29.0;  // <= 0 leaves the cross-section untouched
  HydraulicSpec hydraulics;
  std::optional<LiftGeometry> geometry;
  SimParams sim;
};

// INI file with sections [fem], [hydraulics], [geometry], [sim]; every key
// optional, unknown keys rejected by name. Pressures take either _pa or
// _bar keys (1 bar = 1e5 Pa).
Config load_config(const std::string& path);

struct BuiltModels {
  BeamSpec beam;  // after frequency tuning
  FEModel fe;
  PlantModel plant;
  SimParams sim;
};

// Tune, assemble, reduce and couple everything the tools need.
BuiltModels build_models(const Config& config);

SimRunConfig make_run_config(const SimParams& sim);

}  // namespace slide
