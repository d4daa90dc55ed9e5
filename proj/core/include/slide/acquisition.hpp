#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "slide/dynamics.hpp"
#include "slide/rng.hpp"

namespace slide {

// Recorded channel order; all values SI, float32.
enum Channel : int {
  kChU = 0,
  kChS,
  kChSRate,
  kChP1,
  kChP2,
  kChDy,
  kNumChannels,
};

const char* channel_name(int channel);

enum TrajectoryFlag : std::uint8_t {
  kFlagActuatorLimit = 1,
  kFlagVacuum = 2,
  kFlagThetaBound = 4,
};

std::uint8_t pack_flags(const StepFlags& flags);

struct Trajectory {
  double dt_s = 0.0;
  double payload_kg = 0.0;
  double theta_in = 0.0;
  std::uint64_t seed = 0;
  std::uint8_t flags = 0;
  std::array<std::vector<float>, kNumChannels> channels;

  int n_steps() const { return static_cast<int>(channels[0].size()); }
};

struct Batch {
  std::vector<Trajectory> trajectories;  // stored in split order, train first
  std::vector<int> train_indices;
  std::vector<int> val_indices;
  double dt_s = 0.0;
  double payload_kg = 0.0;
  std::uint64_t config_hash = 0;

  int n() const { return static_cast<int>(trajectories.size()); }
};

// Validation share is floor(n/5) trajectories (80/20 split).
int validation_count(int n_trajectories);

// Uniform on [theta_min, theta_max].
double sample_initial_angle(Rng& rng, const LiftGeometry& geom);

struct Equilibrium {
  double theta = 0.0;
  Eigen::VectorXd zeta;
  double force_n = 0.0;  // rod force balancing gravity at locked length
  ChamberPressures chambers;
};

// Static balance at a locked actuator: solves Q(theta, zeta, F_h) = 0 for
// the modal coordinates and the rod force, then splits the force into
// chamber pressures anchored at tank pressure on the low side.
// Throws InfeasibleConfiguration when a pressure falls outside (0, p_pump].
Equilibrium static_equilibrium(double theta_in, double payload_kg,
                               const PlantModel& plant);

// Rest state at the equilibrium (zero rates, equilibrium pressures).
SimState equilibrium_state(const Equilibrium& eq, const PlantModel& plant);

// Five equal pools (zeros, +1, -1, ramps between -1 and +1, uniform random;
// remainder steps join the random pool), cut into random-length segments and
// globally shuffled.
std::vector<double> make_control_signal(int n_steps, Rng& rng);

struct SimRunConfig {
  double dt_s = 0.005;
  int n_steps = 200;
  StepOptions step;
};

// Runs the integrator over the control signal, recording channels at each
// step start. seed is recorded metadata, not consumed here.
Trajectory simulate_trajectory(const Equilibrium& eq,
                               const std::vector<double>& control,
                               double payload_kg, const PlantModel& plant,
                               const SimRunConfig& run, std::uint64_t seed);

struct GenConfig {
  int n = 80;
  double payload_kg = 0.0;
  std::uint64_t seed = 0;
  SimRunConfig run;
  int max_retries = 3;
  double max_failure_fraction = 0.10;
  int workers = 0;  // 0 = SLIDE_THREADS or hardware concurrency
};

// Fig-3-style batch generation: per index, derived seed -> random start
// angle -> static equilibrium -> random control -> simulation. Flagged or
// failed trajectories retry on a fresh derived seed; the batch is rejected
// when more than max_failure_fraction of slots stay flagged.
Batch generate_batch(const GenConfig& cfg, const PlantModel& plant);

void save_batch(const Batch& batch, const std::string& path);
Batch load_batch(const std::string& path);

// One CSV per trajectory: header t,U,s,sdot,p1,p2,delta_y.
void export_csv(const Batch& batch, const std::string& dir);

}  // namespace slide
