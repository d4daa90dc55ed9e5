#pragma once

#include <Eigen/Dense>

#include "slide/beam.hpp"
#include "slide/geometry.hpp"
#include "slide/hydraulics.hpp"
#include "slide/modal.hpp"

namespace slide {

// Everything the time integrator needs, assembled once per configuration
// and shared read-only across trajectories.
struct PlantModel {
  ModalModel modal;
  LiftGeometry geom;
  HydraulicSpec hyd;
  double beam_inertia_kgm2 = 0.0;      // int rho A x^2 dx about the pivot
  double beam_mass_kg = 0.0;
  double beam_first_moment_kgm = 0.0;  // m_beam * x_cg
  double gravity_ms2 = 9.80665;
};

PlantModel make_plant(const BeamSpec& beam, const ModalModel& modal,
                      const LiftGeometry& geom, const HydraulicSpec& hyd);

// Minimal coordinates: boom angle theta plus modal amplitudes zeta.
struct SimState {
  double time_s = 0.0;
  double theta = 0.0;       // rad
  double theta_rate = 0.0;  // rad/s
  Eigen::VectorXd zeta;      // [n_modes] m
  Eigen::VectorXd zeta_rate;
  ChamberPressures chambers;

  bool finite() const;
};

SimState make_state(const PlantModel& plant);

// Reduced equations of motion M(q) qdd = Q(q, qd, F_h),
// coordinates ordered [theta, zeta_1 .. zeta_m].
struct Eom {
  Eigen::MatrixXd mass;
  Eigen::VectorXd force;
};

Eom assemble_eom(const SimState& state, const PlantModel& plant,
                 double payload_kg, double hydraulic_force_n,
                 bool structural_damping = true);

// Elastic tip displacement in global axes: w_s = sum phi_j(x_s) zeta_j,
// delta_x = -w_s sin(theta), delta_y = w_s cos(theta).
struct TipDeflection {
  double dx_m = 0.0;
  double dy_m = 0.0;
};

TipDeflection tip_deflection(const SimState& state, const PlantModel& plant);

// T + elastic + gravity potential, minus the work potential of a constant
// rod force acting through the actuator length and its transverse projection
// onto the attach-point deflection (pass 0 when unforced). The theta
// dependence of the transverse direction is dropped, matching the clevis
// force in the equations of motion.
double mechanical_energy(const SimState& state, const PlantModel& plant,
                         double payload_kg, double external_force_n = 0.0);

enum class ActuatorMode {
  kCoupled,      // chamber pressure ODEs solved with the mechanics
  kFrozenForce,  // rod force pinned to frozen_force_n, chambers held
};

struct StepOptions {
  double rho_inf = 0.8;       // generalized-alpha spectral radius
  double newton_tol = 1e-9;   // scaled residual, relative to the first iterate
  // Newton crawls near the orifice sgn-sqrt corner (a chamber sitting exactly
  // at tank or pump pressure when the valve opens), so the budget is generous.
  int max_newton_iters = 150;
  ActuatorMode actuator = ActuatorMode::kCoupled;
  double frozen_force_n = 0.0;
  bool structural_damping = true;
};

// Per-trajectory event flags, accumulated across steps.
struct StepFlags {
  bool actuator_limit = false;  // s outside the cylinder envelope
  bool vacuum = false;          // a chamber pressure clamped at zero
  bool theta_bound = false;     // theta left [min - 5 deg, max + 5 deg]
  bool merged() const { return actuator_limit || vacuum || theta_bound; }
};

// Fixed-step generalized-alpha integrator (Chung-Hulbert) with the two
// chamber pressures advanced by the trapezoidal rule inside the same Newton
// loop. Keeps the acceleration history between steps; construct or reset
// once per trajectory.
class GeneralizedAlpha {
 public:
  GeneralizedAlpha(const PlantModel& plant, double payload_kg,
                   StepOptions opts = {});

  void reset(const SimState& state);  // solves for a consistent acceleration
  const SimState& state() const { return state_; }
  const StepFlags& flags() const { return flags_; }
  void clear_flags() { flags_ = {}; }

  // Advances by dt under spool signal u (constant over the step).
  // Throws NumericalFailure on Newton breakdown or non-finite states.
  void advance(double u, double dt);

 private:
  const PlantModel* plant_;
  double payload_kg_;
  StepOptions opts_;
  double alpha_m_, alpha_f_, beta_, gamma_;
  SimState state_;
  Eigen::VectorXd accel_;  // generalized-alpha acceleration history
  StepFlags flags_;
};

// One-shot step used by tests and small experiments: consistent
// acceleration is recomputed from the incoming state.
SimState step(const SimState& state, double u, double dt,
              const PlantModel& plant, double payload_kg,
              const StepOptions& opts = {});

}  // namespace slide
