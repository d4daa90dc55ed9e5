#pragma once

#include <vector>

namespace slide {

// Stribeck friction with a tanh switch instead of the sign function, so the
// force is smooth through zero velocity.
struct FrictionSpec {
  // Sized for a 100 mm bore boom cylinder. The viscous share lumps seal
  // drag with the line and port losses reflected to the rod; it is what
  // damps the boom-on-oil bounce once the valve closes, heaviest payload
  // settling within a two-second free decay.
  double coulomb_n = 600.0;
  double static_n = 720.0;
  double viscous_ns_m = 1.2e5;
  double stribeck_velocity_ms = 0.02;
  // also the slope limiter of the tanh switch; below ~0.05 the friction
  // wall at zero velocity starts costing Newton iterations
  double smoothing_velocity_ms = 0.05;

  void validate() const;
};

// A mechanically compliant volume (hose, cylinder wall) lumped into the
// effective bulk modulus of a chamber circuit.
struct SubVolume {
  double volume_m3 = 0.0;
  double bulk_pa = 0.0;
};

// Differential cylinder driven by a 4/3 closed-center proportional valve
// between a constant-pressure pump and tank.
struct HydraulicSpec {
  double pump_pressure_pa = 140.0e5;
  double tank_pressure_pa = 1.0e5;
  double bore_m = 0.100;
  double rod_m = 0.056;
  double cylinder_length_m = 0.535;  // fully retracted pivot-to-pivot length
  double stroke_m = 0.820;
  double oil_bulk_pa = 1.5e9;
  // semi-empirical flow rate coefficient [m^3 s^-1 Pa^-1/2]; 0 = derive
  double valve_coeff = 0.0;
  // chamber volume at the end stops (ports, residual oil); 0 = derive
  double dead_volume_m3 = 0.0;
  // Per-chamber circuit compliance beyond the oil column. The default hose
  // share keeps the effective bulk modulus near 1e8 Pa over the working
  // stroke; a rock-hard column collapses the draining chamber to vacuum on
  // every hard valve reversal before the piston can slow down.
  std::vector<SubVolume> sub_volumes{{1.5e-3, 1.0e8}};
  FrictionSpec friction;

  double piston_area() const;    // A1, bore side
  double rod_side_area() const;  // A2 = A1 - rod area
  double min_length() const { return cylinder_length_m; }
  double max_length() const { return cylinder_length_m + stroke_m; }

  // Fills derived defaults (valve_coeff, dead_volume_m3) where left at 0.
  // The default valve passes 10% of full piston speed per unit signal at
  // half the pump-tank drop.
  void finalize();
  void validate() const;
};

HydraulicSpec default_hydraulics();

struct ChamberPressures {
  double p1_pa = 0.0;  // bore side
  double p2_pa = 0.0;  // rod side
};

struct ChamberVolumes {
  double v1_m3 = 0.0;
  double v2_m3 = 0.0;
};

// Chamber volumes at actuator length s (piston position s - min_length).
ChamberVolumes chamber_volumes(const HydraulicSpec& spec, double s_m);

// Effective bulk modulus of a chamber circuit with oil volume v:
// 1/Be = 1/B_oil + sum_c (V_c / v) / B_c.
double effective_bulk_modulus(const HydraulicSpec& spec, double volume_m3);

struct ValveFlows {
  double q1_m3s = 0.0;  // into chamber 1
  double q2_m3s = 0.0;  // into chamber 2
  bool saturated = false;
};

// Turbulent orifice flow for spool signal u in [-1, 1]; u > 0 connects
// pump->1 / 2->tank (extends), u < 0 the reverse. |u| beyond 1 saturates.
ValveFlows valve_flows(double u, const ChamberPressures& p,
                       const HydraulicSpec& spec);

struct PressureRates {
  double p1_pa_s = 0.0;
  double p2_pa_s = 0.0;
};

// Lumped fluid pressure build-up in both chambers.
PressureRates pressure_rates(const ChamberPressures& p, double s_m,
                             double s_rate_ms, double u,
                             const HydraulicSpec& spec);

double friction_force(double s_rate_ms, const FrictionSpec& spec);

// Net force on the rod: p1 A1 - p2 A2 - friction.
double cylinder_force(const ChamberPressures& p, double s_rate_ms,
                      const HydraulicSpec& spec);

}  // namespace slide
