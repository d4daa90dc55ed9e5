#include "slide/hydraulics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "slide/errors.hpp"

namespace slide {

void FrictionSpec::validate() const {
  if (coulomb_n < 0 || static_n < 0 || viscous_ns_m < 0)
    throw InvalidInput("friction forces must be non-negative");
  if (static_n < coulomb_n)
    throw InvalidInput("static friction below Coulomb friction");
  if (!(stribeck_velocity_ms > 0) || !(smoothing_velocity_ms > 0))
    throw InvalidInput("friction reference velocities must be positive");
}

double HydraulicSpec::piston_area() const {
  return std::numbers::pi * 0.25 * bore_m * bore_m;
}

double HydraulicSpec::rod_side_area() const {
  return piston_area() - std::numbers::pi * 0.25 * rod_m * rod_m;
}

void HydraulicSpec::finalize() {
  if (valve_coeff == 0.0) {
    const double half_drop = 0.5 * (pump_pressure_pa - tank_pressure_pa);
    valve_coeff = 0.1 * piston_area() / std::sqrt(half_drop);
  }
  if (dead_volume_m3 == 0.0) dead_volume_m3 = 0.05 * piston_area() * stroke_m;
}

void HydraulicSpec::validate() const {
  if (!(pump_pressure_pa > tank_pressure_pa))
    throw InvalidInput("pump pressure must exceed tank pressure");
  if (!(tank_pressure_pa >= 0)) throw InvalidInput("tank pressure must be non-negative");
  if (!(bore_m > 0) || !(rod_m >= 0) || rod_m >= bore_m)
    throw InvalidInput("need 0 <= rod diameter < bore diameter");
  if (!(cylinder_length_m > 0) || !(stroke_m > 0))
    throw InvalidInput("cylinder length and stroke must be positive");
  if (!(oil_bulk_pa > 0)) throw InvalidInput("oil bulk modulus must be positive");
  if (!(valve_coeff > 0)) throw InvalidInput("valve coefficient must be positive");
  if (!(dead_volume_m3 > 0)) throw InvalidInput("dead volume must be positive");
  for (const auto& sv : sub_volumes) {
    if (!(sv.volume_m3 >= 0) || !(sv.bulk_pa > 0))
      throw InvalidInput("sub-volume needs volume >= 0 and bulk modulus > 0");
  }
  friction.validate();
}

HydraulicSpec default_hydraulics() {
  HydraulicSpec spec;
  spec.finalize();
  return spec;
}

ChamberVolumes chamber_volumes(const HydraulicSpec& spec, double s_m) {
  const double x = std::clamp(s_m - spec.min_length(), 0.0, spec.stroke_m);
  return {spec.dead_volume_m3 + spec.piston_area() * x,
          spec.dead_volume_m3 + spec.rod_side_area() * (spec.stroke_m - x)};
}

double effective_bulk_modulus(const HydraulicSpec& spec, double volume_m3) {
  if (!(volume_m3 > 0.0)) throw InvalidInput("chamber volume must be positive");
  double inv = 1.0 / spec.oil_bulk_pa;
  for (const auto& sv : spec.sub_volumes) {
    if (!(sv.volume_m3 > 0.0) || !(sv.bulk_pa > 0.0))
      throw InvalidInput("sub-volumes need positive volume and bulk modulus");
    inv += sv.volume_m3 / (volume_m3 * sv.bulk_pa);
  }
  return 1.0 / inv;
}

namespace {

// signed turbulent orifice flow through one metering edge
double orifice(double cv, double u, double dp) {
  return cv * u * (dp >= 0 ? 1.0 : -1.0) * std::sqrt(std::abs(dp));
}

}  // namespace

ValveFlows valve_flows(double u, const ChamberPressures& p,
                       const HydraulicSpec& spec) {
  ValveFlows out;
  out.saturated = std::abs(u) > 1.0;
  u = std::clamp(u, -1.0, 1.0);
  if (u > 0.0) {  // P->1, 2->T
    out.q1_m3s = orifice(spec.valve_coeff, u, spec.pump_pressure_pa - p.p1_pa);
    out.q2_m3s = -orifice(spec.valve_coeff, u, p.p2_pa - spec.tank_pressure_pa);
  } else if (u < 0.0) {  // P->2, 1->T
    out.q1_m3s = orifice(spec.valve_coeff, -u, spec.tank_pressure_pa - p.p1_pa);
    out.q2_m3s = -orifice(spec.valve_coeff, -u, p.p2_pa - spec.pump_pressure_pa);
  }
  return out;
}

PressureRates pressure_rates(const ChamberPressures& p, double s_m,
                             double s_rate_ms, double u,
                             const HydraulicSpec& spec) {
  const ChamberVolumes v = chamber_volumes(spec, s_m);
  const ValveFlows q = valve_flows(u, p, spec);
  const double a1 = spec.piston_area();
  const double a2 = spec.rod_side_area();
  // dV1/dt = +A1 ds/dt, dV2/dt = -A2 ds/dt
  return {effective_bulk_modulus(spec, v.v1_m3) / v.v1_m3 *
              (q.q1_m3s - a1 * s_rate_ms),
          effective_bulk_modulus(spec, v.v2_m3) / v.v2_m3 *
              (q.q2_m3s + a2 * s_rate_ms)};
}

double friction_force(double s_rate_ms, const FrictionSpec& spec) {
  const double sliding =
      spec.coulomb_n + (spec.static_n - spec.coulomb_n) *
                           std::exp(-(s_rate_ms / spec.stribeck_velocity_ms) *
                                    (s_rate_ms / spec.stribeck_velocity_ms));
  return std::tanh(4.0 * s_rate_ms / spec.smoothing_velocity_ms) * sliding +
         spec.viscous_ns_m * s_rate_ms;
}

double cylinder_force(const ChamberPressures& p, double s_rate_ms,
                      const HydraulicSpec& spec) {
  return p.p1_pa * spec.piston_area() - p.p2_pa * spec.rod_side_area() -
         friction_force(s_rate_ms, spec.friction);
}

}  // namespace slide
