#pragma once

namespace slide {

// Lifting geometry in the vertical plane. The boom pivots at the origin; the
// actuator runs from a ground anchor on the pillar to a clevis on the boom
// axis at attach_x. Angles are measured from horizontal, positive up.
struct LiftGeometry {
  double anchor_x_m = 0.0;  // actuator ground anchor
  double anchor_y_m = 0.0;
  double attach_x_m = 0.0;  // actuator clevis along the boom
  double sensor_x_m = 2.5;  // deflection sensor position
  double payload_x_m = 2.5;
  double theta_min_rad = 0.0;
  double theta_max_rad = 0.0;

  // Requires 0 < attach_x <= sensor_x <= payload_x <= length, a non-empty
  // angle range under 180 degrees, and s(theta) strictly monotonic on it.
  void validate(double beam_length_m) const;
};

// Anchor placement from the cylinder envelope: with the anchor straight
// below the pivot, s(theta)^2 = attach_x^2 + drop^2 + 2 attach_x drop
// sin(theta), and the two conditions s(theta_min) = 0.63 s_max,
// s(theta_max) = 0.88 s_max give attach_x and drop in closed form.
LiftGeometry fit_lift_geometry(double s_max_m, double theta_min_rad,
                               double theta_max_rad, double sensor_x_m,
                               double payload_x_m);

// Fitted anchor, sensor and payload at the tip, theta in [-10, +50] deg.
LiftGeometry default_geometry(double beam_length_m, double s_max_m);

struct ActuatorKinematics {
  double length_m = 0.0;        // s(theta)
  double dlength_dtheta = 0.0;  // ds/dtheta [m/rad]
  double transverse_dir = 0.0;  // actuator direction projected on boom normal
};

ActuatorKinematics actuator_kinematics(double theta_rad,
                                       const LiftGeometry& geom);

// Fraction of stroke tolerated below the retracted length before the
// actuator-limit flag trips.
inline constexpr double kActuatorLimitMargin = 0.02;

bool actuator_within_limits(double s_m, double min_length_m,
                            double max_length_m);

}  // namespace slide
