#include "slide/geometry.hpp"

#include <cmath>
#include <numbers>

#include "slide/errors.hpp"

namespace slide {

namespace {

constexpr double deg = std::numbers::pi / 180.0;

// ds/dtheta and the transverse force direction share this lever term.
double lever(double theta, const LiftGeometry& g) {
  return g.anchor_x_m * std::sin(theta) - g.anchor_y_m * std::cos(theta);
}

}  // namespace

void LiftGeometry::validate(double beam_length_m) const {
  if (!(attach_x_m > 0) || attach_x_m > sensor_x_m)
    throw InvalidInput("need 0 < attach_x <= sensor_x");
  if (sensor_x_m > payload_x_m || payload_x_m > beam_length_m + 1e-12)
    throw InvalidInput("need sensor_x <= payload_x <= beam length");
  if (!(theta_min_rad < theta_max_rad))
    throw InvalidInput("empty boom angle range");
  if (theta_max_rad - theta_min_rad >= std::numbers::pi)
    throw InvalidInput("boom angle range must span less than 180 degrees");
  if (anchor_x_m == 0.0 && anchor_y_m == 0.0)
    throw InvalidInput("actuator anchor coincides with the pivot");
  // lever(theta) has at most one zero on a range below 180 degrees, so equal
  // nonzero endpoint signs guarantee strict monotonicity of s(theta)
  const double lo = lever(theta_min_rad, *this);
  const double hi = lever(theta_max_rad, *this);
  if (lo == 0.0 || hi == 0.0 || (lo > 0) != (hi > 0))
    throw InvalidInput("actuator length not monotonic over the angle range");
}

LiftGeometry fit_lift_geometry(double s_max_m, double theta_min_rad,
                               double theta_max_rad, double sensor_x_m,
                               double payload_x_m) {
  const double s_lo = 0.63 * s_max_m;
  const double s_hi = 0.88 * s_max_m;
  const double sin_lo = std::sin(theta_min_rad);
  const double sin_hi = std::sin(theta_max_rad);
  // cross term q = attach_x * drop, sum of squares ss = attach_x^2 + drop^2
  const double q =
      (s_hi * s_hi - s_lo * s_lo) / (2.0 * (sin_hi - sin_lo));
  const double ss = s_lo * s_lo - 2.0 * q * sin_lo;
  if (!(q > 0) || ss <= 2.0 * q)
    throw InvalidInput("no anchor placement fits the cylinder envelope");
  const double sum = std::sqrt(ss + 2.0 * q);   // attach_x + drop
  const double diff = std::sqrt(ss - 2.0 * q);  // attach_x - drop
  LiftGeometry geom;
  geom.attach_x_m = 0.5 * (sum + diff);
  geom.anchor_x_m = 0.0;
  geom.anchor_y_m = -0.5 * (sum - diff);
  geom.sensor_x_m = sensor_x_m;
  geom.payload_x_m = payload_x_m;
  geom.theta_min_rad = theta_min_rad;
  geom.theta_max_rad = theta_max_rad;
  return geom;
}

LiftGeometry default_geometry(double beam_length_m, double s_max_m) {
  LiftGeometry geom = fit_lift_geometry(s_max_m, -10.0 * deg, 50.0 * deg,
                                        beam_length_m, beam_length_m);
  geom.validate(beam_length_m);
  return geom;
}

ActuatorKinematics actuator_kinematics(double theta_rad,
                                       const LiftGeometry& geom) {
  const double x = geom.attach_x_m;
  const double ax = geom.anchor_x_m;
  const double ay = geom.anchor_y_m;
  const double s = std::sqrt(x * x + ax * ax + ay * ay -
                             2.0 * x *
                                 (ax * std::cos(theta_rad) +
                                  ay * std::sin(theta_rad)));
  ActuatorKinematics kin;
  kin.length_m = s;
  kin.transverse_dir = lever(theta_rad, geom) / s;
  kin.dlength_dtheta = x * kin.transverse_dir;
  return kin;
}

bool actuator_within_limits(double s_m, double min_length_m,
                            double max_length_m) {
  const double margin = kActuatorLimitMargin * (max_length_m - min_length_m);
  return s_m >= min_length_m - margin && s_m <= max_length_m;
}

}  // namespace slide
