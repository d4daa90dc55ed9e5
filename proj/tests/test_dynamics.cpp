#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "slide/acquisition.hpp"
#include "slide/config.hpp"
#include "slide/dynamics.hpp"
#include "slide/errors.hpp"
#include "slide/geometry.hpp"
#include "slide/rng.hpp"

using namespace slide;

namespace {

constexpr double kPi = std::numbers::pi;

const BuiltModels& models() {
  static const BuiltModels m = build_models(Config{});
  return m;
}

const PlantModel& plant() { return models().plant; }

}  // namespace

TEST_CASE("actuator length derivative matches finite differences") {
  const LiftGeometry geom = default_geometry(2.5, 1.355);
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const double theta =
        rng.uniform(geom.theta_min_rad, geom.theta_max_rad);
    const double h = 1e-5;
    const double fd = (actuator_kinematics(theta + h, geom).length_m -
                       actuator_kinematics(theta - h, geom).length_m) /
                      (2.0 * h);
    CHECK(std::abs(actuator_kinematics(theta, geom).dlength_dtheta - fd) <
          1e-9);
  }
}

TEST_CASE("colinear anchor gives zero moment arm") {
  LiftGeometry geom;
  geom.anchor_x_m = 0.4;  // on the boom axis at theta = 0
  geom.anchor_y_m = 0.0;
  geom.attach_x_m = 0.8;
  const ActuatorKinematics kin = actuator_kinematics(0.0, geom);
  CHECK(kin.length_m == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(kin.dlength_dtheta == 0.0);
  CHECK(kin.transverse_dir == 0.0);
}

TEST_CASE("fitted geometry spans the reported cylinder range") {
  const double s_max = 1.355;
  const LiftGeometry geom = default_geometry(2.5, s_max);
  geom.validate(2.5);
  const double s_lo =
      actuator_kinematics(geom.theta_min_rad, geom).length_m;
  const double s_hi =
      actuator_kinematics(geom.theta_max_rad, geom).length_m;
  CHECK(s_lo / s_max == doctest::Approx(0.63).epsilon(1e-9));
  CHECK(s_hi / s_max == doctest::Approx(0.88).epsilon(1e-9));

  // same construction on a different envelope and angle range
  const LiftGeometry other = fit_lift_geometry(
      1.0, -15.0 * kPi / 180.0, 45.0 * kPi / 180.0, 2.0, 2.0);
  other.validate(2.5);
  CHECK(actuator_kinematics(other.theta_min_rad, other).length_m ==
        doctest::Approx(0.63).epsilon(1e-9));
  CHECK(actuator_kinematics(other.theta_max_rad, other).length_m ==
        doctest::Approx(0.88).epsilon(1e-9));

  // a range starting at horizontal leaves the anchor quadratic with no
  // real root, whatever the envelope scale
  CHECK_THROWS_AS(fit_lift_geometry(1.0, 0.0, 40.0 * kPi / 180.0, 2.0, 2.0),
                  InvalidInput);
}

TEST_CASE("geometry validation rejects broken layouts") {
  LiftGeometry geom = default_geometry(2.5, 1.355);

  SUBCASE("attachment ordering") {
    geom.attach_x_m = geom.sensor_x_m + 0.1;
    CHECK_THROWS_AS(geom.validate(2.5), InvalidInput);
  }
  SUBCASE("payload beyond the beam") {
    geom.payload_x_m = 2.6;
    CHECK_THROWS_AS(geom.validate(2.5), InvalidInput);
  }
  SUBCASE("empty angle range") {
    geom.theta_min_rad = geom.theta_max_rad;
    CHECK_THROWS_AS(geom.validate(2.5), InvalidInput);
  }
  SUBCASE("anchor making s non-monotonic") {
    geom.anchor_x_m = 0.5;
    geom.anchor_y_m = 0.5;  // dead center at theta = 45 deg, inside range
    CHECK_THROWS_AS(geom.validate(2.5), InvalidInput);
  }
}

TEST_CASE("actuator limit window") {
  const double lo = 0.535;
  const double hi = 1.355;
  const double margin = kActuatorLimitMargin * (hi - lo);
  CHECK(actuator_within_limits(lo, lo, hi));
  CHECK(actuator_within_limits(lo - 0.5 * margin, lo, hi));
  CHECK_FALSE(actuator_within_limits(lo - 2.0 * margin, lo, hi));
  CHECK(actuator_within_limits(hi, lo, hi));
  CHECK_FALSE(actuator_within_limits(hi + 2.0 * margin, lo, hi));
}

TEST_CASE("rigid-body inertia enters the mass matrix") {
  SimState state = make_state(plant());
  state.theta = 0.2;
  const double payload = 100.0;
  const Eom eom = assemble_eom(state, plant(), payload, 0.0);
  const double xp = plant().geom.payload_x_m;
  CHECK(eom.mass(0, 0) ==
        doctest::Approx(plant().beam_inertia_kgm2 + payload * xp * xp)
            .epsilon(1e-12));
}

TEST_CASE("mass matrix is symmetric positive definite at random states") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    SimState state = make_state(plant());
    state.theta = rng.uniform(-0.2, 0.9);
    state.theta_rate = rng.uniform(-1.0, 1.0);
    for (int j = 0; j < state.zeta.size(); ++j) {
      state.zeta[j] = 0.01 * rng.gaussian();
      state.zeta_rate[j] = 0.1 * rng.gaussian();
    }
    const Eom eom =
        assemble_eom(state, plant(), rng.uniform(0.0, 100.0), 1e4);
    CHECK((eom.mass - eom.mass.transpose()).norm() < 1e-12);
    CHECK(Eigen::LLT<Eigen::MatrixXd>(eom.mass).info() == Eigen::Success);
  }
}

TEST_CASE("mass blocks and static forces match the closed form") {
  const auto& modal = plant().modal;
  const double payload = 50.0;
  const double g = plant().gravity_ms2;

  SimState state = make_state(plant());
  state.theta = 0.3;
  Rng rng(23);
  for (int j = 0; j < state.zeta.size(); ++j)
    state.zeta[j] = 0.003 * rng.gaussian();

  const Eom eom = assemble_eom(state, plant(), payload, 0.0);
  const Eigen::VectorXd& phi_p = modal.phi_payload;
  const double w_p = phi_p.dot(state.zeta);
  const int m = modal.n_modes;

  // coupling row and modal block
  for (int j = 0; j < m; ++j) {
    CHECK(eom.mass(0, j + 1) ==
          doctest::Approx(modal.coupling[j] +
                          payload * plant().geom.payload_x_m * phi_p[j])
              .epsilon(1e-12));
    for (int i = 0; i < m; ++i) {
      const double expect =
          (i == j ? 1.0 : 0.0) + payload * phi_p[i] * phi_p[j];
      CHECK(eom.mass(i + 1, j + 1) == doctest::Approx(expect).epsilon(1e-12));
    }
  }

  // zero rates: force reduces to gravity + elasticity
  const Eigen::VectorXd omega = modal.omega();
  const double torque =
      -g * std::cos(state.theta) *
          (plant().beam_first_moment_kgm +
           payload * plant().geom.payload_x_m) +
      g * std::sin(state.theta) *
          (modal.gravity_load.dot(state.zeta) + payload * w_p);
  CHECK(eom.force[0] == doctest::Approx(torque).epsilon(1e-12));
  for (int j = 0; j < m; ++j) {
    const double expect =
        -omega[j] * omega[j] * state.zeta[j] -
        g * std::cos(state.theta) * (modal.gravity_load[j] +
                                     payload * phi_p[j]);
    CHECK(eom.force[j + 1] == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("quadratic velocity terms vanish without motion") {
  SimState state = make_state(plant());
  state.theta = 0.4;
  state.zeta.setConstant(0.002);

  const Eom still = assemble_eom(state, plant(), 20.0, 0.0, false);

  // doubling the rates from zero changes nothing when they stay zero
  SimState spinning = state;
  spinning.theta_rate = 1.3;
  const Eom moving = assemble_eom(spinning, plant(), 20.0, 0.0, false);

  // centrifugal stiffening term theta_dot^2 * zeta appears only with spin
  const Eigen::VectorXd diff = moving.force - still.force;
  const double rate2 = spinning.theta_rate * spinning.theta_rate;
  for (int j = 0; j < state.zeta.size(); ++j) {
    const double expect =
        rate2 * (state.zeta[j] +
                 20.0 * plant().modal.phi_payload.dot(state.zeta) *
                     plant().modal.phi_payload[j]);
    CHECK(diff[j + 1] == doctest::Approx(expect).epsilon(1e-10));
  }
  CHECK(diff[0] == 0.0);  // no Coriolis torque while zeta_dot = 0
}

TEST_CASE("hydraulic force enters through the actuator jacobian") {
  SimState state = make_state(plant());
  state.theta = 0.25;
  const double f_h = 2.0e4;
  const Eom loaded = assemble_eom(state, plant(), 0.0, f_h);
  const Eom unloaded = assemble_eom(state, plant(), 0.0, 0.0);

  const ActuatorKinematics kin =
      actuator_kinematics(state.theta, plant().geom);
  CHECK(loaded.force[0] - unloaded.force[0] ==
        doctest::Approx(f_h * kin.dlength_dtheta).epsilon(1e-12));
  for (int j = 0; j < state.zeta.size(); ++j)
    CHECK(loaded.force[j + 1] - unloaded.force[j + 1] ==
          doctest::Approx(f_h * kin.transverse_dir *
                          plant().modal.phi_actuator[j])
              .epsilon(1e-12));
}

TEST_CASE("tip deflection rotates the elastic displacement") {
  SimState state = make_state(plant());

  SUBCASE("undeformed") {
    const TipDeflection d = tip_deflection(state, plant());
    CHECK(d.dx_m == 0.0);
    CHECK(d.dy_m == 0.0);
  }

  SUBCASE("random modal amplitudes") {
    Rng rng(29);
    state.theta = 0.6;
    for (int j = 0; j < state.zeta.size(); ++j)
      state.zeta[j] = 0.002 * rng.gaussian();
    const double w = plant().modal.phi_sensor.dot(state.zeta);
    const TipDeflection d = tip_deflection(state, plant());
    CHECK(d.dx_m == doctest::Approx(-w * std::sin(0.6)).epsilon(1e-12));
    CHECK(d.dy_m == doctest::Approx(w * std::cos(0.6)).epsilon(1e-12));
  }
}

TEST_CASE("modal statics recover the cantilever tip deflection") {
  // static tip load F: omega_j^2 zeta_j = F phi_j(L)
  const auto& modal = plant().modal;
  const auto& beam = models().beam;
  const double load = 500.0;
  const Eigen::VectorXd omega = modal.omega();

  SimState state = make_state(plant());
  for (int j = 0; j < modal.n_modes; ++j)
    state.zeta[j] = load * modal.phi_sensor[j] / (omega[j] * omega[j]);

  const double analytic =
      load * std::pow(beam.length_m, 3) /
      (3.0 * beam.elastic_modulus_pa * beam.second_moment_m4);
  const TipDeflection d = tip_deflection(state, plant());
  CHECK(std::abs(d.dy_m - analytic) / analytic < 0.02);
}

TEST_CASE("free boom swings like a rigid pendulum") {
  // hang straight down, frozen zero rod force, small angle offset
  StepOptions opts;
  opts.actuator = ActuatorMode::kFrozenForce;
  opts.frozen_force_n = 0.0;

  GeneralizedAlpha integrator(plant(), 0.0, opts);
  SimState state = make_state(plant());
  state.theta = -kPi / 2.0 + 0.05;
  integrator.reset(state);

  const double dt = 1e-3;
  std::vector<double> offset;
  for (int i = 0; i < 6000; ++i) {
    integrator.advance(0.0, dt);
    offset.push_back(integrator.state().theta + kPi / 2.0);
  }

  double first = -1.0, last = -1.0;
  int crossings = 0;
  for (std::size_t i = 1; i < offset.size(); ++i) {
    if ((offset[i - 1] > 0.0) != (offset[i] > 0.0)) {
      const double frac = offset[i - 1] / (offset[i - 1] - offset[i]);
      const double t = (static_cast<double>(i - 1) + frac) * dt;
      if (first < 0.0) first = t;
      last = t;
      ++crossings;
    }
  }
  REQUIRE(crossings >= 3);
  const double period = 2.0 * (last - first) / (crossings - 1);

  const double omega_pend =
      std::sqrt(plant().gravity_ms2 * plant().beam_first_moment_kgm /
                plant().beam_inertia_kgm2);
  CHECK(std::abs(2.0 * kPi / period - omega_pend) / omega_pend < 0.05);
}

TEST_CASE("halving the step shrinks the terminal error") {
  const Equilibrium eq = static_equilibrium(0.3, 50.0, plant());
  const SimState start = equilibrium_state(eq, plant());

  const auto run = [&](double dt, int steps) {
    GeneralizedAlpha integrator(plant(), 50.0);
    integrator.reset(start);
    for (int i = 0; i < steps; ++i) integrator.advance(0.5, dt);
    return integrator.state();
  };

  const SimState ref = run(0.000625, 320);
  const SimState coarse = run(0.005, 40);
  const SimState fine = run(0.0025, 80);

  const auto err = [&](const SimState& s) {
    return std::abs(s.theta - ref.theta) +
           (s.zeta - ref.zeta).norm() +
           1e-3 * std::abs(s.theta_rate - ref.theta_rate);
  };
  CHECK(err(coarse) / err(fine) >= 3.0);
}

TEST_CASE("energy decays under damping with a frozen rod force") {
  const double payload = 50.0;
  const Equilibrium eq = static_equilibrium(0.3, payload, plant());
  SimState state = equilibrium_state(eq, plant());
  // kick the frame rate; a modal velocity jump would put an instantaneous
  // damping force on the near-singular mass directions and ring for a few
  // steps before the algorithmic dissipation removes it
  state.theta_rate += 0.05;

  StepOptions opts;
  opts.actuator = ActuatorMode::kFrozenForce;
  opts.frozen_force_n = eq.force_n;

  GeneralizedAlpha integrator(plant(), payload, opts);
  integrator.reset(state);

  double prev =
      mechanical_energy(state, plant(), payload, eq.force_n);
  for (int i = 0; i < 200; ++i) {
    integrator.advance(0.0, 0.005);
    const double now = mechanical_energy(integrator.state(), plant(),
                                         payload, eq.force_n);
    CHECK(now <= prev + 1e-6 * (std::abs(prev) + 1.0));
    prev = now;
  }
}

TEST_CASE("undamped step reverses in time") {
  const double payload = 20.0;
  const Equilibrium eq = static_equilibrium(0.35, payload, plant());
  SimState state = equilibrium_state(eq, plant());
  state.zeta_rate[0] += 0.02;
  state.theta_rate = 0.01;

  StepOptions opts;
  opts.actuator = ActuatorMode::kFrozenForce;
  opts.frozen_force_n = eq.force_n;
  opts.structural_damping = false;
  opts.rho_inf = 1.0;  // midpoint family, no numerical dissipation

  GeneralizedAlpha integrator(plant(), payload, opts);
  integrator.reset(state);
  const double dt = 1e-4;
  integrator.advance(0.0, dt);
  integrator.advance(0.0, -dt);

  const SimState& back = integrator.state();
  CHECK(std::abs(back.theta - state.theta) < 1e-6);
  CHECK(std::abs(back.theta_rate - state.theta_rate) <
        1e-6 * std::max(1.0, std::abs(state.theta_rate)));
  CHECK((back.zeta - state.zeta).norm() <
        1e-6 * std::max(1.0, state.zeta.norm()));
  CHECK((back.zeta_rate - state.zeta_rate).norm() <
        1e-6 * std::max(1.0, state.zeta_rate.norm()));
}

TEST_CASE("hard extension trips the limit flags") {
  const Equilibrium eq = static_equilibrium(0.7, 0.0, plant());
  GeneralizedAlpha integrator(plant(), 0.0);
  integrator.reset(equilibrium_state(eq, plant()));
  for (int i = 0; i < 1200; ++i) integrator.advance(1.0, 0.005);
  CHECK(integrator.flags().merged());
}

TEST_CASE("step guards") {
  const Equilibrium eq = static_equilibrium(0.3, 0.0, plant());
  const SimState state = equilibrium_state(eq, plant());
  CHECK_THROWS_AS(step(state, 0.0, 0.0, plant(), 0.0), InvalidInput);

  SimState broken = state;
  broken.theta = std::nan("");
  GeneralizedAlpha integrator(plant(), 0.0);
  CHECK_THROWS(integrator.reset(broken));
}
