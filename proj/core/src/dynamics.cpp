#include "slide/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "slide/errors.hpp"

namespace slide {

namespace {
constexpr double deg = std::numbers::pi / 180.0;
}

PlantModel make_plant(const BeamSpec& beam, const ModalModel& modal,
                      const LiftGeometry& geom, const HydraulicSpec& hyd) {
  beam.validate();
  geom.validate(beam.length_m);
  hyd.validate();
  PlantModel plant;
  plant.modal = modal;
  plant.geom = geom;
  plant.hyd = hyd;
  const double rho_a = beam.mass_per_length();
  const double l = beam.length_m;
  plant.beam_inertia_kgm2 = rho_a * l * l * l / 3.0;
  plant.beam_mass_kg = rho_a * l;
  plant.beam_first_moment_kgm = rho_a * l * l / 2.0;
  return plant;
}

bool SimState::finite() const {
  return std::isfinite(theta) && std::isfinite(theta_rate) &&
         std::isfinite(time_s) && zeta.allFinite() && zeta_rate.allFinite() &&
         std::isfinite(chambers.p1_pa) && std::isfinite(chambers.p2_pa);
}

SimState make_state(const PlantModel& plant) {
  SimState state;
  state.zeta = Eigen::VectorXd::Zero(plant.modal.n_modes);
  state.zeta_rate = Eigen::VectorXd::Zero(plant.modal.n_modes);
  state.chambers = {plant.hyd.tank_pressure_pa, plant.hyd.tank_pressure_pa};
  return state;
}

Eom assemble_eom(const SimState& state, const PlantModel& plant,
                 double payload_kg, double hydraulic_force_n,
                 bool structural_damping) {
  const ModalModel& modal = plant.modal;
  const int m = modal.n_modes;
  if (state.zeta.size() != m || state.zeta_rate.size() != m)
    throw InvalidInput("state and modal model dimensions disagree");

  const double mp = payload_kg;
  const double xp = plant.geom.payload_x_m;
  const Eigen::VectorXd& phi_p = modal.phi_payload;
  const double wp = phi_p.dot(state.zeta);
  const double wp_rate = phi_p.dot(state.zeta_rate);

  Eom eom;
  eom.mass.resize(1 + m, 1 + m);
  eom.force.resize(1 + m);

  eom.mass(0, 0) = plant.beam_inertia_kgm2 + state.zeta.squaredNorm() +
                   mp * (xp * xp + wp * wp);
  const Eigen::VectorXd m_tz = modal.coupling + mp * xp * phi_p;
  eom.mass.block(0, 1, 1, m) = m_tz.transpose();
  eom.mass.block(1, 0, m, 1) = m_tz;
  eom.mass.block(1, 1, m, m) =
      Eigen::MatrixXd::Identity(m, m) + mp * phi_p * phi_p.transpose();

  const double g = plant.gravity_ms2;
  const double sin_t = std::sin(state.theta);
  const double cos_t = std::cos(state.theta);
  const Eigen::VectorXd w2 = modal.omega().cwiseAbs2();
  const ActuatorKinematics kin = actuator_kinematics(state.theta, plant.geom);

  // quadratic velocity
  double q_theta = -2.0 * state.theta_rate *
                   (state.zeta.dot(state.zeta_rate) + mp * wp * wp_rate);
  Eigen::VectorXd q_zeta =
      state.theta_rate * state.theta_rate * (state.zeta + mp * wp * phi_p);
  // elastic and structural damping
  q_zeta -= w2.cwiseProduct(state.zeta);
  if (structural_damping)
    q_zeta -= modal.damping_diagonal().cwiseProduct(state.zeta_rate);
  // gravity
  q_theta += -g * cos_t * (plant.beam_first_moment_kgm + mp * xp) +
             g * sin_t * (modal.gravity_load.dot(state.zeta) + mp * wp);
  q_zeta -= g * cos_t * (modal.gravity_load + mp * phi_p);
  // actuation at the clevis
  q_theta += hydraulic_force_n * kin.dlength_dtheta;
  q_zeta += hydraulic_force_n * kin.transverse_dir * modal.phi_actuator;

  eom.force(0) = q_theta;
  eom.force.tail(m) = q_zeta;
  return eom;
}

TipDeflection tip_deflection(const SimState& state, const PlantModel& plant) {
  const double ws = plant.modal.phi_sensor.dot(state.zeta);
  return {-ws * std::sin(state.theta), ws * std::cos(state.theta)};
}

double mechanical_energy(const SimState& state, const PlantModel& plant,
                         double payload_kg, double external_force_n) {
  const Eom eom = assemble_eom(state, plant, payload_kg, 0.0, false);
  Eigen::VectorXd qd(1 + plant.modal.n_modes);
  qd(0) = state.theta_rate;
  qd.tail(plant.modal.n_modes) = state.zeta_rate;
  const double kinetic = 0.5 * qd.dot(eom.mass * qd);

  const Eigen::VectorXd w2 = plant.modal.omega().cwiseAbs2();
  const double elastic = 0.5 * w2.cwiseProduct(state.zeta).dot(state.zeta);

  const double mp = payload_kg;
  const double wp = plant.modal.phi_payload.dot(state.zeta);
  const double grav =
      plant.gravity_ms2 *
      (std::sin(state.theta) *
           (plant.beam_first_moment_kgm + mp * plant.geom.payload_x_m) +
       std::cos(state.theta) *
           (plant.modal.gravity_load.dot(state.zeta) + mp * wp));

  const ActuatorKinematics kin = actuator_kinematics(state.theta, plant.geom);
  const double through = kin.length_m + kin.transverse_dir *
                                            plant.modal.phi_actuator.dot(state.zeta);
  return kinetic + elastic + grav - external_force_n * through;
}

GeneralizedAlpha::GeneralizedAlpha(const PlantModel& plant, double payload_kg,
                                   StepOptions opts)
    : plant_(&plant), payload_kg_(payload_kg), opts_(opts) {
  if (payload_kg < 0) throw InvalidInput("payload mass must be non-negative");
  if (opts.rho_inf < 0.0 || opts.rho_inf > 1.0)
    throw InvalidInput("spectral radius must lie in [0, 1]");
  const double r = opts.rho_inf;
  alpha_m_ = (2.0 * r - 1.0) / (r + 1.0);
  alpha_f_ = r / (r + 1.0);
  beta_ = 0.25 * (1.0 - alpha_m_ + alpha_f_) * (1.0 - alpha_m_ + alpha_f_);
  gamma_ = 0.5 - alpha_m_ + alpha_f_;
  reset(make_state(plant));
}

void GeneralizedAlpha::reset(const SimState& state) {
  if (state.zeta.size() != plant_->modal.n_modes)
    throw InvalidInput("state dimension does not match the plant");
  if (!state.finite()) throw InvalidInput("non-finite state");
  state_ = state;
  flags_ = {};
  const ActuatorKinematics kin =
      actuator_kinematics(state_.theta, plant_->geom);
  const double s_rate = kin.dlength_dtheta * state_.theta_rate;
  const double fh = opts_.actuator == ActuatorMode::kCoupled
                        ? cylinder_force(state_.chambers, s_rate, plant_->hyd)
                        : opts_.frozen_force_n;
  const Eom eom = assemble_eom(state_, *plant_, payload_kg_, fh,
                               opts_.structural_damping);
  accel_ = eom.mass.llt().solve(eom.force);
}

void GeneralizedAlpha::advance(double u, double dt) {
  if (dt == 0.0) throw InvalidInput("zero time step");
  const int m = plant_->modal.n_modes;
  const int nq = 1 + m;
  const bool coupled = opts_.actuator == ActuatorMode::kCoupled;
  const int nx = coupled ? nq + 2 : nq;

  // step-start quantities
  Eigen::VectorXd q0(nq), v0(nq);
  q0(0) = state_.theta;
  q0.tail(m) = state_.zeta;
  v0(0) = state_.theta_rate;
  v0.tail(m) = state_.zeta_rate;
  const ActuatorKinematics kin0 =
      actuator_kinematics(state_.theta, plant_->geom);
  const double s_rate0 = kin0.dlength_dtheta * state_.theta_rate;
  const double fh0 =
      coupled ? cylinder_force(state_.chambers, s_rate0, plant_->hyd)
              : opts_.frozen_force_n;
  const Eom eom0 = assemble_eom(state_, *plant_, payload_kg_, fh0,
                                opts_.structural_damping);
  const Eigen::VectorXd inertia0 = eom0.mass * accel_;
  const PressureRates rates0 =
      coupled ? pressure_rates(state_.chambers, kin0.length_m, s_rate0, u,
                               plant_->hyd)
              : PressureRates{};

  const double mech_scale = std::max(
      {1.0, inertia0.lpNorm<Eigen::Infinity>(),
       eom0.force.lpNorm<Eigen::Infinity>()});
  const double p_scale = std::max(
      {1.0e5, std::abs(state_.chambers.p1_pa), std::abs(state_.chambers.p2_pa)});

  SimState trial = state_;
  // trial state from the Newmark updates for unknowns x = [a; p]
  const auto set_trial = [&](const Eigen::VectorXd& x) {
    const auto a = x.head(nq);
    const Eigen::VectorXd q =
        q0 + dt * v0 + dt * dt * ((0.5 - beta_) * accel_ + beta_ * a);
    const Eigen::VectorXd v = v0 + dt * ((1.0 - gamma_) * accel_ + gamma_ * a);
    trial.theta = q(0);
    trial.zeta = q.tail(m);
    trial.theta_rate = v(0);
    trial.zeta_rate = v.tail(m);
    if (coupled) trial.chambers = {x(nq), x(nq + 1)};
    trial.time_s = state_.time_s + dt;
  };

  // scaled residual: generalized-alpha weighted mechanics, trapezoidal
  // pressure update with the spool signal held over the step
  const auto residual = [&](const Eigen::VectorXd& x) {
    set_trial(x);
    const auto a = x.head(nq);
    const ActuatorKinematics kin =
        actuator_kinematics(trial.theta, plant_->geom);
    const double s_rate = kin.dlength_dtheta * trial.theta_rate;
    const double fh =
        coupled ? cylinder_force(trial.chambers, s_rate, plant_->hyd)
                : opts_.frozen_force_n;
    const Eom eom = assemble_eom(trial, *plant_, payload_kg_, fh,
                                 opts_.structural_damping);
    Eigen::VectorXd r(nx);
    r.head(nq) = ((1.0 - alpha_m_) * (eom.mass * a) + alpha_m_ * inertia0 -
                  (1.0 - alpha_f_) * eom.force - alpha_f_ * eom0.force) /
                 mech_scale;
    if (coupled) {
      const PressureRates rates = pressure_rates(
          trial.chambers, kin.length_m, s_rate, u, plant_->hyd);
      r(nq) = (x(nq) - state_.chambers.p1_pa -
               0.5 * dt * (rates0.p1_pa_s + rates.p1_pa_s)) /
              p_scale;
      r(nq + 1) = (x(nq + 1) - state_.chambers.p2_pa -
                   0.5 * dt * (rates0.p2_pa_s + rates.p2_pa_s)) /
                  p_scale;
    }
    return r;
  };

  Eigen::VectorXd x(nx);
  x.head(nq) = accel_;
  if (coupled) {
    x(nq) = state_.chambers.p1_pa;
    x(nq + 1) = state_.chambers.p2_pa;
  }

  Eigen::VectorXd r = residual(x);
  const double r0_norm = r.lpNorm<Eigen::Infinity>();
  const double tol = opts_.newton_tol * std::max(1.0, r0_norm);
  bool converged = r0_norm <= tol;

  Eigen::MatrixXd jac(nx, nx);
  for (int iter = 0; iter < opts_.max_newton_iters && !converged; ++iter) {
    // forward-difference Jacobian of the scaled residual
    for (int j = 0; j < nx; ++j) {
      const double col_scale = j < nq ? 1.0 : p_scale;
      const double h = 1e-7 * std::max(std::abs(x(j)), col_scale);
      Eigen::VectorXd xj = x;
      xj(j) += h;
      jac.col(j) = (residual(xj) - r) / h;
    }
    const Eigen::VectorXd dx = jac.partialPivLu().solve(-r);
    if (!dx.allFinite())
      throw NumericalFailure("singular step Jacobian at t = " +
                             std::to_string(state_.time_s));

    // backtracking on the residual norm
    const double r_norm = r.lpNorm<Eigen::Infinity>();
    double t = 1.0;
    Eigen::VectorXd x_new, r_new;
    for (int ls = 0; ls < 8; ++ls) {
      x_new = x + t * dx;
      r_new = residual(x_new);
      if (r_new.allFinite() &&
          r_new.lpNorm<Eigen::Infinity>() < (1.0 - 1e-4 * t) * r_norm)
        break;
      t *= 0.5;
    }
    x = x_new;
    r = r_new;
    converged = r.allFinite() && r.lpNorm<Eigen::Infinity>() <= tol;
  }

  if (!converged) {
    std::ostringstream msg;
    msg << "Newton stalled at t = " << state_.time_s
        << " s, scaled residual " << r.lpNorm<Eigen::Infinity>() << ", theta "
        << state_.theta / deg << " deg";
    throw NumericalFailure(msg.str());
  }

  set_trial(x);
  if (!trial.finite())
    throw NumericalFailure("non-finite state at t = " +
                           std::to_string(trial.time_s));
  if (coupled) {
    if (trial.chambers.p1_pa < 0.0) {
      trial.chambers.p1_pa = 0.0;
      flags_.vacuum = true;
    }
    if (trial.chambers.p2_pa < 0.0) {
      trial.chambers.p2_pa = 0.0;
      flags_.vacuum = true;
    }
  }
  const double s_new = actuator_kinematics(trial.theta, plant_->geom).length_m;
  if (!actuator_within_limits(s_new, plant_->hyd.min_length(),
                              plant_->hyd.max_length()))
    flags_.actuator_limit = true;
  if (trial.theta < plant_->geom.theta_min_rad - 5.0 * deg ||
      trial.theta > plant_->geom.theta_max_rad + 5.0 * deg)
    flags_.theta_bound = true;

  accel_ = x.head(1 + m);
  state_ = trial;
}

SimState step(const SimState& state, double u, double dt,
              const PlantModel& plant, double payload_kg,
              const StepOptions& opts) {
  GeneralizedAlpha integrator(plant, payload_kg, opts);
  integrator.reset(state);
  integrator.advance(u, dt);
  return integrator.state();
}

}  // namespace slide
