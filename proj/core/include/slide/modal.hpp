#pragma once

#include <Eigen/Dense>

#include "slide/beam.hpp"

namespace slide {

// Reduced bending model: the FE deflection field is written as
// u(t) = Phi * zeta(t) with mass-normalized free-vibration modes Phi.
struct ModalModel {
  int n_modes = 0;
  Eigen::VectorXd frequencies_hz;  // ascending
  Eigen::MatrixXd modes;           // [n_dof x n_modes], Phi^T M Phi = I
  Eigen::VectorXd coupling;        // c_j = int rho A x phi_j dx  [kg m]
  Eigen::VectorXd gravity_load;    // g_j = int rho A   phi_j dx  [kg]
  Eigen::VectorXd phi_sensor;      // mode values at the deflection sensor
  Eigen::VectorXd phi_actuator;    // mode values at the actuator attachment
  Eigen::VectorXd phi_payload;     // mode values at the payload position
  double modal_alpha = 0.0;        // Rayleigh alpha carried into modal space
  double modal_beta = 0.0;         // Rayleigh beta

  Eigen::VectorXd omega() const;  // rad/s
  // diagonal modal damping: alpha + beta * omega_j^2
  Eigen::VectorXd damping_diagonal() const;
};

// Solves the clamped-beam generalized eigenproblem and keeps the lowest
// n_modes modes. sensor_x / actuator_x / payload_x are axial positions [m].
ModalModel modal_reduce(const FEModel& model, int n_modes, double sensor_x,
                        double actuator_x, double payload_x);

// Mode shape values at an arbitrary axial position.
Eigen::VectorXd modes_at(const FEModel& model, const Eigen::MatrixXd& modes,
                         double x);

}  // namespace slide
