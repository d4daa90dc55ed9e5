#include "slide/modal.hpp"

#include <cmath>
#include <numbers>

#include "slide/errors.hpp"

namespace slide {

Eigen::VectorXd ModalModel::omega() const {
  return frequencies_hz * (2.0 * std::numbers::pi);
}

Eigen::VectorXd ModalModel::damping_diagonal() const {
  const Eigen::VectorXd w = omega();
  return Eigen::VectorXd::Constant(n_modes, modal_alpha) +
         modal_beta * w.cwiseProduct(w);
}

namespace {

// Exact integrals of the cubic Hermite basis over one element,
// int_0^1 N dxi and int_0^1 xi N dxi, rotation entries carrying h.
void element_integrals(const FEModel& model, const Eigen::MatrixXd& modes,
                       Eigen::VectorXd& coupling, Eigen::VectorXd& gravity) {
  const int m = static_cast<int>(modes.cols());
  const double h = model.spec.length_m / model.spec.n_elements;
  const double rho_a = model.spec.mass_per_length();
  coupling = Eigen::VectorXd::Zero(m);
  gravity = Eigen::VectorXd::Zero(m);

  const Eigen::Vector4d int_n(0.5, h / 12.0, 0.5, -h / 12.0);
  const Eigen::Vector4d int_xin(3.0 / 20.0, h / 30.0, 7.0 / 20.0, -h / 20.0);

  for (int e = 0; e < model.spec.n_elements; ++e) {
    const double x0 = model.node_x[e];
    for (int j = 0; j < m; ++j) {
      Eigen::Vector4d q;  // (w1, w1', w2, w2'); root DOFs are clamped
      for (int c = 0; c < 4; ++c) {
        const int g = 2 * e + c - 2;
        q(c) = g < 0 ? 0.0 : modes(g, j);
      }
      const double s0 = int_n.dot(q);    // int N q dxi
      const double s1 = int_xin.dot(q);  // int xi N q dxi
      gravity(j) += rho_a * h * s0;
      coupling(j) += rho_a * h * (x0 * s0 + h * s1);
    }
  }
}

}  // namespace

Eigen::VectorXd modes_at(const FEModel& model, const Eigen::MatrixXd& modes,
                         double x) {
  const int m = static_cast<int>(modes.cols());
  Eigen::VectorXd out(m);
  for (int j = 0; j < m; ++j) out(j) = deflection_at(model, modes.col(j), x);
  return out;
}

ModalModel modal_reduce(const FEModel& model, int n_modes, double sensor_x,
                        double actuator_x, double payload_x) {
  if (n_modes < 1 || n_modes > model.n_dof())
    throw InvalidInput("mode count out of range");

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      model.stiffness, model.mass);
  if (solver.info() != Eigen::Success)
    throw NumericalFailure("beam eigenproblem did not converge");

  ModalModel reduced;
  reduced.n_modes = n_modes;
  reduced.modes = solver.eigenvectors().leftCols(n_modes);
  // fix a sign convention: positive tip deflection
  for (int j = 0; j < n_modes; ++j) {
    if (reduced.modes(model.n_dof() - 2, j) < 0.0) reduced.modes.col(j) *= -1.0;
  }
  reduced.frequencies_hz =
      solver.eigenvalues().head(n_modes).cwiseSqrt() / (2.0 * std::numbers::pi);
  element_integrals(model, reduced.modes, reduced.coupling,
                    reduced.gravity_load);
  reduced.phi_sensor = modes_at(model, reduced.modes, sensor_x);
  reduced.phi_actuator = modes_at(model, reduced.modes, actuator_x);
  reduced.phi_payload = modes_at(model, reduced.modes, payload_x);
  reduced.modal_alpha = model.spec.rayleigh_alpha;
  reduced.modal_beta = model.spec.rayleigh_beta;
  return reduced;
}

}  // namespace slide
