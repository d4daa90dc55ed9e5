#include "slide/beam.hpp"

#include <cmath>
#include <numbers>

#include "slide/errors.hpp"

namespace slide {

void BeamSpec::validate() const {
  if (!(length_m > 0)) throw InvalidInput("beam length must be positive");
  if (n_elements < 1) throw InvalidInput("beam needs at least one element");
  if (!(elastic_modulus_pa > 0)) throw InvalidInput("elastic modulus must be positive");
  if (!(density_kgm3 > 0)) throw InvalidInput("density must be positive");
  if (!(cross_area_m2 > 0)) throw InvalidInput("cross-section area must be positive");
  if (!(second_moment_m4 > 0)) throw InvalidInput("second moment of area must be positive");
  if (rayleigh_alpha < 0 || rayleigh_beta < 0)
    throw InvalidInput("Rayleigh damping coefficients must be non-negative");
}

Eigen::MatrixXd FEModel::damping() const {
  return spec.rayleigh_alpha * mass + spec.rayleigh_beta * stiffness;
}

FEModel build_beam_model(const BeamSpec& spec) {
  spec.validate();
  const int ne = spec.n_elements;
  const int n_nodes = ne + 1;
  const double h = spec.length_m / ne;
  const double ei = spec.elastic_modulus_pa * spec.second_moment_m4;
  const double rho_a = spec.mass_per_length();

  // element matrices, DOF order (w1, w1', w2, w2')
  Eigen::Matrix4d ke;
  ke << 12, 6 * h, -12, 6 * h,
      6 * h, 4 * h * h, -6 * h, 2 * h * h,
      -12, -6 * h, 12, -6 * h,
      6 * h, 2 * h * h, -6 * h, 4 * h * h;
  ke *= ei / (h * h * h);

  Eigen::Matrix4d me;
  me << 156, 22 * h, 54, -13 * h,
      22 * h, 4 * h * h, 13 * h, -3 * h * h,
      54, 13 * h, 156, -22 * h,
      -13 * h, -3 * h * h, -22 * h, 4 * h * h;
  me *= rho_a * h / 420.0;

  const int n_full = 2 * n_nodes;
  Eigen::MatrixXd m_full = Eigen::MatrixXd::Zero(n_full, n_full);
  Eigen::MatrixXd k_full = Eigen::MatrixXd::Zero(n_full, n_full);
  for (int e = 0; e < ne; ++e) {
    const int base = 2 * e;
    m_full.block<4, 4>(base, base) += me;
    k_full.block<4, 4>(base, base) += ke;
  }

  FEModel model;
  model.spec = spec;
  model.mass = m_full.bottomRightCorner(n_full - 2, n_full - 2);
  model.stiffness = k_full.bottomRightCorner(n_full - 2, n_full - 2);
  model.node_x.resize(n_nodes);
  for (int i = 0; i < n_nodes; ++i) model.node_x[i] = i * h;
  return model;
}

double analytic_first_frequency_hz(const BeamSpec& spec) {
  constexpr double lambda1 = 1.875104068711961 * 1.875104068711961;
  const double l = spec.length_m;
  return lambda1 / (2.0 * std::numbers::pi) *
         std::sqrt(spec.elastic_modulus_pa * spec.second_moment_m4 /
                   (spec.mass_per_length() * l * l * l * l));
}

BeamSpec tune_first_mode(double target_hz, const BeamSpec& spec) {
  if (!(target_hz > 0)) throw InvalidInput("target frequency must be positive");
  const double f0 = analytic_first_frequency_hz(spec);
  BeamSpec tuned = spec;
  tuned.second_moment_m4 *= (target_hz / f0) * (target_hz / f0);
  return tuned;
}

double static_tip_deflection(const FEModel& model, double tip_load_n) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(model.n_dof());
  f(model.n_dof() - 2) = tip_load_n;  // tip deflection DOF
  const Eigen::VectorXd u = model.stiffness.llt().solve(f);
  return u(model.n_dof() - 2);
}

double deflection_at(const FEModel& model, const Eigen::VectorXd& u, double x) {
  const auto& nx = model.node_x;
  const double l = model.spec.length_m;
  if (x < 0.0 || x > l + 1e-12) throw InvalidInput("position off the beam");
  x = std::min(x, l);
  const double h = l / model.spec.n_elements;
  int e = std::min(static_cast<int>(x / h), model.spec.n_elements - 1);
  const double xi = (x - nx[e]) / h;

  // clamped root: element DOFs (w1, w1') of element 0 are zero
  const auto dof = [&](int node, int comp) -> double {
    const int g = 2 * node + comp - 2;  // free-DOF index
    return g < 0 ? 0.0 : u(g);
  };
  const double w1 = dof(e, 0), t1 = dof(e, 1);
  const double w2 = dof(e + 1, 0), t2 = dof(e + 1, 1);

  const double n1 = 1 - 3 * xi * xi + 2 * xi * xi * xi;
  const double n2 = xi - 2 * xi * xi + xi * xi * xi;
  const double n3 = 3 * xi * xi - 2 * xi * xi * xi;
  const double n4 = -xi * xi + xi * xi * xi;
  return n1 * w1 + h * n2 * t1 + n3 * w2 + h * n4 * t2;
}

}  // namespace slide
