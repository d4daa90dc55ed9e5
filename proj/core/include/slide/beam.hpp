#pragma once

#include <Eigen/Dense>
#include <vector>

namespace slide {

// Planar Euler-Bernoulli cantilever, prismatic cross-section.
struct BeamSpec {
  double length_m = 2.5;
  int n_elements = 20;
  double elastic_modulus_pa = 2.1e11;
  double density_kgm3 = 7850.0;
  double cross_area_m2 = 4.0e-3;
  double second_moment_m4 = 1.6e-5;
  double rayleigh_alpha = 0.0;     // mass-proportional damping [1/s]
  double rayleigh_beta = 3.35e-3;  // stiffness-proportional damping [s]

  double mass_per_length() const { return density_kgm3 * cross_area_m2; }
  double beam_mass() const { return mass_per_length() * length_m; }
  void validate() const;  // throws InvalidInput
};

// Assembled cantilever model. Two DOF per node (deflection w, rotation w'),
// root node clamped; matrices hold free DOFs only, ordered root to tip.
struct FEModel {
  BeamSpec spec;
  Eigen::MatrixXd mass;       // consistent, SPD
  Eigen::MatrixXd stiffness;  // SPD after clamping
  std::vector<double> node_x;  // axial node positions incl. root [m]

  int n_dof() const { return static_cast<int>(mass.rows()); }
  Eigen::MatrixXd damping() const;  // alpha*M + beta*K
};

FEModel build_beam_model(const BeamSpec& spec);

// First cantilever bending frequency [Hz] from the continuous solution
// f1 = lambda1 / (2 pi) * sqrt(EI / (rho A L^4)), lambda1 = 3.51602.
double analytic_first_frequency_hz(const BeamSpec& spec);

// Scales the second moment of area so the first bending mode lands on
// target_hz; geometry and mass distribution stay untouched.
BeamSpec tune_first_mode(double target_hz, const BeamSpec& spec);

// Static solve K u = f for a transverse tip load [N]; tip deflection [m].
double static_tip_deflection(const FEModel& model, double tip_load_n);

// Hermite interpolation of a deflection field at axial position x.
double deflection_at(const FEModel& model, const Eigen::VectorXd& u, double x);

}  // namespace slide
