#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "slide/beam.hpp"
#include "slide/errors.hpp"
#include "slide/modal.hpp"

using namespace slide;

namespace {

BeamSpec unit_spec(int n_elements, double length = 1.0) {
  BeamSpec spec;
  spec.length_m = length;
  spec.n_elements = n_elements;
  spec.elastic_modulus_pa = 1.0;
  spec.density_kgm3 = 1.0;
  spec.cross_area_m2 = 1.0;   // rho A = 1
  spec.second_moment_m4 = 1.0;  // EI = 1
  spec.rayleigh_beta = 0.0;
  return spec;
}

// Textbook Euler-Bernoulli element matrices for EI = rhoA = h = 1.
Eigen::Matrix4d element_stiffness() {
  Eigen::Matrix4d k;
  k << 12, 6, -12, 6,
       6, 4, -6, 2,
       -12, -6, 12, -6,
       6, 2, -6, 4;
  return k;
}

Eigen::Matrix4d element_mass() {
  Eigen::Matrix4d m;
  m << 156, 22, 54, -13,
       22, 4, 13, -3,
       54, 13, 156, -22,
       -13, -3, -22, 4;
  return m / 420.0;
}

}  // namespace

TEST_CASE("single element matches hand matrices") {
  const FEModel model = build_beam_model(unit_spec(1));
  REQUIRE(model.n_dof() == 2);
  // root clamped: only the tip-node block of the element matrices survives
  const Eigen::Matrix2d k_tip = element_stiffness().bottomRightCorner(2, 2);
  const Eigen::Matrix2d m_tip = element_mass().bottomRightCorner(2, 2);
  CHECK((model.stiffness - k_tip).norm() == doctest::Approx(0.0));
  CHECK((model.mass - m_tip).norm() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("two elements assemble with the overlap block") {
  // h = 1 each, so the element matrices above apply verbatim
  const FEModel model = build_beam_model(unit_spec(2, 2.0));
  REQUIRE(model.n_dof() == 4);

  const Eigen::Matrix4d ke = element_stiffness();
  const Eigen::Matrix4d me = element_mass();
  Eigen::Matrix4d k_expect = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d m_expect = Eigen::Matrix4d::Zero();
  k_expect.topLeftCorner(2, 2) =
      ke.bottomRightCorner(2, 2) + ke.topLeftCorner(2, 2);
  k_expect.topRightCorner(2, 2) = ke.topRightCorner(2, 2);
  k_expect.bottomLeftCorner(2, 2) = ke.bottomLeftCorner(2, 2);
  k_expect.bottomRightCorner(2, 2) = ke.bottomRightCorner(2, 2);
  m_expect.topLeftCorner(2, 2) =
      me.bottomRightCorner(2, 2) + me.topLeftCorner(2, 2);
  m_expect.topRightCorner(2, 2) = me.topRightCorner(2, 2);
  m_expect.bottomLeftCorner(2, 2) = me.bottomLeftCorner(2, 2);
  m_expect.bottomRightCorner(2, 2) = me.bottomRightCorner(2, 2);

  CHECK((model.stiffness - k_expect).norm() < 1e-12);
  CHECK((model.mass - m_expect).norm() < 1e-14);
}

TEST_CASE("matrices are symmetric and definite") {
  const FEModel model = build_beam_model(BeamSpec{});
  CHECK((model.mass - model.mass.transpose()).norm() == 0.0);
  CHECK((model.stiffness - model.stiffness.transpose()).norm() == 0.0);
  CHECK(Eigen::LLT<Eigen::MatrixXd>(model.mass).info() == Eigen::Success);
  CHECK(Eigen::LLT<Eigen::MatrixXd>(model.stiffness).info() ==
        Eigen::Success);
}

TEST_CASE("static tip deflection matches the cantilever formula") {
  const BeamSpec spec;  // 2.5 m, 20 elements
  const FEModel model = build_beam_model(spec);
  const double load = 1000.0;
  const double analytic =
      load * std::pow(spec.length_m, 3) /
      (3.0 * spec.elastic_modulus_pa * spec.second_moment_m4);
  const double fem = static_tip_deflection(model, load);
  CHECK(std::abs(fem - analytic) / analytic < 0.005);
}

TEST_CASE("rejects broken specs") {
  BeamSpec spec;
  spec.elastic_modulus_pa = -1.0;
  CHECK_THROWS_AS(build_beam_model(spec), InvalidInput);
  spec = BeamSpec{};
  spec.n_elements = 0;
  CHECK_THROWS_AS(build_beam_model(spec), InvalidInput);
  spec = BeamSpec{};
  spec.cross_area_m2 = 0.0;
  CHECK_THROWS_AS(build_beam_model(spec), InvalidInput);
}

TEST_CASE("first frequency matches the analytic cantilever mode") {
  const BeamSpec spec;
  const FEModel model = build_beam_model(spec);
  const ModalModel modal = modal_reduce(model, 8, spec.length_m,
                                        0.8 * spec.length_m, spec.length_m);

  // continuous solution, written out as an independent oracle
  const double lambda1 = 1.8751040687119612;
  const double f1 =
      lambda1 * lambda1 / (2.0 * std::numbers::pi) *
      std::sqrt(spec.elastic_modulus_pa * spec.second_moment_m4 /
                (spec.mass_per_length() * std::pow(spec.length_m, 4)));
  CHECK(std::abs(modal.frequencies_hz[0] - f1) / f1 < 0.01);
  CHECK(modal.frequencies_hz[0] ==
        doctest::Approx(analytic_first_frequency_hz(spec)).epsilon(0.01));
}

TEST_CASE("modes are mass normalized and stiffness diagonal") {
  const BeamSpec spec;
  const FEModel model = build_beam_model(spec);
  const ModalModel modal = modal_reduce(model, 8, spec.length_m,
                                        0.8 * spec.length_m, spec.length_m);

  const Eigen::MatrixXd gram =
      modal.modes.transpose() * model.mass * modal.modes;
  CHECK((gram - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() <
        1e-8);

  const Eigen::MatrixXd kk =
      modal.modes.transpose() * model.stiffness * modal.modes;
  const Eigen::VectorXd omega = modal.omega();
  for (int i = 0; i < 8; ++i) {
    CHECK(std::abs(kk(i, i) - omega[i] * omega[i]) / kk(i, i) < 1e-6);
    for (int j = 0; j < 8; ++j)
      if (i != j) CHECK(std::abs(kk(i, j)) < 1e-6 * kk(i, i));
  }
  for (int i = 1; i < 8; ++i)
    CHECK(modal.frequencies_hz[i] > modal.frequencies_hz[i - 1]);
}

TEST_CASE("modal quadratures agree with composite Simpson") {
  const BeamSpec spec;
  const FEModel model = build_beam_model(spec);
  const ModalModel modal =
      modal_reduce(model, 4, spec.length_m, 0.8 * spec.length_m,
                   spec.length_m);

  const int n_iv = 2000;  // even
  const double h = spec.length_m / n_iv;
  for (int j = 0; j < 4; ++j) {
    double c = 0.0, g = 0.0;
    for (int i = 0; i <= n_iv; ++i) {
      const double x = i * h;
      const double w =
          (i == 0 || i == n_iv) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      const double phi = modes_at(model, modal.modes, x)[j];
      c += w * x * phi;
      g += w * phi;
    }
    c *= spec.mass_per_length() * h / 3.0;
    g *= spec.mass_per_length() * h / 3.0;
    CHECK(modal.coupling[j] == doctest::Approx(c).epsilon(1e-6));
    CHECK(modal.gravity_load[j] == doctest::Approx(g).epsilon(1e-6));
  }
}

TEST_CASE("sensor, actuator and payload rows are shape evaluations") {
  const BeamSpec spec;
  const FEModel model = build_beam_model(spec);
  const double xs = 2.5, xa = 0.8, xp = 2.5;
  const ModalModel modal = modal_reduce(model, 6, xs, xa, xp);
  CHECK((modal.phi_sensor - modes_at(model, modal.modes, xs)).norm() == 0.0);
  CHECK((modal.phi_actuator - modes_at(model, modal.modes, xa)).norm() ==
        0.0);
  CHECK((modal.phi_payload - modes_at(model, modal.modes, xp)).norm() == 0.0);
}

TEST_CASE("frequency tuning") {
  const BeamSpec spec;

  SUBCASE("hits 29 Hz within 2 percent") {
    const BeamSpec tuned = tune_first_mode(29.0, spec);
    const FEModel model = build_beam_model(tuned);
    const ModalModel modal =
        modal_reduce(model, 8, tuned.length_m, 0.8, tuned.length_m);
    CHECK(std::abs(modal.frequencies_hz[0] - 29.0) / 29.0 < 0.02);
  }

  SUBCASE("tuning to the current frequency is a fixed point") {
    const double f0 = analytic_first_frequency_hz(spec);
    const BeamSpec same = tune_first_mode(f0, spec);
    CHECK(std::abs(same.second_moment_m4 - spec.second_moment_m4) /
              spec.second_moment_m4 <
          1e-12);
  }

  SUBCASE("doubling the target quadruples the second moment") {
    const double f0 = analytic_first_frequency_hz(spec);
    const BeamSpec twice = tune_first_mode(2.0 * f0, spec);
    CHECK(twice.second_moment_m4 ==
          doctest::Approx(4.0 * spec.second_moment_m4).epsilon(1e-12));
  }
}

TEST_CASE("mesh refinement leaves the first three modes in place") {
  BeamSpec coarse;  // 20 elements
  BeamSpec fine = coarse;
  fine.n_elements = 40;
  const ModalModel mc = modal_reduce(build_beam_model(coarse), 3, 2.5, 0.8,
                                     2.5);
  const ModalModel mf =
      modal_reduce(build_beam_model(fine), 3, 2.5, 0.8, 2.5);
  for (int j = 0; j < 3; ++j)
    CHECK(std::abs(mc.frequencies_hz[j] - mf.frequencies_hz[j]) /
              mf.frequencies_hz[j] <
          0.005);
}

TEST_CASE("rayleigh damping is symmetric with nonnegative modal ratios") {
  const BeamSpec spec;  // beta = 3.35e-3
  const FEModel model = build_beam_model(spec);
  const Eigen::MatrixXd c = model.damping();
  CHECK((c - c.transpose()).norm() == 0.0);

  const ModalModel modal = modal_reduce(model, 8, 2.5, 0.8, 2.5);
  const Eigen::VectorXd diag = modal.damping_diagonal();
  const Eigen::VectorXd omega = modal.omega();
  for (int j = 0; j < 8; ++j) {
    CHECK(diag[j] >= 0.0);
    // ratio = (alpha/omega + beta*omega) / 2
    const double ratio = diag[j] / (2.0 * omega[j]);
    CHECK(ratio >= 0.0);
  }
}

TEST_CASE("deflection interpolation hits nodal values and the clamp") {
  const BeamSpec spec;
  const FEModel model = build_beam_model(spec);
  Eigen::VectorXd u = Eigen::VectorXd::Random(model.n_dof());
  CHECK(deflection_at(model, u, 0.0) == 0.0);
  for (std::size_t n = 1; n < model.node_x.size(); ++n)
    CHECK(deflection_at(model, u, model.node_x[n]) ==
          doctest::Approx(u[2 * static_cast<int>(n) - 2]).epsilon(1e-12));
}
