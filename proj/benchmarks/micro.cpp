#include <benchmark/benchmark.h>

#include "slide/acquisition.hpp"
#include "slide/config.hpp"
#include "slide/dynamics.hpp"
#include "slide/network.hpp"

namespace {

const slide::BuiltModels& models() {
  static const slide::BuiltModels m = slide::build_models(slide::Config{});
  return m;
}

slide::SimState start_state(double payload_kg) {
  const auto eq =
      slide::static_equilibrium(0.35, payload_kg, models().plant);
  return slide::equilibrium_state(eq, models().plant);
}

void BM_AssembleEom(benchmark::State& state) {
  const auto sim = start_state(50.0);
  for (auto _ : state) {
    auto eom = slide::assemble_eom(sim, models().plant, 50.0, 1.0e4);
    benchmark::DoNotOptimize(eom.force.data());
  }
}
BENCHMARK(BM_AssembleEom);

void BM_IntegratorStep(benchmark::State& state) {
  slide::GeneralizedAlpha integrator(models().plant, 50.0);
  integrator.reset(start_state(50.0));
  double u = 0.4;
  for (auto _ : state) {
    integrator.advance(u, 0.005);
    u = -u;  // keep the valve moving without drifting off range
    benchmark::DoNotOptimize(integrator.state().theta);
  }
}
BENCHMARK(BM_IntegratorStep);

void BM_StaticEquilibrium(benchmark::State& state) {
  for (auto _ : state) {
    auto eq = slide::static_equilibrium(0.35, 50.0, models().plant);
    benchmark::DoNotOptimize(eq.force_n);
  }
}
BENCHMARK(BM_StaticEquilibrium);

void BM_Forward(benchmark::State& state) {
  const int t_d = 60;
  slide::ArchSpec arch;
  arch.layers = "TLSLTLSLT";
  arch.hidden_units = 2 * t_d;
  arch.in_dim = 5 * t_d;
  arch.out_dim = 1;
  slide::Rng rng(7);
  const slide::Network net = slide::build_network(arch, rng);

  slide::RowMatrixXf x(state.range(0), arch.in_dim);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    x.data()[i] = static_cast<float>(rng.uniform(-1.0, 1.0));

  for (auto _ : state) {
    auto y = slide::forward(net, x);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)->Arg(1)->Arg(140)->Arg(11200);

}  // namespace

BENCHMARK_MAIN();
