#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "json.hpp"
#include "slide/config.hpp"
#include "slide/errors.hpp"
#include "slide/network.hpp"
#include "slide/pipeline.hpp"

using namespace slide;
namespace fs = std::filesystem;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

const BuiltModels& models() {
  static const BuiltModels m = build_models(Config{});
  return m;
}

const PlantModel& plant() { return models().plant; }

fs::path scratch_dir(const char* leaf) {
  const fs::path dir = fs::temp_directory_path() / "slide_pipeline_tests" / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is.good());
  return std::string(std::istreambuf_iterator<char>(is), {});
}

int line_count(const fs::path& path) {
  std::ifstream is(path);
  int n = 0;
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) ++n;
  return n;
}

// first-lag passthrough of the U channel, scaled by scale_y on the way out
Network passthrough_net(int t_d, int k, double scale_y) {
  ArchSpec arch;
  arch.layers = "L";
  arch.in_dim = t_d;
  arch.out_dim = k + 1;
  Rng rng(1);
  Network net = build_network(arch, rng);
  for (auto& w : net.weights) w.setZero();
  for (auto& b : net.biases) b.setZero();
  net.weights[0](0, 0) = 1.0f;
  net.t_d = t_d;
  net.k = k;
  net.sensors = {kChU};
  net.scale_x = {1.0};
  net.scale_y = scale_y;
  return net;
}

Trajectory counting_trajectory(int n_steps) {
  Trajectory traj;
  traj.dt_s = 0.005;
  traj.payload_kg = 0.0;
  for (int c = 0; c < kNumChannels; ++c) {
    traj.channels[c].resize(n_steps);
    for (int i = 0; i < n_steps; ++i)
      traj.channels[c][i] = static_cast<float>(100 * c + i);
  }
  return traj;
}

}  // namespace

TEST_CASE("evaluation command profile") {
  // piecewise phases: lift, hold, lower, hold, dither, step up, step down
  CHECK(eval_cycle_command(0.00) == 0.0);
  CHECK(eval_cycle_command(0.07) == 0.6);
  CHECK(eval_cycle_command(0.20) == 0.0);
  CHECK(eval_cycle_command(0.27) == doctest::Approx(-0.24));
  CHECK(eval_cycle_command(0.32) == -0.6);
  CHECK(eval_cycle_command(0.42) == 0.0);
  CHECK(eval_cycle_command(0.475) == doctest::Approx(0.4));
  CHECK(eval_cycle_command(0.525) == doctest::Approx(-0.4));
  CHECK(eval_cycle_command(0.70) == 0.8);
  CHECK(eval_cycle_command(0.80) == -0.8);
  CHECK(eval_cycle_command(0.90) == 0.0);

  double peak = 0.0;
  for (int i = 0; i < 5000; ++i) {
    const double u = eval_cycle_command(i / 5000.0);
    CHECK(std::abs(u) <= 0.8);
    peak = std::max(peak, std::abs(u));
  }
  CHECK(peak == 0.8);
}

TEST_CASE("evaluation cycles are seeded and feasible") {
  const EvalCycle a = make_eval_cycle(50.0, 7, plant(), 2.0);
  const EvalCycle b = make_eval_cycle(50.0, 7, plant(), 2.0);
  const EvalCycle c = make_eval_cycle(50.0, 8, plant(), 2.0);

  CHECK(a.n_steps() == 400);
  CHECK(a.dt_s == 0.005);
  CHECK(a.payload_kg == 50.0);
  CHECK(a.theta_in == b.theta_in);
  CHECK(a.control == b.control);
  CHECK(a.theta_in != c.theta_in);

  // start angle leaves headroom for the scripted excursions
  CHECK(a.theta_in >= 15.0 * kDeg);
  CHECK(a.theta_in <= 30.0 * kDeg);

  // the command profile maps onto the step grid
  CHECK(a.control[0] == 0.0);
  CHECK(a.control[a.n_steps() / 2] ==
        eval_cycle_command(0.5));
}

TEST_CASE("sliding inference unrolls windows in lockstep") {
  const Network net = passthrough_net(4, 0, 2.0);
  const Trajectory traj = counting_trajectory(20);

  const std::vector<double> est = sliding_inference(net, traj);
  REQUIRE(est.size() == 16);  // 20 - t_d
  for (int i = 0; i < 16; ++i)
    CHECK(est[i] == doctest::Approx(2.0 * i).epsilon(1e-12));

  CHECK(sliding_inference(net, traj) == est);  // repeatable

  SUBCASE("forward steps shorten the unroll") {
    const Network wide = passthrough_net(4, 2, 2.0);
    const std::vector<double> e2 = sliding_inference(wide, traj);
    CHECK(e2.size() == 14);  // 20 - t_d - k
    CHECK(e2[0] == doctest::Approx(0.0));
    CHECK(e2[5] == doctest::Approx(10.0));
  }

  SUBCASE("horizon guard") {
    CHECK_THROWS_AS(sliding_inference(net, counting_trajectory(4)),
                    InvalidInput);
  }

  SUBCASE("nets without provenance are refused") {
    Network bare = passthrough_net(4, 0, 2.0);
    bare.sensors.clear();
    bare.scale_x.clear();
    CHECK_THROWS_AS(sliding_inference(bare, traj), InvalidInput);

    Network leaky = passthrough_net(4, 0, 2.0);
    leaky.sensors = {kChDy};
    CHECK_THROWS_AS(sliding_inference(leaky, traj), InvalidInput);
  }
}

TEST_CASE("error metrics") {
  const std::vector<double> ref = {0.01, -0.02, 0.015, -0.005};

  SUBCASE("perfect estimate") {
    const Metrics m = compute_metrics(ref, ref, kScaleDy);
    CHECK(m.mape_pct == 0.0);
    CHECK(m.mae_m == 0.0);
  }

  SUBCASE("constant offset") {
    std::vector<double> est = ref;
    for (double& v : est) v += 2e-4;
    const Metrics m = compute_metrics(est, ref, kScaleDy);
    CHECK(m.mae_m == doctest::Approx(2e-4).epsilon(1e-12));
    REQUIRE(m.abs_err_m.size() == ref.size());
    for (const double e : m.abs_err_m)
      CHECK(e == doctest::Approx(2e-4).epsilon(1e-12));

    // hand MAPE: every |ref| above the 1% floor here
    double mape = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i)
      mape += 2e-4 / std::abs(ref[i]);
    mape *= 100.0 / ref.size();
    CHECK(m.mape_pct == doctest::Approx(mape).epsilon(1e-12));
  }

  SUBCASE("zero reference hits the denominator floor") {
    const std::vector<double> zeros(5, 0.0);
    const std::vector<double> est(5, 1e-3);
    const Metrics m = compute_metrics(est, zeros, 0.030);
    // floor = 0.01 * 0.030 = 3e-4
    CHECK(m.mape_pct == doctest::Approx(100.0 * 1e-3 / 3e-4).epsilon(1e-9));
    CHECK(m.mae_m == doctest::Approx(1e-3));
  }

  SUBCASE("guards") {
    CHECK_THROWS_AS(compute_metrics({1.0}, {1.0, 2.0}, kScaleDy),
                    InvalidInput);
    CHECK_THROWS_AS(compute_metrics({}, {}, kScaleDy), InvalidInput);
    CHECK_THROWS_AS(compute_metrics({1.0}, {1.0}, 0.0), InvalidInput);
  }
}

TEST_CASE("speedup counts amortized windows") {
  CHECK(speedup(1.0, 1.0, 1, 1) == 1.0);
  CHECK(speedup(100.0, 0.001, 80, 11200) == doctest::Approx(1.4e7));
  CHECK_THROWS_AS(speedup(0.0, 1.0, 1, 1), InvalidInput);
  CHECK_THROWS_AS(speedup(1.0, 0.0, 1, 1), InvalidInput);
  CHECK_THROWS_AS(speedup(1.0, 1.0, 0, 1), InvalidInput);
  CHECK_THROWS_AS(speedup(1.0, 1.0, 1, -1), InvalidInput);
}

TEST_CASE("full evaluation writes consistent artifacts") {
  ArchSpec arch;
  arch.layers = "L";
  arch.in_dim = 2 * 40;
  arch.out_dim = 1;
  Rng rng(3);
  Network net = build_network(arch, rng);
  net.t_d = 40;
  net.k = 0;
  net.sensors = sensor_preset(2);
  net.scale_x = {kScaleU, kScaleS};
  net.scale_y = kScaleDy;

  const EvalCycle cycle = make_eval_cycle(50.0, 11, plant(), 1.5);
  const StepOptions step;

  const fs::path dir1 = scratch_dir("eval1");
  const EvalResult r1 = run_eval(net, cycle, plant(), step, dir1.string());

  CHECK(r1.trajectory.n_steps() == 300);
  CHECK(static_cast<int>(r1.estimate.size()) == 260);
  CHECK(r1.metrics.abs_err_m.size() == r1.estimate.size());
  CHECK(r1.metrics.t_d_used == 40);
  CHECK(r1.metrics.mae_m >= 0.0);

  CHECK(line_count(dir1 / "eval.csv") == 261);  // header + estimates
  const std::string svg = slurp(dir1 / "eval.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);

  const auto metrics = nlohmann::json::parse(slurp(dir1 / "metrics.json"));
  CHECK(metrics.at("payload_kg").get<double>() == 50.0);
  CHECK(metrics.at("t_d_steps").get<int>() == 40);
  CHECK(metrics.at("n_pred").get<int>() == 260);
  CHECK(metrics.at("mae_m").get<double>() ==
        doctest::Approx(r1.metrics.mae_m));

  // bitwise reproducible artifacts
  const fs::path dir2 = scratch_dir("eval2");
  run_eval(net, cycle, plant(), step, dir2.string());
  CHECK(slurp(dir1 / "metrics.json") == slurp(dir2 / "metrics.json"));
  CHECK(slurp(dir1 / "eval.csv") == slurp(dir2 / "eval.csv"));

  // without an output directory nothing is written
  const fs::path dir3 = scratch_dir("eval3");
  const EvalResult r3 = run_eval(net, cycle, plant(), step, "");
  CHECK(r3.metrics.mae_m == r1.metrics.mae_m);
  CHECK(fs::is_empty(dir3));

  SUBCASE("cycles shorter than the window are refused") {
    const EvalCycle stub = make_eval_cycle(50.0, 11, plant(), 0.1);
    CHECK_THROWS_AS(run_eval(net, stub, plant(), step, ""), InvalidInput);
  }
}

TEST_CASE("benchmark rows pair simulation against inference") {
  ArchSpec arch;
  arch.layers = "L";
  arch.in_dim = 20;
  arch.out_dim = 1;
  Rng rng(5);
  Network bench_net = build_network(arch, rng);
  bench_net.t_d = 10;
  bench_net.k = 0;
  bench_net.sensors = sensor_preset(2);
  bench_net.scale_x = {kScaleU, kScaleS};
  bench_net.scale_y = kScaleDy;

  SimRunConfig run;
  run.n_steps = 60;

  const std::vector<BenchRow> rows =
      run_benchmark(bench_net, {5}, 50.0, 3, plant(), run, 1);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].batch == 5);
  CHECK(rows[0].t_sim_s > 0.0);
  CHECK(rows[0].t_nn_s > 0.0);
  CHECK(rows[0].speedup ==
        doctest::Approx(
            speedup(rows[0].t_sim_s, rows[0].t_nn_s, 5, 5 * 50)));

  const fs::path dir = scratch_dir("bench");
  write_bench_csv(rows, (dir / "bench.csv").string());
  std::ifstream is(dir / "bench.csv");
  std::string header;
  std::getline(is, header);
  CHECK(header == "batch,t_sim_s,t_nn_s,speedup");
  CHECK(line_count(dir / "bench.csv") == 2);

  CHECK_THROWS_AS(run_benchmark(bench_net, {}, 50.0, 3, plant(), run, 1),
                  InvalidInput);
  CHECK_THROWS_AS(run_benchmark(bench_net, {5}, 50.0, 3, plant(), run, 0),
                  InvalidInput);
  SimRunConfig tight;
  tight.n_steps = 10;
  CHECK_THROWS_AS(run_benchmark(bench_net, {5}, 50.0, 3, plant(), tight, 1),
                  InvalidInput);
}

TEST_CASE("config files populate the model description") {
  const fs::path dir = scratch_dir("config");
  const fs::path ini = dir / "plant.ini";
  std::ofstream(ini) << "[fem]\n"
                        "length_m = 3.0\n"
                        "n_elements = 10\n"
                        "n_modes = 4\n"
                        "target_f1_hz = 0\n"
                        "\n"
                        "[hydraulics]\n"
                        "pump_pressure_bar = 120\n"
                        "tank_pressure_pa = 2e5\n"
                        "sub_volumes = 1e-3:1.5e9, 2e-3:0.8e9\n"
                        "friction_coulomb_n = 150\n"
                        "\n"
                        "[sim]\n"
                        "dt_s = 0.01\n"
                        "duration_s = 2\n";

  const Config cfg = load_config(ini.string());
  CHECK(cfg.beam.length_m == 3.0);
  CHECK(cfg.beam.n_elements == 10);
  CHECK(cfg.n_modes == 4);
  CHECK(cfg.target_f1_hz == 0.0);
  CHECK(cfg.hydraulics.pump_pressure_pa == 120.0 * 1e5);
  CHECK(cfg.hydraulics.tank_pressure_pa == 2e5);
  REQUIRE(cfg.hydraulics.sub_volumes.size() == 2);
  CHECK(cfg.hydraulics.sub_volumes[0].volume_m3 == 1e-3);
  CHECK(cfg.hydraulics.sub_volumes[1].bulk_pa == 0.8e9);
  CHECK(cfg.hydraulics.friction.coulomb_n == 150.0);
  CHECK(cfg.hydraulics.bore_m == 0.100);  // untouched default
  CHECK(cfg.sim.dt_s == 0.01);
  CHECK(cfg.sim.n_steps() == 200);
  CHECK_FALSE(cfg.geometry.has_value());

  const BuiltModels built = build_models(cfg);
  CHECK(built.plant.modal.n_modes == 4);
  CHECK(built.beam.length_m == 3.0);

  const SimRunConfig run = make_run_config(cfg.sim);
  CHECK(run.dt_s == 0.01);
  CHECK(run.n_steps == 200);
  CHECK(run.step.rho_inf == cfg.sim.rho_inf);
}

TEST_CASE("config rejects typos and contradictions") {
  const fs::path dir = scratch_dir("badconfig");

  const auto write_and_load = [&](const char* name, const std::string& body) {
    const fs::path ini = dir / name;
    std::ofstream(ini) << body;
    return load_config(ini.string());
  };

  try {
    write_and_load("typo.ini", "[fem]\nlenth_m = 3\n");
    FAIL("expected a throw");
  } catch (const InvalidInput& err) {
    CHECK(std::string(err.what()).find("lenth_m") != std::string::npos);
  }

  CHECK_THROWS_AS(write_and_load("section.ini", "[fluids]\nx = 1\n"),
                  InvalidInput);
  CHECK_THROWS_AS(
      write_and_load("both.ini",
                     "[hydraulics]\npump_pressure_pa = 1e7\n"
                     "pump_pressure_bar = 100\n"),
      InvalidInput);
  CHECK_THROWS_AS(write_and_load("junk.ini", "[sim]\ndt_s = fast\n"),
                  InvalidInput);
  CHECK_THROWS_AS(write_and_load("trail.ini", "[sim]\ndt_s = 0.005x\n"),
                  InvalidInput);
  CHECK_THROWS_AS(load_config((dir / "absent.ini").string()), InvalidInput);

  // semantic failures surface when models are built
  Config bad;
  bad.sim.dt_s = -1.0;
  CHECK_THROWS_AS(build_models(bad), InvalidInput);
  Config rho;
  rho.sim.rho_inf = 1.5;
  CHECK_THROWS_AS(build_models(rho), InvalidInput);
  Config modes;
  modes.n_modes = 0;
  CHECK_THROWS_AS(build_models(modes), InvalidInput);
}

TEST_CASE("geometry section refits then overrides") {
  const fs::path dir = scratch_dir("geomconfig");
  const fs::path ini = dir / "geom.ini";
  std::ofstream(ini) << "[geometry]\n"
                        "theta_min_deg = -15\n"
                        "theta_max_deg = 45\n"
                        "anchor_x_m = 0.1\n";

  const Config cfg = load_config(ini.string());
  REQUIRE(cfg.geometry.has_value());
  CHECK(cfg.geometry->theta_min_rad == doctest::Approx(-15.0 * kDeg));
  CHECK(cfg.geometry->theta_max_rad == doctest::Approx(45.0 * kDeg));
  CHECK(cfg.geometry->anchor_x_m == 0.1);    // explicit override
  CHECK(cfg.geometry->anchor_y_m < 0.0);     // refit drop below the pivot
  CHECK(cfg.geometry->sensor_x_m == 2.5);

  const BuiltModels built = build_models(cfg);
  CHECK(built.plant.geom.anchor_x_m == 0.1);
  CHECK(built.plant.geom.theta_max_rad == doctest::Approx(45.0 * kDeg));
}
