#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slide/acquisition.hpp"
#include "slide/network.hpp"

namespace slide {

// Scripted raise/hold/lower/oscillate command profile over a fixed duration.
// Deliberately outside the randomized segment family used for training data.
struct EvalCycle {
  double payload_kg = 0.0;
  std::uint64_t seed = 0;
  double theta_in = 0.0;  // rad
  double dt_s = 0.005;
  std::vector<double> control;

  int n_steps() const { return static_cast<int>(control.size()); }
};

// Command value at cycle fraction f in [0, 1).
double eval_cycle_command(double f);

// Draws a feasible start angle from the seed and scripts the command
// profile. Duration defaults to the 10 s evaluation cycle.
EvalCycle make_eval_cycle(double payload_kg, std::uint64_t seed,
                          const PlantModel& plant, double duration_s = 10.0,
                          double dt_s = 0.005);

// Feeds every length-t_d sensor window through the net and unscales the
// first predicted step. Output element i is the estimate for sample i + t_d;
// nothing is produced for the first t_d samples.
std::vector<double> sliding_inference(const Network& net,
                                      const Trajectory& traj);

struct Metrics {
  double mape_pct = 0.0;
  double mae_m = 0.0;
  std::vector<double> abs_err_m;
  int t_d_used = 0;
};

// MAE in meters; MAPE with the denominator floored at 1% of scale_y so
// zero crossings of the reference cannot blow up the percentage.
Metrics compute_metrics(const std::vector<double>& estimate,
                        const std::vector<double>& reference, double scale_y);

// (t_sim / t_nn) * (n_out / n_in): simulator seconds per trajectory over
// network seconds per predicted window.
double speedup(double t_sim_s, double t_nn_s, std::int64_t n_in,
               std::int64_t n_out);

struct EvalResult {
  Metrics metrics;
  Trajectory trajectory;
  std::vector<double> estimate;
};

// Simulates the cycle, runs sliding inference and computes metrics. With a
// non-empty out_dir also writes eval.csv (t,delta_ref,delta_hat,abs_err),
// metrics.json and a self-contained eval.svg overlay.
EvalResult run_eval(const Network& net, const EvalCycle& cycle,
                    const PlantModel& plant, const StepOptions& step,
                    const std::string& out_dir);

struct BenchRow {
  int batch = 0;
  double t_sim_s = 0.0;
  double t_nn_s = 0.0;
  double speedup = 0.0;
};

// Per batch size: wall time to simulate the batch vs wall time to run the
// equivalent window predictions, median over `reps` repetitions. Timing
// wraps the compute calls only; no file I/O inside the measured region.
std::vector<BenchRow> run_benchmark(const Network& net,
                                    const std::vector<int>& batches,
                                    double payload_kg, std::uint64_t seed,
                                    const PlantModel& plant,
                                    const SimRunConfig& run, int reps = 5);

void write_bench_csv(const std::vector<BenchRow>& rows,
                     const std::string& path);

}  // namespace slide
