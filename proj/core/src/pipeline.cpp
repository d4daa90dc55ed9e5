#include "slide/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "binio.hpp"
#include "slide/errors.hpp"

namespace slide {

namespace {

constexpr std::uint64_t kEvalStream = 0x6576616cULL;  // "eval"

double to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

double eval_cycle_command(double f) {
  if (f < 0.05) return 0.0;
  if (f < 0.15) return 0.6;
  if (f < 0.25) return 0.0;
  if (f < 0.30) return -0.6 * (f - 0.25) / 0.05;  // blend into lowering
  if (f < 0.40) return -0.6;
  if (f < 0.45) return 0.0;
  if (f < 0.65)  // two oscillation periods
    return 0.4 * std::sin(2.0 * std::numbers::pi * (f - 0.45) / 0.10);
  if (f < 0.75) return 0.8;
  if (f < 0.85) return -0.8;
  return 0.0;
}

EvalCycle make_eval_cycle(double payload_kg, std::uint64_t seed,
                          const PlantModel& plant, double duration_s,
                          double dt_s) {
  if (!(duration_s > 0.0) || !(dt_s > 0.0) || duration_s < dt_s)
    throw InvalidInput("cycle duration and step must be positive");
  EvalCycle cycle;
  cycle.payload_kg = payload_kg;
  cycle.seed = seed;
  cycle.dt_s = dt_s;

  // start somewhere mid-range so the scripted excursions stay in envelope
  double lo = std::max(plant.geom.theta_min_rad, to_rad(15.0));
  double hi = std::min(plant.geom.theta_max_rad, to_rad(30.0));
  if (!(lo < hi)) {
    lo = plant.geom.theta_min_rad;
    hi = plant.geom.theta_max_rad;
  }
  Rng rng(derive_seed(seed, kEvalStream));
  bool feasible = false;
  for (int attempt = 0; attempt < 64 && !feasible; ++attempt) {
    cycle.theta_in = rng.uniform(lo, hi);
    try {
      static_equilibrium(cycle.theta_in, payload_kg, plant);
      feasible = true;
    } catch (const InfeasibleConfiguration&) {
    }
  }
  if (!feasible)
    throw InfeasibleConfiguration(
        "no feasible start angle for the evaluation cycle");

  const int n = static_cast<int>(std::llround(duration_s / dt_s));
  cycle.control.resize(n);
  for (int i = 0; i < n; ++i)
    cycle.control[i] = eval_cycle_command(static_cast<double>(i) / n);
  return cycle;
}

namespace {

// [n_windows x n_sensors*t_d], scaled exactly like the training arrangement
RowMatrixXf window_matrix(const Network& net, const Trajectory& traj) {
  if (net.t_d < 1) throw InvalidInput("checkpoint carries no window length");
  if (net.sensors.empty() || net.sensors.size() != net.scale_x.size())
    throw InvalidInput("checkpoint sensor metadata is incomplete");
  for (const int ch : net.sensors)
    if (ch < 0 || ch >= kNumChannels || ch == kChDy)
      throw InvalidInput("checkpoint requests an unrecorded channel");
  const int width =
      static_cast<int>(net.sensors.size()) * net.t_d;
  if (width != net.arch.in_dim)
    throw InvalidInput("checkpoint window does not match the architecture");

  const int n = traj.n_steps();
  const int n_windows = n - net.t_d - net.k;
  if (n_windows < 1)
    throw InvalidInput("trajectory shorter than the estimation horizon");

  RowMatrixXf x(n_windows, width);
  for (std::size_t c = 0; c < net.sensors.size(); ++c) {
    const auto& channel = traj.channels[net.sensors[c]];
    const double inv = 1.0 / net.scale_x[c];
    const int base = static_cast<int>(c) * net.t_d;
    for (int i = 0; i < n_windows; ++i)
      for (int j = 0; j < net.t_d; ++j)
        x(i, base + j) = static_cast<float>(
            static_cast<double>(channel[i + j]) * inv);
  }
  return x;
}

}  // namespace

std::vector<double> sliding_inference(const Network& net,
                                      const Trajectory& traj) {
  const RowMatrixXf x = window_matrix(net, traj);
  const RowMatrixXf pred = forward(net, x);
  std::vector<double> out(static_cast<std::size_t>(pred.rows()));
  for (Eigen::Index i = 0; i < pred.rows(); ++i)
    out[i] = static_cast<double>(pred(i, 0)) * net.scale_y;
  return out;
}

Metrics compute_metrics(const std::vector<double>& estimate,
                        const std::vector<double>& reference, double scale_y) {
  if (estimate.size() != reference.size())
    throw InvalidInput("estimate and reference lengths differ");
  if (estimate.empty()) throw InvalidInput("no samples to score");
  if (!(scale_y > 0.0)) throw InvalidInput("scale must be positive");

  Metrics m;
  m.abs_err_m.resize(estimate.size());
  const double floor = 0.01 * scale_y;
  double sum_abs = 0.0;
  double sum_pct = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const double err = std::abs(estimate[i] - reference[i]);
    m.abs_err_m[i] = err;
    sum_abs += err;
    sum_pct += err / std::max(std::abs(reference[i]), floor);
  }
  const double n = static_cast<double>(estimate.size());
  m.mae_m = sum_abs / n;
  m.mape_pct = 100.0 * sum_pct / n;
  return m;
}

double speedup(double t_sim_s, double t_nn_s, std::int64_t n_in,
               std::int64_t n_out) {
  if (!(t_sim_s > 0.0) || !(t_nn_s > 0.0) || n_in < 1 || n_out < 1)
    throw InvalidInput("speedup needs positive times and counts");
  return (t_sim_s / t_nn_s) *
         (static_cast<double>(n_out) / static_cast<double>(n_in));
}

namespace {

void write_eval_csv(const std::string& path, double dt, int t_d,
                    const std::vector<double>& ref,
                    const std::vector<double>& est,
                    const std::vector<double>& err) {
  auto os = binio::open_out(path);
  os << "t,delta_ref,delta_hat,abs_err\n";
  char buf[128];
  for (std::size_t i = 0; i < est.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6f,%.9e,%.9e,%.9e\n",
                  (t_d + static_cast<double>(i)) * dt, ref[i], est[i], err[i]);
    os << buf;
  }
  if (!os) throw InvalidInput("write failed: " + path);
}

void write_metrics_json(const std::string& path, const EvalCycle& cycle,
                        const Network& net, const Metrics& m) {
  nlohmann::json j;
  j["dt_s"] = cycle.dt_s;
  j["k_steps"] = net.k;
  j["mae_m"] = m.mae_m;
  j["mape_pct"] = m.mape_pct;
  j["n_pred"] = m.abs_err_m.size();
  j["payload_kg"] = cycle.payload_kg;
  j["seed"] = cycle.seed;
  j["t_d_steps"] = net.t_d;
  j["theta_in_rad"] = cycle.theta_in;
  auto os = binio::open_out(path);
  os << j.dump(2) << '\n';
  if (!os) throw InvalidInput("write failed: " + path);
}

struct Panel {
  double x0, x1, y_top, y_bottom;
  double t_min, t_max, v_min, v_max;

  double px(double t) const {
    return x0 + (t - t_min) / (t_max - t_min) * (x1 - x0);
  }
  double py(double v) const {
    return y_bottom - (v - v_min) / (v_max - v_min) * (y_bottom - y_top);
  }
};

void append_polyline(std::ostringstream& svg, const Panel& p,
                     const std::vector<double>& t,
                     const std::vector<double>& v, const char* color,
                     bool dashed) {
  const std::size_t stride = std::max<std::size_t>(1, t.size() / 1400);
  svg << "  <polyline fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"1.2\"";
  if (dashed) svg << " stroke-dasharray=\"6 3\"";
  svg << " points=\"";
  char buf[40];
  for (std::size_t i = 0; i < t.size(); i += stride) {
    std::snprintf(buf, sizeof buf, "%.2f,%.2f ", p.px(t[i]), p.py(v[i]));
    svg << buf;
  }
  // always land on the final sample so the curve does not stop short
  std::snprintf(buf, sizeof buf, "%.2f,%.2f", p.px(t.back()),
                p.py(v.back()));
  svg << buf << "\"/>\n";
}

void append_frame(std::ostringstream& svg, const Panel& p,
                  const char* y_label) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "  <rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" "
                "height=\"%.2f\" fill=\"none\" stroke=\"#888888\"/>\n",
                p.x0, p.y_top, p.x1 - p.x0, p.y_bottom - p.y_top);
  svg << buf;
  std::snprintf(buf, sizeof buf,
                "  <text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" "
                "text-anchor=\"end\">%.3g</text>\n",
                p.x0 - 5.0, p.y_top + 4.0, p.v_max);
  svg << buf;
  std::snprintf(buf, sizeof buf,
                "  <text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" "
                "text-anchor=\"end\">%.3g</text>\n",
                p.x0 - 5.0, p.y_bottom + 4.0, p.v_min);
  svg << buf;
  const double mid_y = 0.5 * (p.y_top + p.y_bottom);
  std::snprintf(buf, sizeof buf,
                "  <text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" "
                "text-anchor=\"middle\" transform=\"rotate(-90 %.2f "
                "%.2f)\">%s</text>\n",
                14.0, mid_y, 14.0, mid_y, y_label);
  svg << buf;
}

void write_eval_svg(const std::string& path, double dt, int t_d,
                    const std::vector<double>& ref,
                    const std::vector<double>& est,
                    const std::vector<double>& err) {
  std::vector<double> t(ref.size());
  for (std::size_t i = 0; i < t.size(); ++i)
    t[i] = (t_d + static_cast<double>(i)) * dt;

  const auto range = [](const std::vector<double>& a,
                        const std::vector<double>& b) {
    double lo = a[0], hi = a[0];
    for (const double v : a) lo = std::min(lo, v), hi = std::max(hi, v);
    for (const double v : b) lo = std::min(lo, v), hi = std::max(hi, v);
    const double pad = std::max(0.05 * (hi - lo), 1e-6);
    return std::pair{lo - pad, hi + pad};
  };
  const auto [d_lo, d_hi] = range(ref, est);
  const auto [e_lo_raw, e_hi] = range(err, err);
  (void)e_lo_raw;

  Panel top{72.0, 944.0, 40.0, 300.0, t.front(), t.back(), d_lo, d_hi};
  Panel bottom{72.0, 944.0, 340.0, 460.0, t.front(), t.back(), 0.0, e_hi};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" "
         "height=\"500\" viewBox=\"0 0 960 500\" font-family=\"sans-serif\" "
         "fill=\"#222222\">\n";
  svg << "  <rect x=\"0\" y=\"0\" width=\"960\" height=\"500\" "
         "fill=\"#ffffff\"/>\n";

  svg << "  <line x1=\"72\" y1=\"18\" x2=\"104\" y2=\"18\" "
         "stroke=\"#1f77b4\" stroke-width=\"1.6\"/>\n"
         "  <text x=\"110\" y=\"22\" font-size=\"12\">reference</text>\n"
         "  <line x1=\"200\" y1=\"18\" x2=\"232\" y2=\"18\" "
         "stroke=\"#d62728\" stroke-width=\"1.6\" "
         "stroke-dasharray=\"6 3\"/>\n"
         "  <text x=\"238\" y=\"22\" font-size=\"12\">estimate</text>\n"
         "  <line x1=\"330\" y1=\"18\" x2=\"362\" y2=\"18\" "
         "stroke=\"#2ca02c\" stroke-width=\"1.6\"/>\n"
         "  <text x=\"368\" y=\"22\" font-size=\"12\">absolute "
         "error</text>\n";

  append_frame(svg, top, "tip deflection [m]");
  append_polyline(svg, top, t, ref, "#1f77b4", false);
  append_polyline(svg, top, t, est, "#d62728", true);

  append_frame(svg, bottom, "abs error [m]");
  append_polyline(svg, bottom, t, err, "#2ca02c", false);

  char buf[256];
  std::snprintf(buf, sizeof buf,
                "  <text x=\"72\" y=\"478\" font-size=\"11\">%.3g</text>\n"
                "  <text x=\"944\" y=\"478\" font-size=\"11\" "
                "text-anchor=\"end\">%.3g</text>\n"
                "  <text x=\"508\" y=\"492\" font-size=\"12\" "
                "text-anchor=\"middle\">time [s]</text>\n",
                t.front(), t.back());
  svg << buf;
  svg << "</svg>\n";

  auto os = binio::open_out(path);
  os << svg.str();
  if (!os) throw InvalidInput("write failed: " + path);
}

}  // namespace

EvalResult run_eval(const Network& net, const EvalCycle& cycle,
                    const PlantModel& plant, const StepOptions& step,
                    const std::string& out_dir) {
  if (cycle.n_steps() <= net.t_d + net.k)
    throw InvalidInput("cycle too short for the estimation horizon");

  const Equilibrium eq =
      static_equilibrium(cycle.theta_in, cycle.payload_kg, plant);
  SimRunConfig run;
  run.dt_s = cycle.dt_s;
  run.n_steps = cycle.n_steps();
  run.step = step;

  EvalResult result;
  result.trajectory = simulate_trajectory(eq, cycle.control, cycle.payload_kg,
                                          plant, run, cycle.seed);
  result.estimate = sliding_inference(net, result.trajectory);

  const auto& dy = result.trajectory.channels[kChDy];
  std::vector<double> reference(result.estimate.size());
  for (std::size_t i = 0; i < reference.size(); ++i)
    reference[i] = static_cast<double>(dy[net.t_d + static_cast<int>(i)]);

  result.metrics = compute_metrics(result.estimate, reference, net.scale_y);
  result.metrics.t_d_used = net.t_d;

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const auto join = [&](const char* name) {
      return (std::filesystem::path(out_dir) / name).string();
    };
    write_eval_csv(join("eval.csv"), cycle.dt_s, net.t_d, reference,
                   result.estimate, result.metrics.abs_err_m);
    write_metrics_json(join("metrics.json"), cycle, net, result.metrics);
    write_eval_svg(join("eval.svg"), cycle.dt_s, net.t_d, reference,
                   result.estimate, result.metrics.abs_err_m);
  }
  return result;
}

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::vector<BenchRow> run_benchmark(const Network& net,
                                    const std::vector<int>& batches,
                                    double payload_kg, std::uint64_t seed,
                                    const PlantModel& plant,
                                    const SimRunConfig& run, int reps) {
  if (batches.empty()) throw InvalidInput("no batch sizes given");
  if (reps < 1) throw InvalidInput("reps must be positive");
  if (run.n_steps <= net.t_d + net.k)
    throw InvalidInput("batch trajectories shorter than the horizon");

  using clock = std::chrono::steady_clock;
  const auto seconds = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  };

  std::vector<BenchRow> rows;
  for (const int n : batches) {
    if (n < 5) throw InvalidInput("batch sizes below 5 are not supported");
    GenConfig cfg;
    cfg.n = n;
    cfg.payload_kg = payload_kg;
    cfg.seed = derive_seed(seed, static_cast<std::uint64_t>(n));
    cfg.run = run;

    Batch batch;
    std::vector<double> t_sim(reps);
    for (int r = 0; r < reps; ++r) {
      const auto begin = clock::now();
      batch = generate_batch(cfg, plant);
      t_sim[r] = seconds(begin, clock::now());
    }

    // one window matrix for the whole batch, assembled outside the timer
    const int per_traj = run.n_steps - net.t_d - net.k;
    RowMatrixXf x(static_cast<Eigen::Index>(batch.n()) * per_traj,
                  net.arch.in_dim);
    for (int i = 0; i < batch.n(); ++i)
      x.middleRows(static_cast<Eigen::Index>(i) * per_traj, per_traj) =
          window_matrix(net, batch.trajectories[i]);

    forward(net, x);  // warm caches before timing
    std::vector<double> t_nn(reps);
    for (int r = 0; r < reps; ++r) {
      const auto begin = clock::now();
      forward(net, x);
      t_nn[r] = seconds(begin, clock::now());
    }

    BenchRow row;
    row.batch = n;
    row.t_sim_s = median_of(t_sim);
    row.t_nn_s = median_of(t_nn);
    row.speedup = speedup(row.t_sim_s, row.t_nn_s, n, x.rows());
    rows.push_back(row);
  }
  return rows;
}

void write_bench_csv(const std::vector<BenchRow>& rows,
                     const std::string& path) {
  auto os = binio::open_out(path);
  os << "batch,t_sim_s,t_nn_s,speedup\n";
  char buf[96];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.6e,%.6e,%.6e\n", row.batch,
                  row.t_sim_s, row.t_nn_s, row.speedup);
    os << buf;
  }
  if (!os) throw InvalidInput("write failed: " + path);
}

}  // namespace slide
