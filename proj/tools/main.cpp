// Command-line front end: data generation, window sizing, dataset
// arrangement, training, evaluation and benchmarking.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "slide/acquisition.hpp"
#include "slide/config.hpp"
#include "slide/dataset.hpp"
#include "slide/errors.hpp"
#include "slide/network.hpp"
#include "slide/pipeline.hpp"
#include "slide/train.hpp"
#include "slide/window.hpp"

namespace {

constexpr std::uint64_t kInitStream = 0x696e6974ULL;   // weight init
constexpr std::uint64_t kProbeStream = 0x70726f62ULL;  // window probe

slide::BuiltModels models_from(const std::string& config_path) {
  slide::Config cfg;
  if (!config_path.empty()) cfg = slide::load_config(config_path);
  return slide::build_models(cfg);
}

int parse_units(const std::string& units, int t_d) {
  if (units == "td") return t_d;
  if (units == "2td") return 2 * t_d;
  if (units == "3td") return 3 * t_d;
  try {
    std::size_t pos = 0;
    const int n = std::stoi(units, &pos);
    if (pos == units.size() && n > 0) return n;
  } catch (const std::exception&) {
  }
  throw slide::InvalidInput("--units takes td, 2td, 3td or a positive count");
}

std::vector<int> parse_batches(const std::string& csv) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    std::size_t end = csv.find(',', start);
    if (end == std::string::npos) end = csv.size();
    try {
      std::size_t pos = 0;
      const std::string item = csv.substr(start, end - start);
      const int n = std::stoi(item, &pos);
      if (pos != item.size() || n < 1) throw std::invalid_argument(item);
      out.push_back(n);
    } catch (const std::exception&) {
      throw slide::InvalidInput("--batches wants comma-separated counts");
    }
    start = end + 1;
  }
  return out;
}

void cmd_gen(const std::string& config, int batch, double payload,
             std::uint64_t seed, const std::string& out,
             const std::string& csv_dir) {
  const auto models = models_from(config);
  slide::GenConfig gen;
  gen.n = batch;
  gen.payload_kg = payload;
  gen.seed = seed;
  gen.run = slide::make_run_config(models.sim);
  const slide::Batch data = slide::generate_batch(gen, models.plant);
  slide::save_batch(data, out);
  if (!csv_dir.empty()) slide::export_csv(data, csv_dir);

  int flagged = 0;
  for (const auto& traj : data.trajectories) flagged += traj.flags != 0;
  std::printf("wrote %s: %d trajectories (%d train, %d val), %d steps, dt %g s",
              out.c_str(), data.n(),
              static_cast<int>(data.train_indices.size()),
              static_cast<int>(data.val_indices.size()), gen.run.n_steps,
              data.dt_s);
  if (flagged) std::printf(", %d flagged", flagged);
  std::printf("\n");
}

void cmd_slide_window(const std::string& config, const std::string& data_path,
                      int probe_batch, const std::string& out_json) {
  const auto models = models_from(config);
  const slide::Batch data = slide::load_batch(data_path);

  slide::SimRunConfig run = slide::make_run_config(models.sim);
  run.dt_s = data.dt_s;
  run.n_steps = data.trajectories.empty()
                    ? run.n_steps
                    : data.trajectories.front().n_steps();

  const std::uint64_t probe_seed =
      slide::derive_seed(data.trajectories.empty()
                             ? 0
                             : data.trajectories.front().seed,
                         kProbeStream);
  const slide::SlideWindow window = slide::probe_slide_window(
      models.plant, data.payload_kg, probe_batch, probe_seed, run);

  nlohmann::json j;
  j["dt_s"] = data.dt_s;
  j["no_settle"] = window.no_settle_count;
  j["payload_kg"] = data.payload_kg;
  j["per_sample"] = window.per_sample;
  j["probe_batch"] = probe_batch;
  j["t_d_seconds"] = window.seconds;
  j["t_d_steps"] = window.steps;
  j["thresholds_m"] = window.thresholds;
  std::ofstream os(out_json, std::ios::binary);
  os << j.dump(2) << '\n';
  if (!os) throw slide::InvalidInput("write failed: " + out_json);

  std::printf("t_d = %d steps (%g s)", window.steps, window.seconds);
  if (window.no_settle_count)
    std::printf(", %d/%d probes never settled", window.no_settle_count,
                probe_batch);
  std::printf("\n");
}

void cmd_arrange(const std::string& data_path, int t_d, int k, int sensors,
                 const std::string& out) {
  const slide::Batch data = slide::load_batch(data_path);
  const auto [train, val] =
      slide::arrange_dataset(data, t_d, k, slide::sensor_preset(sensors));
  slide::save_dataset(train, val, out);
  std::printf("wrote %s: %d train + %d val windows, in %d, out %d\n",
              out.c_str(), train.n(), val.n(), train.in_dim(),
              train.out_dim());
}

void cmd_train(const std::string& data_path, const std::string& arch_str,
               const std::string& units, std::uint64_t seed,
               const std::string& out, int max_epochs) {
  const auto [train_ds, val_ds] = slide::load_dataset(data_path);

  slide::ArchSpec arch;
  arch.layers = arch_str;
  arch.hidden_units = parse_units(units, train_ds.t_d);
  arch.in_dim = train_ds.in_dim();
  arch.out_dim = train_ds.out_dim();

  slide::Rng init_rng(slide::derive_seed(seed, kInitStream));
  slide::Network net = slide::build_network(arch, init_rng);
  slide::attach_dataset_metadata(net, train_ds);

  slide::TrainParams params;
  params.seed = seed;
  params.max_epochs = max_epochs;
  const slide::TrainResult result =
      slide::train(net, train_ds, val_ds, params);

  slide::save_network(result.net, out);
  const auto history_path =
      std::filesystem::path(out).parent_path() / "history.csv";
  slide::write_history_csv(result.history, history_path.string());

  std::printf(
      "trained %s (%lld parameters): %d epochs, best val MSE %.3e at epoch "
      "%d\n",
      out.c_str(), static_cast<long long>(result.net.parameter_count()),
      result.epochs_run, result.best_val_mse, result.best_epoch);
}

void cmd_eval(const std::string& config, const std::string& model,
              double payload, std::uint64_t seed, const std::string& out_dir,
              double duration) {
  const auto models = models_from(config);
  const slide::Network net = slide::load_network(model);
  const slide::EvalCycle cycle = slide::make_eval_cycle(
      payload, seed, models.plant, duration, models.sim.dt_s);
  slide::StepOptions step;
  step.rho_inf = models.sim.rho_inf;
  const slide::EvalResult result =
      slide::run_eval(net, cycle, models.plant, step, out_dir);
  std::printf("MAPE %.4f %%, MAE %.4e m over %d predictions; outputs in %s\n",
              result.metrics.mape_pct, result.metrics.mae_m,
              static_cast<int>(result.metrics.abs_err_m.size()),
              out_dir.c_str());
}

void cmd_bench(const std::string& config, const std::string& model,
               const std::string& batches_csv, double payload,
               std::uint64_t seed, const std::string& out, int reps) {
  const auto models = models_from(config);
  const slide::Network net = slide::load_network(model);
  const std::vector<int> batches = parse_batches(batches_csv);
  const slide::SimRunConfig run = slide::make_run_config(models.sim);
  const auto rows = slide::run_benchmark(net, batches, payload, seed,
                                         models.plant, run, reps);
  slide::write_bench_csv(rows, out);
  for (const auto& row : rows)
    std::printf("batch %4d: t_sim %.4f s, t_nn %.6f s, speedup %.3e\n",
                row.batch, row.t_sim_s, row.t_nn_s, row.speedup);
}

void cmd_fem_info(const std::string& config) {
  const auto models = models_from(config);
  std::printf("nodes: %d\n",
              static_cast<int>(models.fe.node_x.size()));

  const int n_freq =
      std::min<int>(5, static_cast<int>(models.plant.modal.n_modes));
  std::printf("frequencies [Hz]:");
  for (int j = 0; j < n_freq; ++j)
    std::printf(" %.4f", models.plant.modal.frequencies_hz[j]);
  std::printf("\n");

  const double load_n = 1000.0;
  const auto& beam = models.beam;
  const double analytic =
      load_n * std::pow(beam.length_m, 3) /
      (3.0 * beam.elastic_modulus_pa * beam.second_moment_m4);
  const double fem = slide::static_tip_deflection(models.fe, load_n);
  std::printf(
      "tip deflection under %.0f N: %.6e m (analytic %.6e m, rel err "
      "%.2e)\n",
      load_n, fem, analytic, std::abs(fem - analytic) / analytic);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flexible-boom surrogate toolkit"};
  app.require_subcommand(1);

  std::string config;
  std::string data_path;
  std::string model_path;
  std::string out_path;
  std::string csv_dir;
  std::string arch = "L";
  std::string units = "td";
  std::string batches = "80,160,320";
  std::uint64_t seed = 0;
  double payload = 0.0;
  double duration = 10.0;
  int batch = 80;
  int probe_batch = 20;
  int t_d = 0;
  int k = 0;
  int sensors = 5;
  int max_epochs = 1000;
  int reps = 5;

  auto* gen = app.add_subcommand("gen", "generate a trajectory batch");
  gen->add_option("--config", config, "INI model configuration");
  gen->add_option("--batch", batch, "trajectory count");
  gen->add_option("--payload", payload, "tip payload [kg]");
  gen->add_option("--seed", seed, "batch seed");
  gen->add_option("--out", out_path, "output .slid file")->required();
  gen->add_option("--csv", csv_dir, "also export one CSV per trajectory");
  gen->callback(
      [&] { cmd_gen(config, batch, payload, seed, out_path, csv_dir); });

  auto* win = app.add_subcommand(
      "slide-window", "settling window from decay probes");
  win->add_option("--config", config, "INI model configuration");
  win->add_option("--data", data_path, "batch the window is for (.slid)")
      ->required();
  win->add_option("--probe-batch", probe_batch, "number of decay probes");
  std::string window_json = "tdwindow.json";
  win->add_option("--out", window_json, "JSON report path");
  win->callback(
      [&] { cmd_slide_window(config, data_path, probe_batch, window_json); });

  auto* arr = app.add_subcommand("arrange", "window a batch into a dataset");
  arr->add_option("--config", config, "INI model configuration");
  arr->add_option("--data", data_path, "input batch (.slid)")->required();
  arr->add_option("--td", t_d, "window length [steps]")->required();
  arr->add_option("--k", k, "extra forward steps");
  arr->add_option("--sensors", sensors, "sensor preset (2 or 5)");
  arr->add_option("--out", out_path, "output dataset (.sldx)")->required();
  arr->callback([&] { cmd_arrange(data_path, t_d, k, sensors, out_path); });

  auto* tr = app.add_subcommand("train", "train a surrogate network");
  tr->add_option("--config", config, "INI model configuration");
  tr->add_option("--data", data_path, "input dataset (.sldx)")->required();
  tr->add_option("--arch", arch, "layer letters (L/T/S/R/E)");
  tr->add_option("--units", units, "hidden width: td, 2td, 3td or a count");
  tr->add_option("--seed", seed, "init and shuffle seed");
  tr->add_option("--out", out_path, "output checkpoint (.snet)")->required();
  tr->add_option("--max-epochs", max_epochs, "epoch limit");
  tr->callback([&] {
    cmd_train(data_path, arch, units, seed, out_path, max_epochs);
  });

  auto* ev = app.add_subcommand("eval", "score a net on an unseen cycle");
  ev->add_option("--config", config, "INI model configuration");
  ev->add_option("--model", model_path, "checkpoint (.snet)")->required();
  ev->add_option("--payload", payload, "tip payload [kg]");
  ev->add_option("--seed", seed, "cycle seed");
  ev->add_option("--out", out_path, "output directory")->required();
  ev->add_option("--duration", duration, "cycle length [s]");
  ev->callback([&] {
    cmd_eval(config, model_path, payload, seed, out_path, duration);
  });

  auto* be = app.add_subcommand("bench", "simulator vs network wall time");
  be->add_option("--config", config, "INI model configuration");
  be->add_option("--model", model_path, "checkpoint (.snet)")->required();
  be->add_option("--batches", batches, "comma-separated batch sizes");
  be->add_option("--payload", payload, "tip payload [kg]");
  be->add_option("--seed", seed, "generation seed");
  be->add_option("--out", out_path, "output CSV")->required();
  be->add_option("--reps", reps, "repetitions per timing");
  be->callback([&] {
    cmd_bench(config, model_path, batches, payload, seed, out_path, reps);
  });

  auto* fem = app.add_subcommand("fem", "FE model inspection");
  fem->require_subcommand(1);
  auto* info = fem->add_subcommand("info", "node count, frequencies, statics");
  info->add_option("--config", config, "INI model configuration");
  info->callback([&] { cmd_fem_info(config); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const slide::InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const slide::InfeasibleConfiguration& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const slide::NumericalFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
