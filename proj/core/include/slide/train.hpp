#pragma once

#include <cstdint>
#include <vector>

#include "slide/network.hpp"

namespace slide {

struct TrainParams {
  double learning_rate = 1e-4;
  int batch_size = 0;  // 0 = max(1, round(n_train_windows / 8))
  int max_epochs = 1000;
  double loss_min = 5e-6;
  int validation_every = 20;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;  // meaningful only when has_val
  bool has_val = false;
};

struct TrainResult {
  Network net;  // parameters from the best validation epoch
  std::vector<EpochStats> history;
  int best_epoch = 0;
  double best_val_mse = 0.0;
  int epochs_run = 0;
};

// Minibatch ADAM (beta1 0.9, beta2 0.999, eps 1e-8) on MSE over the scaled
// dataset. Validates every validation_every epochs (and on the last);
// stops early when validation MSE <= loss_min. Single-threaded and
// bit-deterministic for a fixed seed.
TrainResult train(const Network& net, const SlideDataset& train_ds,
                  const SlideDataset& val_ds, const TrainParams& params);

void write_history_csv(const std::vector<EpochStats>& history,
                       const std::string& path);

}  // namespace slide
