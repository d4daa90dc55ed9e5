#include "slide/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "binio.hpp"
#include "net_detail.hpp"
#include "slide/errors.hpp"

namespace slide {

void TrainParams::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw InvalidInput("learning rate must be finite and non-negative");
  if (batch_size < 0) throw InvalidInput("batch size must be positive or 0");
  if (max_epochs < 1) throw InvalidInput("max_epochs must be positive");
  if (!(loss_min >= 0.0)) throw InvalidInput("loss_min must be non-negative");
  if (validation_every < 1)
    throw InvalidInput("validation_every must be positive");
}

namespace {

using detail::MatX;
using detail::Params;

constexpr std::uint64_t kShuffleStream = 0x65706f6368ULL;  // "epoch"

double mse_of(const MatX<float>& pred, const MatX<float>& y) {
  return (pred - y).cast<double>().squaredNorm() /
         (static_cast<double>(y.rows()) * y.cols());
}

// p -= lr * m_hat / (sqrt(v_hat) + eps), float32 like the parameters
template <typename Block>
void adam_update(Block& p, Block& m, Block& v, const Block& g, float lr,
                 float m_corr, float v_corr) {
  constexpr float b1 = 0.9f;
  constexpr float b2 = 0.999f;
  constexpr float eps = 1e-8f;
  m = b1 * m + (1.0f - b1) * g;
  v = (b2 * v.array() + (1.0f - b2) * g.array().square()).matrix();
  p.array() -=
      lr * (m.array() / m_corr) / ((v.array() / v_corr).sqrt() + eps);
}

}  // namespace

TrainResult train(const Network& net, const SlideDataset& train_ds,
                  const SlideDataset& val_ds, const TrainParams& params) {
  params.validate();
  net.arch.validate();
  if (train_ds.n() < 1 || val_ds.n() < 1)
    throw InvalidInput("training needs non-empty train and validation splits");
  if (train_ds.in_dim() != net.arch.in_dim ||
      train_ds.out_dim() != net.arch.out_dim ||
      val_ds.in_dim() != net.arch.in_dim ||
      val_ds.out_dim() != net.arch.out_dim)
    throw InvalidInput("dataset dimensions do not match the architecture");

  const MatX<float> x_train = train_ds.scaled_x();
  const MatX<float> y_train = train_ds.scaled_y();
  const MatX<float> x_val = val_ds.scaled_x();
  const MatX<float> y_val = val_ds.scaled_y();

  const int n = train_ds.n();
  const int batch =
      params.batch_size > 0
          ? std::min(params.batch_size, n)
          : std::max(1, static_cast<int>(std::floor(n / 8.0 + 0.5)));

  auto p = detail::cast_params<float>(net);
  auto m = detail::zero_like(p);
  auto v = detail::zero_like(p);
  auto grad = detail::zero_like(p);
  auto best = p;

  TrainResult result;
  result.best_val_mse = std::numeric_limits<double>::infinity();

  Rng rng(derive_seed(params.seed, kShuffleStream));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  const float lr = static_cast<float>(params.learning_rate);
  double b1_pow = 1.0;
  double b2_pow = 1.0;
  std::vector<MatX<float>> act;

  for (int epoch = 1; epoch <= params.max_epochs; ++epoch) {
    rng.shuffle(order);

    double loss_sum = 0.0;
    for (int start = 0; start < n; start += batch) {
      const int rows = std::min(batch, n - start);
      MatX<float> xb(rows, x_train.cols());
      MatX<float> yb(rows, y_train.cols());
      for (int r = 0; r < rows; ++r) {
        xb.row(r) = x_train.row(order[start + r]);
        yb.row(r) = y_train.row(order[start + r]);
      }

      detail::forward_pass<float>(net.arch.layers, p, xb, &act);
      const float loss =
          detail::backward_pass<float>(net.arch.layers, p, act, yb, grad);
      loss_sum += static_cast<double>(loss) * rows;

      b1_pow *= 0.9;
      b2_pow *= 0.999;
      const float m_corr = static_cast<float>(1.0 - b1_pow);
      const float v_corr = static_cast<float>(1.0 - b2_pow);
      for (std::size_t l = 0; l < p.w.size(); ++l) {
        adam_update(p.w[l], m.w[l], v.w[l], grad.w[l], lr, m_corr, v_corr);
        adam_update(p.b[l], m.b[l], v.b[l], grad.b[l], lr, m_corr, v_corr);
      }
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_mse = loss_sum / n;
    if (!std::isfinite(stats.train_mse)) {
      char msg[96];
      std::snprintf(msg, sizeof msg, "training diverged at epoch %d", epoch);
      throw NumericalFailure(msg);
    }

    const bool last = epoch == params.max_epochs;
    bool stop = false;
    if (epoch % params.validation_every == 0 || last) {
      const MatX<float> pred =
          detail::forward_pass<float>(net.arch.layers, p, x_val, nullptr);
      stats.val_mse = mse_of(pred, y_val);
      stats.has_val = true;
      if (stats.val_mse < result.best_val_mse) {
        result.best_val_mse = stats.val_mse;
        result.best_epoch = epoch;
        best = p;
      }
      stop = stats.val_mse <= params.loss_min;
    }
    result.history.push_back(stats);
    result.epochs_run = epoch;
    if (stop) break;
  }

  result.net = net;
  for (int l = 0; l < net.n_layers(); ++l) {
    result.net.weights[l] = best.w[l];
    result.net.biases[l] = best.b[l];
  }
  return result;
}

void write_history_csv(const std::vector<EpochStats>& history,
                       const std::string& path) {
  auto os = binio::open_out(path);
  os << "epoch,train_mse,val_mse\n";
  char buf[64];
  for (const auto& row : history) {
    std::snprintf(buf, sizeof buf, "%d,%.9e,", row.epoch, row.train_mse);
    os << buf;
    if (row.has_val) {
      std::snprintf(buf, sizeof buf, "%.9e", row.val_mse);
      os << buf;
    }
    os << '\n';
  }
  if (!os) throw InvalidInput("write failed: " + path);
}

}  // namespace slide
