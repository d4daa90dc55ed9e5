#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slide/dataset.hpp"
#include "slide/rng.hpp"

namespace slide {

// One character per fully-connected layer, naming its activation:
// L = identity, T = tanh, S = logistic sigmoid, R = rectifier,
// E = exponential-linear (alpha = 1).
struct ArchSpec {
  std::string layers = "L";
  int hidden_units = 1;
  int in_dim = 1;
  int out_dim = 1;

  void validate() const;  // throws InvalidInput, names bad characters
};

struct Network {
  ArchSpec arch;
  std::vector<RowMatrixXf> weights;      // [out x in] per layer
  std::vector<Eigen::VectorXf> biases;

  // deployment metadata so a checkpoint is self-describing
  int t_d = 0;
  int k = 0;
  std::vector<int> sensors;
  std::vector<double> scale_x;
  double scale_y = kScaleDy;

  int n_layers() const { return static_cast<int>(weights.size()); }
  std::int64_t parameter_count() const;
};

// Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases.
Network build_network(const ArchSpec& arch, Rng& rng);

// Batched forward pass, float32 throughout; deterministic.
RowMatrixXf forward(const Network& net, const Eigen::Ref<const RowMatrixXf>& x);

// Copies metadata (t_d, k, sensors, scales) from a dataset onto the net.
void attach_dataset_metadata(Network& net, const SlideDataset& ds);

// Max relative error between analytic MSE gradients and central finite
// differences (step 1e-5), both evaluated in float64. Entries where both
// gradients sit below 1e-8 compare absolutely.
double gradient_check(const Network& net, const Eigen::Ref<const RowMatrixXf>& x,
                      const Eigen::Ref<const RowMatrixXf>& y);

// Checkpoint: text header ("SLIDE-NET v1", key=value lines, blank line)
// followed by a little-endian float32 blob, per layer weights row-major
// then bias.
void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

}  // namespace slide
