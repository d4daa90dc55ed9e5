#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "slide/acquisition.hpp"

namespace slide {

using RowMatrixXf =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Fixed feature scale factors (SI denominators).
inline constexpr double kScaleU = 1.0;
inline constexpr double kScaleS = 1.355;      // full cylinder length
inline constexpr double kScaleSRate = 6.67;   // peak piston speed
inline constexpr double kScaleP = 2.0e7;      // 200 bar
inline constexpr double kScaleDy = 0.030;     // sensor capacity

double channel_scale(int channel);

// 2 -> {U, s}; 5 -> {U, s, sdot, p1, p2}.
std::vector<int> sensor_preset(int n_sensors);

// Sliding-window dataset. x/y hold raw SI float32 values; scale factors are
// metadata applied on access. Raw storage keeps arrangement lossless
// (scaled float32 storage cannot reproduce the raw values bit-exactly), and
// scaled_x()/scaled_y() feed training and inference.
struct SlideDataset {
  RowMatrixXf x;  // [n x (n_sensors * t_d)], channel-major within a row
  RowMatrixXf y;  // [n x (k + 1)]
  int t_d = 0;
  int k = 0;
  std::vector<int> sensors;
  std::vector<double> scale_x;  // per sensor, aligned with `sensors`
  double scale_y = kScaleDy;

  int n() const { return static_cast<int>(x.rows()); }
  int in_dim() const { return static_cast<int>(x.cols()); }
  int out_dim() const { return static_cast<int>(y.cols()); }
  RowMatrixXf scaled_x() const;
  RowMatrixXf scaled_y() const;
};

// Windows at offsets i = 0 .. n_steps - t_d - k - 1 per trajectory:
// X row = sensor values over [i, i + t_d), Y row = delta_y at
// [i + t_d, i + t_d + k]. Trajectories split per the batch indices.
std::pair<SlideDataset, SlideDataset> arrange_dataset(
    const Batch& batch, int t_d, int k, const std::vector<int>& sensors);

void save_dataset(const SlideDataset& train, const SlideDataset& val,
                  const std::string& path);
std::pair<SlideDataset, SlideDataset> load_dataset(const std::string& path);

}  // namespace slide
