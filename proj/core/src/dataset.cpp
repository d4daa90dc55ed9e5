#include "slide/dataset.hpp"

#include <algorithm>

#include "binio.hpp"
#include "slide/errors.hpp"

namespace slide {

namespace {
constexpr char kMagic[5] = "SLDX";
constexpr std::uint32_t kVersion = 1;
}  // namespace

double channel_scale(int channel) {
  switch (channel) {
    case kChU: return kScaleU;
    case kChS: return kScaleS;
    case kChSRate: return kScaleSRate;
    case kChP1:
    case kChP2: return kScaleP;
    case kChDy: return kScaleDy;
    default: throw InvalidInput("channel index out of range");
  }
}

std::vector<int> sensor_preset(int n_sensors) {
  if (n_sensors == 2) return {kChU, kChS};
  if (n_sensors == 5) return {kChU, kChS, kChSRate, kChP1, kChP2};
  throw InvalidInput("supported sensor presets are 2 and 5");
}

RowMatrixXf SlideDataset::scaled_x() const {
  RowMatrixXf out(x.rows(), x.cols());
  for (std::size_t c = 0; c < sensors.size(); ++c) {
    const double inv = 1.0 / scale_x[c];
    const int base = static_cast<int>(c) * t_d;
    for (Eigen::Index r = 0; r < x.rows(); ++r)
      for (int j = 0; j < t_d; ++j)
        out(r, base + j) =
            static_cast<float>(static_cast<double>(x(r, base + j)) * inv);
  }
  return out;
}

RowMatrixXf SlideDataset::scaled_y() const {
  const double inv = 1.0 / scale_y;
  RowMatrixXf out(y.rows(), y.cols());
  for (Eigen::Index r = 0; r < y.rows(); ++r)
    for (Eigen::Index c = 0; c < y.cols(); ++c)
      out(r, c) = static_cast<float>(static_cast<double>(y(r, c)) * inv);
  return out;
}

namespace {

SlideDataset arrange_split(const Batch& batch, const std::vector<int>& which,
                           int t_d, int k, const std::vector<int>& sensors) {
  const int n_steps = batch.trajectories.front().n_steps();
  const int per_traj = n_steps - t_d - k;
  const int n_sensors = static_cast<int>(sensors.size());

  SlideDataset ds;
  ds.t_d = t_d;
  ds.k = k;
  ds.sensors = sensors;
  for (const int ch : sensors) ds.scale_x.push_back(channel_scale(ch));
  ds.scale_y = channel_scale(kChDy);
  ds.x.resize(static_cast<Eigen::Index>(which.size()) * per_traj,
              n_sensors * t_d);
  ds.y.resize(ds.x.rows(), k + 1);

  Eigen::Index row = 0;
  for (const int idx : which) {
    const Trajectory& traj = batch.trajectories[idx];
    for (int i = 0; i < per_traj; ++i, ++row) {
      for (int c = 0; c < n_sensors; ++c) {
        const auto& ch = traj.channels[sensors[c]];
        for (int j = 0; j < t_d; ++j) ds.x(row, c * t_d + j) = ch[i + j];
      }
      const auto& dy = traj.channels[kChDy];
      for (int j = 0; j <= k; ++j) ds.y(row, j) = dy[i + t_d + j];
    }
  }
  return ds;
}

}  // namespace

std::pair<SlideDataset, SlideDataset> arrange_dataset(
    const Batch& batch, int t_d, int k, const std::vector<int>& sensors) {
  if (batch.trajectories.empty()) throw InvalidInput("empty batch");
  if (sensors.empty()) throw InvalidInput("empty sensor set");
  for (const int ch : sensors)
    if (ch < 0 || ch >= kChDy)
      throw InvalidInput("sensors must be a subset of {U, s, sdot, p1, p2}");
  if (t_d <= 0) throw InvalidInput("window length must be positive");
  if (k < 0) throw InvalidInput("forward step count must be non-negative");
  const int n_steps = batch.trajectories.front().n_steps();
  if (t_d + k >= n_steps)
    throw InvalidInput("window plus forward steps exceed the horizon");

  return {arrange_split(batch, batch.train_indices, t_d, k, sensors),
          arrange_split(batch, batch.val_indices, t_d, k, sensors)};
}

namespace {

void write_split(std::ostream& os, const SlideDataset& ds) {
  binio::write_span(os, ds.x.data(), static_cast<std::size_t>(ds.x.size()));
  binio::write_span(os, ds.y.data(), static_cast<std::size_t>(ds.y.size()));
}

void read_split(std::istream& is, SlideDataset& ds, std::uint32_t rows,
                std::uint32_t in_dim, std::uint32_t out_dim) {
  ds.x.resize(rows, in_dim);
  ds.y.resize(rows, out_dim);
  binio::read_span(is, ds.x.data(), static_cast<std::size_t>(ds.x.size()));
  binio::read_span(is, ds.y.data(), static_cast<std::size_t>(ds.y.size()));
}

}  // namespace

void save_dataset(const SlideDataset& train, const SlideDataset& val,
                  const std::string& path) {
  if (train.t_d != val.t_d || train.k != val.k ||
      train.sensors != val.sensors)
    throw InvalidInput("train and validation splits disagree");
  auto os = binio::open_out(path);
  binio::write_magic(os, kMagic);
  binio::write<std::uint32_t>(os, kVersion);
  binio::write<std::uint32_t>(os, static_cast<std::uint32_t>(train.n()));
  binio::write<std::uint32_t>(os, static_cast<std::uint32_t>(val.n()));
  binio::write<std::uint32_t>(os, static_cast<std::uint32_t>(train.in_dim()));
  binio::write<std::uint32_t>(os, static_cast<std::uint32_t>(train.out_dim()));
  binio::write<std::uint32_t>(os, static_cast<std::uint32_t>(train.t_d));
  binio::write<std::uint32_t>(os, static_cast<std::uint32_t>(train.k));
  binio::write<std::uint32_t>(os,
                              static_cast<std::uint32_t>(train.sensors.size()));
  for (const int ch : train.sensors)
    binio::write<std::uint8_t>(os, static_cast<std::uint8_t>(ch));
  for (const double s : train.scale_x) binio::write<double>(os, s);
  binio::write<double>(os, train.scale_y);
  write_split(os, train);
  write_split(os, val);
  if (!os) throw InvalidInput("write failed: " + path);
}

std::pair<SlideDataset, SlideDataset> load_dataset(const std::string& path) {
  auto is = binio::open_in(path);
  binio::expect_magic(is, kMagic, "window dataset");
  if (binio::read<std::uint32_t>(is) != kVersion)
    throw InvalidInput("unsupported dataset version");
  const auto n_train = binio::read<std::uint32_t>(is);
  const auto n_val = binio::read<std::uint32_t>(is);
  const auto in_dim = binio::read<std::uint32_t>(is);
  const auto out_dim = binio::read<std::uint32_t>(is);
  const auto t_d = binio::read<std::uint32_t>(is);
  const auto k = binio::read<std::uint32_t>(is);
  const auto n_sensors = binio::read<std::uint32_t>(is);
  if (t_d == 0 || out_dim != k + 1 || n_sensors == 0 ||
      in_dim != n_sensors * t_d)
    throw InvalidInput("inconsistent dataset header");

  SlideDataset train, val;
  train.t_d = val.t_d = static_cast<int>(t_d);
  train.k = val.k = static_cast<int>(k);
  for (std::uint32_t i = 0; i < n_sensors; ++i) {
    const int ch = binio::read<std::uint8_t>(is);
    train.sensors.push_back(ch);
    val.sensors.push_back(ch);
  }
  for (std::uint32_t i = 0; i < n_sensors; ++i) {
    const double s = binio::read<double>(is);
    train.scale_x.push_back(s);
    val.scale_x.push_back(s);
  }
  train.scale_y = val.scale_y = binio::read<double>(is);
  read_split(is, train, n_train, in_dim, out_dim);
  read_split(is, val, n_val, in_dim, out_dim);
  return {std::move(train), std::move(val)};
}

}  // namespace slide
