#include "slide/network.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "binio.hpp"
#include "net_detail.hpp"
#include "slide/errors.hpp"

namespace slide {

namespace {
constexpr char kAlphabet[] = "LTSRE";
}

void ArchSpec::validate() const {
  if (layers.empty()) throw InvalidInput("empty layer string");
  for (const char c : layers) {
    if (std::string_view(kAlphabet).find(c) == std::string_view::npos)
      throw InvalidInput(std::string("unknown layer letter '") + c +
                         "' (alphabet LTSRE)");
  }
  if (hidden_units < 1 || in_dim < 1 || out_dim < 1)
    throw InvalidInput("network dimensions must be positive");
}

std::int64_t Network::parameter_count() const {
  std::int64_t count = 0;
  for (int l = 0; l < n_layers(); ++l)
    count += weights[l].size() + biases[l].size();
  return count;
}

Network build_network(const ArchSpec& arch, Rng& rng) {
  arch.validate();
  Network net;
  net.arch = arch;
  const int n_layers = static_cast<int>(arch.layers.size());
  for (int l = 0; l < n_layers; ++l) {
    const int fan_in = l == 0 ? arch.in_dim : arch.hidden_units;
    const int fan_out = l == n_layers - 1 ? arch.out_dim : arch.hidden_units;
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    RowMatrixXf w(fan_out, fan_in);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        w(r, c) = static_cast<float>(rng.uniform(-bound, bound));
    net.weights.push_back(std::move(w));
    net.biases.push_back(Eigen::VectorXf::Zero(fan_out));
  }
  return net;
}

void attach_dataset_metadata(Network& net, const SlideDataset& ds) {
  net.t_d = ds.t_d;
  net.k = ds.k;
  net.sensors = ds.sensors;
  net.scale_x = ds.scale_x;
  net.scale_y = ds.scale_y;
}

RowMatrixXf forward(const Network& net,
                    const Eigen::Ref<const RowMatrixXf>& x) {
  net.arch.validate();
  if (x.cols() != net.arch.in_dim)
    throw InvalidInput("input width does not match the network");
  const auto p = detail::cast_params<float>(net);
  const detail::MatX<float> xin = x;
  return detail::forward_pass<float>(net.arch.layers, p, xin, nullptr);
}

double gradient_check(const Network& net,
                      const Eigen::Ref<const RowMatrixXf>& x,
                      const Eigen::Ref<const RowMatrixXf>& y) {
  if (net.parameter_count() > 20000)
    throw InvalidInput("gradient check is meant for small networks");
  auto p = detail::cast_params<double>(net);
  const detail::MatX<double> xd = x.cast<double>();
  const detail::MatX<double> yd = y.cast<double>();

  std::vector<detail::MatX<double>> act;
  detail::forward_pass<double>(net.arch.layers, p, xd, &act);
  auto grad = detail::zero_like(p);
  detail::backward_pass<double>(net.arch.layers, p, act, yd, grad);

  const double h = 1e-5;
  const auto loss_at = [&]() {
    const detail::MatX<double> out =
        detail::forward_pass<double>(net.arch.layers, p, xd, nullptr);
    return (out - yd).squaredNorm() /
           (static_cast<double>(yd.rows()) * yd.cols());
  };

  double worst = 0.0;
  const auto probe = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + h;
    const double up = loss_at();
    param = saved - h;
    const double down = loss_at();
    param = saved;
    const double fd = (up - down) / (2.0 * h);
    const double mag = std::max(std::abs(analytic), std::abs(fd));
    const double err = std::abs(analytic - fd);
    worst = std::max(worst, mag < 1e-8 ? err : err / mag);
  };
  for (std::size_t l = 0; l < p.w.size(); ++l) {
    for (Eigen::Index r = 0; r < p.w[l].rows(); ++r)
      for (Eigen::Index c = 0; c < p.w[l].cols(); ++c)
        probe(p.w[l](r, c), grad.w[l](r, c));
    for (Eigen::Index r = 0; r < p.b[l].size(); ++r)
      probe(p.b[l](r), grad.b[l](r));
  }
  return worst;
}

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

int channel_from_name(const std::string& name) {
  for (int ch = 0; ch < kNumChannels; ++ch)
    if (name == channel_name(ch)) return ch;
  throw InvalidInput("unknown sensor name: " + name);
}

}  // namespace

void save_network(const Network& net, const std::string& path) {
  net.arch.validate();
  auto os = binio::open_out(path);
  os << "SLIDE-NET v1\n";
  os << "arch=" << net.arch.layers << '\n';
  os << "in=" << net.arch.in_dim << '\n';
  os << "hidden=" << net.arch.hidden_units << '\n';
  os << "out=" << net.arch.out_dim << '\n';
  os << "td=" << net.t_d << '\n';
  os << "k=" << net.k << '\n';
  os << "sensors=";
  for (std::size_t i = 0; i < net.sensors.size(); ++i)
    os << (i ? "," : "") << channel_name(net.sensors[i]);
  os << '\n';
  os << "scales=";
  for (std::size_t i = 0; i < net.scale_x.size(); ++i)
    os << (i ? "," : "") << format_double(net.scale_x[i]);
  os << ';' << format_double(net.scale_y) << '\n';
  os << '\n';
  for (int l = 0; l < net.n_layers(); ++l) {
    binio::write_span(os, net.weights[l].data(),
                      static_cast<std::size_t>(net.weights[l].size()));
    binio::write_span(os, net.biases[l].data(),
                      static_cast<std::size_t>(net.biases[l].size()));
  }
  if (!os) throw InvalidInput("write failed: " + path);
}

Network load_network(const std::string& path) {
  auto is = binio::open_in(path);
  std::string line;
  if (!std::getline(is, line) || line != "SLIDE-NET v1")
    throw InvalidInput("not a SLIDE-NET v1 checkpoint: " + path);

  Network net;
  net.scale_x.clear();
  std::string scales_line;
  while (std::getline(is, line) && !line.empty()) {
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("malformed checkpoint header line: " + line);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "arch") net.arch.layers = value;
    else if (key == "in") net.arch.in_dim = std::stoi(value);
    else if (key == "hidden") net.arch.hidden_units = std::stoi(value);
    else if (key == "out") net.arch.out_dim = std::stoi(value);
    else if (key == "td") net.t_d = std::stoi(value);
    else if (key == "k") net.k = std::stoi(value);
    else if (key == "sensors") {
      if (!value.empty())
        for (const auto& name : split(value, ','))
          net.sensors.push_back(channel_from_name(name));
    } else if (key == "scales") {
      scales_line = value;
    } else {
      throw InvalidInput("unknown checkpoint header key: " + key);
    }
  }
  if (!scales_line.empty()) {
    const auto parts = split(scales_line, ';');
    if (parts.size() != 2) throw InvalidInput("malformed scales line");
    if (!parts[0].empty())
      for (const auto& s : split(parts[0], ','))
        net.scale_x.push_back(std::stod(s));
    net.scale_y = std::stod(parts[1]);
  }
  net.arch.validate();
  if (net.sensors.size() != net.scale_x.size())
    throw InvalidInput("checkpoint sensors and scales disagree");

  const int n_layers = static_cast<int>(net.arch.layers.size());
  for (int l = 0; l < n_layers; ++l) {
    const int fan_in = l == 0 ? net.arch.in_dim : net.arch.hidden_units;
    const int fan_out =
        l == n_layers - 1 ? net.arch.out_dim : net.arch.hidden_units;
    RowMatrixXf w(fan_out, fan_in);
    Eigen::VectorXf b(fan_out);
    binio::read_span(is, w.data(), static_cast<std::size_t>(w.size()));
    binio::read_span(is, b.data(), static_cast<std::size_t>(b.size()));
    if (!w.allFinite() || !b.allFinite())
      throw InvalidInput("non-finite parameters in checkpoint");
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  return net;
}

}  // namespace slide
