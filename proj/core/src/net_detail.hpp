#pragma once

// Templated forward/backward passes shared by inference, training and the
// float/double gradient check.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slide/errors.hpp"

namespace slide::detail {

template <typename T>
using MatX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using VecX = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <typename T>
void apply_activation(char letter, MatX<T>& z) {
  switch (letter) {
    case 'L':
      return;
    case 'T':
      z = z.array().tanh().matrix();
      return;
    case 'S':
      z = (T(1) / (T(1) + (-z.array()).exp())).matrix();
      return;
    case 'R':
      z = z.array().max(T(0)).matrix();
      return;
    case 'E':  // ELU, alpha = 1
      z = (z.array() > T(0)).select(z, (z.array().exp() - T(1)).matrix());
      return;
    default:
      throw InvalidInput("unknown layer letter");
  }
}

// slope of the activation written in terms of its output value
template <typename T>
MatX<T> activation_slope(char letter, const MatX<T>& a) {
  switch (letter) {
    case 'L':
      return MatX<T>::Ones(a.rows(), a.cols());
    case 'T':
      return (T(1) - a.array().square()).matrix();
    case 'S':
      return (a.array() * (T(1) - a.array())).matrix();
    case 'R':
      return (a.array() > T(0)).template cast<T>().matrix();
    case 'E':
      return (a.array() > T(0))
          .select(MatX<T>::Ones(a.rows(), a.cols()), (a.array() + T(1)).matrix());
    default:
      throw InvalidInput("unknown layer letter");
  }
}

template <typename T>
struct Params {
  std::vector<MatX<T>> w;
  std::vector<VecX<T>> b;
};

template <typename T, typename Net>
Params<T> cast_params(const Net& net) {
  Params<T> p;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    p.w.push_back(net.weights[l].template cast<T>());
    p.b.push_back(net.biases[l].template cast<T>());
  }
  return p;
}

template <typename T>
MatX<T> forward_pass(const std::string& layers, const Params<T>& p,
                     const MatX<T>& x, std::vector<MatX<T>>* activations) {
  if (activations) {
    activations->clear();
    activations->push_back(x);
  }
  MatX<T> a = x;
  for (std::size_t l = 0; l < p.w.size(); ++l) {
    MatX<T> z = a * p.w[l].transpose();
    z.rowwise() += p.b[l].transpose();
    apply_activation(layers[l], z);
    a = std::move(z);
    if (activations) activations->push_back(a);
  }
  return a;
}

// mean squared error over all outputs; fills grad by reverse accumulation
template <typename T>
T backward_pass(const std::string& layers, const Params<T>& p,
                const std::vector<MatX<T>>& act, const MatX<T>& y,
                Params<T>& grad) {
  const int last = static_cast<int>(p.w.size()) - 1;
  const T denom = T(y.rows()) * T(y.cols());
  const MatX<T> diff = act.back() - y;
  const T loss = diff.squaredNorm() / denom;

  MatX<T> g = (T(2) / denom) * diff;
  for (int l = last; l >= 0; --l) {
    g = g.cwiseProduct(activation_slope(layers[l], act[l + 1]));
    grad.w[l] = g.transpose() * act[l];
    grad.b[l] = g.colwise().sum().transpose();
    if (l > 0) g = (g * p.w[l]).eval();
  }
  return loss;
}

template <typename T>
Params<T> zero_like(const Params<T>& p) {
  Params<T> z;
  for (std::size_t l = 0; l < p.w.size(); ++l) {
    z.w.push_back(MatX<T>::Zero(p.w[l].rows(), p.w[l].cols()));
    z.b.push_back(VecX<T>::Zero(p.b[l].size()));
  }
  return z;
}

}  // namespace slide::detail
