#include "scaffold/drl/network.hpp"

#include <cmath>

#include "scaffold/error.hpp"

namespace scaffold::drl {

QNetwork::QNetwork(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.size() < 2) throw Error(Errc::ShapeMismatch, "network needs an input and an output layer");
  for (int d : dims_) {
    if (d < 1) throw Error(Errc::ShapeMismatch, "layer widths must be positive");
  }
  for (std::size_t i = 0; i + 1 < dims_.size(); ++i) {
    layers_.push_back({Matrix::Zero(dims_[i + 1], dims_[i]), Vector::Zero(dims_[i + 1])});
  }
}

QNetwork QNetwork::he_initialized(std::vector<int> dims, std::mt19937_64& rng) {
  QNetwork net(std::move(dims));
  for (auto& layer : net.layers_) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(layer.weights.cols())));
    // Row-major fill order so the draw sequence matches the serialized layout.
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = dist(rng);
    }
  }
  return net;
}

Vector QNetwork::forward(const Vector& x) const {
  Matrix batch = x;
  return forward_batch(batch).col(0);
}

Matrix QNetwork::forward_batch(const Matrix& batch) const {
  if (batch.rows() != inputs()) {
    throw Error(Errc::ShapeMismatch, "expected " + std::to_string(inputs()) + " inputs, got " +
                                         std::to_string(batch.rows()));
  }
  Matrix a = batch;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Matrix z = (layers_[i].weights * a).colwise() + layers_[i].bias;
    a = i + 1 < layers_.size() ? Matrix(z.cwiseMax(0.0)) : z;
  }
  return a;
}

double QNetwork::loss_and_gradients(const Matrix& states, const std::vector<int>& actions, const Vector& targets,
                                    Gradients& grads) const {
  const Eigen::Index n = states.cols();
  if (states.rows() != inputs() || static_cast<Eigen::Index>(actions.size()) != n || targets.size() != n || n == 0) {
    throw Error(Errc::ShapeMismatch, "batch shapes disagree");
  }
  std::vector<Matrix> acts{states};
  std::vector<Matrix> pre;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    pre.push_back((layers_[i].weights * acts.back()).colwise() + layers_[i].bias);
    acts.push_back(i + 1 < layers_.size() ? Matrix(pre.back().cwiseMax(0.0)) : pre.back());
  }
  const Matrix& q = acts.back();
  Matrix delta = Matrix::Zero(q.rows(), n);
  double loss = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const int a = actions[static_cast<std::size_t>(j)];
    if (a < 0 || a >= outputs()) throw Error(Errc::ShapeMismatch, "action index out of range");
    const double err = q(a, j) - targets(j);
    loss += err * err;
    delta(a, j) = 2.0 * err / static_cast<double>(n);
  }
  loss /= static_cast<double>(n);

  grads.layers.resize(layers_.size());
  for (std::size_t k = layers_.size(); k-- > 0;) {
    grads.layers[k].weights = delta * acts[k].transpose();
    grads.layers[k].bias = delta.rowwise().sum();
    if (k > 0) {
      Matrix back = layers_[k].weights.transpose() * delta;
      delta = back.array() * (pre[k - 1].array() > 0.0).cast<double>();
    }
  }
  return loss;
}

double QNetwork::loss(const Matrix& states, const std::vector<int>& actions, const Vector& targets) const {
  const Matrix q = forward_batch(states);
  if (static_cast<Eigen::Index>(actions.size()) != q.cols() || targets.size() != q.cols() || q.cols() == 0) {
    throw Error(Errc::ShapeMismatch, "batch shapes disagree");
  }
  double total = 0.0;
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const double err = q(actions[static_cast<std::size_t>(j)], j) - targets(j);
    total += err * err;
  }
  return total / static_cast<double>(q.cols());
}

bool QNetwork::all_finite() const {
  for (const auto& l : layers_) {
    if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

Adam::Adam(const QNetwork& net, AdamConfig config) : config_(config) {
  for (const auto& l : net.layers()) {
    m_.push_back({Matrix::Zero(l.weights.rows(), l.weights.cols()), Vector::Zero(l.bias.size())});
  }
  v_ = m_;
}

void Adam::step(QNetwork& net, const QNetwork::Gradients& grads) {
  if (grads.layers.size() != m_.size()) throw Error(Errc::ShapeMismatch, "gradient layout mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  const double b1 = config_.beta1, b2 = config_.beta2, lr = config_.learning_rate, eps = config_.epsilon;
  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  auto& layers = net.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    update(layers[i].weights, grads.layers[i].weights, m_[i].weights, v_[i].weights);
    update(layers[i].bias, grads.layers[i].bias, m_[i].bias, v_[i].bias);
  }
}

}  // namespace scaffold::drl
