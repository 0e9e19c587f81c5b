#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

namespace scaffold::drl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Fully connected value network: ReLU hidden layers, linear output.
/// Inputs are columns, so a batch is an (inputs x batch) matrix.
class QNetwork {
 public:
  struct Layer {
    Matrix weights;  // out x in
    Vector bias;     // out
    bool operator==(const Layer& o) const {
      return weights.rows() == o.weights.rows() && weights.cols() == o.weights.cols() &&
             bias.size() == o.bias.size() && weights == o.weights && bias == o.bias;
    }
  };

  struct Gradients {
    std::vector<Layer> layers;
  };

  QNetwork() = default;
  /// Zero weights. Throws Error{ShapeMismatch} for fewer than 2 dims or a
  /// zero-width layer.
  explicit QNetwork(std::vector<int> dims);

  /// He-normal weights, zero biases.
  static QNetwork he_initialized(std::vector<int> dims, std::mt19937_64& rng);

  const std::vector<int>& dims() const { return dims_; }
  int inputs() const { return dims_.front(); }
  int outputs() const { return dims_.back(); }
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  /// Throws Error{ShapeMismatch} if the input width is wrong.
  Vector forward(const Vector& x) const;
  Matrix forward_batch(const Matrix& batch) const;

  /// Mean over the batch of (Q(s, a) - y)^2 on the taken action only, with
  /// its gradient.
  double loss_and_gradients(const Matrix& states, const std::vector<int>& actions, const Vector& targets,
                            Gradients& grads) const;
  double loss(const Matrix& states, const std::vector<int>& actions, const Vector& targets) const;

  bool all_finite() const;
  bool same_shape(const QNetwork& other) const { return dims_ == other.dims_; }
  bool operator==(const QNetwork&) const = default;

 private:
  std::vector<int> dims_;
  std::vector<Layer> layers_;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam(const QNetwork& net, AdamConfig config);
  void step(QNetwork& net, const QNetwork::Gradients& grads);
  long steps() const { return t_; }

 private:
  AdamConfig config_;
  std::vector<QNetwork::Layer> m_, v_;
  long t_ = 0;
};

}  // namespace scaffold::drl
