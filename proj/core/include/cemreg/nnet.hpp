#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cemreg/rng.hpp"

namespace cemreg::nnet {

using Matrix = Eigen::MatrixXf;

// Flat exchange format for checkpointing: shape + row-major f32 values.
struct Tensor {
  std::vector<std::uint32_t> shape;
  std::vector<float> values;

  std::size_t element_count() const;
};

Tensor to_tensor(const Matrix& m);
Matrix matrix_from_tensor(const Tensor& t);

// Throws if any value is NaN or +/-Inf.
void check_finite(const Matrix& m, const char* what);

enum class Activation { Identity, Relu, Tanh };

/**
 * Dense multi-layer perceptron over f32 row batches: each layer computes
 * input * W + b followed by its activation. Forward can record a cache from
 * which backward produces exact reverse-mode gradients.
 */
class Mlp {
 public:
  Mlp() = default;
  // sizes = [in, h1, ..., out]; one activation per layer.
  Mlp(std::vector<int> sizes, std::vector<Activation> activations);

  // Weights uniform in +/-sqrt(6/(fan_in+fan_out)), biases zero.
  void init_params(Rng& rng);

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  std::size_t layer_count() const { return weights_.size(); }
  const std::vector<int>& sizes() const { return sizes_; }

  Matrix& weight(std::size_t layer) { return weights_[layer]; }
  const Matrix& weight(std::size_t layer) const { return weights_[layer]; }
  Matrix& bias(std::size_t layer) { return biases_[layer]; }
  const Matrix& bias(std::size_t layer) const { return biases_[layer]; }
  Activation activation(std::size_t layer) const { return activations_[layer]; }

  // values[0] is the input, values[l+1] the post-activation output of layer l.
  struct Cache {
    std::vector<Matrix> values;
    std::vector<int> sizes;
  };

  struct Grads {
    std::vector<Matrix> weights;
    std::vector<Matrix> biases;

    void zero();
  };
  Grads make_grads() const;

  Matrix forward(const Matrix& input) const;
  Matrix forward(const Matrix& input, Cache& cache) const;

  // Accumulates parameter gradients into `grads`, returns the input gradient.
  // The cache must come from a forward of this network with matching shapes.
  Matrix backward(const Cache& cache, const Matrix& output_grad,
                  Grads& grads) const;

  void for_each_param(const std::function<void(Matrix&)>& fn);
  void for_each_param(const std::function<void(const Matrix&)>& fn) const;
  std::size_t param_count() const;

 private:
  std::vector<int> sizes_;
  std::vector<Matrix> weights_;  // (in x out)
  std::vector<Matrix> biases_;   // (1 x out)
  std::vector<Activation> activations_;
};

// Column-wise max over all rows; ties go to the lowest row index.
// argmax (optional) receives the winning row per column.
Eigen::RowVectorXf max_pool_rows(const Matrix& features,
                                 std::vector<int>* argmax = nullptr);

// Segmented pooling: sizes[k] consecutive rows reduce to output row k.
// argmax stores the absolute winning row index per (segment, column).
Matrix segment_max_pool(const Matrix& features, const std::vector<int>& sizes,
                        std::vector<int>& argmax);

// Routes each pooled gradient entry back to its argmax row.
Matrix segment_max_pool_backward(Eigen::Index feature_rows,
                                 const std::vector<int>& sizes,
                                 const std::vector<int>& argmax,
                                 const Matrix& pooled_grad);

struct AdamConfig {
  float learning_rate = 1e-4f;
  float weight_decay = 5e-4f;  // L2 term added to the gradient
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float epsilon = 1e-8f;
};

struct ParamRef {
  float* value = nullptr;
  const float* grad = nullptr;
  Eigen::Index size = 0;
};

/**
 * Adam over a fixed list of parameter blocks. The block list must have the
 * same length and per-block sizes on every step; moments are allocated on
 * the first call.
 */
class Adam {
 public:
  explicit Adam(AdamConfig config) : config_(config) {}

  const AdamConfig& config() const { return config_; }
  long step_count() const { return step_; }

  void step(const std::vector<ParamRef>& params);

 private:
  AdamConfig config_;
  long step_ = 0;
  std::vector<Eigen::VectorXf> first_moment_;
  std::vector<Eigen::VectorXf> second_moment_;
};

}  // namespace cemreg::nnet
