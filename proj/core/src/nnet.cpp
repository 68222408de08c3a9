#include "cemreg/nnet.hpp"

#include <cmath>
#include <stdexcept>

#include "cemreg/errors.hpp"

namespace cemreg::nnet {

std::size_t Tensor::element_count() const {
  std::size_t n = 1;
  for (std::uint32_t d : shape) n *= d;
  return shape.empty() ? 0 : n;
}

Tensor to_tensor(const Matrix& m) {
  Tensor t;
  t.shape = {static_cast<std::uint32_t>(m.rows()),
             static_cast<std::uint32_t>(m.cols())};
  t.values.resize(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      t.values[static_cast<std::size_t>(r * m.cols() + c)] = m(r, c);
  return t;
}

Matrix matrix_from_tensor(const Tensor& t) {
  if (t.shape.size() != 2)
    throw DimensionError("matrix_from_tensor: expected rank-2 tensor, got rank " +
                         std::to_string(t.shape.size()));
  if (t.values.size() != t.element_count())
    throw DimensionError("matrix_from_tensor: value count does not match shape");
  Matrix m(t.shape[0], t.shape[1]);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      m(r, c) = t.values[static_cast<std::size_t>(r * m.cols() + c)];
  return m;
}

void check_finite(const Matrix& m, const char* what) {
  if (!m.allFinite())
    throw std::runtime_error(std::string("non-finite values in ") + what);
}

namespace {

float apply_activation(Activation act, float x) {
  switch (act) {
    case Activation::Identity: return x;
    case Activation::Relu: return x > 0.0f ? x : 0.0f;
    case Activation::Tanh: return std::tanh(x);
  }
  return x;
}

// Derivative expressed through the post-activation output, which all three
// activations allow (relu: 1 iff out > 0; tanh: 1 - out^2).
float activation_grad_from_output(Activation act, float out) {
  switch (act) {
    case Activation::Identity: return 1.0f;
    case Activation::Relu: return out > 0.0f ? 1.0f : 0.0f;
    case Activation::Tanh: return 1.0f - out * out;
  }
  return 1.0f;
}

}  // namespace

Mlp::Mlp(std::vector<int> sizes, std::vector<Activation> activations)
    : sizes_(std::move(sizes)), activations_(std::move(activations)) {
  if (sizes_.size() < 2)
    throw std::invalid_argument("Mlp: need at least input and output sizes");
  if (activations_.size() != sizes_.size() - 1)
    throw std::invalid_argument("Mlp: need one activation per layer");
  for (int s : sizes_)
    if (s <= 0) throw std::invalid_argument("Mlp: layer sizes must be positive");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    weights_.emplace_back(Matrix::Zero(sizes_[l], sizes_[l + 1]));
    biases_.emplace_back(Matrix::Zero(1, sizes_[l + 1]));
  }
}

void Mlp::init_params(Rng& rng) {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Matrix& w = weights_[l];
    const double limit = std::sqrt(6.0 / (w.rows() + w.cols()));
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        w(r, c) = static_cast<float>(rng.uniform(-limit, limit));
    biases_[l].setZero();
  }
}

void Mlp::Grads::zero() {
  for (Matrix& m : weights) m.setZero();
  for (Matrix& m : biases) m.setZero();
}

Mlp::Grads Mlp::make_grads() const {
  Grads g;
  for (const Matrix& w : weights_) g.weights.emplace_back(Matrix::Zero(w.rows(), w.cols()));
  for (const Matrix& b : biases_) g.biases.emplace_back(Matrix::Zero(b.rows(), b.cols()));
  return g;
}

Matrix Mlp::forward(const Matrix& input) const {
  Cache cache;
  return forward(input, cache);
}

Matrix Mlp::forward(const Matrix& input, Cache& cache) const {
  if (input.cols() != input_dim())
    throw DimensionError("Mlp::forward: input has " + std::to_string(input.cols()) +
                         " columns, expected " + std::to_string(input_dim()));
  cache.sizes = sizes_;
  cache.values.clear();
  cache.values.reserve(weights_.size() + 1);
  cache.values.push_back(input);
  Matrix current = input;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Matrix out = current * weights_[l];
    out.rowwise() += biases_[l].row(0);
    const Activation act = activations_[l];
    if (act != Activation::Identity)
      out = out.unaryExpr([act](float x) { return apply_activation(act, x); });
    cache.values.push_back(out);
    current = std::move(out);
  }
  check_finite(current, "Mlp::forward output");
  return current;
}

Matrix Mlp::backward(const Cache& cache, const Matrix& output_grad,
                     Grads& grads) const {
  if (cache.sizes != sizes_ || cache.values.size() != weights_.size() + 1)
    throw DimensionError("Mlp::backward: cache does not match this network");
  if (output_grad.rows() != cache.values.back().rows() ||
      output_grad.cols() != output_dim())
    throw DimensionError("Mlp::backward: output gradient shape mismatch");
  if (grads.weights.size() != weights_.size())
    throw DimensionError("Mlp::backward: gradient accumulator shape mismatch");

  Matrix upstream = output_grad;
  for (std::size_t l = weights_.size(); l-- > 0;) {
    const Matrix& out = cache.values[l + 1];
    const Matrix& in = cache.values[l];
    const Activation act = activations_[l];
    Matrix pre_grad = upstream;
    if (act != Activation::Identity) {
      for (Eigen::Index r = 0; r < pre_grad.rows(); ++r)
        for (Eigen::Index c = 0; c < pre_grad.cols(); ++c)
          pre_grad(r, c) *= activation_grad_from_output(act, out(r, c));
    }
    grads.weights[l].noalias() += in.transpose() * pre_grad;
    grads.biases[l].row(0) += pre_grad.colwise().sum();
    upstream = pre_grad * weights_[l].transpose();
  }
  return upstream;
}

void Mlp::for_each_param(const std::function<void(Matrix&)>& fn) {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    fn(weights_[l]);
    fn(biases_[l]);
  }
}

void Mlp::for_each_param(const std::function<void(const Matrix&)>& fn) const {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    fn(weights_[l]);
    fn(biases_[l]);
  }
}

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for_each_param([&n](const Matrix& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

Eigen::RowVectorXf max_pool_rows(const Matrix& features, std::vector<int>* argmax) {
  if (features.rows() == 0)
    throw std::invalid_argument("max_pool_rows: empty feature matrix");
  Eigen::RowVectorXf pooled(features.cols());
  if (argmax) argmax->assign(static_cast<std::size_t>(features.cols()), 0);
  for (Eigen::Index c = 0; c < features.cols(); ++c) {
    int best_row = 0;
    float best = features(0, c);
    for (Eigen::Index r = 1; r < features.rows(); ++r) {
      if (features(r, c) > best) {
        best = features(r, c);
        best_row = static_cast<int>(r);
      }
    }
    pooled(c) = best;
    if (argmax) (*argmax)[static_cast<std::size_t>(c)] = best_row;
  }
  return pooled;
}

Matrix segment_max_pool(const Matrix& features, const std::vector<int>& sizes,
                        std::vector<int>& argmax) {
  Eigen::Index total = 0;
  for (int s : sizes) {
    if (s <= 0) throw std::invalid_argument("segment_max_pool: empty segment");
    total += s;
  }
  if (total != features.rows())
    throw DimensionError("segment_max_pool: segment sizes sum to " +
                         std::to_string(total) + ", features have " +
                         std::to_string(features.rows()) + " rows");

  const Eigen::Index cols = features.cols();
  Matrix pooled(static_cast<Eigen::Index>(sizes.size()), cols);
  argmax.assign(sizes.size() * static_cast<std::size_t>(cols), 0);
  Eigen::Index begin = 0;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    const Eigen::Index end = begin + sizes[k];
    for (Eigen::Index c = 0; c < cols; ++c) {
      Eigen::Index best_row = begin;
      float best = features(begin, c);
      for (Eigen::Index r = begin + 1; r < end; ++r) {
        if (features(r, c) > best) {
          best = features(r, c);
          best_row = r;
        }
      }
      pooled(static_cast<Eigen::Index>(k), c) = best;
      argmax[k * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)] =
          static_cast<int>(best_row);
    }
    begin = end;
  }
  return pooled;
}

Matrix segment_max_pool_backward(Eigen::Index feature_rows,
                                 const std::vector<int>& sizes,
                                 const std::vector<int>& argmax,
                                 const Matrix& pooled_grad) {
  if (pooled_grad.rows() != static_cast<Eigen::Index>(sizes.size()))
    throw DimensionError("segment_max_pool_backward: pooled gradient rows mismatch");
  const Eigen::Index cols = pooled_grad.cols();
  if (argmax.size() != sizes.size() * static_cast<std::size_t>(cols))
    throw DimensionError("segment_max_pool_backward: argmax size mismatch");
  Matrix grad = Matrix::Zero(feature_rows, cols);
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const int row = argmax[k * static_cast<std::size_t>(cols) +
                             static_cast<std::size_t>(c)];
      grad(row, c) += pooled_grad(static_cast<Eigen::Index>(k), c);
    }
  }
  return grad;
}

void Adam::step(const std::vector<ParamRef>& params) {
  if (first_moment_.empty()) {
    first_moment_.reserve(params.size());
    second_moment_.reserve(params.size());
    for (const ParamRef& p : params) {
      first_moment_.emplace_back(Eigen::VectorXf::Zero(p.size));
      second_moment_.emplace_back(Eigen::VectorXf::Zero(p.size));
    }
  }
  if (params.size() != first_moment_.size())
    throw DimensionError("Adam::step: parameter block count changed between steps");

  ++step_;
  const float bias1 = 1.0f - std::pow(config_.beta1, static_cast<float>(step_));
  const float bias2 = 1.0f - std::pow(config_.beta2, static_cast<float>(step_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const ParamRef& p = params[i];
    if (first_moment_[i].size() != p.size)
      throw DimensionError("Adam::step: parameter block size changed between steps");
    Eigen::Map<Eigen::VectorXf> value(p.value, p.size);
    Eigen::Map<const Eigen::VectorXf> grad(p.grad, p.size);

    Eigen::VectorXf effective = grad + config_.weight_decay * value;
    first_moment_[i] = config_.beta1 * first_moment_[i] +
                       (1.0f - config_.beta1) * effective;
    second_moment_[i] = config_.beta2 * second_moment_[i] +
                        (1.0f - config_.beta2) * effective.cwiseProduct(effective);

    const Eigen::ArrayXf m_hat = first_moment_[i].array() / bias1;
    const Eigen::ArrayXf v_hat = second_moment_[i].array() / bias2;
    value.array() -= config_.learning_rate * m_hat / (v_hat.sqrt() + config_.epsilon);
    if (!value.allFinite())
      throw std::runtime_error("non-finite parameter after Adam step");
  }
}

}  // namespace cemreg::nnet
