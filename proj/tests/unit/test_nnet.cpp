#include "cemreg/nnet.hpp"

#include <cmath>
#include <vector>

#include "cemreg/errors.hpp"
#include "cemreg/rng.hpp"
#include "doctest.h"

using namespace cemreg;
using namespace cemreg::nnet;

namespace {

// Scalar objective for gradient checks: a fixed random weighting of the
// network output, so output_grad is just the weighting matrix.
double weighted_sum(const Matrix& out, const Matrix& weighting) {
  return static_cast<double>(out.cwiseProduct(weighting).sum());
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      m(i, j) = static_cast<float>(rng.gaussian());
  return m;
}

// Central finite difference through one parameter entry.
double fd_gradient(Mlp& net, float* param, const Matrix& input,
                   const Matrix& weighting, float h) {
  const float saved = *param;
  *param = saved + h;
  const double up = weighted_sum(net.forward(input), weighting);
  *param = saved - h;
  const double down = weighted_sum(net.forward(input), weighting);
  *param = saved;
  return (up - down) / (2.0 * static_cast<double>(h));
}

void check_close(double analytic, double numeric, double rel_tol) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-2});
  CHECK(std::abs(analytic - numeric) <= rel_tol * scale);
}

}  // namespace

TEST_CASE("tensors round-trip matrices including the shape") {
  Rng rng(71);
  const Matrix m = random_matrix(3, 5, rng);
  const Tensor t = to_tensor(m);
  CHECK(t.shape == std::vector<std::uint32_t>{3, 5});
  CHECK(t.element_count() == 15);
  const Matrix back = matrix_from_tensor(t);
  CHECK((back - m).norm() == 0.0f);

  Tensor bad = t;
  bad.values.pop_back();
  CHECK_THROWS_AS(matrix_from_tensor(bad), DimensionError);
}

TEST_CASE("check_finite rejects NaN and infinity") {
  Matrix m = Matrix::Zero(2, 2);
  CHECK_NOTHROW(check_finite(m, "m"));
  m(0, 1) = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS(check_finite(m, "m"));
  m(0, 1) = std::numeric_limits<float>::infinity();
  CHECK_THROWS(check_finite(m, "m"));
}

TEST_CASE("a 1x1 identity layer computes x*w + b") {
  Mlp net({1, 1}, {Activation::Identity});
  net.weight(0)(0, 0) = 2.0f;
  net.bias(0)(0, 0) = 1.0f;
  Matrix input(1, 1);
  input(0, 0) = 3.0f;
  CHECK(net.forward(input)(0, 0) == 7.0f);
}

TEST_CASE("zero-initialized layers output their bias") {
  Mlp net({3, 4}, {Activation::Identity});
  net.bias(0) << 1.0f, 2.0f, 3.0f, 4.0f;
  Rng rng(72);
  const Matrix out = net.forward(random_matrix(5, 3, rng) * 0.0f);
  for (Eigen::Index r = 0; r < 5; ++r)
    for (Eigen::Index c = 0; c < 4; ++c) CHECK(out(r, c) == net.bias(0)(0, c));
}

TEST_CASE("forward matches a straight-line computation of a two-layer net") {
  Mlp net({2, 2, 1}, {Activation::Tanh, Activation::Identity});
  net.weight(0) << 0.5f, -0.25f, 0.75f, 1.0f;
  net.bias(0) << 0.1f, -0.2f;
  net.weight(1) << 2.0f, -1.5f;
  net.bias(1) << 0.3f;

  Matrix input(1, 2);
  input << 0.4f, -0.6f;
  // Layer 1 pre-activations, then tanh, then the linear head.
  const float p0 = 0.4f * 0.5f + (-0.6f) * 0.75f + 0.1f;
  const float p1 = 0.4f * (-0.25f) + (-0.6f) * 1.0f + (-0.2f);
  const float h0 = std::tanh(p0);
  const float h1 = std::tanh(p1);
  const float expected = h0 * 2.0f + h1 * (-1.5f) + 0.3f;
  CHECK(net.forward(input)(0, 0) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("relu masks gradients exactly at known activation signs") {
  Mlp net({2, 2}, {Activation::Relu});
  net.weight(0) << 1.0f, 1.0f, 0.0f, 0.0f;
  net.bias(0) << 1.0f, -1.0f;  // unit 0 clearly active, unit 1 clearly dead
  Matrix input(1, 2);
  input << 0.5f, 0.0f;

  Mlp::Cache cache;
  const Matrix out = net.forward(input, cache);
  CHECK(out(0, 0) == 1.5f);
  CHECK(out(0, 1) == 0.0f);

  Mlp::Grads grads = net.make_grads();
  Matrix output_grad(1, 2);
  output_grad << 1.0f, 1.0f;
  const Matrix input_grad = net.backward(cache, output_grad, grads);

  // Only the active unit feeds back: d/dx = W column of unit 0.
  CHECK(input_grad(0, 0) == 1.0f);
  CHECK(input_grad(0, 1) == 0.0f);
  CHECK(grads.weights[0](0, 0) == 0.5f);  // x0 * grad through active unit
  CHECK(grads.weights[0](0, 1) == 0.0f);  // dead unit contributes nothing
  CHECK(grads.biases[0](0, 0) == 1.0f);
  CHECK(grads.biases[0](0, 1) == 0.0f);
}

TEST_CASE("backward gradients match central finite differences") {
  Rng rng(73);
  // A spread of depths, widths, and smooth activation mixes.
  const std::vector<std::pair<std::vector<int>, std::vector<Activation>>> configs = {
      {{2, 3}, {Activation::Identity}},
      {{3, 5, 2}, {Activation::Tanh, Activation::Identity}},
      {{4, 6, 6, 3}, {Activation::Tanh, Activation::Tanh, Activation::Identity}},
      {{1, 8, 1}, {Activation::Tanh, Activation::Tanh}},
      {{5, 4, 4, 2}, {Activation::Identity, Activation::Tanh, Activation::Identity}},
  };
  for (int round = 0; round < 4; ++round) {
    for (const auto& [sizes, activations] : configs) {
      Mlp net(sizes, activations);
      net.init_params(rng);
      const Matrix input = random_matrix(3, sizes.front(), rng);
      const Matrix weighting = random_matrix(3, sizes.back(), rng);

      Mlp::Cache cache;
      net.forward(input, cache);
      Mlp::Grads grads = net.make_grads();
      const Matrix input_grad = net.backward(cache, weighting, grads);

      // Every parameter of every layer. The step balances truncation against
      // f32 forward-pass noise (optimum near cbrt of the f32 epsilon).
      const float h = 3e-3f;
      for (std::size_t layer = 0; layer < net.layer_count(); ++layer) {
        for (Eigen::Index i = 0; i < net.weight(layer).size(); ++i) {
          const double fd = fd_gradient(net, net.weight(layer).data() + i, input,
                                        weighting, h);
          check_close(grads.weights[layer](i), fd, 1e-2);
        }
        for (Eigen::Index i = 0; i < net.bias(layer).size(); ++i) {
          const double fd = fd_gradient(net, net.bias(layer).data() + i, input,
                                        weighting, h);
          check_close(grads.biases[layer](i), fd, 1e-2);
        }
      }

      // Input gradient via perturbed copies of the input.
      Matrix perturbed = input;
      for (Eigen::Index i = 0; i < input.size(); ++i) {
        const float saved = perturbed(i);
        perturbed(i) = saved + h;
        const double up = weighted_sum(net.forward(perturbed), weighting);
        perturbed(i) = saved - h;
        const double down = weighted_sum(net.forward(perturbed), weighting);
        perturbed(i) = saved;
        check_close(input_grad(i), (up - down) / (2.0 * h), 1e-2);
      }
    }
  }
}

TEST_CASE("backward accumulates into the gradient buffers") {
  Rng rng(74);
  Mlp net({3, 4, 2}, {Activation::Tanh, Activation::Identity});
  net.init_params(rng);
  const Matrix input = random_matrix(2, 3, rng);
  const Matrix output_grad = random_matrix(2, 2, rng);

  Mlp::Cache cache;
  net.forward(input, cache);
  Mlp::Grads once = net.make_grads();
  net.backward(cache, output_grad, once);
  Mlp::Grads twice = net.make_grads();
  net.backward(cache, output_grad, twice);
  net.backward(cache, output_grad, twice);
  CHECK((twice.weights[0] - 2.0f * once.weights[0]).norm() < 1e-5f);
  CHECK((twice.biases[1] - 2.0f * once.biases[1]).norm() < 1e-5f);

  once.zero();
  CHECK(once.weights[0].norm() == 0.0f);
  CHECK(once.biases[1].norm() == 0.0f);
}

TEST_CASE("backward rejects mismatched caches and gradients") {
  Rng rng(75);
  Mlp net({3, 4, 2}, {Activation::Tanh, Activation::Identity});
  net.init_params(rng);
  Mlp::Grads grads = net.make_grads();

  Mlp::Cache cache;
  net.forward(random_matrix(2, 3, rng), cache);
  CHECK_THROWS_AS(net.backward(cache, random_matrix(2, 3, rng), grads),
                  DimensionError);

  Mlp other({3, 5, 2}, {Activation::Tanh, Activation::Identity});
  other.init_params(rng);
  Mlp::Cache stale;
  other.forward(random_matrix(2, 3, rng), stale);
  CHECK_THROWS_AS(net.backward(stale, random_matrix(2, 2, rng), grads),
                  DimensionError);
}

TEST_CASE("forward rejects inputs of the wrong width") {
  Mlp net({3, 2}, {Activation::Identity});
  Rng rng(76);
  CHECK_THROWS_AS(net.forward(random_matrix(2, 4, rng)), DimensionError);
}

TEST_CASE("init_params stays inside the fan-balanced uniform bound") {
  Rng rng(77);
  Mlp net({30, 50, 7}, {Activation::Relu, Activation::Identity});
  net.init_params(rng);
  for (std::size_t layer = 0; layer < net.layer_count(); ++layer) {
    const double bound = std::sqrt(
        6.0 / (net.weight(layer).rows() + net.weight(layer).cols()));
    CHECK(static_cast<double>(net.weight(layer).cwiseAbs().maxCoeff()) <= bound);
    // With thousands of draws the max should come close to the bound.
    CHECK(static_cast<double>(net.weight(layer).cwiseAbs().maxCoeff()) >=
          0.8 * bound);
    CHECK(net.bias(layer).norm() == 0.0f);
  }
  CHECK(net.param_count() == 30 * 50 + 50 + 50 * 7 + 7);
}

TEST_CASE("max_pool_rows picks column maxima with first-row tie-break") {
  Matrix features(2, 2);
  features << 1.0f, 5.0f, 3.0f, 2.0f;
  std::vector<int> argmax;
  const Eigen::RowVectorXf pooled = max_pool_rows(features, &argmax);
  CHECK(pooled(0) == 3.0f);
  CHECK(pooled(1) == 5.0f);
  CHECK(argmax == std::vector<int>{1, 0});

  Matrix tied(2, 1);
  tied << 2.0f, 2.0f;
  max_pool_rows(tied, &argmax);
  CHECK(argmax == std::vector<int>{0});
}

TEST_CASE("segment_max_pool pools disjoint row ranges") {
  Matrix features(5, 2);
  features << 1.0f, 9.0f,   // segment 0: rows 0..1
      4.0f, 2.0f,
      0.0f, 0.0f,           // segment 1: rows 2..4
      -1.0f, 7.0f,
      3.0f, 7.0f;
  std::vector<int> argmax;
  const Matrix pooled = segment_max_pool(features, {2, 3}, argmax);
  REQUIRE(pooled.rows() == 2);
  CHECK(pooled(0, 0) == 4.0f);
  CHECK(pooled(0, 1) == 9.0f);
  CHECK(pooled(1, 0) == 3.0f);
  CHECK(pooled(1, 1) == 7.0f);  // tie between rows 3 and 4 goes to row 3
  CHECK(argmax == std::vector<int>{1, 0, 4, 3});

  Matrix pooled_grad(2, 2);
  pooled_grad << 1.0f, 2.0f, 3.0f, 4.0f;
  const Matrix routed = segment_max_pool_backward(5, {2, 3}, argmax, pooled_grad);
  Matrix expected = Matrix::Zero(5, 2);
  expected(1, 0) = 1.0f;
  expected(0, 1) = 2.0f;
  expected(4, 0) = 3.0f;
  expected(3, 1) = 4.0f;
  CHECK((routed - expected).norm() == 0.0f);
}

TEST_CASE("segment_max_pool is invariant to permutations within a segment") {
  Rng rng(78);
  Matrix features = random_matrix(7, 4, rng);
  std::vector<int> argmax;
  const Matrix pooled = segment_max_pool(features, {3, 4}, argmax);

  Matrix shuffled = features;
  shuffled.row(0).swap(shuffled.row(2));
  shuffled.row(4).swap(shuffled.row(6));
  std::vector<int> argmax_shuffled;
  const Matrix pooled_shuffled = segment_max_pool(shuffled, {3, 4}, argmax_shuffled);
  CHECK((pooled - pooled_shuffled).norm() == 0.0f);
}

TEST_CASE("adam leaves parameters alone when gradients and decay are zero") {
  AdamConfig config;
  config.weight_decay = 0.0f;
  Adam adam(config);
  Eigen::VectorXf value(4), grad = Eigen::VectorXf::Zero(4);
  value << 1.0f, -2.0f, 3.0f, -4.0f;
  const Eigen::VectorXf before = value;
  adam.step({{value.data(), grad.data(), 4}});
  CHECK((value - before).norm() == 0.0f);
  CHECK(adam.step_count() == 1);
}

TEST_CASE("one adam step matches the update formula") {
  AdamConfig config;
  config.learning_rate = 0.01f;
  config.weight_decay = 0.1f;
  Adam adam(config);

  Eigen::VectorXf value(2), grad(2);
  value << 2.0f, -1.0f;
  grad << 0.5f, -0.25f;
  const Eigen::VectorXf initial = value;
  adam.step({{value.data(), grad.data(), 2}});

  for (int i = 0; i < 2; ++i) {
    const float effective = grad(i) + config.weight_decay * initial(i);
    const float m = (1.0f - config.beta1) * effective;
    const float v = (1.0f - config.beta2) * effective * effective;
    const float m_hat = m / (1.0f - config.beta1);
    const float v_hat = v / (1.0f - config.beta2);
    const float expected =
        initial(i) - config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    CHECK(value(i) == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("adam descends a simple quadratic") {
  AdamConfig config;
  config.learning_rate = 0.05f;
  config.weight_decay = 0.0f;
  Adam adam(config);
  Eigen::VectorXf value(1), grad(1);
  value << 5.0f;
  for (int step = 0; step < 2000; ++step) {
    grad(0) = 2.0f * (value(0) - 1.5f);  // d/dx (x - 1.5)^2
    adam.step({{value.data(), grad.data(), 1}});
  }
  CHECK(value(0) == doctest::Approx(1.5f).epsilon(1e-3));
}
