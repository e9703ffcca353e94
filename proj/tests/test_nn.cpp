#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <cstring>

#include "skb/nn.hpp"
#include "skb/rng.hpp"

using namespace skb;

namespace {

Network single_layer(const Eigen::MatrixXd& w, const Eigen::VectorXd& b, Activation act) {
  Network net;
  net.layers.push_back({w, b, act});
  return net;
}

// Random small network for property tests.
Network random_network(Rng& rng, int input, int output, int depth) {
  std::vector<int> hidden;
  for (int l = 0; l < depth; ++l) hidden.push_back(rng.uniform_int(1, 6));
  Network net = make_network(input, hidden, output, Activation::Tanh, rng);
  for (auto& layer : net.layers) {
    const int pick = rng.uniform_int(0, 2);
    layer.activation = (pick == 0)   ? Activation::Tanh
                       : (pick == 1) ? Activation::Relu
                                     : Activation::Identity;
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = rng.uniform(-0.5, 0.5);
  }
  net.layers.back().activation = Activation::Identity;
  return net;
}

double scalar_head(const Network& net, const Eigen::VectorXd& input, const Eigen::VectorXd& c) {
  return c.dot(forward(net, input));
}

}  // namespace

TEST_CASE("forward: identity layer reproduces its input") {
  const Network net =
      single_layer(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2), Activation::Identity);
  Eigen::VectorXd x(2);
  x << 1.0, 2.0;
  const Eigen::VectorXd y = forward(net, x);
  CHECK(y(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(y(1) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("forward: zero-weight tanh layer outputs zero") {
  const Network net =
      single_layer(Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(3), Activation::Tanh);
  Eigen::VectorXd x(2);
  x << 5.0, -7.0;
  CHECK(forward(net, x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("forward: two tanh stages match the hand-evaluated values") {
  // Frozen from an independent high-precision evaluation of the two
  // affine+tanh stages.
  Eigen::MatrixXd w1(2, 1);
  w1 << 0.3, -0.2;
  Eigen::VectorXd b1(2);
  b1 << 0.1, 0.05;
  Eigen::MatrixXd w2(1, 2);
  w2 << 0.7, -0.5;
  Eigen::VectorXd b2(1);
  b2 << -0.2;
  Network net;
  net.layers.push_back({w1, b1, Activation::Tanh});
  net.layers.push_back({w2, b2, Activation::Tanh});

  Eigen::VectorXd x(1);
  x << 0.5;
  const Eigen::VectorXd y = forward(net, x);
  CHECK(y(0) == doctest::Approx(-0.0035777335731380983).epsilon(1e-12));

  const ForwardTrace trace = forward_trace(net, x);
  CHECK(trace.activations[1](0) == doctest::Approx(0.24491866240370913).epsilon(1e-12));
  CHECK(trace.activations[1](1) == doctest::Approx(-0.04995837495787997).epsilon(1e-12));
}

TEST_CASE("forward: deterministic, bit-identical outputs") {
  Rng rng(7);
  const Network net = make_network(3, {5, 4}, 2, Activation::Tanh, rng);
  Eigen::VectorXd x(3);
  x << 0.2, -1.3, 0.8;
  const Eigen::VectorXd a = forward(net, x);
  const Eigen::VectorXd b = forward(net, x);
  CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0);
}

TEST_CASE("forward: rejects mismatched input width") {
  Rng rng(3);
  const Network net = make_network(3, {4}, 2, Activation::Tanh, rng);
  CHECK_THROWS_AS(forward(net, Eigen::VectorXd::Zero(2)), std::invalid_argument);
}

TEST_CASE("backward: closed-form gradients of a linear layer") {
  Eigen::MatrixXd w(3, 2);
  w << 1, 2, 3, 4, 5, 6;
  Eigen::VectorXd b(3);
  b << 0.5, -0.5, 0.25;
  const Network net = single_layer(w, b, Activation::Identity);

  Eigen::VectorXd x(2);
  x << 1.5, -0.5;
  NetworkGradients grads = zero_gradients(net);
  backward(net, x, Eigen::VectorXd::Ones(3), grads);
  // d sum(y) / d b = ones; d sum(y) / d W = outer(ones, x).
  CHECK((grads.bias[0] - Eigen::VectorXd::Ones(3)).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::MatrixXd expected = Eigen::VectorXd::Ones(3) * x.transpose();
  CHECK((grads.weights[0] - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("backward: matches central finite differences on 100 random configurations") {
  Rng rng(2024);
  const double step = 1e-5;
  for (int trial = 0; trial < 100; ++trial) {
    const int input = rng.uniform_int(1, 5);
    const int output = rng.uniform_int(1, 4);
    Network net = random_network(rng, input, output, rng.uniform_int(1, 3));
    Eigen::VectorXd x(input);
    for (int i = 0; i < input; ++i) x[i] = rng.uniform(-1.5, 1.5);
    Eigen::VectorXd head(output);
    for (int i = 0; i < output; ++i) head[i] = rng.uniform(-1.0, 1.0);

    NetworkGradients grads = zero_gradients(net);
    const Eigen::VectorXd input_grad = backward(net, x, head, grads);

    auto check_fd = [&](double analytic, double* param) {
      const double saved = *param;
      *param = saved + step;
      const double hi = scalar_head(net, x, head);
      *param = saved - step;
      const double lo = scalar_head(net, x, head);
      *param = saved;
      const double fd = (hi - lo) / (2.0 * step);
      CHECK(std::abs(analytic - fd) <= std::max(1e-7, 1e-4 * std::abs(fd)));
    };

    for (size_t l = 0; l < net.layers.size(); ++l) {
      auto& layer = net.layers[l];
      for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
        for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
          check_fd(grads.weights[l](r, c), &layer.weights(r, c));
      for (Eigen::Index i = 0; i < layer.bias.size(); ++i)
        check_fd(grads.bias[l](i), &layer.bias(i));
    }
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double saved = x[i];
      x[i] = saved + step;
      const double hi = scalar_head(net, x, head);
      x[i] = saved - step;
      const double lo = scalar_head(net, x, head);
      x[i] = saved;
      const double fd = (hi - lo) / (2.0 * step);
      CHECK(std::abs(input_grad[i] - fd) <= std::max(1e-7, 1e-4 * std::abs(fd)));
    }
  }
}

TEST_CASE("gaussian_nll: analytic values") {
  const Eigen::VectorXd zero3 = Eigen::VectorXd::Zero(3);
  const Eigen::VectorXd ones3 = Eigen::VectorXd::Ones(3);
  // mean = target, std = 1: d * log(2 pi) / 2.
  CHECK(gaussian_nll(zero3, ones3, zero3) ==
        doctest::Approx(3.0 * 0.9189385332046727).epsilon(1e-12));

  Eigen::VectorXd mean(1), stdv(1), target(1);
  mean << 0.0;
  stdv << 1.0;
  target << 1.0;
  CHECK(gaussian_nll(mean, stdv, target) == doctest::Approx(1.4189385332046727).epsilon(1e-12));
}

TEST_CASE("gaussian_nll: rejects non-positive std") {
  Eigen::VectorXd v(2);
  v << 1.0, 1.0;
  Eigen::VectorXd bad(2);
  bad << 1.0, 0.0;
  CHECK_THROWS_AS(gaussian_nll(v, bad, v), std::invalid_argument);
  bad << 1.0, -0.5;
  CHECK_THROWS_AS(gaussian_nll(v, bad, v), std::invalid_argument);
}

TEST_CASE("gaussian_nll: gradients match finite differences on random triples") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = rng.uniform_int(1, 5);
    Eigen::VectorXd mean(d), stdv(d), target(d);
    for (int i = 0; i < d; ++i) {
      mean[i] = rng.uniform(-2.0, 2.0);
      stdv[i] = rng.uniform(0.1, 3.0);
      target[i] = rng.uniform(-2.0, 2.0);
    }
    Eigen::VectorXd d_mean, d_std;
    gaussian_nll_grad(mean, stdv, target, d_mean, d_std);

    // The mean derivative has the closed form (mean - target) / std^2.
    const Eigen::VectorXd closed = ((mean - target).array() / stdv.array().square()).matrix();
    CHECK((d_mean - closed).cwiseAbs().maxCoeff() < 1e-6);

    const double step = 1e-6;
    for (int i = 0; i < d; ++i) {
      Eigen::VectorXd m2 = mean;
      m2[i] += step;
      double hi = gaussian_nll(m2, stdv, target);
      m2[i] -= 2.0 * step;
      double lo = gaussian_nll(m2, stdv, target);
      CHECK(d_mean[i] == doctest::Approx((hi - lo) / (2.0 * step)).epsilon(1e-4));

      Eigen::VectorXd s2 = stdv;
      s2[i] += step;
      hi = gaussian_nll(mean, s2, target);
      s2[i] -= 2.0 * step;
      lo = gaussian_nll(mean, s2, target);
      CHECK(d_std[i] == doctest::Approx((hi - lo) / (2.0 * step)).epsilon(1e-4));
    }
  }
}

TEST_CASE("gaussian_nll: invariant under simultaneous channel permutation") {
  Rng rng(123);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = rng.uniform_int(2, 6);
    Eigen::VectorXd mean(d), stdv(d), target(d);
    for (int i = 0; i < d; ++i) {
      mean[i] = rng.uniform(-2.0, 2.0);
      stdv[i] = rng.uniform(0.1, 3.0);
      target[i] = rng.uniform(-2.0, 2.0);
    }
    const double base = gaussian_nll(mean, stdv, target);
    const std::vector<int> perm = rng.sample_indices(d, d);
    Eigen::VectorXd pm(d), ps(d), pt(d);
    for (int i = 0; i < d; ++i) {
      pm[i] = mean[perm[i]];
      ps[i] = stdv[perm[i]];
      pt[i] = target[perm[i]];
    }
    CHECK(std::abs(gaussian_nll(pm, ps, pt) - base) <= 1e-12 * std::max(1.0, std::abs(base)));
  }
}

TEST_CASE("softplus and sigmoid: stable at extremes") {
  CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(softplus(50.0) == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(softplus(-50.0) > 0.0);
  CHECK(softplus(-50.0) < 1e-20);
  CHECK(sigmoid(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sigmoid(40.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sigmoid(-40.0) < 1e-15);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged from a fresh state") {
  Rng rng(5);
  Network net = make_network(2, {3}, 2, Activation::Tanh, rng);
  const Network before = net;
  AdamState state = make_adam_state(net, {});
  const NetworkGradients zeros = zero_gradients(net);
  for (int i = 0; i < 10; ++i) adam_step(net, zeros, state);
  for (size_t l = 0; l < net.layers.size(); ++l) {
    CHECK((net.layers[l].weights - before.layers[l].weights).cwiseAbs().maxCoeff() == 0.0);
    CHECK((net.layers[l].bias - before.layers[l].bias).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(state.step_count == 10);
}

TEST_CASE("adam: moments decay toward zero once gradients stop") {
  Rng rng(6);
  Network net = make_network(1, {}, 1, Activation::Identity, rng);
  AdamState state = make_adam_state(net, {});
  NetworkGradients grads = zero_gradients(net);
  grads.weights[0](0, 0) = 1.0;
  adam_step(net, grads, state);
  const double m_seed = std::abs(state.weight_m[0](0, 0));
  CHECK(m_seed > 0.0);
  grads.weights[0](0, 0) = 0.0;
  for (int i = 0; i < 50; ++i) adam_step(net, grads, state);
  CHECK(std::abs(state.weight_m[0](0, 0)) < m_seed * 1e-2);
}

TEST_CASE("adam: one step from fresh state with unit gradient moves by about -lr") {
  Network net;
  net.layers.push_back(
      {Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1), Activation::Identity});
  AdamConfig config;
  config.learning_rate = 0.01;
  AdamState state = make_adam_state(net, config);
  NetworkGradients grads = zero_gradients(net);
  grads.weights[0](0, 0) = 1.0;
  adam_step(net, grads, state);
  // Bias-corrected first step: -lr * g / (|g| + eps).
  CHECK(net.layers[0].weights(0, 0) == doctest::Approx(-0.01).epsilon(1e-6));
}

TEST_CASE("adam: constant gradient moves at about -lr per step against its sign") {
  Network net;
  net.layers.push_back(
      {Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1), Activation::Identity});
  AdamConfig config;
  config.learning_rate = 0.01;
  AdamState state = make_adam_state(net, config);
  NetworkGradients grads = zero_gradients(net);
  grads.weights[0](0, 0) = -3.5;
  double prev = 0.0;
  for (int i = 0; i < 50; ++i) {
    adam_step(net, grads, state);
    const double delta = net.layers[0].weights(0, 0) - prev;
    prev = net.layers[0].weights(0, 0);
    CHECK(delta > 0.0);  // opposite sign of the gradient
    CHECK(std::abs(delta) > 0.9 * config.learning_rate);
    CHECK(std::abs(delta) < 1.1 * config.learning_rate);
  }
}

TEST_CASE("adam: rejects mismatched gradient shapes") {
  Rng rng(8);
  Network net = make_network(2, {3}, 1, Activation::Tanh, rng);
  Network other = make_network(2, {4}, 1, Activation::Tanh, rng);
  AdamState state = make_adam_state(net, {});
  const NetworkGradients wrong = zero_gradients(other);
  CHECK_THROWS_AS(adam_step(net, wrong, state), std::invalid_argument);
}

TEST_CASE("make_network: glorot bounds and seeded determinism") {
  Rng a(42), b(42);
  const Network na = make_network(4, {8}, 3, Activation::Tanh, a);
  const Network nb = make_network(4, {8}, 3, Activation::Tanh, b);
  for (size_t l = 0; l < na.layers.size(); ++l)
    CHECK((na.layers[l].weights - nb.layers[l].weights).cwiseAbs().maxCoeff() == 0.0);
  const double bound0 = std::sqrt(6.0 / (4 + 8));
  CHECK(na.layers[0].weights.cwiseAbs().maxCoeff() <= bound0);
  CHECK(na.layers[0].bias.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("network validation: rejects inconsistent chains") {
  Network net;
  net.layers.push_back(
      {Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(2), Activation::Tanh});
  CHECK_THROWS_AS(validate(net), std::invalid_argument);  // bias length
  net.layers[0].bias = Eigen::VectorXd::Zero(3);
  net.layers.push_back(
      {Eigen::MatrixXd::Zero(2, 4), Eigen::VectorXd::Zero(2), Activation::Tanh});
  CHECK_THROWS_AS(validate(net), std::invalid_argument);  // adjacency
}
