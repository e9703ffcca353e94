#include "skb/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace skb {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727418;

void apply_activation(Activation act, Eigen::VectorXd& v) {
  switch (act) {
    case Activation::Identity:
      break;
    case Activation::Tanh:
      v = v.array().tanh();
      break;
    case Activation::Relu:
      v = v.cwiseMax(0.0);
      break;
  }
}

// Derivative expressed through the activation output (enough for the three
// supported activations; relu uses the a > 0 subgradient).
Eigen::VectorXd activation_derivative(Activation act, const Eigen::VectorXd& output) {
  switch (act) {
    case Activation::Identity:
      return Eigen::VectorXd::Ones(output.size());
    case Activation::Tanh:
      return (1.0 - output.array().square()).matrix();
    case Activation::Relu:
      return (output.array() > 0.0).cast<double>().matrix();
  }
  throw std::logic_error("unknown activation");
}

}  // namespace

Activation activation_from_string(const std::string& name) {
  if (name == "identity") return Activation::Identity;
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  throw std::invalid_argument("unknown activation: " + name);
}

std::string to_string(Activation act) {
  switch (act) {
    case Activation::Identity:
      return "identity";
    case Activation::Tanh:
      return "tanh";
    case Activation::Relu:
      return "relu";
  }
  throw std::logic_error("unknown activation");
}

int Network::input_width() const {
  return layers.empty() ? 0 : static_cast<int>(layers.front().weights.cols());
}

int Network::output_width() const {
  return layers.empty() ? 0 : static_cast<int>(layers.back().weights.rows());
}

long Network::parameter_count() const {
  long n = 0;
  for (const auto& layer : layers) n += layer.weights.size() + layer.bias.size();
  return n;
}

void validate(const Network& net) {
  if (net.layers.empty()) throw std::invalid_argument("network has no layers");
  for (size_t i = 0; i < net.layers.size(); ++i) {
    const auto& layer = net.layers[i];
    if (layer.bias.size() != layer.weights.rows())
      throw std::invalid_argument("layer bias length does not match weight rows");
    if (i > 0 && net.layers[i - 1].weights.rows() != layer.weights.cols())
      throw std::invalid_argument("adjacent layers are not dimension-compatible");
    if (!layer.weights.allFinite() || !layer.bias.allFinite())
      throw std::invalid_argument("layer parameters must be finite");
  }
}

Network make_network(int input, const std::vector<int>& hidden, int output,
                     Activation hidden_act, Rng& rng) {
  if (input <= 0 || output <= 0) throw std::invalid_argument("network widths must be positive");
  std::vector<int> dims;
  dims.push_back(input);
  for (int h : hidden) {
    if (h <= 0) throw std::invalid_argument("hidden widths must be positive");
    dims.push_back(h);
  }
  dims.push_back(output);

  Network net;
  net.layers.resize(dims.size() - 1);
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    DenseLayer& layer = net.layers[l];
    layer.weights.resize(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) layer.weights(r, c) = rng.uniform(-bound, bound);
    layer.bias = Eigen::VectorXd::Zero(fan_out);
    layer.activation = (l + 2 == dims.size()) ? Activation::Identity : hidden_act;
  }
  return net;
}

Eigen::VectorXd forward(const Network& net, const Eigen::Ref<const Eigen::VectorXd>& input) {
  if (net.layers.empty()) throw std::invalid_argument("network has no layers");
  if (input.size() != net.input_width())
    throw std::invalid_argument("forward: input width mismatch");
  Eigen::VectorXd a = input;
  Eigen::VectorXd z;
  for (const auto& layer : net.layers) {
    z.noalias() = layer.weights * a;
    z += layer.bias;
    apply_activation(layer.activation, z);
    a.swap(z);
  }
  return a;
}

ForwardTrace forward_trace(const Network& net, const Eigen::Ref<const Eigen::VectorXd>& input) {
  if (net.layers.empty()) throw std::invalid_argument("network has no layers");
  if (input.size() != net.input_width())
    throw std::invalid_argument("forward: input width mismatch");
  ForwardTrace trace;
  trace.activations.reserve(net.layers.size() + 1);
  trace.activations.emplace_back(input);
  for (const auto& layer : net.layers) {
    Eigen::VectorXd z;
    z.noalias() = layer.weights * trace.activations.back();
    z += layer.bias;
    apply_activation(layer.activation, z);
    trace.activations.push_back(std::move(z));
  }
  return trace;
}

void NetworkGradients::set_zero() {
  for (auto& w : weights) w.setZero();
  for (auto& b : bias) b.setZero();
}

void NetworkGradients::scale(double factor) {
  for (auto& w : weights) w *= factor;
  for (auto& b : bias) b *= factor;
}

NetworkGradients zero_gradients(const Network& net) {
  NetworkGradients g;
  g.weights.reserve(net.layers.size());
  g.bias.reserve(net.layers.size());
  for (const auto& layer : net.layers) {
    g.weights.emplace_back(Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()));
    g.bias.emplace_back(Eigen::VectorXd::Zero(layer.bias.size()));
  }
  return g;
}

Eigen::VectorXd backward(const Network& net, const ForwardTrace& trace,
                         const Eigen::Ref<const Eigen::VectorXd>& output_gradient,
                         NetworkGradients& grads) {
  const size_t n = net.layers.size();
  if (trace.activations.size() != n + 1)
    throw std::invalid_argument("backward: trace does not match network depth");
  if (output_gradient.size() != net.output_width())
    throw std::invalid_argument("backward: output gradient width mismatch");
  if (grads.weights.size() != n || grads.bias.size() != n)
    throw std::invalid_argument("backward: gradient buffers do not match network");

  Eigen::VectorXd g = output_gradient;
  for (size_t l = n; l-- > 0;) {
    const DenseLayer& layer = net.layers[l];
    const Eigen::VectorXd gz =
        g.cwiseProduct(activation_derivative(layer.activation, trace.activations[l + 1]));
    grads.weights[l].noalias() += gz * trace.activations[l].transpose();
    grads.bias[l] += gz;
    g.noalias() = layer.weights.transpose() * gz;
  }
  return g;
}

Eigen::VectorXd backward(const Network& net, const Eigen::Ref<const Eigen::VectorXd>& input,
                         const Eigen::Ref<const Eigen::VectorXd>& output_gradient,
                         NetworkGradients& grads) {
  const ForwardTrace trace = forward_trace(net, input);
  return backward(net, trace, output_gradient, grads);
}

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double gaussian_nll(const Eigen::Ref<const Eigen::VectorXd>& mean,
                    const Eigen::Ref<const Eigen::VectorXd>& std,
                    const Eigen::Ref<const Eigen::VectorXd>& target) {
  if (mean.size() != std.size() || mean.size() != target.size())
    throw std::invalid_argument("gaussian_nll: vector lengths differ");
  if ((std.array() <= 0.0).any())
    throw std::invalid_argument("gaussian_nll: std must be strictly positive");
  double loss = 0.0;
  for (Eigen::Index k = 0; k < mean.size(); ++k) {
    const double r = target[k] - mean[k];
    loss += std::log(std[k]) + r * r / (2.0 * std[k] * std[k]) + kHalfLog2Pi;
  }
  return loss;
}

void gaussian_nll_grad(const Eigen::Ref<const Eigen::VectorXd>& mean,
                       const Eigen::Ref<const Eigen::VectorXd>& std,
                       const Eigen::Ref<const Eigen::VectorXd>& target,
                       Eigen::VectorXd& d_mean, Eigen::VectorXd& d_std) {
  if (mean.size() != std.size() || mean.size() != target.size())
    throw std::invalid_argument("gaussian_nll_grad: vector lengths differ");
  if ((std.array() <= 0.0).any())
    throw std::invalid_argument("gaussian_nll_grad: std must be strictly positive");
  const Eigen::ArrayXd r = mean.array() - target.array();
  const Eigen::ArrayXd s2 = std.array().square();
  d_mean = (r / s2).matrix();
  d_std = (1.0 / std.array() - r.square() / (s2 * std.array())).matrix();
}

AdamState make_adam_state(const Network& net, const AdamConfig& config) {
  AdamState state;
  state.config = config;
  for (const auto& layer : net.layers) {
    state.weight_m.emplace_back(Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()));
    state.weight_v.emplace_back(Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()));
    state.bias_m.emplace_back(Eigen::VectorXd::Zero(layer.bias.size()));
    state.bias_v.emplace_back(Eigen::VectorXd::Zero(layer.bias.size()));
  }
  return state;
}

void adam_step(Network& net, const NetworkGradients& grads, AdamState& state) {
  const size_t n = net.layers.size();
  if (grads.weights.size() != n || state.weight_m.size() != n)
    throw std::invalid_argument("adam_step: shapes do not match network");
  const AdamConfig& c = state.config;
  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step_count));
  for (size_t l = 0; l < n; ++l) {
    DenseLayer& layer = net.layers[l];
    if (grads.weights[l].rows() != layer.weights.rows() ||
        grads.weights[l].cols() != layer.weights.cols() ||
        grads.bias[l].size() != layer.bias.size())
      throw std::invalid_argument("adam_step: gradient shape mismatch");

    auto& mw = state.weight_m[l];
    auto& vw = state.weight_v[l];
    mw = c.beta1 * mw + (1.0 - c.beta1) * grads.weights[l];
    vw = c.beta2 * vw + (1.0 - c.beta2) * grads.weights[l].cwiseProduct(grads.weights[l]);
    layer.weights.array() -=
        c.learning_rate * (mw.array() / bc1) / ((vw.array() / bc2).sqrt() + c.epsilon);

    auto& mb = state.bias_m[l];
    auto& vb = state.bias_v[l];
    mb = c.beta1 * mb + (1.0 - c.beta1) * grads.bias[l];
    vb = c.beta2 * vb + (1.0 - c.beta2) * grads.bias[l].cwiseProduct(grads.bias[l]);
    layer.bias.array() -=
        c.learning_rate * (mb.array() / bc1) / ((vb.array() / bc2).sqrt() + c.epsilon);
  }
}

}  // namespace skb
