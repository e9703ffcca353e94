#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "skb/rng.hpp"

namespace skb {

enum class Activation { Identity, Tanh, Relu };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation act);

// One affine stage followed by an elementwise activation.
struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
  Activation activation = Activation::Tanh;
};

// Feed-forward chain of dense layers. Adjacent layers must be
// dimension-compatible; validate() checks the whole chain.
struct Network {
  std::vector<DenseLayer> layers;

  int input_width() const;
  int output_width() const;
  long parameter_count() const;
};

void validate(const Network& net);

// Glorot-uniform initialized network: hidden layers use `hidden_act`, the
// output layer is identity (heads shape their own outputs downstream).
Network make_network(int input, const std::vector<int>& hidden, int output,
                     Activation hidden_act, Rng& rng);

Eigen::VectorXd forward(const Network& net, const Eigen::Ref<const Eigen::VectorXd>& input);

// Per-layer activations kept around for the backward pass.
// activations[0] is the input, activations.back() the output.
struct ForwardTrace {
  std::vector<Eigen::VectorXd> activations;
  const Eigen::VectorXd& output() const { return activations.back(); }
};

ForwardTrace forward_trace(const Network& net, const Eigen::Ref<const Eigen::VectorXd>& input);

// Parameter gradients mirroring a network's layer shapes.
struct NetworkGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> bias;

  void set_zero();
  void scale(double factor);
};

NetworkGradients zero_gradients(const Network& net);

// Reverse-mode sweep. Accumulates parameter gradients into `grads` and
// returns the gradient with respect to the network input.
Eigen::VectorXd backward(const Network& net, const ForwardTrace& trace,
                         const Eigen::Ref<const Eigen::VectorXd>& output_gradient,
                         NetworkGradients& grads);

// Convenience overload that runs its own forward pass.
Eigen::VectorXd backward(const Network& net, const Eigen::Ref<const Eigen::VectorXd>& input,
                         const Eigen::Ref<const Eigen::VectorXd>& output_gradient,
                         NetworkGradients& grads);

double softplus(double x);
double sigmoid(double x);

// Sum over channels of log(std) + (target - mean)^2 / (2 std^2) + log(2 pi)/2.
// std must be strictly positive.
double gaussian_nll(const Eigen::Ref<const Eigen::VectorXd>& mean,
                    const Eigen::Ref<const Eigen::VectorXd>& std,
                    const Eigen::Ref<const Eigen::VectorXd>& target);

// Analytic derivatives of gaussian_nll in mean and std.
void gaussian_nll_grad(const Eigen::Ref<const Eigen::VectorXd>& mean,
                       const Eigen::Ref<const Eigen::VectorXd>& std,
                       const Eigen::Ref<const Eigen::VectorXd>& target,
                       Eigen::VectorXd& d_mean, Eigen::VectorXd& d_std);

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adaptive-moment state; accumulator shapes mirror the network's parameters.
struct AdamState {
  AdamConfig config;
  long step_count = 0;
  std::vector<Eigen::MatrixXd> weight_m, weight_v;
  std::vector<Eigen::VectorXd> bias_m, bias_v;
};

AdamState make_adam_state(const Network& net, const AdamConfig& config);

// One bias-corrected adaptive-moment update; increments step_count.
void adam_step(Network& net, const NetworkGradients& grads, AdamState& state);

}  // namespace skb
