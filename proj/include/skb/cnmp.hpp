#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

#include "skb/nn.hpp"
#include "skb/rng.hpp"

namespace skb {

struct Dataset;

struct RobotSpec {
  std::string id;
  std::vector<std::string> channel_names;
  std::vector<std::string> channel_units;

  int channels() const { return static_cast<int>(channel_names.size()); }
};

// Time-indexed sensorimotor states for one robot. Times are normalized to
// [0, 1], strictly increasing, first exactly 0 and last exactly 1.
struct Trajectory {
  std::string robot_id;
  Eigen::VectorXd times;   // length T
  Eigen::MatrixXd states;  // T x channels
};

void validate(const Trajectory& traj);

// Synchronized executions of the same task by every robot; all entries share
// one time base.
struct DemonstrationPair {
  std::string task_id;
  double task_parameter = 0.0;
  bool is_train = true;
  std::vector<Trajectory> robots;
};

void validate(const DemonstrationPair& pair);

// Conditioning points (t_i, state_i) sampled from one robot's trajectory.
struct ObservationSet {
  std::string robot_id;
  Eigen::VectorXd times;   // length n
  Eigen::MatrixXd states;  // n x channels

  int size() const { return static_cast<int>(times.size()); }
};

using Latent = Eigen::VectorXd;

// Per-channel affine map to zero mean / unit variance.
struct ChannelStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;

  static ChannelStats identity(int channels);
};

struct GaussianPrediction {
  Eigen::VectorXd mean;  // d_r
  Eigen::VectorXd std;   // d_r, strictly positive
  double query_time = 0.0;
};

struct ModelConfig {
  int latent_width = 128;
  std::vector<int> encoder_hidden{128, 128};
  std::vector<int> decoder_hidden{128, 128, 128};
  Activation hidden_activation = Activation::Tanh;
};

// One encoder and one decoder per robot around a shared latent width.
// Encoders read (t, state), decoders read (latent, t) and emit a mean head
// followed by a raw std head. Channel statistics describe the normalized
// space the networks operate in; freshly built models use identity stats.
struct CoupledModel {
  int latent_width = 0;
  std::vector<RobotSpec> robots;
  std::vector<Network> encoders;
  std::vector<Network> decoders;
  std::vector<ChannelStats> stats;

  int robot_count() const { return static_cast<int>(robots.size()); }
  int robot_index(const std::string& id) const;  // throws on unknown id
};

void validate(const CoupledModel& model);

CoupledModel make_coupled_model(const std::vector<RobotSpec>& robots, const ModelConfig& config,
                                Rng& rng);

// ---- core operations ----

// Latent representation of one conditioning point: encoder applied to the
// concatenation (t, state).
Latent encode_observation(const CoupledModel& model, int robot, double t,
                          const Eigen::Ref<const Eigen::VectorXd>& state);

// Elementwise arithmetic mean of latent vectors; rejects an empty list.
Latent aggregate_latent(const std::vector<Latent>& latents);

// Each weight in [0, 1], weights summing to 1 (tolerance 1e-9).
void validate_blend_weights(const Eigen::Ref<const Eigen::VectorXd>& weights);

// Convex combination of per-robot latents. A robot may be missing a latent
// only when its weight is zero; one-hot weights return the selected latent
// bit-exactly.
Latent blend_latents(const std::vector<std::optional<Latent>>& per_robot,
                     const Eigen::Ref<const Eigen::VectorXd>& weights);

// Decoder query at t_target. The raw std head goes through
// softplus(x) + 1e-6, so std is strictly positive for any finite input.
GaussianPrediction decode_query(const CoupledModel& model, int robot, const Latent& latent,
                                double t_target);

constexpr double kStdFloor = 1e-6;

struct LossParts {
  double total = 0.0;
  Eigen::VectorXd per_robot;
};

struct CoupledGradients {
  std::vector<NetworkGradients> encoders;
  std::vector<NetworkGradients> decoders;

  void set_zero();
  void scale(double factor);
};

CoupledGradients zero_gradients(const CoupledModel& model);

// Encode observations per robot, average, blend, decode for every robot at
// t_target and sum the Gaussian negative log-likelihoods against each
// robot's ground-truth state. t_target must lie on the pair's time grid.
// A robot whose blend weight is nonzero must come with an ObservationSet.
double coupled_loss(const CoupledModel& model, const DemonstrationPair& pair,
                    const std::vector<ObservationSet>& observations,
                    const Eigen::Ref<const Eigen::VectorXd>& weights, double t_target);

// Same forward pass, with reverse-mode gradients for every encoder and
// decoder parameter accumulated into `grads`.
LossParts coupled_loss_with_gradients(const CoupledModel& model, const DemonstrationPair& pair,
                                      const std::vector<ObservationSet>& observations,
                                      const Eigen::Ref<const Eigen::VectorXd>& weights,
                                      double t_target, CoupledGradients* grads);

enum class WeightScheme {
  Mixed,           // one-hot per robot or uniform simplex, equal thirds
  UniformSimplex,  // always interior
  OneHot,          // always an endpoint
};

WeightScheme weight_scheme_from_string(const std::string& name);
std::string to_string(WeightScheme scheme);

struct TrainingBatch {
  int pair_index = 0;
  std::vector<ObservationSet> observations;  // one per robot
  Eigen::VectorXd weights;
  double t_target = 0.0;
  int t_index = 0;
};

// One training draw: a uniformly sampled training pair, per robot an
// observation count n ~ Uniform{1..min(obs_max, T)} of distinct grid points,
// one target grid point shared by all robots, and blend weights from the
// scheme.
TrainingBatch sample_training_batch(const Dataset& dataset, Rng& rng, int obs_max,
                                    WeightScheme scheme);

struct GeneratedTrajectory {
  std::string robot_id;
  Eigen::VectorXd times;
  Eigen::MatrixXd mean;  // T x d, denormalized units
  Eigen::MatrixXd std;   // T x d, denormalized units
};

// Cross-robot (or self) generation: blend weights are set one-hot on the
// observed robot, the target robot's decoder is queried over time_grid.
// Observations are given in denormalized units; output is denormalized.
GeneratedTrajectory query_trajectory(const CoupledModel& model, const ObservationSet& source_obs,
                                     const std::string& target_robot,
                                     const Eigen::Ref<const Eigen::VectorXd>& time_grid);

// Normalization helpers shared by training and evaluation.
Eigen::MatrixXd normalize_states(const Eigen::Ref<const Eigen::MatrixXd>& states,
                                 const ChannelStats& stats);
Eigen::MatrixXd denormalize_states(const Eigen::Ref<const Eigen::MatrixXd>& states,
                                   const ChannelStats& stats);

}  // namespace skb
