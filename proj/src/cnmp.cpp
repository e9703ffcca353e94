#include "skb/cnmp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "skb/dataset.hpp"

namespace skb {

namespace {

constexpr double kTimeMatchTol = 1e-9;

bool all_parameters_finite(const Network& net) {
  for (const auto& layer : net.layers)
    if (!layer.weights.allFinite() || !layer.bias.allFinite()) return false;
  return true;
}

int resolve_time_index(const Eigen::VectorXd& times, double t) {
  for (Eigen::Index i = 0; i < times.size(); ++i)
    if (std::abs(times[i] - t) <= kTimeMatchTol) return static_cast<int>(i);
  throw std::invalid_argument("t_target is not on the pair's time grid");
}

Eigen::VectorXd encoder_input(double t, const Eigen::Ref<const Eigen::VectorXd>& state) {
  Eigen::VectorXd in(state.size() + 1);
  in[0] = t;
  in.tail(state.size()) = state;
  return in;
}

Eigen::VectorXd decoder_input(const Latent& latent, double t) {
  Eigen::VectorXd in(latent.size() + 1);
  in.head(latent.size()) = latent;
  in[latent.size()] = t;
  return in;
}

}  // namespace

void validate(const Trajectory& traj) {
  const Eigen::Index T = traj.times.size();
  if (T < 2) throw std::invalid_argument("trajectory needs at least two samples");
  if (traj.states.rows() != T)
    throw std::invalid_argument("trajectory state rows do not match times");
  if (!traj.times.allFinite() || !traj.states.allFinite())
    throw std::invalid_argument("trajectory values must be finite");
  if (std::abs(traj.times[0]) > kTimeMatchTol || std::abs(traj.times[T - 1] - 1.0) > kTimeMatchTol)
    throw std::invalid_argument("trajectory times must run from 0 to 1");
  for (Eigen::Index i = 1; i < T; ++i)
    if (traj.times[i] <= traj.times[i - 1])
      throw std::invalid_argument("trajectory times must be strictly increasing");
}

void validate(const DemonstrationPair& pair) {
  if (pair.robots.empty()) throw std::invalid_argument("demonstration pair has no trajectories");
  for (const auto& traj : pair.robots) validate(traj);
  const Eigen::VectorXd& base = pair.robots.front().times;
  for (const auto& traj : pair.robots)
    if (traj.times.size() != base.size() || (traj.times - base).cwiseAbs().maxCoeff() != 0.0)
      throw std::invalid_argument("trajectories in a pair must share one time base");
}

ChannelStats ChannelStats::identity(int channels) {
  ChannelStats s;
  s.mean = Eigen::VectorXd::Zero(channels);
  s.stddev = Eigen::VectorXd::Ones(channels);
  return s;
}

int CoupledModel::robot_index(const std::string& id) const {
  for (size_t i = 0; i < robots.size(); ++i)
    if (robots[i].id == id) return static_cast<int>(i);
  throw std::invalid_argument("unknown robot id: " + id);
}

void validate(const CoupledModel& model) {
  if (model.robots.empty()) throw std::invalid_argument("model has no robots");
  if (model.latent_width < 1) throw std::invalid_argument("latent width must be positive");
  const size_t n = model.robots.size();
  if (model.encoders.size() != n || model.decoders.size() != n || model.stats.size() != n)
    throw std::invalid_argument("model robot/network/stats counts differ");
  for (size_t r = 0; r < n; ++r) {
    const int d = model.robots[r].channels();
    if (d < 1) throw std::invalid_argument("robot must have at least one channel");
    validate(model.encoders[r]);
    validate(model.decoders[r]);
    if (model.encoders[r].input_width() != 1 + d)
      throw std::invalid_argument("encoder input width must be 1 + channels");
    if (model.encoders[r].output_width() != model.latent_width)
      throw std::invalid_argument("encoder output width must equal the latent width");
    if (model.decoders[r].input_width() != model.latent_width + 1)
      throw std::invalid_argument("decoder input width must be latent width + 1");
    if (model.decoders[r].output_width() != 2 * d)
      throw std::invalid_argument("decoder output width must be 2 x channels");
    if (model.stats[r].mean.size() != d || model.stats[r].stddev.size() != d)
      throw std::invalid_argument("channel stats do not cover every channel");
    for (size_t q = r + 1; q < n; ++q)
      if (model.robots[r].id == model.robots[q].id)
        throw std::invalid_argument("robot ids must be unique");
  }
}

CoupledModel make_coupled_model(const std::vector<RobotSpec>& robots, const ModelConfig& config,
                                Rng& rng) {
  CoupledModel model;
  model.latent_width = config.latent_width;
  model.robots = robots;
  for (const auto& spec : robots)
    model.encoders.push_back(make_network(1 + spec.channels(), config.encoder_hidden,
                                          config.latent_width, config.hidden_activation, rng));
  for (const auto& spec : robots)
    model.decoders.push_back(make_network(config.latent_width + 1, config.decoder_hidden,
                                          2 * spec.channels(), config.hidden_activation, rng));
  for (const auto& spec : robots) model.stats.push_back(ChannelStats::identity(spec.channels()));
  validate(model);
  return model;
}

Latent encode_observation(const CoupledModel& model, int robot, double t,
                          const Eigen::Ref<const Eigen::VectorXd>& state) {
  if (robot < 0 || robot >= model.robot_count())
    throw std::invalid_argument("robot index out of range");
  if (state.size() != model.robots[robot].channels())
    throw std::invalid_argument("encode_observation: state width mismatch");
  return forward(model.encoders[robot], encoder_input(t, state));
}

Latent aggregate_latent(const std::vector<Latent>& latents) {
  if (latents.empty()) throw std::invalid_argument("aggregate_latent: empty list");
  Latent sum = latents.front();
  for (size_t i = 1; i < latents.size(); ++i) {
    if (latents[i].size() != sum.size())
      throw std::invalid_argument("aggregate_latent: latent widths differ");
    sum += latents[i];
  }
  return sum / static_cast<double>(latents.size());
}

void validate_blend_weights(const Eigen::Ref<const Eigen::VectorXd>& weights) {
  if (weights.size() == 0) throw std::invalid_argument("blend weights are empty");
  if (!weights.allFinite()) throw std::invalid_argument("blend weights must be finite");
  constexpr double kBoundTol = 1e-12;
  if ((weights.array() < -kBoundTol).any() || (weights.array() > 1.0 + kBoundTol).any())
    throw std::invalid_argument("blend weights must lie in [0, 1]");
  if (std::abs(weights.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("blend weights must sum to 1");
}

Latent blend_latents(const std::vector<std::optional<Latent>>& per_robot,
                     const Eigen::Ref<const Eigen::VectorXd>& weights) {
  validate_blend_weights(weights);
  if (static_cast<Eigen::Index>(per_robot.size()) != weights.size())
    throw std::invalid_argument("blend_latents: one weight per robot required");

  int width = -1;
  int nonzero = 0, last_nonzero = -1;
  for (size_t r = 0; r < per_robot.size(); ++r) {
    if (weights[static_cast<Eigen::Index>(r)] == 0.0) continue;
    if (!per_robot[r])
      throw std::invalid_argument("blend_latents: missing latent for robot with nonzero weight");
    if (width < 0) width = static_cast<int>(per_robot[r]->size());
    if (per_robot[r]->size() != width)
      throw std::invalid_argument("blend_latents: latent widths differ");
    ++nonzero;
    last_nonzero = static_cast<int>(r);
  }
  // One-hot endpoint returns the selected latent bit-exactly.
  if (nonzero == 1 && weights[last_nonzero] == 1.0) return *per_robot[last_nonzero];

  Latent blended = Latent::Zero(width);
  for (size_t r = 0; r < per_robot.size(); ++r) {
    const double p = weights[static_cast<Eigen::Index>(r)];
    if (p != 0.0) blended += p * (*per_robot[r]);
  }
  return blended;
}

GaussianPrediction decode_query(const CoupledModel& model, int robot, const Latent& latent,
                                double t_target) {
  if (robot < 0 || robot >= model.robot_count())
    throw std::invalid_argument("robot index out of range");
  if (latent.size() != model.latent_width)
    throw std::invalid_argument("decode_query: latent width mismatch");
  if (t_target < -kTimeMatchTol || t_target > 1.0 + kTimeMatchTol)
    throw std::invalid_argument("decode_query: t_target outside [0, 1]");

  const int d = model.robots[robot].channels();
  const Eigen::VectorXd raw = forward(model.decoders[robot], decoder_input(latent, t_target));
  GaussianPrediction pred;
  pred.query_time = t_target;
  pred.mean = raw.head(d);
  pred.std.resize(d);
  for (int k = 0; k < d; ++k) pred.std[k] = softplus(raw[d + k]) + kStdFloor;
  return pred;
}

void CoupledGradients::set_zero() {
  for (auto& g : encoders) g.set_zero();
  for (auto& g : decoders) g.set_zero();
}

void CoupledGradients::scale(double factor) {
  for (auto& g : encoders) g.scale(factor);
  for (auto& g : decoders) g.scale(factor);
}

CoupledGradients zero_gradients(const CoupledModel& model) {
  CoupledGradients g;
  for (const auto& net : model.encoders) g.encoders.push_back(zero_gradients(net));
  for (const auto& net : model.decoders) g.decoders.push_back(zero_gradients(net));
  return g;
}

LossParts coupled_loss_with_gradients(const CoupledModel& model, const DemonstrationPair& pair,
                                      const std::vector<ObservationSet>& observations,
                                      const Eigen::Ref<const Eigen::VectorXd>& weights,
                                      double t_target, CoupledGradients* grads) {
  const int n = model.robot_count();
  if (weights.size() != n) throw std::invalid_argument("coupled_loss: one weight per robot");
  validate_blend_weights(weights);

  // Match observation sets and target trajectories to model robots by id.
  std::vector<const ObservationSet*> obs_by_robot(n, nullptr);
  for (const auto& obs : observations) {
    const int r = model.robot_index(obs.robot_id);
    obs_by_robot[r] = &obs;
  }
  std::vector<const Trajectory*> traj_by_robot(n, nullptr);
  for (const auto& traj : pair.robots) {
    const int r = model.robot_index(traj.robot_id);
    traj_by_robot[r] = &traj;
  }
  for (int r = 0; r < n; ++r)
    if (!traj_by_robot[r])
      throw std::invalid_argument("coupled_loss: pair lacks trajectory for robot " +
                                  model.robots[r].id);
  const int t_index = resolve_time_index(traj_by_robot[0]->times, t_target);

  // Encode and average per robot; robots with zero weight contribute nothing.
  std::vector<std::vector<ForwardTrace>> encoder_traces(n);
  std::vector<std::optional<Latent>> per_robot(n);
  for (int r = 0; r < n; ++r) {
    if (weights[r] == 0.0) continue;
    const ObservationSet* obs = obs_by_robot[r];
    if (!obs || obs->size() == 0)
      throw std::invalid_argument("coupled_loss: missing observations for robot " +
                                  model.robots[r].id + " with nonzero blend weight");
    if (obs->states.cols() != model.robots[r].channels())
      throw std::invalid_argument("coupled_loss: observation width mismatch");
    Latent sum = Latent::Zero(model.latent_width);
    encoder_traces[r].reserve(obs->size());
    for (int i = 0; i < obs->size(); ++i) {
      encoder_traces[r].push_back(forward_trace(
          model.encoders[r], encoder_input(obs->times[i], obs->states.row(i).transpose())));
      sum += encoder_traces[r].back().output();
    }
    per_robot[r] = sum / static_cast<double>(obs->size());
  }
  const Latent blended = blend_latents(per_robot, weights);

  // Decode for every robot and sum the negative log-likelihoods.
  LossParts parts;
  parts.per_robot = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd latent_grad = Eigen::VectorXd::Zero(model.latent_width);
  const Eigen::VectorXd dec_in = decoder_input(blended, t_target);
  for (int q = 0; q < n; ++q) {
    const int d = model.robots[q].channels();
    const ForwardTrace trace = forward_trace(model.decoders[q], dec_in);
    const Eigen::VectorXd& raw = trace.output();
    Eigen::VectorXd mean = raw.head(d);
    Eigen::VectorXd std_vec(d);
    for (int k = 0; k < d; ++k) std_vec[k] = softplus(raw[d + k]) + kStdFloor;
    const Eigen::VectorXd target = traj_by_robot[q]->states.row(t_index).transpose();
    if (target.size() != d) throw std::invalid_argument("coupled_loss: target width mismatch");

    parts.per_robot[q] = gaussian_nll(mean, std_vec, target);
    parts.total += parts.per_robot[q];

    if (grads) {
      Eigen::VectorXd d_mean, d_std;
      gaussian_nll_grad(mean, std_vec, target, d_mean, d_std);
      Eigen::VectorXd d_raw(2 * d);
      d_raw.head(d) = d_mean;
      for (int k = 0; k < d; ++k) d_raw[d + k] = d_std[k] * sigmoid(raw[d + k]);
      const Eigen::VectorXd d_input = backward(model.decoders[q], trace, d_raw, grads->decoders[q]);
      latent_grad += d_input.head(model.latent_width);
    }
  }

  if (grads) {
    for (int r = 0; r < n; ++r) {
      if (weights[r] == 0.0) continue;
      const double scale = weights[r] / static_cast<double>(encoder_traces[r].size());
      const Eigen::VectorXd g_latent = scale * latent_grad;
      for (const auto& trace : encoder_traces[r])
        backward(model.encoders[r], trace, g_latent, grads->encoders[r]);
    }
  }
  return parts;
}

double coupled_loss(const CoupledModel& model, const DemonstrationPair& pair,
                    const std::vector<ObservationSet>& observations,
                    const Eigen::Ref<const Eigen::VectorXd>& weights, double t_target) {
  return coupled_loss_with_gradients(model, pair, observations, weights, t_target, nullptr).total;
}

WeightScheme weight_scheme_from_string(const std::string& name) {
  if (name == "mixed") return WeightScheme::Mixed;
  if (name == "uniform") return WeightScheme::UniformSimplex;
  if (name == "onehot") return WeightScheme::OneHot;
  throw std::invalid_argument("unknown weight scheme: " + name);
}

std::string to_string(WeightScheme scheme) {
  switch (scheme) {
    case WeightScheme::Mixed:
      return "mixed";
    case WeightScheme::UniformSimplex:
      return "uniform";
    case WeightScheme::OneHot:
      return "onehot";
  }
  throw std::logic_error("unknown weight scheme");
}

namespace {

Eigen::VectorXd one_hot(int n, int index) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  w[index] = 1.0;
  return w;
}

Eigen::VectorXd draw_weights(Rng& rng, int n, WeightScheme scheme) {
  switch (scheme) {
    case WeightScheme::OneHot:
      return one_hot(n, rng.uniform_int(0, n - 1));
    case WeightScheme::UniformSimplex:
      return rng.uniform_simplex(n);
    case WeightScheme::Mixed: {
      const int branch = rng.uniform_int(0, n);  // n one-hot branches + 1 interior
      if (branch < n) return one_hot(n, branch);
      return rng.uniform_simplex(n);
    }
  }
  throw std::logic_error("unknown weight scheme");
}

}  // namespace

TrainingBatch sample_training_batch(const Dataset& dataset, Rng& rng, int obs_max,
                                    WeightScheme scheme) {
  if (obs_max < 1) throw std::invalid_argument("obs_max must be at least 1");
  const std::vector<int> train = dataset.train_indices();
  if (train.empty()) throw std::invalid_argument("dataset has no training pairs");

  TrainingBatch batch;
  batch.pair_index = train[rng.uniform_int(0, static_cast<int>(train.size()) - 1)];
  const DemonstrationPair& pair = dataset.pairs[batch.pair_index];
  const int T = static_cast<int>(pair.robots.front().times.size());

  for (const auto& traj : pair.robots) {
    const int n = rng.uniform_int(1, std::min(obs_max, T));
    std::vector<int> idx = rng.sample_indices(T, n);
    ObservationSet obs;
    obs.robot_id = traj.robot_id;
    obs.times.resize(n);
    obs.states.resize(n, traj.states.cols());
    for (int i = 0; i < n; ++i) {
      obs.times[i] = traj.times[idx[i]];
      obs.states.row(i) = traj.states.row(idx[i]);
    }
    batch.observations.push_back(std::move(obs));
  }

  batch.t_index = rng.uniform_int(0, T - 1);
  batch.t_target = pair.robots.front().times[batch.t_index];
  batch.weights = draw_weights(rng, static_cast<int>(pair.robots.size()), scheme);
  return batch;
}

GeneratedTrajectory query_trajectory(const CoupledModel& model, const ObservationSet& source_obs,
                                     const std::string& target_robot,
                                     const Eigen::Ref<const Eigen::VectorXd>& time_grid) {
  validate(model);
  for (int r = 0; r < model.robot_count(); ++r)
    if (!all_parameters_finite(model.encoders[r]) || !all_parameters_finite(model.decoders[r]))
      throw std::invalid_argument("query_trajectory: model parameters are not finite");
  if (source_obs.size() == 0)
    throw std::invalid_argument("query_trajectory: empty observation set");
  const int src = model.robot_index(source_obs.robot_id);
  const int tgt = model.robot_index(target_robot);
  if (source_obs.states.cols() != model.robots[src].channels())
    throw std::invalid_argument("query_trajectory: observation width mismatch");

  const Eigen::MatrixXd normalized = normalize_states(source_obs.states, model.stats[src]);
  std::vector<Latent> latents;
  latents.reserve(source_obs.size());
  for (int i = 0; i < source_obs.size(); ++i)
    latents.push_back(
        encode_observation(model, src, source_obs.times[i], normalized.row(i).transpose()));

  std::vector<std::optional<Latent>> per_robot(model.robot_count());
  per_robot[src] = aggregate_latent(latents);
  const Latent blended = blend_latents(per_robot, one_hot(model.robot_count(), src));

  const int d = model.robots[tgt].channels();
  const ChannelStats& st = model.stats[tgt];
  GeneratedTrajectory out;
  out.robot_id = target_robot;
  out.times = time_grid;
  out.mean.resize(time_grid.size(), d);
  out.std.resize(time_grid.size(), d);
  for (Eigen::Index i = 0; i < time_grid.size(); ++i) {
    const GaussianPrediction pred = decode_query(model, tgt, blended, time_grid[i]);
    out.mean.row(i) = (pred.mean.array() * st.stddev.array() + st.mean.array()).transpose();
    out.std.row(i) = (pred.std.array() * st.stddev.array()).transpose();
  }
  return out;
}

Eigen::MatrixXd normalize_states(const Eigen::Ref<const Eigen::MatrixXd>& states,
                                 const ChannelStats& stats) {
  if (states.cols() != stats.mean.size())
    throw std::invalid_argument("normalize_states: channel count mismatch");
  return (states.rowwise() - stats.mean.transpose()).array().rowwise() /
         stats.stddev.transpose().array();
}

Eigen::MatrixXd denormalize_states(const Eigen::Ref<const Eigen::MatrixXd>& states,
                                   const ChannelStats& stats) {
  if (states.cols() != stats.mean.size())
    throw std::invalid_argument("denormalize_states: channel count mismatch");
  return (states.array().rowwise() * stats.stddev.transpose().array()).rowwise() +
         stats.mean.transpose().array();
}

}  // namespace skb
