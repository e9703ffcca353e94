#include "skb/training.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "container_io.hpp"
#include "json_convert.hpp"

namespace skb {

namespace {

using nlohmann::json;

constexpr const char* kMagic = "SKB1";

json network_arch_to_json(const Network& net) {
  json layers = json::array();
  for (const auto& layer : net.layers)
    layers.push_back(json{{"in", layer.weights.cols()},
                          {"out", layer.weights.rows()},
                          {"activation", to_string(layer.activation)}});
  return layers;
}

Network network_from_arch(const json& arch) {
  Network net;
  for (const auto& j : arch) {
    DenseLayer layer;
    layer.weights.resize(j.at("out").get<Eigen::Index>(), j.at("in").get<Eigen::Index>());
    layer.bias.resize(j.at("out").get<Eigen::Index>());
    layer.activation = activation_from_string(j.at("activation").get<std::string>());
    net.layers.push_back(std::move(layer));
  }
  return net;
}

void append_network(std::string& buf, const Network& net) {
  for (const auto& layer : net.layers) {
    detail::append_matrix_rowmajor(buf, layer.weights);
    detail::append_vector(buf, layer.bias);
  }
}

void read_network(detail::Reader& reader, Network& net) {
  for (auto& layer : net.layers) {
    layer.weights = reader.read_matrix_rowmajor(layer.weights.rows(), layer.weights.cols());
    layer.bias = reader.read_vector(layer.bias.size());
  }
}

void append_adam(std::string& buf, const AdamState& state) {
  for (size_t l = 0; l < state.weight_m.size(); ++l) {
    detail::append_matrix_rowmajor(buf, state.weight_m[l]);
    detail::append_vector(buf, state.bias_m[l]);
    detail::append_matrix_rowmajor(buf, state.weight_v[l]);
    detail::append_vector(buf, state.bias_v[l]);
  }
}

void read_adam(detail::Reader& reader, AdamState& state) {
  for (size_t l = 0; l < state.weight_m.size(); ++l) {
    state.weight_m[l] = reader.read_matrix_rowmajor(state.weight_m[l].rows(), state.weight_m[l].cols());
    state.bias_m[l] = reader.read_vector(state.bias_m[l].size());
    state.weight_v[l] = reader.read_matrix_rowmajor(state.weight_v[l].rows(), state.weight_v[l].cols());
    state.bias_v[l] = reader.read_vector(state.bias_v[l].size());
  }
}

std::string checkpoint_name(long iteration) {
  char name[40];
  std::snprintf(name, sizeof(name), "checkpoint_%06ld.skb", iteration);
  return name;
}

}  // namespace

void validate(const TrainConfig& config) {
  if (config.iterations <= 0) throw std::invalid_argument("iterations must be positive");
  if (config.obs_max < 1) throw std::invalid_argument("obs_max must be at least 1");
  if (config.log_interval < 1) throw std::invalid_argument("log interval must be positive");
  if (config.checkpoint_interval < 1)
    throw std::invalid_argument("checkpoint interval must be positive");
  if (config.grad_accumulation < 1)
    throw std::invalid_argument("grad accumulation must be at least 1");
  if (config.learning_rate <= 0.0) throw std::invalid_argument("learning rate must be positive");
}

TrainState make_train_state(const Dataset& dataset, const ModelConfig& model_config,
                            const AdamConfig& adam_config, std::uint64_t seed) {
  TrainState state;
  state.rng = Rng(seed);
  state.model = make_coupled_model(dataset.robots, model_config, state.rng);
  state.model.stats = dataset.stats;
  for (const auto& net : state.model.encoders)
    state.encoder_opt.push_back(make_adam_state(net, adam_config));
  for (const auto& net : state.model.decoders)
    state.decoder_opt.push_back(make_adam_state(net, adam_config));
  return state;
}

TrainReport train(TrainState& state, const Dataset& dataset, const TrainConfig& config) {
  validate(config);
  validate(state.model);
  validate(dataset);
  check_model_dataset_compatible(state.model, dataset);
  if (dataset.train_indices().empty())
    throw std::invalid_argument("train: dataset has no training pairs");
  if (state.iteration >= config.iterations)
    throw std::invalid_argument("train: state is already past the configured iterations");

  for (auto& opt : state.encoder_opt) opt.config.learning_rate = config.learning_rate;
  for (auto& opt : state.decoder_opt) opt.config.learning_rate = config.learning_rate;

  const Dataset normalized = normalized_copy(dataset);
  const auto start = std::chrono::steady_clock::now();
  const int n = state.model.robot_count();

  TrainReport report;
  report.seed = state.rng.seed();
  CoupledGradients grads = zero_gradients(state.model);

  for (long it = state.iteration; it < config.iterations; ++it) {
    grads.set_zero();
    double loss_sum = 0.0;
    for (int k = 0; k < config.grad_accumulation; ++k) {
      const TrainingBatch batch =
          sample_training_batch(normalized, state.rng, config.obs_max, config.weight_scheme);
      const LossParts parts = coupled_loss_with_gradients(
          state.model, normalized.pairs[batch.pair_index], batch.observations, batch.weights,
          batch.t_target, &grads);
      if (!std::isfinite(parts.total)) {
        std::string head = "unknown";
        for (int q = 0; q < n; ++q)
          if (!std::isfinite(parts.per_robot[q])) head = state.model.robots[q].id;
        throw std::runtime_error("training aborted: non-finite loss at iteration " +
                                 std::to_string(it + 1) + " in robot '" + head + "' head");
      }
      loss_sum += parts.total;
    }
    grads.scale(1.0 / config.grad_accumulation);
    for (int r = 0; r < n; ++r) {
      adam_step(state.model.encoders[r], grads.encoders[r], state.encoder_opt[r]);
      adam_step(state.model.decoders[r], grads.decoders[r], state.decoder_opt[r]);
    }
    state.iteration = it + 1;

    if (state.iteration % config.log_interval == 0)
      report.loss_curve.emplace_back(state.iteration,
                                     loss_sum / static_cast<double>(config.grad_accumulation));
    if (!config.output_dir.empty() && state.iteration % config.checkpoint_interval == 0 &&
        state.iteration != config.iterations)
      save_checkpoint(state,
                      std::filesystem::path(config.output_dir) / checkpoint_name(state.iteration));
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!config.output_dir.empty()) {
    const std::filesystem::path dir(config.output_dir);
    const std::filesystem::path final_path = dir / "checkpoint_final.skb";
    save_checkpoint(state, final_path);
    report.final_checkpoint_path = final_path.string();
    write_loss_log(dir / "train_loss.txt", report.loss_curve);
  }
  return report;
}

void save_checkpoint(const TrainState& state, const std::filesystem::path& path) {
  validate(state.model);
  const CoupledModel& model = state.model;
  if (state.encoder_opt.size() != model.encoders.size() ||
      state.decoder_opt.size() != model.decoders.size())
    throw std::invalid_argument("save_checkpoint: optimizer states do not match model");

  json header;
  header["format"] = kMagic;
  header["version"] = 1;
  header["iteration"] = state.iteration;
  header["latent_width"] = model.latent_width;
  header["robots"] = json::array();
  for (const auto& r : model.robots) header["robots"].push_back(detail::robot_to_json(r));
  header["stats"] = json::array();
  for (const auto& s : model.stats) header["stats"].push_back(detail::stats_to_json(s));
  header["encoders"] = json::array();
  for (const auto& net : model.encoders) header["encoders"].push_back(network_arch_to_json(net));
  header["decoders"] = json::array();
  for (const auto& net : model.decoders) header["decoders"].push_back(network_arch_to_json(net));

  const AdamConfig& adam = state.encoder_opt.empty() ? AdamConfig{} : state.encoder_opt[0].config;
  json opt;
  opt["learning_rate"] = adam.learning_rate;
  opt["beta1"] = adam.beta1;
  opt["beta2"] = adam.beta2;
  opt["epsilon"] = adam.epsilon;
  json counts = json::array();
  for (const auto& s : state.encoder_opt) counts.push_back(s.step_count);
  for (const auto& s : state.decoder_opt) counts.push_back(s.step_count);
  opt["step_counts"] = counts;
  header["optimizer"] = opt;
  header["rng"] = json{{"seed", state.rng.seed()}, {"state", state.rng.serialize_state()}};

  std::string buf;
  buf.append(kMagic);
  const std::string header_text = header.dump();
  detail::append_u64(buf, header_text.size());
  buf.append(header_text);
  for (const auto& net : model.encoders) append_network(buf, net);
  for (const auto& net : model.decoders) append_network(buf, net);
  for (const auto& opt_state : state.encoder_opt) append_adam(buf, opt_state);
  for (const auto& opt_state : state.decoder_opt) append_adam(buf, opt_state);
  detail::write_file_atomic(path, buf);
}

TrainState load_checkpoint(const std::filesystem::path& path) {
  detail::Reader reader(detail::read_file(path), "checkpoint " + path.string());
  reader.expect_magic(kMagic);
  const std::uint64_t header_len = reader.read_u64();
  json header;
  try {
    header = json::parse(reader.read_bytes(header_len));
  } catch (const json::exception& e) {
    throw std::runtime_error("checkpoint " + path.string() + ": malformed header: " + e.what());
  }
  if (header.at("format").get<std::string>() != kMagic)
    throw std::runtime_error("checkpoint " + path.string() + ": format mismatch");

  TrainState state;
  state.iteration = header.at("iteration").get<long>();
  state.model.latent_width = header.at("latent_width").get<int>();
  for (const auto& j : header.at("robots"))
    state.model.robots.push_back(detail::robot_from_json(j));
  for (const auto& j : header.at("stats")) state.model.stats.push_back(detail::stats_from_json(j));
  for (const auto& j : header.at("encoders")) state.model.encoders.push_back(network_from_arch(j));
  for (const auto& j : header.at("decoders")) state.model.decoders.push_back(network_from_arch(j));

  const json& opt = header.at("optimizer");
  AdamConfig adam;
  adam.learning_rate = opt.at("learning_rate").get<double>();
  adam.beta1 = opt.at("beta1").get<double>();
  adam.beta2 = opt.at("beta2").get<double>();
  adam.epsilon = opt.at("epsilon").get<double>();

  for (auto& net : state.model.encoders) read_network(reader, net);
  for (auto& net : state.model.decoders) read_network(reader, net);
  for (const auto& net : state.model.encoders)
    state.encoder_opt.push_back(make_adam_state(net, adam));
  for (const auto& net : state.model.decoders)
    state.decoder_opt.push_back(make_adam_state(net, adam));
  for (auto& opt_state : state.encoder_opt) read_adam(reader, opt_state);
  for (auto& opt_state : state.decoder_opt) read_adam(reader, opt_state);
  reader.expect_end();

  const auto counts = opt.at("step_counts").get<std::vector<long>>();
  if (counts.size() != state.encoder_opt.size() + state.decoder_opt.size())
    throw std::runtime_error("checkpoint " + path.string() + ": optimizer step count mismatch");
  for (size_t i = 0; i < state.encoder_opt.size(); ++i)
    state.encoder_opt[i].step_count = counts[i];
  for (size_t i = 0; i < state.decoder_opt.size(); ++i)
    state.decoder_opt[i].step_count = counts[state.encoder_opt.size() + i];

  state.rng = Rng(header.at("rng").at("seed").get<std::uint64_t>());
  state.rng.restore_state(header.at("rng").at("state").get<std::string>());
  validate(state.model);
  return state;
}

void write_loss_log(const std::filesystem::path& path,
                    const std::vector<std::pair<long, double>>& curve) {
  std::string out;
  char line[64];
  for (const auto& [iteration, loss] : curve) {
    std::snprintf(line, sizeof(line), "%ld,%.17g\n", iteration, loss);
    out += line;
  }
  detail::write_file_atomic(path, out);
}

std::vector<std::pair<long, double>> read_loss_log(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  std::vector<std::pair<long, double>> curve;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    long iteration = 0;
    double loss = 0.0;
    if (std::sscanf(line.c_str(), "%ld,%lf", &iteration, &loss) != 2)
      throw std::runtime_error("loss log " + path.string() + ": malformed line: " + line);
    curve.emplace_back(iteration, loss);
  }
  return curve;
}

}  // namespace skb
