#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "skb/cnmp.hpp"
#include "skb/dataset.hpp"

namespace skb {

struct TrainConfig {
  long iterations = 30000;
  double learning_rate = 1e-4;
  int obs_max = 5;
  std::uint64_t seed = 1;
  WeightScheme weight_scheme = WeightScheme::Mixed;
  long checkpoint_interval = 5000;
  long log_interval = 100;
  int grad_accumulation = 8;       // samples averaged per optimizer step
  std::string output_dir;          // empty: no checkpoints or logs written
};

void validate(const TrainConfig& config);

struct TrainReport {
  std::vector<std::pair<long, double>> loss_curve;  // (iteration, loss)
  double wall_seconds = 0.0;
  std::string final_checkpoint_path;
  std::uint64_t seed = 0;
};

// Everything that evolves during a run; checkpoints persist all of it so a
// resumed run is indistinguishable from an uninterrupted one.
struct TrainState {
  CoupledModel model;
  std::vector<AdamState> encoder_opt;
  std::vector<AdamState> decoder_opt;
  Rng rng{0};
  long iteration = 0;
};

// Fresh state: model built for the dataset's robots with the dataset's
// channel statistics, zeroed optimizer moments, generator seeded.
TrainState make_train_state(const Dataset& dataset, const ModelConfig& model_config,
                            const AdamConfig& adam_config, std::uint64_t seed);

// Runs sample -> loss -> backward -> optimizer step until config.iterations,
// starting from state.iteration. Deterministic given the seed. Aborts with a
// diagnostic naming the iteration and robot head if the loss goes
// non-finite.
TrainReport train(TrainState& state, const Dataset& dataset, const TrainConfig& config);

// "SKB1" checkpoint: magic, length-prefixed JSON header (shapes, optimizer
// hyperparameters, RNG seed and state), packed float64 parameter and moment
// payload. save/load round-trips bit-exactly.
void save_checkpoint(const TrainState& state, const std::filesystem::path& path);
TrainState load_checkpoint(const std::filesystem::path& path);

// Plain text, one "iteration,loss" record per line.
void write_loss_log(const std::filesystem::path& path,
                    const std::vector<std::pair<long, double>>& curve);
std::vector<std::pair<long, double>> read_loss_log(const std::filesystem::path& path);

}  // namespace skb
