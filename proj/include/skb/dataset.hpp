#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "skb/cnmp.hpp"
#include "skb/kinematics.hpp"

namespace skb {

// A family of paired demonstrations plus everything needed to consume them:
// robot specs, the surrogate arm geometry, and per-channel statistics
// computed over the training split. Trajectories are stored in physical
// units; normalization happens where the networks need it.
struct Dataset {
  std::string family;
  int T = 0;
  std::vector<RobotSpec> robots;
  std::string arm_robot_id;
  ArmSpec arm;
  std::vector<ChannelStats> stats;
  std::vector<DemonstrationPair> pairs;

  int robot_index(const std::string& id) const;
  std::vector<int> train_indices() const;
  std::vector<int> test_indices() const;
};

void validate(const Dataset& dataset);

// Per-channel mean and variance over the training split; constant channels
// get unit scale so normalization stays invertible.
std::vector<ChannelStats> compute_channel_stats(const Dataset& dataset);

// Rejects a model whose robot ids, channel names or widths differ from the
// dataset's layout.
void check_model_dataset_compatible(const CoupledModel& model, const Dataset& dataset);

// Copy of the dataset with every trajectory mapped through the stats.
Dataset normalized_copy(const Dataset& dataset);

// "SKBD1" container: magic, length-prefixed JSON header, packed
// little-endian float64 records. Writes are temp-then-rename and
// byte-reproducible for equal inputs.
void write_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

// Delimiter-separated trajectory export (columns: t, channels...).
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

}  // namespace skb
