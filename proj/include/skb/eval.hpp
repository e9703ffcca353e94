#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "skb/cnmp.hpp"
#include "skb/dataset.hpp"

namespace skb {

// Root-mean-square over time for each channel.
Eigen::VectorXd channel_rmse(const Eigen::Ref<const Eigen::MatrixXd>& generated,
                             const Eigen::Ref<const Eigen::MatrixXd>& ground_truth);

// Mean over channels of the per-channel RMSE.
double aggregate_rmse(const Eigen::Ref<const Eigen::MatrixXd>& generated,
                      const Eigen::Ref<const Eigen::MatrixXd>& ground_truth);

// Euclidean distance between generated and desired task-space endpoints:
// (x, y) channels directly for the mobile robot, forward kinematics of the
// final configuration for the arm.
double final_position_error(const Eigen::Ref<const Eigen::MatrixXd>& generated,
                            const Eigen::Ref<const Eigen::MatrixXd>& ground_truth,
                            const std::string& robot_id, const Dataset& dataset);

// Push direction (degrees from the +y axis) estimated from the displacement
// across the last `window` poses. Rejects a degenerate (zero displacement)
// final segment.
double push_outcome_angle_deg(const Eigen::Ref<const Eigen::MatrixXd>& mobile_states,
                              int window = 10);

// |push direction - goal angle| in degrees, wrapped to [0, 180].
double directional_error_deg(const Eigen::Ref<const Eigen::MatrixXd>& mobile_states,
                             double goal_angle_deg, int window = 10);

struct TransferResult {
  std::string source;
  std::string target;
  double task_parameter = 0.0;
  GeneratedTrajectory generated;
  Trajectory ground_truth;
  Eigen::VectorXd rmse_per_channel;  // normalized units
  double rmse_aggregate = 0.0;       // normalized units
  double position_error = 0.0;       // meters
  std::optional<double> outcome_angle_deg;      // radial push, mobile target
  std::optional<double> directional_error_deg;  // radial push, mobile target
};

struct DirectionSummary {
  std::string source;
  std::string target;
  int cases = 0;
  double rmse_mean = 0.0, rmse_std = 0.0;
  double position_error_mean = 0.0, position_error_std = 0.0;
  std::optional<double> directional_error_mean, directional_error_std;
};

// The paper-style conditioning protocol: observation indices {0, 30, 60,
// last} on a length-128 grid (scaled for other T); obs_count keeps the first
// obs_count of them. An explicit index list overrides both.
std::vector<int> observation_indices(int T, int obs_count,
                                     const std::vector<int>* explicit_indices = nullptr);

// Runs every ordered (source, target) pair — self-directions included as a
// baseline — over the selected split, conditioning on the protocol indices.
// Deterministic for a fixed model and dataset.
std::vector<TransferResult> transfer_sweep(const CoupledModel& model, const Dataset& dataset,
                                           int obs_count = 3,
                                           const std::vector<int>* explicit_indices = nullptr,
                                           bool include_train_pairs = false);

std::vector<DirectionSummary> summarize(const std::vector<TransferResult>& results);

// Delimiter-separated results with a header row mirroring the reference
// table columns (desired angle, outcome, directional error, positional
// error); generic columns for the non-radial families.
void write_results_csv(const std::filesystem::path& path,
                       const std::vector<TransferResult>& results);

}  // namespace skb
