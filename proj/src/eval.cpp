#include "skb/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "container_io.hpp"
#include "skb/kinematics.hpp"

namespace skb {

namespace {

const std::vector<int> kProtocolIndices{0, 30, 60, 127};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

Eigen::VectorXd channel_rmse(const Eigen::Ref<const Eigen::MatrixXd>& generated,
                             const Eigen::Ref<const Eigen::MatrixXd>& ground_truth) {
  if (generated.rows() != ground_truth.rows() || generated.cols() != ground_truth.cols())
    throw std::invalid_argument("channel_rmse: shape mismatch");
  if (generated.rows() == 0) throw std::invalid_argument("channel_rmse: empty trajectories");
  return ((generated - ground_truth).array().square().colwise().mean()).sqrt().matrix();
}

double aggregate_rmse(const Eigen::Ref<const Eigen::MatrixXd>& generated,
                      const Eigen::Ref<const Eigen::MatrixXd>& ground_truth) {
  return channel_rmse(generated, ground_truth).mean();
}

double final_position_error(const Eigen::Ref<const Eigen::MatrixXd>& generated,
                            const Eigen::Ref<const Eigen::MatrixXd>& ground_truth,
                            const std::string& robot_id, const Dataset& dataset) {
  if (generated.rows() != ground_truth.rows() || generated.cols() != ground_truth.cols())
    throw std::invalid_argument("final_position_error: shape mismatch");
  if (generated.rows() == 0) throw std::invalid_argument("final_position_error: empty trajectory");

  if (robot_id == dataset.arm_robot_id) {
    const Eigen::Vector2d gen_end =
        fk_planar(dataset.arm, generated.row(generated.rows() - 1).transpose());
    const Eigen::Vector2d gt_end =
        fk_planar(dataset.arm, ground_truth.row(ground_truth.rows() - 1).transpose());
    return (gen_end - gt_end).norm();
  }

  const RobotSpec& spec = dataset.robots[dataset.robot_index(robot_id)];
  int xi = -1, yi = -1;
  for (int c = 0; c < spec.channels(); ++c) {
    if (spec.channel_names[c] == "x") xi = c;
    if (spec.channel_names[c] == "y") yi = c;
  }
  if (xi < 0 || yi < 0)
    throw std::invalid_argument("final_position_error: no task-space endpoint channels for robot " +
                                robot_id);
  const Eigen::Index last = generated.rows() - 1;
  const double dx = generated(last, xi) - ground_truth(last, xi);
  const double dy = generated(last, yi) - ground_truth(last, yi);
  return std::sqrt(dx * dx + dy * dy);
}

double push_outcome_angle_deg(const Eigen::Ref<const Eigen::MatrixXd>& mobile_states,
                              int window) {
  if (mobile_states.cols() < 2)
    throw std::invalid_argument("push_outcome_angle_deg: need x and y channels");
  const Eigen::Index T = mobile_states.rows();
  if (T < 2) throw std::invalid_argument("push_outcome_angle_deg: trajectory too short");
  const Eigen::Index w = std::min<Eigen::Index>(std::max(window, 2), T);
  const double dx = mobile_states(T - 1, 0) - mobile_states(T - w, 0);
  const double dy = mobile_states(T - 1, 1) - mobile_states(T - w, 1);
  if (std::sqrt(dx * dx + dy * dy) < 1e-9)
    throw std::invalid_argument("push_outcome_angle_deg: degenerate final segment");
  return direction_from_y_axis_deg(dx, dy);
}

double directional_error_deg(const Eigen::Ref<const Eigen::MatrixXd>& mobile_states,
                             double goal_angle_deg, int window) {
  double diff = std::abs(push_outcome_angle_deg(mobile_states, window) - goal_angle_deg);
  diff = std::fmod(diff, 360.0);
  return diff > 180.0 ? 360.0 - diff : diff;
}

std::vector<int> observation_indices(int T, int obs_count,
                                     const std::vector<int>* explicit_indices) {
  if (T < 1) throw std::invalid_argument("observation_indices: empty grid");
  if (explicit_indices) {
    if (explicit_indices->empty())
      throw std::invalid_argument("observation_indices: empty index list");
    for (int idx : *explicit_indices)
      if (idx < 0 || idx >= T)
        throw std::invalid_argument("observation_indices: index out of range: " +
                                    std::to_string(idx));
    return *explicit_indices;
  }
  if (obs_count < 1 || obs_count > static_cast<int>(kProtocolIndices.size()))
    throw std::invalid_argument("observation_indices: obs_count must be in [1, 4]");
  std::vector<int> indices;
  for (int i = 0; i < obs_count; ++i) {
    int idx = static_cast<int>(std::lround(kProtocolIndices[i] * (T - 1) / 127.0));
    idx = std::clamp(idx, 0, T - 1);
    if (indices.empty() || indices.back() != idx) indices.push_back(idx);
  }
  return indices;
}

std::vector<TransferResult> transfer_sweep(const CoupledModel& model, const Dataset& dataset,
                                           int obs_count,
                                           const std::vector<int>* explicit_indices,
                                           bool include_train_pairs) {
  check_model_dataset_compatible(model, dataset);
  std::vector<int> pair_indices = dataset.test_indices();
  if (include_train_pairs) {
    std::vector<int> all(dataset.pairs.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    pair_indices = all;
  }
  if (pair_indices.empty()) throw std::invalid_argument("transfer_sweep: empty test split");

  const bool radial = dataset.family == "radial_push";
  const std::vector<int> indices = observation_indices(dataset.T, obs_count, explicit_indices);

  std::vector<TransferResult> results;
  for (int p : pair_indices) {
    const DemonstrationPair& pair = dataset.pairs[p];
    for (const auto& source : model.robots) {
      const Trajectory* src_traj = nullptr;
      for (const auto& t : pair.robots)
        if (t.robot_id == source.id) src_traj = &t;
      ObservationSet obs;
      obs.robot_id = source.id;
      obs.times.resize(indices.size());
      obs.states.resize(indices.size(), src_traj->states.cols());
      for (size_t i = 0; i < indices.size(); ++i) {
        obs.times[static_cast<Eigen::Index>(i)] = src_traj->times[indices[i]];
        obs.states.row(static_cast<Eigen::Index>(i)) = src_traj->states.row(indices[i]);
      }

      for (const auto& target : model.robots) {
        const Trajectory* gt = nullptr;
        for (const auto& t : pair.robots)
          if (t.robot_id == target.id) gt = &t;

        TransferResult result;
        result.source = source.id;
        result.target = target.id;
        result.task_parameter = pair.task_parameter;
        result.generated = query_trajectory(model, obs, target.id, gt->times);
        result.ground_truth = *gt;

        const ChannelStats& st = model.stats[model.robot_index(target.id)];
        result.rmse_per_channel = channel_rmse(normalize_states(result.generated.mean, st),
                                               normalize_states(gt->states, st));
        result.rmse_aggregate = result.rmse_per_channel.mean();
        result.position_error =
            final_position_error(result.generated.mean, gt->states, target.id, dataset);
        if (radial && target.id != dataset.arm_robot_id) {
          result.outcome_angle_deg = push_outcome_angle_deg(result.generated.mean);
          result.directional_error_deg =
              directional_error_deg(result.generated.mean, pair.task_parameter);
        }
        results.push_back(std::move(result));
      }
    }
  }
  return results;
}

std::vector<DirectionSummary> summarize(const std::vector<TransferResult>& results) {
  std::vector<DirectionSummary> summaries;
  for (const auto& result : results) {
    DirectionSummary* entry = nullptr;
    for (auto& s : summaries)
      if (s.source == result.source && s.target == result.target) entry = &s;
    if (!entry) {
      summaries.push_back({result.source, result.target});
      entry = &summaries.back();
    }
    ++entry->cases;
  }
  for (auto& s : summaries) {
    std::vector<double> rmse, pos, dir;
    for (const auto& r : results) {
      if (r.source != s.source || r.target != s.target) continue;
      rmse.push_back(r.rmse_aggregate);
      pos.push_back(r.position_error);
      if (r.directional_error_deg) dir.push_back(*r.directional_error_deg);
    }
    s.rmse_mean = mean_of(rmse);
    s.rmse_std = std_of(rmse);
    s.position_error_mean = mean_of(pos);
    s.position_error_std = std_of(pos);
    if (!dir.empty()) {
      s.directional_error_mean = mean_of(dir);
      s.directional_error_std = std_of(dir);
    }
  }
  return summaries;
}

void write_results_csv(const std::filesystem::path& path,
                       const std::vector<TransferResult>& results) {
  std::string out =
      "case,source,target,task_parameter,rmse_aggregate,pos_error,"
      "desired_angle,outcome,directional_error\n";
  char cell[64];
  int case_id = 1;
  for (const auto& r : results) {
    std::snprintf(cell, sizeof(cell), "%d,%s,%s,%.6g,%.6g,%.6g", case_id++, r.source.c_str(),
                  r.target.c_str(), r.task_parameter, r.rmse_aggregate, r.position_error);
    out += cell;
    if (r.outcome_angle_deg && r.directional_error_deg) {
      std::snprintf(cell, sizeof(cell), ",%.6g,%.6g,%.6g", r.task_parameter, *r.outcome_angle_deg,
                    *r.directional_error_deg);
      out += cell;
    } else {
      out += ",,,";
    }
    out += "\n";
  }
  detail::write_file_atomic(path, out);
}

}  // namespace skb
