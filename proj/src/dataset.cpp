#include "skb/dataset.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "container_io.hpp"
#include "json_convert.hpp"

namespace skb {

namespace {

using nlohmann::json;
using detail::arm_from_json;
using detail::arm_to_json;
using detail::robot_from_json;
using detail::robot_to_json;
using detail::stats_from_json;
using detail::stats_to_json;

constexpr const char* kMagic = "SKBD1";
constexpr double kConstantChannelFloor = 1e-8;

}  // namespace

int Dataset::robot_index(const std::string& id) const {
  for (size_t i = 0; i < robots.size(); ++i)
    if (robots[i].id == id) return static_cast<int>(i);
  throw std::invalid_argument("dataset: unknown robot id: " + id);
}

std::vector<int> Dataset::train_indices() const {
  std::vector<int> idx;
  for (size_t i = 0; i < pairs.size(); ++i)
    if (pairs[i].is_train) idx.push_back(static_cast<int>(i));
  return idx;
}

std::vector<int> Dataset::test_indices() const {
  std::vector<int> idx;
  for (size_t i = 0; i < pairs.size(); ++i)
    if (!pairs[i].is_train) idx.push_back(static_cast<int>(i));
  return idx;
}

void validate(const Dataset& dataset) {
  if (dataset.robots.empty()) throw std::invalid_argument("dataset has no robots");
  if (dataset.stats.size() != dataset.robots.size())
    throw std::invalid_argument("dataset stats do not cover every robot");
  for (size_t r = 0; r < dataset.robots.size(); ++r) {
    const int d = dataset.robots[r].channels();
    if (dataset.stats[r].mean.size() != d || dataset.stats[r].stddev.size() != d)
      throw std::invalid_argument("dataset stats do not cover every channel");
  }
  for (const auto& pair : dataset.pairs) {
    validate(pair);
    if (pair.robots.size() != dataset.robots.size())
      throw std::invalid_argument("pair robot count does not match dataset");
    for (const auto& traj : pair.robots) {
      const int r = dataset.robot_index(traj.robot_id);
      if (traj.states.cols() != dataset.robots[r].channels())
        throw std::invalid_argument("trajectory channel count does not match robot spec");
      if (static_cast<int>(traj.times.size()) != dataset.T)
        throw std::invalid_argument("trajectory length does not match dataset T");
    }
  }
}

std::vector<ChannelStats> compute_channel_stats(const Dataset& dataset) {
  std::vector<ChannelStats> stats;
  for (size_t r = 0; r < dataset.robots.size(); ++r) {
    const int d = dataset.robots[r].channels();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(d);
    long rows = 0;
    for (const auto& pair : dataset.pairs) {
      if (!pair.is_train) continue;
      for (const auto& traj : pair.robots) {
        if (dataset.robot_index(traj.robot_id) != static_cast<int>(r)) continue;
        sum += traj.states.colwise().sum().transpose();
        sumsq += traj.states.array().square().colwise().sum().matrix().transpose();
        rows += traj.states.rows();
      }
    }
    if (rows == 0) {
      stats.push_back(ChannelStats::identity(d));
      continue;
    }
    ChannelStats s;
    s.mean = sum / static_cast<double>(rows);
    s.stddev.resize(d);
    for (int k = 0; k < d; ++k) {
      const double var = sumsq[k] / rows - s.mean[k] * s.mean[k];
      const double sd = std::sqrt(std::max(0.0, var));
      // Constant channels keep unit scale so normalization stays invertible.
      s.stddev[k] = (sd < kConstantChannelFloor) ? 1.0 : sd;
    }
    stats.push_back(std::move(s));
  }
  return stats;
}

void check_model_dataset_compatible(const CoupledModel& model, const Dataset& dataset) {
  if (model.robots.size() != dataset.robots.size())
    throw std::invalid_argument("channel-layout mismatch: robot counts differ");
  for (size_t r = 0; r < model.robots.size(); ++r) {
    const RobotSpec& a = model.robots[r];
    const RobotSpec& b = dataset.robots[r];
    if (a.id != b.id || a.channel_names != b.channel_names)
      throw std::invalid_argument("channel-layout mismatch between model and dataset for robot " +
                                  b.id);
  }
}

Dataset normalized_copy(const Dataset& dataset) {
  Dataset out = dataset;
  for (auto& pair : out.pairs)
    for (auto& traj : pair.robots)
      traj.states = normalize_states(traj.states, dataset.stats[dataset.robot_index(traj.robot_id)]);
  return out;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  validate(dataset);
  json header;
  header["format"] = kMagic;
  header["version"] = 1;
  header["family"] = dataset.family;
  header["T"] = dataset.T;
  header["arm_robot_id"] = dataset.arm_robot_id;
  header["arm"] = arm_to_json(dataset.arm);
  header["robots"] = json::array();
  for (const auto& r : dataset.robots) header["robots"].push_back(robot_to_json(r));
  header["stats"] = json::array();
  for (const auto& s : dataset.stats) header["stats"].push_back(stats_to_json(s));
  header["pair_count"] = dataset.pairs.size();
  header["task_ids"] = json::array();
  for (const auto& p : dataset.pairs) header["task_ids"].push_back(p.task_id);

  std::string buf;
  buf.append(kMagic);
  const std::string header_text = header.dump();
  detail::append_u64(buf, header_text.size());
  buf.append(header_text);

  for (const auto& pair : dataset.pairs) {
    detail::append_f64(buf, pair.task_parameter);
    detail::append_u8(buf, pair.is_train ? 1 : 0);
    detail::append_vector(buf, pair.robots.front().times);
    for (const auto& spec : dataset.robots) {
      const Trajectory* traj = nullptr;
      for (const auto& t : pair.robots)
        if (t.robot_id == spec.id) traj = &t;
      if (!traj) throw std::invalid_argument("pair lacks trajectory for robot " + spec.id);
      detail::append_matrix_rowmajor(buf, traj->states);
    }
  }
  detail::write_file_atomic(path, buf);
}

Dataset read_dataset(const std::filesystem::path& path) {
  detail::Reader reader(detail::read_file(path), "dataset " + path.string());
  reader.expect_magic(kMagic);
  const std::uint64_t header_len = reader.read_u64();
  json header;
  try {
    header = json::parse(reader.read_bytes(header_len));
  } catch (const json::exception& e) {
    throw std::runtime_error("dataset " + path.string() + ": malformed header: " + e.what());
  }
  if (header.at("format").get<std::string>() != kMagic)
    throw std::runtime_error("dataset " + path.string() + ": format mismatch");

  Dataset dataset;
  dataset.family = header.at("family").get<std::string>();
  dataset.T = header.at("T").get<int>();
  dataset.arm_robot_id = header.at("arm_robot_id").get<std::string>();
  dataset.arm = arm_from_json(header.at("arm"));
  for (const auto& j : header.at("robots")) dataset.robots.push_back(robot_from_json(j));
  for (const auto& j : header.at("stats")) dataset.stats.push_back(stats_from_json(j));
  const auto task_ids = header.at("task_ids").get<std::vector<std::string>>();
  const std::size_t pair_count = header.at("pair_count").get<std::size_t>();
  if (task_ids.size() != pair_count)
    throw std::runtime_error("dataset " + path.string() + ": task id count mismatch");

  for (std::size_t p = 0; p < pair_count; ++p) {
    DemonstrationPair pair;
    pair.task_id = task_ids[p];
    pair.task_parameter = reader.read_f64();
    pair.is_train = reader.read_u8() != 0;
    const Eigen::VectorXd times = reader.read_vector(dataset.T);
    for (const auto& spec : dataset.robots) {
      Trajectory traj;
      traj.robot_id = spec.id;
      traj.times = times;
      traj.states = reader.read_matrix_rowmajor(dataset.T, spec.channels());
      pair.robots.push_back(std::move(traj));
    }
    dataset.pairs.push_back(std::move(pair));
  }
  reader.expect_end();
  validate(dataset);
  return dataset;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::string out = "t";
  for (Eigen::Index c = 0; c < traj.states.cols(); ++c)
    out += ",ch" + std::to_string(c);
  out += "\n";
  char cell[40];
  for (Eigen::Index i = 0; i < traj.times.size(); ++i) {
    std::snprintf(cell, sizeof(cell), "%.17g", traj.times[i]);
    out += cell;
    for (Eigen::Index c = 0; c < traj.states.cols(); ++c) {
      std::snprintf(cell, sizeof(cell), ",%.17g", traj.states(i, c));
      out += cell;
    }
    out += "\n";
  }
  detail::write_file_atomic(path, out);
}

}  // namespace skb
