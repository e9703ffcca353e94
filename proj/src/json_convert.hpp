#pragma once

#include <json.hpp>

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

#include "skb/cnmp.hpp"
#include "skb/kinematics.hpp"

// JSON <-> domain-type conversions shared by the dataset and checkpoint
// containers.

namespace skb::detail {

inline nlohmann::json to_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  const std::vector<double> v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline nlohmann::json robot_to_json(const RobotSpec& spec) {
  return nlohmann::json{{"id", spec.id},
                        {"channel_names", spec.channel_names},
                        {"channel_units", spec.channel_units}};
}

inline RobotSpec robot_from_json(const nlohmann::json& j) {
  RobotSpec spec;
  spec.id = j.at("id").get<std::string>();
  spec.channel_names = j.at("channel_names").get<std::vector<std::string>>();
  spec.channel_units = j.at("channel_units").get<std::vector<std::string>>();
  return spec;
}

inline nlohmann::json arm_to_json(const ArmSpec& spec) {
  return nlohmann::json{{"link_lengths", to_json(spec.link_lengths)},
                        {"base", std::vector<double>{spec.base.x(), spec.base.y()}},
                        {"joint_min", to_json(spec.joint_min)},
                        {"joint_max", to_json(spec.joint_max)}};
}

inline ArmSpec arm_from_json(const nlohmann::json& j) {
  ArmSpec spec;
  spec.link_lengths = vector_from_json(j.at("link_lengths"));
  const auto base = j.at("base").get<std::vector<double>>();
  if (base.size() != 2) throw std::runtime_error("arm base must have two coordinates");
  spec.base = Eigen::Vector2d(base[0], base[1]);
  spec.joint_min = vector_from_json(j.at("joint_min"));
  spec.joint_max = vector_from_json(j.at("joint_max"));
  return spec;
}

inline nlohmann::json stats_to_json(const ChannelStats& stats) {
  return nlohmann::json{{"mean", to_json(stats.mean)}, {"stddev", to_json(stats.stddev)}};
}

inline ChannelStats stats_from_json(const nlohmann::json& j) {
  ChannelStats stats;
  stats.mean = vector_from_json(j.at("mean"));
  stats.stddev = vector_from_json(j.at("stddev"));
  return stats;
}

}  // namespace skb::detail
