#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace skb {

// Static SVG output: one panel per channel, ground truth dashed, generated
// solid.
void write_trajectory_svg(const std::filesystem::path& path,
                          const Eigen::Ref<const Eigen::VectorXd>& times,
                          const Eigen::Ref<const Eigen::MatrixXd>& generated,
                          const Eigen::Ref<const Eigen::MatrixXd>& ground_truth,
                          const std::vector<std::string>& channel_names);

void write_loss_curve_svg(const std::filesystem::path& path,
                          const std::vector<std::pair<long, double>>& curve);

}  // namespace skb
