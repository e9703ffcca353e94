#include "skb/kinematics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace skb {

double wrap_angle(double theta) {
  theta = std::fmod(theta, 2.0 * M_PI);
  if (theta <= -M_PI) theta += 2.0 * M_PI;
  if (theta > M_PI) theta -= 2.0 * M_PI;
  return theta;
}

void validate(const ArmSpec& spec) {
  const int n = spec.joints();
  if (n < 1) throw std::invalid_argument("arm needs at least one link");
  if ((spec.link_lengths.array() <= 0.0).any())
    throw std::invalid_argument("link lengths must be positive");
  if (spec.joint_min.size() != n || spec.joint_max.size() != n)
    throw std::invalid_argument("joint limits must match link count");
  if ((spec.joint_min.array() >= spec.joint_max.array()).any())
    throw std::invalid_argument("joint limits are inverted");
}

Eigen::Vector2d fk_planar(const ArmSpec& spec, const Eigen::Ref<const ArmConfig>& config) {
  if (config.size() != spec.joints())
    throw std::invalid_argument("fk_planar: joint count mismatch");
  Eigen::Vector2d p = spec.base;
  double theta = 0.0;
  for (int i = 0; i < spec.joints(); ++i) {
    theta += config[i];
    p.x() += spec.link_lengths[i] * std::cos(theta);
    p.y() += spec.link_lengths[i] * std::sin(theta);
  }
  return p;
}

Eigen::MatrixXd arm_jacobian(const ArmSpec& spec, const Eigen::Ref<const ArmConfig>& config) {
  if (config.size() != spec.joints())
    throw std::invalid_argument("arm_jacobian: joint count mismatch");
  const int n = spec.joints();
  // Joint i moves every link from i on; accumulate link contributions once.
  Eigen::VectorXd cum(n);
  double theta = 0.0;
  for (int i = 0; i < n; ++i) {
    theta += config[i];
    cum[i] = theta;
  }
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2, n);
  for (int i = 0; i < n; ++i) {
    double dx = 0.0, dy = 0.0;
    for (int k = i; k < n; ++k) {
      dx += -spec.link_lengths[k] * std::sin(cum[k]);
      dy += spec.link_lengths[k] * std::cos(cum[k]);
    }
    jac(0, i) = dx;
    jac(1, i) = dy;
  }
  return jac;
}

namespace {

void check_reachable(const ArmSpec& spec, const Eigen::Vector2d& point, int index,
                     double margin) {
  const double r = (point - spec.base).norm();
  if (r > spec.max_reach() - margin || r < spec.min_reach() + margin)
    throw std::runtime_error("ik_track: path point " + std::to_string(index) +
                             " outside the reachable annulus (r=" + std::to_string(r) + ")");
}

// DLS update loop toward a single target; returns false if the error fails
// to converge within the iteration budget.
bool converge_to(const ArmSpec& spec, const Eigen::Vector2d& target, ArmConfig& config,
                 const IkOptions& opt) {
  for (int it = 0; it < opt.max_iterations; ++it) {
    const Eigen::Vector2d err = target - fk_planar(spec, config);
    if (err.norm() <= opt.tolerance) return true;
    const Eigen::MatrixXd jac = arm_jacobian(spec, config);
    Eigen::Matrix2d jjt = (jac * jac.transpose()).eval();
    jjt += opt.damping * opt.damping * Eigen::Matrix2d::Identity();
    const Eigen::VectorXd step = jac.transpose() * jjt.ldlt().solve(err);
    config += step;
    config = config.cwiseMax(spec.joint_min).cwiseMin(spec.joint_max);
  }
  return (target - fk_planar(spec, config)).norm() <= opt.tolerance;
}

}  // namespace

std::vector<ArmConfig> ik_track(const ArmSpec& spec, const std::vector<Eigen::Vector2d>& path,
                                const Eigen::Ref<const ArmConfig>& seed_config,
                                const IkOptions& options) {
  validate(spec);
  if (seed_config.size() != spec.joints())
    throw std::invalid_argument("ik_track: seed config joint count mismatch");
  if (path.empty()) throw std::invalid_argument("ik_track: empty path");

  std::vector<ArmConfig> configs;
  configs.reserve(path.size());
  ArmConfig current = seed_config;
  for (size_t i = 0; i < path.size(); ++i) {
    check_reachable(spec, path[i], static_cast<int>(i), options.reach_margin);
    if (!converge_to(spec, path[i], current, options))
      throw std::runtime_error("ik_track: no convergence at path point " + std::to_string(i));
    configs.push_back(current);
  }
  return configs;
}

ArmConfig solve_ik_point(const ArmSpec& spec, const Eigen::Vector2d& target,
                         const Eigen::Ref<const ArmConfig>& seed_config,
                         const IkOptions& options) {
  const Eigen::Vector2d start = fk_planar(spec, seed_config);
  const double dist = (target - start).norm();
  const int steps = std::max(2, static_cast<int>(std::ceil(dist / 0.02)) + 1);
  std::vector<Eigen::Vector2d> line(steps);
  for (int i = 0; i < steps; ++i) {
    const double u = static_cast<double>(i) / (steps - 1);
    line[i] = start + u * (target - start);
  }
  return ik_track(spec, line, seed_config, options).back();
}

std::vector<Eigen::Vector2d> resample_arclength(const std::vector<Eigen::Vector2d>& waypoints,
                                                int T) {
  if (T < 2) throw std::invalid_argument("resample_arclength: need at least two samples");
  if (waypoints.size() < 2)
    throw std::invalid_argument("resample_arclength: need at least two waypoints");

  std::vector<double> cumulative(waypoints.size(), 0.0);
  for (size_t i = 1; i < waypoints.size(); ++i)
    cumulative[i] = cumulative[i - 1] + (waypoints[i] - waypoints[i - 1]).norm();
  const double total = cumulative.back();
  if (total <= 0.0)
    throw std::invalid_argument("resample_arclength: all waypoints coincide");

  std::vector<Eigen::Vector2d> out(T);
  out.front() = waypoints.front();
  out.back() = waypoints.back();
  size_t seg = 0;
  for (int i = 1; i + 1 < T; ++i) {
    const double s = total * static_cast<double>(i) / (T - 1);
    while (seg + 2 < waypoints.size() && cumulative[seg + 1] < s) ++seg;
    const double len = cumulative[seg + 1] - cumulative[seg];
    const double u = (len > 0.0) ? (s - cumulative[seg]) / len : 0.0;
    out[i] = waypoints[seg] + u * (waypoints[seg + 1] - waypoints[seg]);
  }
  return out;
}

double direction_from_y_axis_deg(double dx, double dy) {
  return std::atan2(dx, dy) * 180.0 / M_PI;
}

std::vector<MobilePose> diffdrive_path(const std::vector<Eigen::Vector2d>& waypoints, int T) {
  const std::vector<Eigen::Vector2d> pts = resample_arclength(waypoints, T);
  std::vector<MobilePose> poses(T);
  for (int i = 0; i < T; ++i) {
    const Eigen::Vector2d& lo = pts[std::max(0, i - 1)];
    const Eigen::Vector2d& hi = pts[std::min(T - 1, i + 1)];
    const Eigen::Vector2d tangent = hi - lo;
    poses[i].x = pts[i].x();
    poses[i].y = pts[i].y();
    poses[i].heading = wrap_angle(std::atan2(tangent.y(), tangent.x()));
  }
  return poses;
}

}  // namespace skb
