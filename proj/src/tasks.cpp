#include "skb/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

namespace skb {

namespace {

// Workspace layout shared by the three families. The arm hangs below the
// corridor; every construction point stays inside its reach annulus with
// at least 0.05 m of clearance.
const Eigen::Vector2d kArmBase{0.5, -1.2};
const Eigen::Vector2d kArmHome{0.5, 0.3};

// same_path corridor; the avoidance bump spans the whole corridor and peaks
// above the midpoint obstacle, which keeps the heading profile low-frequency.
const Eigen::Vector2d kCorridorStart{0.0, 0.0};
const Eigen::Vector2d kCorridorEnd{1.0, 0.0};

// divergent_path cup retrieval
constexpr double kCupLineY = 0.6;
constexpr double kGoalLineY = 0.2;
constexpr double kHookDepth = 0.02;
constexpr double kContactRadius = 0.15;
const Eigen::Vector2d kMobileHomeDivergent{0.5, 1.6};

// radial_push
const Eigen::Vector2d kCup{0.5, 0.6};
constexpr double kGoalRadius = 0.35;
const Eigen::Vector2d kMobileHomeRadial{0.5, -0.3};
constexpr double kApproachFraction = 0.6;
constexpr double kBezierPull = 0.35;  // control-point distance shaping arrivals

constexpr int kDenseSamples = 1024;

Eigen::Vector2d bezier(const Eigen::Vector2d& p0, const Eigen::Vector2d& c,
                       const Eigen::Vector2d& p1, double u) {
  const double v = 1.0 - u;
  return v * v * p0 + 2.0 * v * u * c + u * u * p1;
}

void append_bezier(std::vector<Eigen::Vector2d>& out, const Eigen::Vector2d& p0,
                   const Eigen::Vector2d& c, const Eigen::Vector2d& p1, int samples) {
  const int start = out.empty() ? 0 : 1;  // skip the shared joint point
  for (int i = start; i < samples; ++i)
    out.push_back(bezier(p0, c, p1, static_cast<double>(i) / (samples - 1)));
}

void append_line(std::vector<Eigen::Vector2d>& out, const Eigen::Vector2d& p0,
                 const Eigen::Vector2d& p1, int samples) {
  const int start = out.empty() ? 0 : 1;
  for (int i = start; i < samples; ++i) {
    const double u = static_cast<double>(i) / (samples - 1);
    out.push_back(p0 + u * (p1 - p0));
  }
}

Eigen::Vector2d radial_direction(double goal_angle_deg) {
  const double rad = goal_angle_deg * M_PI / 180.0;
  return {std::sin(rad), std::cos(rad)};
}

// Dense analytic polylines, resampled (or IK-tracked) downstream.
std::vector<Eigen::Vector2d> same_path_dense(double offset) {
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(kDenseSamples);
  for (int i = 0; i < kDenseSamples; ++i) {
    const double u = static_cast<double>(i) / (kDenseSamples - 1);
    const Eigen::Vector2d base = kCorridorStart + u * (kCorridorEnd - kCorridorStart);
    const double y = offset * 0.5 * (1.0 - std::cos(2.0 * M_PI * u));
    pts.emplace_back(base.x(), base.y() + y);
  }
  return pts;
}

std::vector<Eigen::Vector2d> divergent_arm_dense(double cup_x) {
  const Eigen::Vector2d hook{cup_x, kCupLineY + kHookDepth};
  const Eigen::Vector2d control{cup_x, 0.75};
  const Eigen::Vector2d pull_end{cup_x, kGoalLineY + kHookDepth};
  std::vector<Eigen::Vector2d> pts;
  append_bezier(pts, kArmHome, control, hook, kDenseSamples / 2);
  append_line(pts, hook, pull_end, kDenseSamples / 2);
  return pts;
}

std::vector<Eigen::Vector2d> divergent_mobile_dense(double cup_x) {
  const Eigen::Vector2d contact_start{cup_x, kCupLineY + kContactRadius};
  const Eigen::Vector2d control{cup_x, kCupLineY + kContactRadius + kBezierPull};
  const Eigen::Vector2d push_end{cup_x, kGoalLineY + kContactRadius};
  std::vector<Eigen::Vector2d> pts;
  append_bezier(pts, kMobileHomeDivergent, control, contact_start, kDenseSamples / 2);
  append_line(pts, contact_start, push_end, kDenseSamples / 2);
  return pts;
}

std::vector<Eigen::Vector2d> radial_mobile_dense(double goal_angle_deg) {
  const Eigen::Vector2d dir = radial_direction(goal_angle_deg);
  const Eigen::Vector2d contact_start = kCup - kContactRadius * dir;
  const Eigen::Vector2d control = contact_start - kBezierPull * dir;
  const Eigen::Vector2d push_end = contact_start + kGoalRadius * dir;
  std::vector<Eigen::Vector2d> pts;
  append_bezier(pts, kMobileHomeRadial, control, contact_start, kDenseSamples / 2);
  append_line(pts, contact_start, push_end, kDenseSamples / 2);
  return pts;
}

Eigen::VectorXd time_grid(int T) {
  Eigen::VectorXd t(T);
  for (int i = 0; i < T; ++i) t[i] = static_cast<double>(i) / (T - 1);
  return t;
}

Trajectory mobile_trajectory(const std::vector<MobilePose>& poses) {
  Trajectory traj;
  traj.robot_id = kMobileId;
  const int T = static_cast<int>(poses.size());
  traj.times = time_grid(T);
  traj.states.resize(T, 3);
  for (int i = 0; i < T; ++i) {
    traj.states(i, 0) = poses[i].x;
    traj.states(i, 1) = poses[i].y;
    traj.states(i, 2) = poses[i].heading;
  }
  return traj;
}

Trajectory arm_trajectory(const std::vector<ArmConfig>& configs) {
  Trajectory traj;
  traj.robot_id = kArmId;
  const int T = static_cast<int>(configs.size());
  const int joints = static_cast<int>(configs.front().size());
  traj.times = time_grid(T);
  traj.states.resize(T, joints);
  for (int i = 0; i < T; ++i) traj.states.row(i) = configs[i].transpose();
  return traj;
}

ArmConfig arm_home_config(const ArmSpec& arm, const Eigen::Vector2d& start) {
  ArmConfig neutral(3);
  neutral << 1.2, 0.5, 0.3;
  return solve_ik_point(arm, start, neutral);
}

DemonstrationPair assemble(TaskFamily family, double parameter,
                           const std::vector<Eigen::Vector2d>& mobile_dense_or_path,
                           const std::vector<Eigen::Vector2d>& arm_path, int T) {
  const ArmSpec arm = default_arm();
  DemonstrationPair pair;
  char label[64];
  std::snprintf(label, sizeof(label), "%s:%.6f", to_string(family).c_str(), parameter);
  pair.task_id = label;
  pair.task_parameter = parameter;
  pair.robots.push_back(mobile_trajectory(diffdrive_path(mobile_dense_or_path, T)));
  pair.robots.push_back(
      arm_trajectory(ik_track(arm, arm_path, arm_home_config(arm, arm_path.front()))));
  validate(pair);
  return pair;
}

void check_range(TaskFamily family, double parameter) {
  double lo, hi;
  family_parameter_range(family, lo, hi);
  if (parameter < lo || parameter > hi)
    throw std::invalid_argument(to_string(family) + ": parameter " + std::to_string(parameter) +
                                " outside [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                "]");
}

}  // namespace

TaskFamily family_from_string(const std::string& name) {
  if (name == "same_path") return TaskFamily::SamePath;
  if (name == "divergent_path") return TaskFamily::DivergentPath;
  if (name == "radial_push") return TaskFamily::RadialPush;
  throw std::invalid_argument("unknown task family: " + name);
}

std::string to_string(TaskFamily family) {
  switch (family) {
    case TaskFamily::SamePath:
      return "same_path";
    case TaskFamily::DivergentPath:
      return "divergent_path";
    case TaskFamily::RadialPush:
      return "radial_push";
  }
  throw std::logic_error("unknown task family");
}

void family_parameter_range(TaskFamily family, double& lo, double& hi) {
  switch (family) {
    case TaskFamily::SamePath:
      lo = 0.2;
      hi = 0.9;
      return;
    case TaskFamily::DivergentPath:
      lo = -0.2;
      hi = 1.2;
      return;
    case TaskFamily::RadialPush:
      lo = -75.0;
      hi = 75.0;
      return;
  }
  throw std::logic_error("unknown task family");
}

void validate(const TaskConfig& config) {
  if (config.T < 2) throw std::invalid_argument("task needs at least two samples");
  check_range(config.family, config.parameter);
}

ArmSpec default_arm() {
  ArmSpec spec;
  spec.link_lengths.resize(3);
  spec.link_lengths << 1.0, 0.8, 0.5;
  spec.base = kArmBase;
  spec.joint_min = Eigen::VectorXd::Constant(3, -M_PI);
  spec.joint_max = Eigen::VectorXd::Constant(3, M_PI);
  return spec;
}

std::vector<RobotSpec> default_robot_specs(const ArmSpec& arm) {
  RobotSpec mobile;
  mobile.id = kMobileId;
  mobile.channel_names = {"x", "y", "heading"};
  mobile.channel_units = {"m", "m", "rad"};
  RobotSpec manipulator;
  manipulator.id = kArmId;
  for (int j = 0; j < arm.joints(); ++j) {
    manipulator.channel_names.push_back("joint" + std::to_string(j + 1));
    manipulator.channel_units.push_back("rad");
  }
  return {mobile, manipulator};
}

std::vector<Eigen::Vector2d> same_path_cartesian(double offset, int T) {
  check_range(TaskFamily::SamePath, offset);
  return resample_arclength(same_path_dense(offset), T);
}

std::vector<Eigen::Vector2d> divergent_arm_cartesian(double cup_x, int T) {
  check_range(TaskFamily::DivergentPath, cup_x);
  return resample_arclength(divergent_arm_dense(cup_x), T);
}

std::vector<Eigen::Vector2d> divergent_mobile_cartesian(double cup_x, int T) {
  check_range(TaskFamily::DivergentPath, cup_x);
  return resample_arclength(divergent_mobile_dense(cup_x), T);
}

int radial_approach_samples(int T) {
  return static_cast<int>(std::lround(kApproachFraction * T));
}

std::vector<Eigen::Vector2d> radial_arm_cartesian(double goal_angle_deg, int T) {
  check_range(TaskFamily::RadialPush, goal_angle_deg);
  if (T < 4) throw std::invalid_argument("radial_push needs at least four samples");
  // Shared approach: the same straight run onto the cup for every angle, so
  // the first radial_approach_samples(T) samples are identical across tasks.
  const int n_approach = radial_approach_samples(T);
  const Eigen::Vector2d goal = kCup + kGoalRadius * radial_direction(goal_angle_deg);
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(T);
  for (int i = 0; i < n_approach; ++i) {
    const double u = static_cast<double>(i) / (n_approach - 1);
    pts.push_back(kArmHome + u * (kCup - kArmHome));
  }
  const int n_pull = T - n_approach;
  for (int j = 1; j <= n_pull; ++j) {
    const double u = static_cast<double>(j) / n_pull;
    pts.push_back(kCup + u * (goal - kCup));
  }
  return pts;
}

std::vector<Eigen::Vector2d> radial_mobile_cartesian(double goal_angle_deg, int T) {
  check_range(TaskFamily::RadialPush, goal_angle_deg);
  return resample_arclength(radial_mobile_dense(goal_angle_deg), T);
}

Eigen::Vector2d mobile_contact_point(const MobilePose& pose) {
  return {pose.x + kContactRadius * std::cos(pose.heading),
          pose.y + kContactRadius * std::sin(pose.heading)};
}

Eigen::Vector2d arm_hook_contact(const Eigen::Vector2d& end_effector) {
  return {end_effector.x(), end_effector.y() - kHookDepth};
}

DemonstrationPair gen_same_path(double offset, int T) {
  check_range(TaskFamily::SamePath, offset);
  const std::vector<Eigen::Vector2d> dense = same_path_dense(offset);
  return assemble(TaskFamily::SamePath, offset, dense, resample_arclength(dense, T), T);
}

DemonstrationPair gen_divergent_path(double cup_x, int T) {
  check_range(TaskFamily::DivergentPath, cup_x);
  return assemble(TaskFamily::DivergentPath, cup_x, divergent_mobile_dense(cup_x),
                  resample_arclength(divergent_arm_dense(cup_x), T), T);
}

DemonstrationPair gen_radial_push(double goal_angle_deg, int T) {
  check_range(TaskFamily::RadialPush, goal_angle_deg);
  return assemble(TaskFamily::RadialPush, goal_angle_deg, radial_mobile_dense(goal_angle_deg),
                  radial_arm_cartesian(goal_angle_deg, T), T);
}

DemonstrationPair generate(const TaskConfig& config) {
  validate(config);
  switch (config.family) {
    case TaskFamily::SamePath:
      return gen_same_path(config.parameter, config.T);
    case TaskFamily::DivergentPath:
      return gen_divergent_path(config.parameter, config.T);
    case TaskFamily::RadialPush:
      return gen_radial_push(config.parameter, config.T);
  }
  throw std::logic_error("unknown task family");
}

Dataset make_dataset(TaskFamily family, const std::vector<double>& parameters,
                     const std::vector<bool>& is_train, int T) {
  if (parameters.size() != is_train.size())
    throw std::invalid_argument("make_dataset: one split flag per parameter required");
  for (size_t i = 0; i < parameters.size(); ++i)
    for (size_t j = i + 1; j < parameters.size(); ++j)
      if (parameters[i] == parameters[j])
        throw std::invalid_argument("make_dataset: duplicate parameter " +
                                    std::to_string(parameters[i]));

  Dataset dataset;
  dataset.family = to_string(family);
  dataset.T = T;
  dataset.arm = default_arm();
  dataset.arm_robot_id = kArmId;
  dataset.robots = default_robot_specs(dataset.arm);
  for (size_t i = 0; i < parameters.size(); ++i) {
    DemonstrationPair pair = generate({family, parameters[i], T});
    pair.is_train = is_train[i];
    dataset.pairs.push_back(std::move(pair));
  }
  dataset.stats = compute_channel_stats(dataset);
  return dataset;
}

std::vector<bool> interleaved_split(int count, int train_count) {
  if (train_count < 0 || train_count > count)
    throw std::invalid_argument("interleaved_split: train count out of range");
  std::vector<bool> flags(count, true);
  const int test_count = count - train_count;
  std::set<int> taken;
  for (int j = 0; j < test_count; ++j) {
    int pos = static_cast<int>(
        std::llround(static_cast<double>(j + 1) * (count - 1) / (test_count + 1)));
    pos = std::clamp(pos, 0, count - 1);
    while (taken.count(pos) && pos + 1 < count) ++pos;
    while (taken.count(pos) && pos > 0) --pos;
    taken.insert(pos);
    flags[pos] = false;
  }
  return flags;
}

std::vector<double> default_parameters(TaskFamily family, int count) {
  if (count < 1) throw std::invalid_argument("default_parameters: count must be positive");
  double lo, hi;
  family_parameter_range(family, lo, hi);
  std::vector<double> params(count);
  if (count == 1) {
    params[0] = 0.5 * (lo + hi);
    return params;
  }
  for (int i = 0; i < count; ++i) params[i] = lo + (hi - lo) * i / (count - 1);
  return params;
}

}  // namespace skb
