#pragma once

#include <Eigen/Core>

#include <vector>

namespace skb {

// Wraps an angle to (-pi, pi].
double wrap_angle(double theta);

struct MobilePose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians, wrapped to (-pi, pi]
};

struct ArmSpec {
  Eigen::VectorXd link_lengths;  // meters, all positive
  Eigen::Vector2d base{0.0, 0.0};
  Eigen::VectorXd joint_min;
  Eigen::VectorXd joint_max;

  int joints() const { return static_cast<int>(link_lengths.size()); }
  double max_reach() const { return link_lengths.sum(); }
  // Inner radius of the reachable annulus.
  double min_reach() const {
    const double longest = link_lengths.maxCoeff();
    return std::max(0.0, 2.0 * longest - link_lengths.sum());
  }
};

void validate(const ArmSpec& spec);

using ArmConfig = Eigen::VectorXd;  // joint angles, radians

// Planar chain: cumulative joint angles, link-length weighted cosines and
// sines, offset by the base position.
Eigen::Vector2d fk_planar(const ArmSpec& spec, const Eigen::Ref<const ArmConfig>& config);

// 2 x n end-effector Jacobian of the planar chain.
Eigen::MatrixXd arm_jacobian(const ArmSpec& spec, const Eigen::Ref<const ArmConfig>& config);

struct IkOptions {
  double damping = 0.05;        // damped-least-squares lambda
  double tolerance = 1e-6;      // per-point Cartesian convergence, meters
  int max_iterations = 200;     // per path point
  double reach_margin = 0.0;    // extra clearance demanded inside the annulus
};

// Damped-least-squares differential IK walked along the path from
// seed_config. Output configs correspond 1:1 with path points; each
// satisfies the fk tolerance. Throws with the point index on unreachable
// points or failed convergence.
std::vector<ArmConfig> ik_track(const ArmSpec& spec, const std::vector<Eigen::Vector2d>& path,
                                const Eigen::Ref<const ArmConfig>& seed_config,
                                const IkOptions& options = {});

// Single-target convenience: walks a straight line from fk(seed) to the
// target in small increments, returns the final config.
ArmConfig solve_ik_point(const ArmSpec& spec, const Eigen::Vector2d& target,
                         const Eigen::Ref<const ArmConfig>& seed_config,
                         const IkOptions& options = {});

// Arc-length resampling of a polyline to T points (first and last kept
// exactly). Requires at least two distinct waypoints.
std::vector<Eigen::Vector2d> resample_arclength(const std::vector<Eigen::Vector2d>& waypoints,
                                                int T);

// Resamples the waypoint path to T poses at constant speed; heading is the
// tangent direction of the resampled path (central differences inside,
// one-sided at the ends), wrapped to (-pi, pi].
std::vector<MobilePose> diffdrive_path(const std::vector<Eigen::Vector2d>& waypoints, int T);

// Direction of (dx, dy) in degrees measured from the +y axis, positive
// toward +x. Shared convention between the radial-push tasks and the
// directional metric.
double direction_from_y_axis_deg(double dx, double dy);

}  // namespace skb
