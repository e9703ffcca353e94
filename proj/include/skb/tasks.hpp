#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "skb/dataset.hpp"
#include "skb/kinematics.hpp"

namespace skb {

// The three desk-scale task families. All geometry is analytic; the object
// being moved is represented purely by contact-point paths and goal points.
enum class TaskFamily { SamePath, DivergentPath, RadialPush };

TaskFamily family_from_string(const std::string& name);
std::string to_string(TaskFamily family);

struct TaskConfig {
  TaskFamily family = TaskFamily::SamePath;
  double parameter = 0.0;  // path offset (m) or goal angle (deg)
  int T = 128;
};

void validate(const TaskConfig& config);

// Documented parameter range per family.
void family_parameter_range(TaskFamily family, double& lo, double& hi);

// Default 3-link surrogate manipulator shared by all families.
ArmSpec default_arm();

constexpr const char* kMobileId = "mobile";
constexpr const char* kArmId = "arm";

std::vector<RobotSpec> default_robot_specs(const ArmSpec& arm);

// Shared-corridor task: one Cartesian path (straight corridor with a smooth
// lateral bump of peak height `offset` around the midpoint obstacle),
// followed by both robots. offset in [0.2, 0.9] m.
DemonstrationPair gen_same_path(double offset, int T);

// Cup retrieval with divergent paths: the arm hooks the cup from the near
// side and pulls it toward its base, the mobile robot drives behind the cup
// and pushes it to the same goal point. cup_x in [-0.2, 1.2] m.
DemonstrationPair gen_divergent_path(double cup_x, int T);

// Radial push: the arm repeats one approach (first 60% of samples identical
// across angles) then pulls the cup toward the angle-dependent goal; the
// mobile robot's whole approach arc depends on the goal angle.
// goal_angle in [-75, 75] degrees, measured from the +y axis of symmetry.
DemonstrationPair gen_radial_push(double goal_angle_deg, int T);

DemonstrationPair generate(const TaskConfig& config);

// Cartesian construction paths, exposed for verification.
std::vector<Eigen::Vector2d> same_path_cartesian(double offset, int T);
std::vector<Eigen::Vector2d> divergent_arm_cartesian(double cup_x, int T);
std::vector<Eigen::Vector2d> divergent_mobile_cartesian(double cup_x, int T);
std::vector<Eigen::Vector2d> radial_arm_cartesian(double goal_angle_deg, int T);
std::vector<Eigen::Vector2d> radial_mobile_cartesian(double goal_angle_deg, int T);

// Index of the last sample of the shared approach segment in radial arm
// trajectories (exclusive end of the identical prefix).
int radial_approach_samples(int T);

// Object contact points used by the divergent-path family.
Eigen::Vector2d mobile_contact_point(const MobilePose& pose);
Eigen::Vector2d arm_hook_contact(const Eigen::Vector2d& end_effector);

// One pair per parameter; parameters must be distinct and inside the family
// range. is_train flags select the split the channel statistics are
// computed over. Bit-reproducible for equal arguments.
Dataset make_dataset(TaskFamily family, const std::vector<double>& parameters,
                     const std::vector<bool>& is_train, int T);

// Split layout with test parameters interleaved strictly inside the
// training range.
std::vector<bool> interleaved_split(int count, int train_count);

// Evenly spaced parameters across the family range.
std::vector<double> default_parameters(TaskFamily family, int count);

}  // namespace skb
