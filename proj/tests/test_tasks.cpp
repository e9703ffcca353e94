#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "skb/eval.hpp"
#include "skb/tasks.hpp"

using namespace skb;

namespace {

const Trajectory& robot_traj(const DemonstrationPair& pair, const std::string& id) {
  for (const auto& traj : pair.robots)
    if (traj.robot_id == id) return traj;
  throw std::runtime_error("missing robot " + id);
}

double max_pointwise_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double dx = a(i, 0) - b(i, 0);
    const double dy = a(i, 1) - b(i, 1);
    worst = std::max(worst, std::sqrt(dx * dx + dy * dy));
  }
  return worst;
}

void check_pair_invariants(const DemonstrationPair& pair, const ArmSpec& arm) {
  const Trajectory& mobile = robot_traj(pair, kMobileId);
  const Trajectory& manipulator = robot_traj(pair, kArmId);
  const int T = static_cast<int>(mobile.times.size());

  // Shared strictly increasing time base running 0..1.
  CHECK(mobile.times[0] == 0.0);
  CHECK(mobile.times[T - 1] == 1.0);
  CHECK((mobile.times - manipulator.times).cwiseAbs().maxCoeff() == 0.0);

  // FK of every arm sample stays within 1e-3 m of a reachable point, and the
  // joint path is continuous.
  for (int i = 0; i < T; ++i) {
    const Eigen::Vector2d p = fk_planar(arm, manipulator.states.row(i).transpose());
    const double r = (p - arm.base).norm();
    CHECK(r < arm.max_reach() - 0.05 + 2e-3);
    CHECK(r > arm.min_reach());
  }
  for (int i = 1; i < T; ++i) {
    CHECK((manipulator.states.row(i) - manipulator.states.row(i - 1)).cwiseAbs().maxCoeff() < 0.2);
    const double dx = mobile.states(i, 0) - mobile.states(i - 1, 0);
    const double dy = mobile.states(i, 1) - mobile.states(i - 1, 1);
    CHECK(std::sqrt(dx * dx + dy * dy) < 0.1);
  }
}

}  // namespace

TEST_CASE("same_path: both robots share one Cartesian path") {
  const int T = 128;
  const double offset = 0.2;  // range minimum: minimal bump
  const DemonstrationPair pair = gen_same_path(offset, T);
  const std::vector<Eigen::Vector2d> shared = same_path_cartesian(offset, T);
  const ArmSpec arm = default_arm();

  const Trajectory& mobile = robot_traj(pair, kMobileId);
  const Trajectory& manipulator = robot_traj(pair, kArmId);
  for (int i = 0; i < T; ++i) {
    // Mobile (x, y) is the shared path itself.
    CHECK(std::abs(mobile.states(i, 0) - shared[i].x()) < 1e-9);
    CHECK(std::abs(mobile.states(i, 1) - shared[i].y()) < 1e-9);
    // FK of the arm trajectory reproduces the same path within IK tolerance.
    const Eigen::Vector2d p = fk_planar(arm, manipulator.states.row(i).transpose());
    CHECK((p - shared[i]).norm() < 1e-3);
  }
}

TEST_CASE("same_path: monotone offsets give monotone peak lateral displacement") {
  double previous_peak = -1.0;
  for (double offset : {0.2, 0.4, 0.6, 0.8, 0.9}) {
    const DemonstrationPair pair = gen_same_path(offset, 64);
    const Trajectory& mobile = robot_traj(pair, kMobileId);
    const double peak = mobile.states.col(1).maxCoeff();
    CHECK(peak > previous_peak);
    CHECK(peak == doctest::Approx(offset).epsilon(0.02));
    previous_peak = peak;
  }
}

TEST_CASE("same_path: offset range enforced") {
  CHECK_THROWS_AS(gen_same_path(0.1, 64), std::invalid_argument);
  CHECK_THROWS_AS(gen_same_path(0.95, 64), std::invalid_argument);
}

TEST_CASE("same_path: pair invariants hold across the offset range") {
  for (double offset : {0.2, 0.55, 0.9})
    check_pair_invariants(gen_same_path(offset, 128), default_arm());
}

TEST_CASE("divergent_path: contact points coincide, paths diverge") {
  const int T = 128;
  for (double cup_x : {-0.2, 0.3, 1.2}) {
    const DemonstrationPair pair = gen_divergent_path(cup_x, T);
    const Trajectory& mobile = robot_traj(pair, kMobileId);
    const Trajectory& manipulator = robot_traj(pair, kArmId);

    MobilePose final_pose{mobile.states(T - 1, 0), mobile.states(T - 1, 1),
                          mobile.states(T - 1, 2)};
    const Eigen::Vector2d mobile_contact = mobile_contact_point(final_pose);
    const Eigen::Vector2d arm_end =
        fk_planar(default_arm(), manipulator.states.row(T - 1).transpose());
    const Eigen::Vector2d arm_contact = arm_hook_contact(arm_end);
    CHECK((mobile_contact - arm_contact).norm() < 1e-3);

    // The two task-space paths are deliberately different.
    Eigen::MatrixXd arm_xy(T, 2);
    for (int i = 0; i < T; ++i)
      arm_xy.row(i) = fk_planar(default_arm(), manipulator.states.row(i).transpose()).transpose();
    CHECK(max_pointwise_distance(mobile.states.leftCols(2), arm_xy) > 0.3);

    check_pair_invariants(pair, default_arm());
  }
}

TEST_CASE("divergent_path: seven evenly spaced cups give pairwise distinct paths") {
  const int T = 64;
  std::vector<DemonstrationPair> pairs;
  for (int i = 0; i < 7; ++i)
    pairs.push_back(gen_divergent_path(-0.2 + 1.4 * i / 6.0, T));
  for (size_t a = 0; a < pairs.size(); ++a)
    for (size_t b = a + 1; b < pairs.size(); ++b) {
      const Trajectory& ma = robot_traj(pairs[a], kMobileId);
      const Trajectory& mb = robot_traj(pairs[b], kMobileId);
      CHECK((ma.states - mb.states).cwiseAbs().maxCoeff() > 1e-3);
      const Trajectory& aa = robot_traj(pairs[a], kArmId);
      const Trajectory& ab = robot_traj(pairs[b], kArmId);
      CHECK((aa.states - ab.states).cwiseAbs().maxCoeff() > 1e-3);
    }
}

TEST_CASE("divergent_path: cup range enforced") {
  CHECK_THROWS_AS(gen_divergent_path(-0.5, 64), std::invalid_argument);
  CHECK_THROWS_AS(gen_divergent_path(1.5, 64), std::invalid_argument);
}

TEST_CASE("radial_push: identical approach prefix, divergent pull") {
  const int T = 128;
  const DemonstrationPair pa = gen_radial_push(-45.0, T);
  const DemonstrationPair pb = gen_radial_push(60.0, T);
  const Trajectory& arm_a = robot_traj(pa, kArmId);
  const Trajectory& arm_b = robot_traj(pb, kArmId);

  const int prefix = static_cast<int>(std::floor(0.6 * T));
  CHECK(radial_approach_samples(T) >= prefix);
  for (int i = 0; i < prefix; ++i)
    CHECK((arm_a.states.row(i) - arm_b.states.row(i)).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK((arm_a.states.row(T - 1) - arm_b.states.row(T - 1)).cwiseAbs().maxCoeff() > 0.05);

  check_pair_invariants(pa, default_arm());
  check_pair_invariants(pb, default_arm());
}

TEST_CASE("radial_push: mirror symmetry under angle negation") {
  const int T = 96;
  const DemonstrationPair plus = gen_radial_push(40.0, T);
  const DemonstrationPair minus = gen_radial_push(-40.0, T);
  const Trajectory& mp = robot_traj(plus, kMobileId);
  const Trajectory& mm = robot_traj(minus, kMobileId);
  for (int i = 0; i < T; ++i) {
    // Mirror about the x = 0.5 axis of symmetry.
    CHECK(mp.states(i, 0) + mm.states(i, 0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(mp.states(i, 1) == doctest::Approx(mm.states(i, 1)).epsilon(1e-9));
  }

  // Zero angle pushes along the axis itself.
  const DemonstrationPair zero = gen_radial_push(0.0, T);
  const Trajectory& mz = robot_traj(zero, kMobileId);
  for (int i = 0; i < T; ++i) CHECK(mz.states(i, 0) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("radial_push: ground-truth push direction matches the goal angle within 0.5 deg") {
  for (double angle : {-60.0, -30.0, 0.0, 30.0, 60.0, 75.0}) {
    const DemonstrationPair pair = gen_radial_push(angle, 128);
    const Trajectory& mobile = robot_traj(pair, kMobileId);
    CHECK(directional_error_deg(mobile.states, angle) < 0.5);
  }
}

TEST_CASE("radial_push: angle range enforced") {
  CHECK_THROWS_AS(gen_radial_push(-80.0, 64), std::invalid_argument);
  CHECK_THROWS_AS(gen_radial_push(90.0, 64), std::invalid_argument);
}

TEST_CASE("reach margin: every constructed Cartesian point keeps 0.05 m of clearance") {
  const ArmSpec arm = default_arm();
  auto check_margin = [&](const std::vector<Eigen::Vector2d>& path) {
    for (const auto& p : path) {
      const double r = (p - arm.base).norm();
      CHECK(r <= arm.max_reach() - 0.05);
      CHECK(r >= arm.min_reach() + ((arm.min_reach() > 0.0) ? 0.05 : 0.0));
    }
  };
  for (double offset : {0.2, 0.9}) check_margin(same_path_cartesian(offset, 128));
  for (double cup : {-0.2, 1.2}) check_margin(divergent_arm_cartesian(cup, 128));
  for (double angle : {-75.0, 0.0, 75.0}) check_margin(radial_arm_cartesian(angle, 128));
}

TEST_CASE("make_dataset: counts and split layout") {
  std::vector<double> offsets;
  for (int i = 0; i < 8; ++i) offsets.push_back(0.2 + 0.7 * i / 7.0);
  const std::vector<bool> split = interleaved_split(8, 6);
  const Dataset dataset = make_dataset(TaskFamily::SamePath, offsets, split, 32);
  CHECK(dataset.pairs.size() == 8);
  CHECK(dataset.train_indices().size() == 6);
  CHECK(dataset.test_indices().size() == 2);
  // Test parameters interleave strictly inside the training range.
  for (int idx : dataset.test_indices()) {
    CHECK(idx > 0);
    CHECK(idx < 7);
  }
  validate(dataset);
}

TEST_CASE("make_dataset: table of radial angles matches the experiment protocol") {
  const std::vector<double> params{-75, -45, -15, 0, 15, 45, 75, -60, -30, 30, 60};
  std::vector<bool> split(params.size(), true);
  for (size_t i = 7; i < params.size(); ++i) split[i] = false;
  const Dataset dataset = make_dataset(TaskFamily::RadialPush, params, split, 32);
  CHECK(dataset.train_indices().size() == 7);
  CHECK(dataset.test_indices().size() == 4);
  std::vector<double> test_angles;
  for (int idx : dataset.test_indices()) test_angles.push_back(dataset.pairs[idx].task_parameter);
  CHECK(test_angles == std::vector<double>{-60, -30, 30, 60});
}

TEST_CASE("make_dataset: empty parameter list gives an empty dataset") {
  const Dataset dataset = make_dataset(TaskFamily::SamePath, {}, {}, 32);
  CHECK(dataset.pairs.empty());
  CHECK(dataset.robots.size() == 2);
}

TEST_CASE("make_dataset: duplicate parameters rejected") {
  CHECK_THROWS_AS(make_dataset(TaskFamily::SamePath, {0.3, 0.3}, {true, true}, 32),
                  std::invalid_argument);
}

TEST_CASE("make_dataset: bit-reproducible") {
  const std::vector<double> params{0.25, 0.5, 0.75};
  const std::vector<bool> split{true, true, false};
  const Dataset a = make_dataset(TaskFamily::SamePath, params, split, 48);
  const Dataset b = make_dataset(TaskFamily::SamePath, params, split, 48);
  REQUIRE(a.pairs.size() == b.pairs.size());
  for (size_t p = 0; p < a.pairs.size(); ++p)
    for (size_t r = 0; r < a.pairs[p].robots.size(); ++r) {
      const Eigen::MatrixXd& sa = a.pairs[p].robots[r].states;
      const Eigen::MatrixXd& sb = b.pairs[p].robots[r].states;
      CHECK(std::memcmp(sa.data(), sb.data(), sizeof(double) * sa.size()) == 0);
    }
  for (size_t r = 0; r < a.stats.size(); ++r) {
    CHECK((a.stats[r].mean - b.stats[r].mean).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.stats[r].stddev - b.stats[r].stddev).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("channel stats: computed over the training split only") {
  const Dataset dataset =
      make_dataset(TaskFamily::SamePath, {0.3, 0.6, 0.8}, {true, true, false}, 32);
  // Mean of the mobile x channel over train pairs only.
  double sum = 0.0;
  long rows = 0;
  for (const auto& pair : dataset.pairs) {
    if (!pair.is_train) continue;
    for (const auto& traj : pair.robots) {
      if (traj.robot_id != kMobileId) continue;
      sum += traj.states.col(0).sum();
      rows += traj.states.rows();
    }
  }
  CHECK(dataset.stats[dataset.robot_index(kMobileId)].mean[0] ==
        doctest::Approx(sum / rows).epsilon(1e-12));
}
