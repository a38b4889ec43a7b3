#include "blockdyn/joints.hpp"
#include "generators.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace blockdyn;

namespace {

void expect_near(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double tol) {
  ASSERT_EQ(a.rows(), b.rows());
  ASSERT_EQ(a.cols(), b.cols());
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), tol) << "a=\n" << a << "\nb=\n" << b;
}

Vec6 stack(const Vec3& a, const Vec3& b) {
  Vec6 x;
  x << a, b;
  return x;
}

/// Point mass hanging 1.2 m below its joint point S.
RigidBodyParams bob(double mass = 2.0) {
  RigidBodyParams b;
  b.name = "bob";
  b.mass = mass;
  b.com = Vec3(0, -1.2, 0);
  b.points["S"] = Vec3::Zero();
  b.points["T"] = Vec3(0, -1.2, 0);
  return b;
}

RigidBodyParams slider(double mass = 1.0) {
  RigidBodyParams b;
  b.name = "slider";
  b.mass = mass;
  b.points["P"] = Vec3::Zero();
  return b;
}

const Vec3 kG(0, -9.81, 0);

}  // namespace

TEST(Weld, StaticWrenches) {
  gen::Rng rng(41);
  const RigidBodyParams b = rng.body();
  const Joint weld(JointType::kWeld, "w", b, "P", {"C"}, Dcm::identity(), Vec3::UnitZ());
  MotionVector18 rest;
  auto r = weld.respond(rest, Dcm::identity(), {Vec6::Zero()}, 0, 0, 0, Vec3::Zero());
  expect_near(r.parent_wrench, Vec6::Zero(), 0.0);
  expect_near(r.at_p.accel, Vec6::Zero(), 0.0);

  // Hanging body: A pushes its weight onto B; the support reaction on A is
  // the opposite, -D_P [g; 0].
  r = weld.respond(rest, Dcm::identity(), {Vec6::Zero()}, 0, 0, 0, kG);
  const Vec6 support = -weld.dynamic_model() * stack(kG, Vec3::Zero());
  expect_near(-r.parent_wrench, support, 1e-13);
  const Vec3 bp = b.point("P") - b.com;
  expect_near(r.parent_wrench, stack(b.mass * kG, -b.mass * bp.cross(kG)), 1e-13);
}

TEST(Weld, ParentFrameChange) {
  gen::Rng rng(42);
  const RigidBodyParams b = rng.body();
  const Dcm orient = rng.dcm();
  const Joint weld(JointType::kWeld, "w", b, "P", {}, orient, Vec3::UnitZ());
  MotionVector18 rest;
  const auto r = weld.respond(rest, Dcm::identity(), {}, 0, 0, 0, kG);
  expect_near(r.parent_wrench, augment_dual(orient) * r.wrench_at_p, 1e-14);
  // The weight in parent components is still m g.
  expect_near(r.parent_wrench.head<3>(), b.mass * kG, 1e-13);
}

TEST(Revolute, DcmExamples) {
  gen::Rng rng(43);
  const Dcm p0 = rng.dcm();
  const Vec3 r = rng.unit();
  expect_near(revolute_dcm(p0, r, 0).matrix(), p0.matrix(), 0.0);
  expect_near(revolute_dcm(p0, r, 2 * M_PI).matrix(), p0.matrix(), 1e-12);
}

TEST(Revolute, MotionAcrossExamples) {
  gen::Rng rng(44);
  MotionVector18 parent;
  parent.accel = rng.vec6();
  parent.twist = rng.vec6();
  parent.position = rng.vec3();
  parent.attitude = {rng.euler(1.0), EulerSequence::kZYX};
  const MotionVector18 frozen =
      revolute_motion_across(parent, 0, 0, 0, Vec3::UnitZ(), Dcm::identity());
  EXPECT_EQ(frozen.accel, parent.accel);
  EXPECT_EQ(frozen.twist, parent.twist);
  EXPECT_EQ(frozen.position, parent.position);
  expect_near(frozen.attitude.angles, parent.attitude.angles, 1e-12);

  MotionVector18 rest;
  MotionVector18 spin = revolute_motion_across(rest, 0, 1, 0, Vec3::UnitZ(), Dcm::identity());
  expect_near(spin.twist, stack(Vec3::Zero(), Vec3::UnitZ()), 0.0);
  spin = revolute_motion_across(rest, 0, 0, 2, Vec3::UnitZ(), Dcm::identity());
  expect_near(spin.accel, stack(Vec3::Zero(), Vec3(0, 0, 2)), 0.0);
}

TEST(Revolute, ApparentInertia) {
  const Joint j(JointType::kRevolute, "theta1", bob(), "S", {}, Dcm::identity(), Vec3::UnitZ());
  EXPECT_NEAR(j.apparent_inertia(), 2.88, 1e-14);
  EXPECT_NEAR(revolute_inertia(j.dynamic_model(), Vec3::UnitZ()), 2.88, 1e-14);

  RigidBodyParams b;
  b.name = "disc";
  b.mass = 3;
  b.inertia = Vec3(0.4, 0.5, 0.7).asDiagonal();
  b.com = Vec3(0, 0, 0.8);
  b.points["O"] = Vec3::Zero();
  EXPECT_NEAR(revolute_inertia(dynamic_model_at(b, "O"), Vec3::UnitZ()), 0.7, 1e-14);
}

TEST(Revolute, DegenerateInertiaThrows) {
  RigidBodyParams b = bob();
  b.com = Vec3(0, 0, -1.2);  // on the z axis through S
  EXPECT_THROW(revolute_inertia(dynamic_model_at(b, "S"), Vec3::UnitZ()), std::domain_error);
  EXPECT_THROW(
      Joint(JointType::kRevolute, "j", b, "S", {}, Dcm::identity(), Vec3::UnitZ()),
      std::domain_error);
}

TEST(Revolute, ZeroAxisThrows) {
  EXPECT_THROW(Joint(JointType::kRevolute, "j", bob(), "S", {}, Dcm::identity(), Vec3::Zero()),
               std::invalid_argument);
  EXPECT_THROW(Joint(JointType::kPrismatic, "j", slider(), "P", {}, Dcm::identity(),
                     Vec3::Zero()),
               std::invalid_argument);
}

TEST(Revolute, PendulumAcceleration) {
  const Joint j(JointType::kRevolute, "theta1", bob(), "S", {}, Dcm::identity(), Vec3::UnitZ());
  MotionVector18 ground;
  auto r = j.respond(ground, Dcm::identity(), {}, 0, M_PI / 2, 0, kG);
  EXPECT_NEAR(r.qdd, -9.81 / 1.2, 1e-12);
  EXPECT_NEAR(r.qdd, -8.175, 1e-12);
  for (double th : {0.3, -1.1, 2.5}) {
    r = j.respond(ground, Dcm::identity(), {}, 0, th, 0.7, kG);
    EXPECT_NEAR(r.qdd, -9.81 / 1.2 * std::sin(th), 1e-12);
  }
  r = j.respond(ground, Dcm::identity(), {}, 0, 0, 0, kG);
  EXPECT_NEAR(r.qdd, 0.0, 1e-15);
}

TEST(Revolute, DriveTorqueGivesAngularAcceleration) {
  gen::Rng rng(45);
  const RigidBodyParams b = rng.body();
  const Joint j(JointType::kRevolute, "j", b, "P", {}, rng.dcm(), rng.unit());
  MotionVector18 ground;
  const double alpha = 1.7;
  const auto r =
      j.respond(ground, Dcm::identity(), {}, j.apparent_inertia() * alpha, 0.4, 0, Vec3::Zero());
  EXPECT_NEAR(r.qdd, alpha, 1e-12);
}

TEST(Revolute, AxisWrenchEqualsDriveReaction) {
  gen::Rng rng(46);
  for (int i = 0; i < 200; ++i) {
    const RigidBodyParams b = rng.body();
    const Joint j(JointType::kRevolute, "j", b, "P", {"C"}, rng.dcm(), rng.unit());
    MotionVector18 parent;
    parent.accel = rng.vec6();
    parent.twist = rng.vec6();
    parent.attitude = {rng.euler(1.0), EulerSequence::kZYX};
    const double drive = rng.uniform(-3, 3);
    const auto r = j.respond(parent, euler_to_dcm(parent.attitude), {rng.vec6()}, drive,
                             rng.uniform(-3, 3), rng.uniform(-2, 2), kG);
    EXPECT_NEAR(stack(Vec3::Zero(), j.axis()).dot(r.wrench_at_p), -drive, 1e-11);
  }
}

TEST(Prismatic, MotionAcrossExamples) {
  gen::Rng rng(47);
  MotionVector18 m;
  m.accel = rng.vec6();
  m.twist = rng.vec6();
  m.position = rng.vec3();
  m.attitude.angles = rng.euler();
  const MotionVector18 same = prismatic_motion_across(m, 0, 0, 0, Vec3::UnitX());
  EXPECT_EQ(same.stacked(), m.stacked());

  MotionVector18 rest;
  const Vec3 t = Vec3(1, 0, -1).normalized();
  expect_near(prismatic_motion_across(rest, 0, 1, 0, t).twist, stack(t, Vec3::Zero()), 0.0);

  MotionVector18 spinning;
  spinning.twist = stack(Vec3::Zero(), Vec3::UnitZ());
  const MotionVector18 c = prismatic_motion_across(spinning, 0, 1, 0, Vec3::UnitX());
  expect_near(c.accel.head<3>(), Vec3(0, 1, 0), 1e-15);
}

TEST(Prismatic, SpringSlider) {
  const Joint j(JointType::kPrismatic, "x", slider(1.0), "P", {}, Dcm::identity(),
                Vec3::UnitX());
  EXPECT_DOUBLE_EQ(j.apparent_inertia(), 1.0);
  MotionVector18 ground;
  const double x = 0.5;
  auto r = j.respond(ground, Dcm::identity(), {}, -4.0 * x, x, 0, Vec3::Zero());
  EXPECT_NEAR(r.qdd, -2.0, 1e-15);

  r = j.respond(ground, Dcm::identity(), {}, 0, 0, 0, Vec3::Zero());
  EXPECT_EQ(r.qdd, 0.0);
  expect_near(r.parent_wrench, Vec6::Zero(), 0.0);
}

TEST(Prismatic, FreeSlideUnderGravity) {
  gen::Rng rng(48);
  const Vec3 t = rng.unit();
  const Joint j(JointType::kPrismatic, "x", slider(2.5), "P", {}, Dcm::identity(), t);
  MotionVector18 ground;
  const auto r = j.respond(ground, Dcm::identity(), {}, 0, 0.3, 0, kG);
  EXPECT_NEAR(r.qdd, t.dot(kG), 1e-13);
}

TEST(MultiPortJoint, SingleChildMatchesExtraIdleChild) {
  gen::Rng rng(49);
  const RigidBodyParams b = rng.body();
  const Dcm orient = rng.dcm();
  const Vec3 axis = rng.unit();
  const Joint one(JointType::kRevolute, "j", b, "P", {"C"}, orient, axis);
  const Joint two(JointType::kRevolute, "j", b, "P", {"C", "C2"}, orient, axis);
  MotionVector18 parent;
  parent.accel = rng.vec6();
  parent.twist = rng.vec6();
  const Vec6 wc = rng.vec6();
  const auto r1 = one.respond(parent, Dcm::identity(), {wc}, 0.3, 0.2, 0.1, kG);
  const auto r2 = two.respond(parent, Dcm::identity(), {wc, Vec6::Zero()}, 0.3, 0.2, 0.1, kG);
  EXPECT_EQ(r1.qdd, r2.qdd);
  expect_near(r1.parent_wrench, r2.parent_wrench, 0.0);
  expect_near(r1.at_children[0].stacked(), r2.at_children[0].stacked(), 0.0);
}

TEST(MultiPortJoint, OpposedChildWrenchesCancel) {
  gen::Rng rng(50);
  RigidBodyParams b = rng.body();
  b.points["C2"] = b.points["C"];
  const Joint j(JointType::kPrismatic, "j", b, "P", {"C", "C2"}, rng.dcm(), rng.unit());
  MotionVector18 parent;
  parent.twist = rng.vec6();
  const Vec6 w = rng.vec6(10);
  const auto loaded = j.respond(parent, Dcm::identity(), {w, -w}, 0.1, 0.2, 0.3, kG);
  const auto idle = j.respond(parent, Dcm::identity(), {Vec6::Zero(), Vec6::Zero()}, 0.1, 0.2,
                              0.3, kG);
  EXPECT_NEAR(loaded.qdd, idle.qdd, 1e-13);
  expect_near(loaded.parent_wrench, idle.parent_wrench, 1e-12);
}

TEST(LoopClosure, Examples) {
  LoopClosureParams p;
  p.name = "cut";
  p.stiffness = 1e3 * Mat6::Identity();
  p.damping = 10 * Mat6::Identity();
  ClosureEnd left, right;
  ClosureResult r = loop_closure(p, left, right);
  expect_near(r.wrench_left, Vec6::Zero(), 0.0);
  expect_near(r.wrench_right, Vec6::Zero(), 0.0);
  EXPECT_EQ(r.potential, 0.0);

  right.position_inertial = Vec3(0.01, 0, 0);
  r = loop_closure(p, left, right);
  expect_near(r.wrench_left, stack(Vec3(10, 0, 0), Vec3::Zero()), 1e-12);
  expect_near(r.wrench_right, -r.wrench_left, 1e-12);
  EXPECT_NEAR(r.potential, 0.5 * 1e3 * 1e-4, 1e-15);
  EXPECT_NEAR(r.drift, 0.01, 1e-15);

  right.attitude.angles = Vec3(0, 0, 0.5);
  EXPECT_THROW(loop_closure(p, left, right), std::domain_error);
}

TEST(LoopClosure, DampingDissipates) {
  gen::Rng rng(51);
  LoopClosureParams p;
  p.name = "cut";
  p.damping = Vec6(1, 2, 3, 4, 5, 6).asDiagonal();
  for (int i = 0; i < 100; ++i) {
    ClosureEnd left, right;
    left.velocity_inertial = rng.vec3();
    right.omega_inertial = rng.vec3();
    const ClosureResult r = loop_closure(p, left, right);
    EXPECT_GE(r.dissipation, 0.0);
    EXPECT_NEAR(r.dissipation, r.delta_twist.dot(r.wrench_left), 1e-12);
  }
}

TEST(WrapAngle, Range) {
  EXPECT_NEAR(wrap_angle(3 * M_PI / 2), -M_PI / 2, 1e-15);
  EXPECT_NEAR(wrap_angle(-M_PI), M_PI, 1e-15);
  EXPECT_NEAR(wrap_angle(0.25), 0.25, 0.0);
}
