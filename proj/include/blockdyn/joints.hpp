#pragma once

// Joint blocks between a parent body B and a child body A. The joint belongs
// to A: its axis is expressed in A's frame and A's dynamic model is taken at
// the joint point P. Ports:
//   parent side: motion of B at the connection point (frame b) in,
//                wrench W_{A/B} applied by A on B (frame b) out;
//   child side:  wrenches applied on A at its child points (frame a) in,
//                motion of A at those points (frame a) out;
//   joint:       drive force/torque in, joint motion [qdd, qd, q] out.
// Port equations are written over affine expressions so the assembly can
// build its fast system from exactly the same code.

#include "blockdyn/affine.hpp"
#include "blockdyn/rigid_body.hpp"
#include "blockdyn/spatial.hpp"

#include <string>
#include <vector>

namespace blockdyn {

enum class JointType { kWeld, kRevolute, kPrismatic };

std::string to_string(JointType type);

/// Motion of the parent at the connection point, projected in the parent frame.
struct ParentMotion {
  Vec6 twist = Vec6::Zero();
  Vec3 position = Vec3::Zero();
  Dcm to_inertial;
};

/// Slow (state-only) quantities across a joint at one configuration.
struct JointKinematics {
  double q = 0.0;
  double qd = 0.0;
  Dcm to_parent;             // P_{a/b} at the current configuration
  Dcm to_inertial;           // P_{a/i}
  Vec6 twist = Vec6::Zero();     // twist of A at P, frame a
  Vec3 position = Vec3::Zero();  // [IP]_a
  Vec6 bias = Vec6::Zero();      // velocity-dependent part of the accel map
  Vec6 gyro = Vec6::Zero();      // C(x') D_P x'
  Vec6 gravity = Vec6::Zero();   // [P_{a/i}^T g; 0]
  Vec3 slide = Vec3::Zero();     // x t (prismatic), zero otherwise
};

struct JointPortOutput {
  Lin1 qdd;                // joint acceleration (weld: identically zero)
  Lin6 accel;              // spatial acceleration of A at P, frame a
  Lin6 wrench_at_p;        // W_{A/B,P}, frame a
  Lin6 parent_wrench;      // W_{A/B} at the parent connection point, frame b
};

/// P_{a0/b} e^{theta (*r)}.
Dcm revolute_dcm(const Dcm& p_a0_b, const Vec3& axis, double theta);

/// Motion of A at P from the parent motion at P already projected in frame a.
MotionVector18 revolute_motion_across(const MotionVector18& parent_in_a, double theta,
                                      double theta_dot, double theta_ddot, const Vec3& axis,
                                      const Dcm& p_a0_b);

/// Motion of A at P from the motion of A's frame at P0 (frame a).
MotionVector18 prismatic_motion_across(const MotionVector18& at_p0, double x, double x_dot,
                                       double x_ddot, const Vec3& axis);

/// J_r = [0; r]^T D_P [0; r]; throws std::domain_error when <= 1e-12.
double revolute_inertia(const Mat6& d_p, const Vec3& axis);

class Joint {
 public:
  /// `joint_point` is P on the child body; `child_points` are the C_i where
  /// further bodies attach. Axes are normalized here; a zero axis throws.
  Joint(JointType type, std::string name, RigidBodyParams body, std::string joint_point,
        std::vector<std::string> child_points, const Dcm& orientation, const Vec3& axis);

  JointType type() const { return type_; }
  const std::string& name() const { return name_; }
  const RigidBodyParams& body() const { return body_; }
  const std::string& joint_point() const { return joint_point_; }
  const std::vector<std::string>& child_points() const { return child_points_; }
  const Dcm& orientation() const { return orientation_; }
  const Vec3& axis() const { return axis_; }
  const Mat6& dynamic_model() const { return d_; }
  int dof() const { return type_ == JointType::kWeld ? 0 : 1; }
  /// J_r for revolute joints, the child mass for prismatic ones.
  double apparent_inertia() const { return apparent_; }
  /// Offset from child point k to P, frame a.
  const Vec3& child_offset(std::size_t k) const { return offsets_.at(k); }

  Dcm dcm_at(double q) const;

  JointKinematics kinematics(const ParentMotion& parent, double q, double qd,
                             const Vec3& g_inertial) const;

  /// Acceleration of A at P for a given parent acceleration (frame b, at the
  /// connection point) and joint acceleration.
  Lin6 accel_across(const JointKinematics& k, const Lin6& parent_accel, const Lin1& qdd) const;

  /// Wrench W_{A/B,P} (frame a) from A's acceleration and the wrench applied
  /// on A by its children, already summed at P.
  Lin6 wrench_at_p(const JointKinematics& k, const Lin6& accel, const Lin6& children_at_p) const;

  /// Converts W_{A/B,P} (frame a) to the parent connection point, frame b.
  Lin6 to_parent_port(const JointKinematics& k, const Lin6& wrench_a) const;

  /// Causal evaluation of the block: joint acceleration from the drive, then
  /// the acceleration of A and the wrench on the parent.
  JointPortOutput port(const JointKinematics& k, const Lin6& parent_accel,
                       const Lin6& children_at_p, double drive) const;

  /// Sums child-point wrenches (frame a) at P.
  Vec6 sum_children(const std::vector<Vec6>& child_wrenches) const;

  /// Value-level block response, for use outside an assembly.
  struct Response {
    double qdd = 0.0;
    MotionVector18 at_p;
    std::vector<MotionVector18> at_children;
    Vec6 wrench_at_p = Vec6::Zero();
    Vec6 parent_wrench = Vec6::Zero();
  };
  Response respond(const MotionVector18& parent, const Dcm& parent_to_inertial,
                   const std::vector<Vec6>& child_wrenches, double drive, double q, double qd,
                   const Vec3& g_inertial, FrameId child_frame = {}) const;

 private:
  JointType type_;
  std::string name_;
  RigidBodyParams body_;
  std::string joint_point_;
  std::vector<std::string> child_points_;
  std::vector<Vec3> offsets_;
  Dcm orientation_;
  Vec3 axis_ = Vec3::UnitZ();
  Mat6 d_;
  double apparent_ = 0.0;
};

/// Spring-damper closing a kinematic loop between two chain ends.
struct LoopClosureParams {
  std::string name;
  Mat6 stiffness = Mat6::Zero();
  Mat6 damping = Mat6::Zero();
  double max_angle = 0.3;  // largest accepted Euler-angle difference (rad)
};

struct ClosureEnd {
  Vec3 position_inertial = Vec3::Zero();
  Dcm to_inertial;
  Vec3 velocity_inertial = Vec3::Zero();
  Vec3 omega_inertial = Vec3::Zero();
  EulerAngles attitude;
};

struct ClosureResult {
  Vec6 delta_pose = Vec6::Zero();   // [position gap; Euler-angle gap], left frame
  Vec6 delta_twist = Vec6::Zero();  // left frame
  Vec6 wrench_left = Vec6::Zero();  // on the left end, left frame, at the left point
  Vec6 wrench_right = Vec6::Zero(); // on the right end, right frame, at the right point
  double potential = 0.0;           // 1/2 dpose^T K dpose
  double dissipation = 0.0;         // dtwist^T D dtwist
  double drift = 0.0;               // |position gap|
};

/// Throws std::domain_error when the attitude gap exceeds max_angle.
ClosureResult loop_closure(const LoopClosureParams& params, const ClosureEnd& left,
                           const ClosureEnd& right);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

}  // namespace blockdyn
