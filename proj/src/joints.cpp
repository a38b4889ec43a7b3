#include "blockdyn/joints.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace blockdyn {

std::string to_string(JointType type) {
  switch (type) {
    case JointType::kWeld:
      return "weld";
    case JointType::kRevolute:
      return "revolute";
    case JointType::kPrismatic:
      return "prismatic";
  }
  return "unknown";
}

Dcm revolute_dcm(const Dcm& p_a0_b, const Vec3& axis, double theta) {
  return p_a0_b * rot_exp(axis, theta);
}

MotionVector18 revolute_motion_across(const MotionVector18& parent_in_a, double theta,
                                      double theta_dot, double theta_ddot, const Vec3& axis,
                                      const Dcm& p_a0_b) {
  const Vec3 v = parent_in_a.twist.head<3>();
  const Vec3 w = parent_in_a.twist.tail<3>();
  MotionVector18 out = parent_in_a;
  out.accel.head<3>() -= theta_dot * axis.cross(v);
  out.accel.tail<3>() += theta_ddot * axis - theta_dot * axis.cross(w);
  out.twist.tail<3>() += theta_dot * axis;
  const Dcm p_b_i = euler_to_dcm(parent_in_a.attitude);
  out.attitude =
      dcm_to_euler(p_b_i * revolute_dcm(p_a0_b, axis, theta), parent_in_a.attitude.sequence);
  return out;
}

MotionVector18 prismatic_motion_across(const MotionVector18& at_p0, double x, double x_dot,
                                       double x_ddot, const Vec3& axis) {
  MotionVector18 out = transport_motion(at_p0, -x * axis);
  const Vec3 w = at_p0.twist.tail<3>();
  out.accel.head<3>() += x_ddot * axis - x_dot * axis.cross(w);
  out.twist.head<3>() += x_dot * axis;
  return out;
}

double revolute_inertia(const Mat6& d_p, const Vec3& axis) {
  Vec6 e = Vec6::Zero();
  e.tail<3>() = axis;
  const double j = e.dot(d_p * e);
  if (!(j > 1e-12)) {
    throw std::domain_error("apparent joint inertia J_r = " + std::to_string(j) +
                            " is degenerate (mass on the joint axis?)");
  }
  return j;
}

namespace {

Vec6 angular(const Vec3& a) {
  Vec6 e = Vec6::Zero();
  e.tail<3>() = a;
  return e;
}

Vec6 linear(const Vec3& a) {
  Vec6 e = Vec6::Zero();
  e.head<3>() = a;
  return e;
}

}  // namespace

Joint::Joint(JointType type, std::string name, RigidBodyParams body, std::string joint_point,
             std::vector<std::string> child_points, const Dcm& orientation, const Vec3& axis)
    : type_(type),
      name_(std::move(name)),
      body_(std::move(body)),
      joint_point_(std::move(joint_point)),
      child_points_(std::move(child_points)),
      orientation_(orientation) {
  std::set<std::string> seen;
  for (const auto& c : child_points_) {
    if (!seen.insert(c).second) {
      throw std::invalid_argument("joint '" + name_ + "': duplicate child point '" + c + "'");
    }
  }
  const Vec3& p = body_.point(joint_point_);
  for (const auto& c : child_points_) offsets_.push_back(p - body_.point(c));
  d_ = dynamic_model_at(body_, p);
  if (type_ != JointType::kWeld) {
    const double n = axis.norm();
    if (!(n > 1e-12) || !axis.allFinite()) {
      throw std::invalid_argument("joint '" + name_ + "': axis cannot be normalized");
    }
    axis_ = axis / n;
  }
  if (type_ == JointType::kRevolute) {
    try {
      apparent_ = revolute_inertia(d_, axis_);
    } catch (const std::domain_error& e) {
      throw std::domain_error("joint '" + name_ + "': " + e.what());
    }
  } else if (type_ == JointType::kPrismatic) {
    apparent_ = body_.mass;
    if (!(apparent_ > 0.0)) {
      throw std::domain_error("joint '" + name_ + "': prismatic child body has zero mass");
    }
  }
}

Dcm Joint::dcm_at(double q) const {
  if (type_ == JointType::kRevolute) return revolute_dcm(orientation_, axis_, q);
  return orientation_;
}

JointKinematics Joint::kinematics(const ParentMotion& parent, double q, double qd,
                                  const Vec3& g_inertial) const {
  JointKinematics k;
  k.q = q;
  k.qd = qd;
  k.to_parent = dcm_at(q);
  k.to_inertial = parent.to_inertial * k.to_parent;
  const Mat6 back = augment_dual(k.to_parent.transpose());
  const Vec6 tw = back * parent.twist;
  const Vec3 v = tw.head<3>();
  const Vec3 w = tw.tail<3>();
  const Vec3 pos = k.to_parent.transpose() * parent.position;
  switch (type_) {
    case JointType::kWeld:
      k.twist = tw;
      k.position = pos;
      break;
    case JointType::kRevolute:
      k.twist = tw + angular(qd * axis_);
      k.position = pos;
      k.bias << -qd * axis_.cross(v), -qd * axis_.cross(w);
      break;
    case JointType::kPrismatic:
      k.slide = q * axis_;
      k.twist = tau(-k.slide).apply(tw) + linear(qd * axis_);
      k.position = pos + k.slide;
      k.bias = linear(-qd * axis_.cross(w));
      break;
  }
  k.gyro = gyroscopic_wrench(d_, k.twist);
  k.gravity = gravity_accel(k.to_inertial, g_inertial);
  return k;
}

Lin6 Joint::accel_across(const JointKinematics& k, const Lin6& parent_accel,
                         const Lin1& qdd) const {
  Lin6 a = augment_dual(k.to_parent.transpose()) * parent_accel;
  switch (type_) {
    case JointType::kWeld:
      return a;
    case JointType::kRevolute:
      return a + k.bias + angular(axis_) * qdd;
    case JointType::kPrismatic:
      return apply(tau(-k.slide), a) + k.bias + linear(axis_) * qdd;
  }
  return a;
}

Lin6 Joint::wrench_at_p(const JointKinematics& k, const Lin6& accel,
                        const Lin6& children_at_p) const {
  return children_at_p - d_ * (accel - k.gravity) - k.gyro;
}

Lin6 Joint::to_parent_port(const JointKinematics& k, const Lin6& wrench_a) const {
  const Mat6 fwd = augment_dual(k.to_parent);
  if (type_ == JointType::kPrismatic) {
    return fwd * apply_transpose(tau(-k.slide), wrench_a);
  }
  return fwd * wrench_a;
}

JointPortOutput Joint::port(const JointKinematics& k, const Lin6& parent_accel,
                            const Lin6& children_at_p, double drive) const {
  const int n = parent_accel.unknowns();
  JointPortOutput out;
  out.qdd = Lin1(0.0, n);
  Lin6 free_accel = accel_across(k, parent_accel, out.qdd);
  if (type_ != JointType::kWeld) {
    const Vec6 e = type_ == JointType::kRevolute ? angular(axis_) : linear(axis_);
    const Lin6 w0 = wrench_at_p(k, free_accel, children_at_p);
    out.qdd = (1.0 / apparent_) * (dot(e, w0) + drive);
    free_accel += e * out.qdd;
  }
  out.accel = free_accel;
  out.wrench_at_p = wrench_at_p(k, out.accel, children_at_p);
  out.parent_wrench = to_parent_port(k, out.wrench_at_p);
  return out;
}

Vec6 Joint::sum_children(const std::vector<Vec6>& child_wrenches) const {
  if (child_wrenches.size() != offsets_.size()) {
    throw std::invalid_argument("joint '" + name_ + "': expected " +
                                std::to_string(offsets_.size()) + " child wrenches");
  }
  Vec6 sum = Vec6::Zero();
  for (std::size_t i = 0; i < offsets_.size(); ++i) {
    sum += tau(offsets_[i]).apply_transpose(child_wrenches[i]);
  }
  return sum;
}

Joint::Response Joint::respond(const MotionVector18& parent, const Dcm& parent_to_inertial,
                               const std::vector<Vec6>& child_wrenches, double drive, double q,
                               double qd, const Vec3& g_inertial, FrameId child_frame) const {
  const ParentMotion pm{parent.twist, parent.position, parent_to_inertial};
  const JointKinematics k = kinematics(pm, q, qd, g_inertial);
  const JointPortOutput o =
      port(k, Lin6(parent.accel, 0), Lin6(sum_children(child_wrenches), 0), drive);
  Response r;
  r.qdd = o.qdd.value({});
  r.at_p.accel = o.accel.constant();
  r.at_p.twist = k.twist;
  r.at_p.position = k.position;
  r.at_p.attitude = dcm_to_euler(k.to_inertial, parent.attitude.sequence);
  r.at_p.frame = child_frame;
  for (const Vec3& cp : offsets_) r.at_children.push_back(transport_motion(r.at_p, cp));
  r.wrench_at_p = o.wrench_at_p.constant();
  r.parent_wrench = o.parent_wrench.constant();
  return r;
}

double wrap_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(a + std::numbers::pi, two_pi);
  if (r <= 0.0) r += two_pi;
  return r - std::numbers::pi;
}

ClosureResult loop_closure(const LoopClosureParams& params, const ClosureEnd& left,
                           const ClosureEnd& right) {
  ClosureResult r;
  const Mat3 lt = left.to_inertial.matrix().transpose();
  const Vec3 gap = lt * (right.position_inertial - left.position_inertial);
  Vec3 dtheta;
  for (int i = 0; i < 3; ++i) {
    dtheta(i) = wrap_angle(right.attitude.angles(i) - left.attitude.angles(i));
  }
  if (dtheta.cwiseAbs().maxCoeff() > params.max_angle) {
    throw std::domain_error("loop closure '" + params.name + "': attitude gap " +
                            std::to_string(dtheta.cwiseAbs().maxCoeff()) +
                            " rad exceeds the small-rotation limit");
  }
  r.delta_pose << gap, dtheta;
  r.delta_twist << lt * (right.velocity_inertial - left.velocity_inertial),
      lt * (right.omega_inertial - left.omega_inertial);
  r.wrench_left = params.stiffness * r.delta_pose + params.damping * r.delta_twist;
  const Dcm left_to_right = right.to_inertial.transpose() * left.to_inertial;
  r.wrench_right = -(augment_dual(left_to_right) * r.wrench_left);
  r.potential = 0.5 * r.delta_pose.dot(params.stiffness * r.delta_pose);
  r.dissipation = r.delta_twist.dot(params.damping * r.delta_twist);
  r.drift = gap.norm();
  return r;
}

}  // namespace blockdyn
