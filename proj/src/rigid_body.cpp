#include "blockdyn/rigid_body.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace blockdyn {

const Vec3& RigidBodyParams::point(const std::string& id) const {
  auto it = points.find(id);
  if (it == points.end()) {
    throw std::out_of_range("body '" + name + "' has no point '" + id + "'");
  }
  return it->second;
}

void RigidBodyParams::validate() const {
  if (!(mass >= 0.0) || !std::isfinite(mass)) {
    throw std::invalid_argument("body '" + name + "': mass must be finite and >= 0");
  }
  if (!inertia.allFinite() || !com.allFinite()) {
    throw std::invalid_argument("body '" + name + "': non-finite inertia or centre of mass");
  }
  const double scale = std::max(1.0, inertia.cwiseAbs().maxCoeff());
  if ((inertia - inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("body '" + name + "': inertia tensor is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(inertia);
  const Vec3 l = eig.eigenvalues();
  if (l.minCoeff() < -1e-12 * scale) {
    throw std::invalid_argument("body '" + name + "': inertia tensor is not positive semidefinite");
  }
  for (const auto& [id, p] : points) {
    if (!p.allFinite()) {
      throw std::invalid_argument("body '" + name + "': point '" + id + "' is not finite");
    }
  }
}

Mat6 dynamic_model_at(const RigidBodyParams& body, const Vec3& point) {
  Mat6 db = Mat6::Zero();
  db.topLeftCorner<3, 3>() = body.mass * Mat3::Identity();
  db.bottomRightCorner<3, 3>() = body.inertia;
  const Mat6 t = tau(point - body.com).matrix();
  Mat6 d = t.transpose() * db * t;
  return 0.5 * (d + d.transpose());
}

Mat6 dynamic_model_at(const RigidBodyParams& body, const std::string& point) {
  return dynamic_model_at(body, body.point(point));
}

Mat6 gyroscopic_operator(const Vec6& twist) {
  Mat6 c = Mat6::Zero();
  const Mat3 w = skew(twist.tail<3>());
  c.topLeftCorner<3, 3>() = w;
  c.bottomLeftCorner<3, 3>() = skew(twist.head<3>());
  c.bottomRightCorner<3, 3>() = w;
  return c;
}

Vec6 gyroscopic_wrench(const Mat6& d, const Vec6& twist) {
  const Vec6 h = d * twist;
  Vec6 out;
  out.head<3>() = twist.tail<3>().cross(h.head<3>());
  out.tail<3>() = twist.head<3>().cross(h.head<3>()) + twist.tail<3>().cross(h.tail<3>());
  return out;
}

Vec6 gravity_accel(const Dcm& body_to_inertial, const Vec3& g_inertial) {
  Vec6 g = Vec6::Zero();
  g.head<3>() = body_to_inertial.matrix().transpose() * g_inertial;
  return g;
}

Vec6 newton_euler_forward(const Mat6& d, const Vec6& twist, const EulerAngles& attitude,
                          const Vec6& wrench, const Vec3& g_inertial) {
  Eigen::LDLT<Mat6> ldlt(d);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-14 * std::max(1.0, d.cwiseAbs().maxCoeff())) {
    throw std::domain_error("dynamic model is singular (massless body used as a terminal)");
  }
  return ldlt.solve(wrench - gyroscopic_wrench(d, twist)) +
         gravity_accel(euler_to_dcm(attitude), g_inertial);
}

Vec6 newton_euler_inverse(const Mat6& d, const MotionVector18& m, const Vec3& g_inertial) {
  return d * (m.accel - gravity_accel(euler_to_dcm(m.attitude), g_inertial)) +
         gyroscopic_wrench(d, m.twist);
}

Vec6 newton_euler_classic(const RigidBodyParams& body, const Vec3& point, const Vec3& accel_p,
                          const Vec3& angular_accel, const Vec3& omega) {
  const Mat6 d = dynamic_model_at(body, point);
  const Vec3 bp = point - body.com;
  const Mat3 s = skew(bp);
  Vec6 x2;
  x2 << accel_p, angular_accel;
  Vec6 wq;
  wq.head<3>() = body.mass * (skew(omega) * (s * omega));
  wq.tail<3>() = skew(omega) * ((body.inertia - body.mass * s * s) * omega);
  return d * x2 + wq;
}

PoseRate pose_rate(const Vec6& twist, const Pose& pose) {
  PoseRate r;
  r.position = twist.head<3>() + pose.position.cross(twist.tail<3>());
  r.attitude = gamma(pose.attitude) * twist.tail<3>();
  return r;
}

Vec6 inertial_accel(const Vec6& spatial_accel, const Vec6& twist) {
  Vec6 a = spatial_accel;
  a.head<3>() += twist.tail<3>().cross(twist.head<3>());
  return a;
}

MultiPortBody::MultiPortBody(RigidBodyParams body, std::string reference_point,
                             std::vector<std::string> child_points)
    : body_(std::move(body)),
      reference_(std::move(reference_point)),
      children_(std::move(child_points)) {
  std::set<std::string> seen;
  for (const auto& c : children_) {
    if (!seen.insert(c).second) {
      throw std::invalid_argument("body '" + body_.name + "': duplicate child point '" + c + "'");
    }
  }
  const Vec3& p = body_.point(reference_);
  for (const auto& c : children_) offsets_.push_back(p - body_.point(c));
  d_ = dynamic_model_at(body_, p);
}

MultiPortBody::Response MultiPortBody::respond(const Vec6& twist, const Pose& pose,
                                               const Vec6& wrench_reference,
                                               const std::vector<Vec6>& child_wrenches,
                                               const Vec3& g_inertial, FrameId frame) const {
  if (child_wrenches.size() != offsets_.size()) {
    throw std::invalid_argument("body '" + body_.name + "': expected " +
                                std::to_string(offsets_.size()) + " child wrenches");
  }
  Response r;
  r.total_wrench = wrench_reference;
  for (std::size_t k = 0; k < offsets_.size(); ++k) {
    r.total_wrench += tau(offsets_[k]).apply_transpose(child_wrenches[k]);
  }
  r.at_reference.accel =
      newton_euler_forward(d_, twist, pose.attitude, r.total_wrench, g_inertial);
  r.at_reference.twist = twist;
  r.at_reference.position = pose.position;
  r.at_reference.attitude = pose.attitude;
  r.at_reference.frame = frame;
  for (const Vec3& cp : offsets_) {
    r.at_children.push_back(transport_motion(r.at_reference, cp));
  }
  return r;
}

}  // namespace blockdyn
