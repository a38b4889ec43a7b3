#pragma once

// Per-body Newton-Euler machinery: dynamic models, the gyroscopic wrench,
// gravity projection, forward and inverse dynamics at a point, pose
// kinematics and the multi-port body model.

#include "blockdyn/spatial.hpp"

#include <map>
#include <string>
#include <vector>

namespace blockdyn {

struct RigidBodyParams {
  std::string name;
  double mass = 0.0;
  Mat3 inertia = Mat3::Zero();  // about the centre of mass, body axes
  Vec3 com = Vec3::Zero();      // centre of mass in the body frame
  std::map<std::string, Vec3> points;

  /// Body-frame coordinates of a declared point; throws std::out_of_range.
  const Vec3& point(const std::string& name) const;
  /// Throws std::invalid_argument on negative mass or non-symmetric or
  /// indefinite inertia. The triangle inequality on principal moments is not
  /// enforced: some published test bodies violate it.
  void validate() const;
};

/// D_P = tau_{BP}^T diag(m 1, I_B) tau_{BP}.
Mat6 dynamic_model_at(const RigidBodyParams& body, const Vec3& point);
Mat6 dynamic_model_at(const RigidBodyParams& body, const std::string& point);

/// C(x') = [[(*w), 0], [(*v), (*w)]].
Mat6 gyroscopic_operator(const Vec6& twist);
/// C(x') D_P x'.
Vec6 gyroscopic_wrench(const Mat6& d, const Vec6& twist);

/// [P_{b/i}^T g; 0], the gravity field as a body-frame spatial acceleration.
Vec6 gravity_accel(const Dcm& body_to_inertial, const Vec3& g_inertial);

/// Spatial acceleration from the total external wrench at P (body frame).
/// Throws std::domain_error when D_P is singular.
Vec6 newton_euler_forward(const Mat6& d, const Vec6& twist, const EulerAngles& attitude,
                          const Vec6& wrench, const Vec3& g_inertial);

/// Total external wrench at P that produces the motion `m`.
Vec6 newton_euler_inverse(const Mat6& d, const MotionVector18& m, const Vec3& g_inertial);

/// The inertial-acceleration form: D_P x'' + W_P(w) with x'' = [a_P; dw].
Vec6 newton_euler_classic(const RigidBodyParams& body, const Vec3& point, const Vec3& accel_p,
                          const Vec3& angular_accel, const Vec3& omega);

struct PoseRate {
  Vec3 position = Vec3::Zero();  // d[IP]_b/dt taken in the body frame
  Vec3 attitude = Vec3::Zero();  // dTheta/dt
};

/// [dIP; dTheta] = [[1, (*IP)], [0, Gamma]] x'. Throws GimbalSingularity.
PoseRate pose_rate(const Vec6& twist, const Pose& pose);

/// Inertial acceleration x'' of the point from the spatial acceleration.
Vec6 inertial_accel(const Vec6& spatial_accel, const Vec6& twist);

/// Forward model of one body seen from a reference point P with n child
/// points C_1..C_n. The body frame is the projection frame of every port.
class MultiPortBody {
 public:
  MultiPortBody(RigidBodyParams body, std::string reference_point,
                std::vector<std::string> child_points);

  struct Response {
    MotionVector18 at_reference;
    std::vector<MotionVector18> at_children;
    Vec6 total_wrench = Vec6::Zero();  // at the reference point
  };

  /// `wrench_reference` acts at P; `child_wrenches[k]` acts at C_k.
  Response respond(const Vec6& twist, const Pose& pose, const Vec6& wrench_reference,
                   const std::vector<Vec6>& child_wrenches, const Vec3& g_inertial,
                   FrameId frame = {}) const;

  const RigidBodyParams& body() const { return body_; }
  const Mat6& dynamic_model() const { return d_; }
  /// Offset CP (from child point to reference point) for child k.
  const Vec3& child_offset(std::size_t k) const { return offsets_.at(k); }
  std::size_t child_count() const { return offsets_.size(); }

 private:
  RigidBodyParams body_;
  std::string reference_;
  std::vector<std::string> children_;
  std::vector<Vec3> offsets_;
  Mat6 d_;
};

}  // namespace blockdyn
