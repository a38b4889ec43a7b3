#pragma once

// Frames, rotations, Euler-angle kinematics and the transport operators that
// move twists, wrenches and motion vectors between points of a rigid body.
//
// Conventions:
//   * A DCM P_{a/b} holds the axes of frame a expressed in frame b, so that
//     [v]_b = P_{a/b} [v]_a.
//   * Dual vectors stack the translational part first: twist [v; w],
//     wrench [F; T], spatial acceleration [dv; dw].
//   * The 18-component motion vector stacks spatial acceleration, twist,
//     position of the point and Euler angles of the body frame.

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace blockdyn {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat12 = Eigen::Matrix<double, 12, 12>;
using Vec18 = Eigen::Matrix<double, 18, 1>;
using Mat18 = Eigen::Matrix<double, 18, 18>;

/// Raised when an Euler chart is evaluated at (or too close to) its singular
/// middle angle.
class GimbalSingularity : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when quantities projected in different frames are combined.
class FrameMismatch : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Projection-frame tag carried by twists, wrenches and motion vectors.
struct FrameId {
  int value = -1;
  friend bool operator==(FrameId, FrameId) = default;
};

inline constexpr FrameId kInertialFrame{0};

void require_same_frame(FrameId a, FrameId b, const char* context);

/// Distance (rad) from the chart singularity below which conversions refuse
/// to run.
inline constexpr double kSingularityMargin = 1e-6;

/// Skew-symmetric matrix (*v) such that (*v) w = v x w.
Mat3 skew(const Vec3& v);

/// Orthonormal, right-handed 3x3 rotation matrix.
class Dcm {
 public:
  Dcm() : m_(Mat3::Identity()) {}

  /// Validates orthonormality and det = +1 within `tol`.
  static Dcm from_matrix(const Mat3& m, double tol = 1e-12);
  /// Nearest rotation (polar decomposition) of an almost-orthonormal matrix.
  static Dcm nearest(const Mat3& m);
  /// No validation; for products of valid DCMs.
  static Dcm unchecked(const Mat3& m) { return Dcm(m); }
  static Dcm identity() { return Dcm(); }

  const Mat3& matrix() const { return m_; }
  Dcm transpose() const { return Dcm(m_.transpose()); }

  Dcm operator*(const Dcm& o) const { return Dcm(m_ * o.m_); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

 private:
  explicit Dcm(const Mat3& m) : m_(m) {}
  Mat3 m_;
};

/// Rodrigues formula exp(angle * (*axis)). The axis must be unit within 1e-9.
Dcm rot_exp(const Vec3& axis, double angle);

/// Supported rotation sequences. For both, angles() stores the rotation about
/// x, y, z in that order; the middle (y) rotation is the singular one.
///   kZYX ("321"): P_{b/i} = Rz(psi) Ry(theta) Rx(phi)
///   kXYZ ("123"): P_{b/i} = Rx(a) Ry(b) Rz(c)
enum class EulerSequence { kZYX, kXYZ };

std::string to_string(EulerSequence seq);
/// Accepts "321"/"zyx" and "123"/"xyz".
EulerSequence parse_euler_sequence(const std::string& text);

struct EulerAngles {
  Vec3 angles = Vec3::Zero();
  EulerSequence sequence = EulerSequence::kZYX;

  double pitch() const { return angles.y(); }
};

/// P_{b/i}(Theta).
Dcm euler_to_dcm(const EulerAngles& theta);
/// Theta(P_{b/i}); throws GimbalSingularity near the middle-angle singularity.
EulerAngles dcm_to_euler(const Dcm& p, EulerSequence seq = EulerSequence::kZYX);

/// Gamma(Theta) with dTheta/dt = Gamma(Theta) [w]_body.
Mat3 gamma(const EulerAngles& theta);
/// Inverse of gamma: [w]_body = gamma_inverse(Theta) dTheta/dt. Defined everywhere.
Mat3 gamma_inverse(const EulerAngles& theta);

struct Twist {
  Vec3 v = Vec3::Zero();
  Vec3 w = Vec3::Zero();
  FrameId frame{};

  Vec6 stacked() const;
  static Twist from(const Vec6& x, FrameId frame = {});
  Twist operator+(const Twist& o) const;
};

struct SpatialAccel {
  Vec3 dv = Vec3::Zero();
  Vec3 dw = Vec3::Zero();
  FrameId frame{};

  Vec6 stacked() const;
  static SpatialAccel from(const Vec6& x, FrameId frame = {});
};

struct Wrench {
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
  FrameId frame{};

  Vec6 stacked() const;
  static Wrench from(const Vec6& x, FrameId frame = {});
  Wrench operator+(const Wrench& o) const;
  Wrench operator-() const { return {-force, -torque, frame}; }
};

struct Pose {
  Vec3 position = Vec3::Zero();  // vector IP projected in the motion frame
  EulerAngles attitude;
};

/// Stacked [accel; twist; position; Euler angles] of one body at one point.
struct MotionVector18 {
  Vec6 accel = Vec6::Zero();
  Vec6 twist = Vec6::Zero();
  Vec3 position = Vec3::Zero();
  EulerAngles attitude;
  FrameId frame{};

  SpatialAccel spatial_accel() const { return SpatialAccel::from(accel, frame); }
  Twist twist_value() const { return Twist::from(twist, frame); }
  Pose pose() const { return {position, attitude}; }

  Vec18 stacked() const;
  static MotionVector18 from(const Vec18& m, EulerSequence seq, FrameId frame = {});
};

/// The 6x6 kinematic model tau_{XY} = [[1, (*XY)], [0, 1]] built from the
/// vector XY. It moves twists from Y to X and, transposed, wrenches from X
/// to Y.
class KinematicTransport {
 public:
  explicit KinematicTransport(const Vec3& offset) : offset_(offset) {}

  const Vec3& offset() const { return offset_; }
  Mat6 matrix() const;
  KinematicTransport inverse() const { return KinematicTransport(-offset_); }

  /// tau * x (twist or spatial acceleration).
  Vec6 apply(const Vec6& x) const;
  /// tau^T * w (wrench).
  Vec6 apply_transpose(const Vec6& w) const;

  Twist twist(const Twist& x) const { return Twist::from(apply(x.stacked()), x.frame); }
  Wrench wrench(const Wrench& w) const {
    return Wrench::from(apply_transpose(w.stacked()), w.frame);
  }

 private:
  Vec3 offset_;
};

KinematicTransport tau(const Vec3& offset);

/// Motion-vector transport upsilon_{CP}: given the motion at P and the vector
/// CP, returns the motion at C of the same rigid body.
MotionVector18 transport_motion(const MotionVector18& m, const Vec3& offset_cp);

/// diag(P, P).
Mat12 augment2(const Dcm& p);
Mat6 augment_dual(const Dcm& p);
/// diag(P, P, P, P, P, 1_3).
Mat18 augment18(const Dcm& p);

/// Projects a motion vector with P^18: the first 15 components are rotated by
/// `p` (mapping source-frame components to `target` components); the Euler
/// angles are left untouched.
MotionVector18 reframe(const MotionVector18& m, const Dcm& p, FrameId target);

}  // namespace blockdyn
