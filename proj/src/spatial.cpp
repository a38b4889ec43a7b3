#include "blockdyn/spatial.hpp"

#include <cmath>
#include <numbers>

namespace blockdyn {

void require_same_frame(FrameId a, FrameId b, const char* context) {
  if (a != b) {
    throw FrameMismatch(std::string(context) + ": frame " + std::to_string(a.value) +
                        " combined with frame " + std::to_string(b.value));
  }
}

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return s;
}

Dcm Dcm::from_matrix(const Mat3& m, double tol) {
  if (!m.allFinite()) {
    throw std::invalid_argument("DCM has non-finite entries");
  }
  const double ortho = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho > tol) {
    throw std::invalid_argument("matrix is not orthonormal (max |P^T P - 1| = " +
                                std::to_string(ortho) + ")");
  }
  if (std::abs(m.determinant() - 1.0) > tol) {
    throw std::invalid_argument("matrix is not a proper rotation (det != +1)");
  }
  return Dcm(m);
}

Dcm Dcm::nearest(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Mat3 u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return Dcm(r);
}

Dcm rot_exp(const Vec3& axis, double angle) {
  if (std::abs(axis.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("rotation axis must be a unit vector");
  }
  const Mat3 k = skew(axis);
  return Dcm::unchecked(Mat3::Identity() + std::sin(angle) * k +
                        (1.0 - std::cos(angle)) * (k * k));
}

std::string to_string(EulerSequence seq) {
  return seq == EulerSequence::kZYX ? "321" : "123";
}

EulerSequence parse_euler_sequence(const std::string& text) {
  if (text == "321" || text == "zyx" || text == "ZYX") return EulerSequence::kZYX;
  if (text == "123" || text == "xyz" || text == "XYZ") return EulerSequence::kXYZ;
  throw std::invalid_argument("unknown Euler sequence '" + text + "' (expected 321 or 123)");
}

namespace {

Mat3 rx(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

Mat3 ry(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

Mat3 rz(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

void check_pitch(double pitch) {
  if (std::abs(std::cos(pitch)) < std::sin(kSingularityMargin)) {
    throw GimbalSingularity("Euler chart singular: pitch " + std::to_string(pitch) +
                            " rad is within 1e-6 rad of +/-pi/2");
  }
}

}  // namespace

Dcm euler_to_dcm(const EulerAngles& theta) {
  const Vec3& a = theta.angles;
  if (theta.sequence == EulerSequence::kZYX) {
    return Dcm::unchecked(rz(a.z()) * ry(a.y()) * rx(a.x()));
  }
  return Dcm::unchecked(rx(a.x()) * ry(a.y()) * rz(a.z()));
}

EulerAngles dcm_to_euler(const Dcm& dcm, EulerSequence seq) {
  const Mat3& p = dcm.matrix();
  EulerAngles out;
  out.sequence = seq;
  if (seq == EulerSequence::kZYX) {
    const double pitch = std::atan2(-p(2, 0), std::hypot(p(0, 0), p(1, 0)));
    check_pitch(pitch);
    out.angles = {std::atan2(p(2, 1), p(2, 2)), pitch, std::atan2(p(1, 0), p(0, 0))};
  } else {
    const double pitch = std::atan2(p(0, 2), std::hypot(p(1, 2), p(2, 2)));
    check_pitch(pitch);
    out.angles = {std::atan2(-p(1, 2), p(2, 2)), pitch, std::atan2(-p(0, 1), p(0, 0))};
  }
  return out;
}

Mat3 gamma(const EulerAngles& theta) {
  const Vec3& a = theta.angles;
  check_pitch(a.y());
  Mat3 g;
  if (theta.sequence == EulerSequence::kZYX) {
    const double sphi = std::sin(a.x()), cphi = std::cos(a.x());
    const double ct = std::cos(a.y()), tt = std::tan(a.y());
    g << 1.0, sphi * tt, cphi * tt,
         0.0, cphi, -sphi,
         0.0, sphi / ct, cphi / ct;
  } else {
    const double sc = std::sin(a.z()), cc = std::cos(a.z());
    const double cb = std::cos(a.y()), tb = std::tan(a.y());
    g << cc / cb, -sc / cb, 0.0,
         sc, cc, 0.0,
         -tb * cc, tb * sc, 1.0;
  }
  return g;
}

Mat3 gamma_inverse(const EulerAngles& theta) {
  const Vec3& a = theta.angles;
  Mat3 b;
  if (theta.sequence == EulerSequence::kZYX) {
    const double sphi = std::sin(a.x()), cphi = std::cos(a.x());
    const double st = std::sin(a.y()), ct = std::cos(a.y());
    b << 1.0, 0.0, -st,
         0.0, cphi, sphi * ct,
         0.0, -sphi, cphi * ct;
  } else {
    const double sc = std::sin(a.z()), cc = std::cos(a.z());
    const double sb = std::sin(a.y()), cb = std::cos(a.y());
    b << cb * cc, sc, 0.0,
         -cb * sc, cc, 0.0,
         sb, 0.0, 1.0;
  }
  return b;
}

Vec6 Twist::stacked() const {
  Vec6 x;
  x << v, w;
  return x;
}

Twist Twist::from(const Vec6& x, FrameId frame) {
  return {x.head<3>(), x.tail<3>(), frame};
}

Twist Twist::operator+(const Twist& o) const {
  require_same_frame(frame, o.frame, "twist sum");
  return {v + o.v, w + o.w, frame};
}

Vec6 SpatialAccel::stacked() const {
  Vec6 x;
  x << dv, dw;
  return x;
}

SpatialAccel SpatialAccel::from(const Vec6& x, FrameId frame) {
  return {x.head<3>(), x.tail<3>(), frame};
}

Vec6 Wrench::stacked() const {
  Vec6 x;
  x << force, torque;
  return x;
}

Wrench Wrench::from(const Vec6& x, FrameId frame) {
  return {x.head<3>(), x.tail<3>(), frame};
}

Wrench Wrench::operator+(const Wrench& o) const {
  require_same_frame(frame, o.frame, "wrench sum");
  return {force + o.force, torque + o.torque, frame};
}

Vec18 MotionVector18::stacked() const {
  Vec18 m;
  m << accel, twist, position, attitude.angles;
  return m;
}

MotionVector18 MotionVector18::from(const Vec18& m, EulerSequence seq, FrameId frame) {
  MotionVector18 out;
  out.accel = m.segment<6>(0);
  out.twist = m.segment<6>(6);
  out.position = m.segment<3>(12);
  out.attitude = {m.segment<3>(15), seq};
  out.frame = frame;
  return out;
}

Mat6 KinematicTransport::matrix() const {
  Mat6 t = Mat6::Identity();
  t.topRightCorner<3, 3>() = skew(offset_);
  return t;
}

Vec6 KinematicTransport::apply(const Vec6& x) const {
  Vec6 out = x;
  out.head<3>() += offset_.cross(x.tail<3>());
  return out;
}

Vec6 KinematicTransport::apply_transpose(const Vec6& w) const {
  Vec6 out = w;
  out.tail<3>() -= offset_.cross(w.head<3>());
  return out;
}

KinematicTransport tau(const Vec3& offset) { return KinematicTransport(offset); }

MotionVector18 transport_motion(const MotionVector18& m, const Vec3& offset_cp) {
  const KinematicTransport t(offset_cp);
  MotionVector18 out = m;
  out.accel = t.apply(m.accel);
  out.twist = t.apply(m.twist);
  out.position = m.position - offset_cp;
  return out;
}

Mat12 augment2(const Dcm& p) {
  Mat12 a = Mat12::Zero();
  a.topLeftCorner<6, 6>() = augment_dual(p);
  a.bottomRightCorner<6, 6>() = augment_dual(p);
  return a;
}

Mat6 augment_dual(const Dcm& p) {
  Mat6 a = Mat6::Zero();
  a.topLeftCorner<3, 3>() = p.matrix();
  a.bottomRightCorner<3, 3>() = p.matrix();
  return a;
}

Mat18 augment18(const Dcm& p) {
  Mat18 a = Mat18::Zero();
  for (int k = 0; k < 5; ++k) a.block<3, 3>(3 * k, 3 * k) = p.matrix();
  a.bottomRightCorner<3, 3>() = Mat3::Identity();
  return a;
}

MotionVector18 reframe(const MotionVector18& m, const Dcm& p, FrameId target) {
  const Mat6 p2 = augment_dual(p);
  MotionVector18 out;
  out.accel = p2 * m.accel;
  out.twist = p2 * m.twist;
  out.position = p * m.position;
  out.attitude = m.attitude;
  out.frame = target;
  return out;
}

}  // namespace blockdyn
