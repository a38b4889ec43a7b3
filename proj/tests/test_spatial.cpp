#include "blockdyn/spatial.hpp"
#include "generators.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace blockdyn;

namespace {

constexpr int kSamples = 1000;

void expect_near(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double tol) {
  ASSERT_EQ(a.rows(), b.rows());
  ASSERT_EQ(a.cols(), b.cols());
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), tol) << "a=\n" << a << "\nb=\n" << b;
}

}  // namespace

TEST(Skew, HandExample) {
  Mat3 expected;
  expected << 0, -3, 2, 3, 0, -1, -2, 1, 0;
  EXPECT_EQ(skew(Vec3(1, 2, 3)), expected);
  EXPECT_EQ(skew(Vec3::UnitX()) * Vec3::UnitY(), Vec3::UnitZ());
}

TEST(Skew, CrossProductProperties) {
  gen::Rng rng(11);
  for (int i = 0; i < kSamples; ++i) {
    const Vec3 a = rng.vec3(3), b = rng.vec3(3), c = rng.vec3(3);
    expect_near(skew(a) * b, a.cross(b), 1e-14);
    expect_near(skew(a) * b, -skew(b) * a, 1e-14);
    expect_near(skew(a) * a, Vec3::Zero(), 1e-14);
    // (*a)(*b)c = (*b)(*a)c - (*c)(*a)b
    expect_near(skew(a) * skew(b) * c, skew(b) * skew(a) * c - skew(c) * skew(a) * b, 1e-12);
  }
}

TEST(Dcm, RejectsNonOrthonormal) {
  Mat3 m = Mat3::Identity();
  m(0, 1) = 1e-6;
  EXPECT_THROW(Dcm::from_matrix(m), std::invalid_argument);
  EXPECT_THROW(Dcm::from_matrix(-Mat3::Identity()), std::invalid_argument);
  EXPECT_NO_THROW(Dcm::from_matrix(Mat3::Identity()));
  const Dcm fixed = Dcm::nearest(m);
  expect_near(fixed.matrix().transpose() * fixed.matrix(), Mat3::Identity(), 1e-14);
}

TEST(RotExp, Examples) {
  expect_near(rot_exp(Vec3::UnitZ(), 0.0).matrix(), Mat3::Identity(), 0.0);
  expect_near(rot_exp(Vec3::UnitZ(), M_PI / 2) * Vec3::UnitX(), Vec3::UnitY(), 1e-15);
  const double th = 0.7;
  expect_near((rot_exp(Vec3::UnitX(), th) * rot_exp(Vec3::UnitX(), -th)).matrix(),
              Mat3::Identity(), 1e-12);
  EXPECT_THROW(rot_exp(Vec3(1, 1, 0), 0.3), std::invalid_argument);
}

TEST(RotExp, OrthonormalForRandomAxes) {
  gen::Rng rng(12);
  for (int i = 0; i < kSamples; ++i) {
    const Mat3 r = rot_exp(rng.unit(), rng.uniform(-10, 10)).matrix();
    expect_near(r.transpose() * r, Mat3::Identity(), 1e-12);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
  }
}

TEST(Euler, ZeroIsIdentity) {
  for (auto seq : {EulerSequence::kZYX, EulerSequence::kXYZ}) {
    expect_near(euler_to_dcm({Vec3::Zero(), seq}).matrix(), Mat3::Identity(), 0.0);
    expect_near(gamma({Vec3::Zero(), seq}), Mat3::Identity(), 0.0);
  }
}

TEST(Euler, RoundtripExample) {
  for (auto seq : {EulerSequence::kZYX, EulerSequence::kXYZ}) {
    const Vec3 a(0.1, 0.2, 0.3);
    const EulerAngles back = dcm_to_euler(euler_to_dcm({a, seq}), seq);
    expect_near(back.angles, a, 1e-12);
  }
}

TEST(Euler, RoundtripRandom) {
  gen::Rng rng(13);
  const double max_pitch = 80.0 * M_PI / 180.0;
  for (auto seq : {EulerSequence::kZYX, EulerSequence::kXYZ}) {
    for (int i = 0; i < kSamples; ++i) {
      const Vec3 a = rng.euler(max_pitch);
      const EulerAngles back = dcm_to_euler(euler_to_dcm({a, seq}), seq);
      expect_near(back.angles, a, 1e-10);
    }
  }
}

TEST(Euler, SingularPitchThrows) {
  for (auto seq : {EulerSequence::kZYX, EulerSequence::kXYZ}) {
    const Dcm p = euler_to_dcm({Vec3(0.2, M_PI / 2, 0.1), seq});
    EXPECT_THROW(dcm_to_euler(p, seq), GimbalSingularity);
    EXPECT_THROW(gamma({Vec3(0.0, M_PI / 2, 0.0), seq}), GimbalSingularity);
    EXPECT_THROW(gamma({Vec3(0.0, M_PI / 2 - 5e-7, 0.0), seq}), GimbalSingularity);
    EXPECT_NO_THROW(gamma({Vec3(0.0, M_PI / 2 - 1e-4, 0.0), seq}));
  }
}

TEST(Euler, GammaMatchesFiniteDifference) {
  // Propagate the attitude with constant body rate and compare dTheta/dt.
  for (auto seq : {EulerSequence::kZYX, EulerSequence::kXYZ}) {
    const Vec3 w(0.1, 0.2, 0.3);
    const Vec3 a(0.3, -0.4, 1.1);
    const double dt = 1e-6;
    const Mat3 p0 = euler_to_dcm({a, seq}).matrix();
    const Mat3 plus = p0 * rot_exp(w.normalized(), w.norm() * dt).matrix();
    const Mat3 minus = p0 * rot_exp(w.normalized(), -w.norm() * dt).matrix();
    const Vec3 fd = (dcm_to_euler(Dcm::unchecked(plus), seq).angles -
                     dcm_to_euler(Dcm::unchecked(minus), seq).angles) /
                    (2 * dt);
    expect_near(fd, gamma({a, seq}) * w, 1e-8);
    expect_near(gamma({a, seq}) * gamma_inverse({a, seq}), Mat3::Identity(), 1e-12);
  }
}

TEST(Tau, IdentityCompositionInverse) {
  expect_near(tau(Vec3::Zero()).matrix(), Mat6::Identity(), 0.0);
  gen::Rng rng(14);
  for (int i = 0; i < 100; ++i) {
    const Vec3 pb = rng.vec3(2), bq = rng.vec3(2);
    expect_near(tau(pb).matrix() * tau(bq).matrix(), tau(pb + bq).matrix(), 1e-13);
    expect_near(tau(pb).matrix() * tau(pb).inverse().matrix(), Mat6::Identity(), 1e-13);
    const Mat6 t = tau(pb).matrix();
    expect_near(t.topLeftCorner<3, 3>(), Mat3::Identity(), 0.0);
    expect_near(t.bottomLeftCorner<3, 3>(), Mat3::Zero(), 0.0);
    expect_near(t.topRightCorner<3, 3>() + t.topRightCorner<3, 3>().transpose(), Mat3::Zero(), 0.0);
    const Vec6 x = rng.vec6();
    expect_near(tau(pb).apply(x), t * x, 1e-14);
    expect_near(tau(pb).apply_transpose(x), t.transpose() * x, 1e-14);
  }
}

TEST(Tau, WrenchMomentArm) {
  // Force [0,0,1] at C, P with PC = [1,0,0]: moving to P gives T = [0,-1,0].
  const Vec3 pc(1, 0, 0);
  Vec6 w;
  w << 0, 0, 1, 0, 0, 0;
  const Vec6 at_p = tau(-pc).apply_transpose(w);  // tau_{CP}, CP = -PC
  expect_near(at_p.tail<3>(), Vec3(0, -1, 0), 1e-15);
  expect_near(at_p.head<3>(), Vec3(0, 0, 1), 0.0);
}

TEST(TransportMotion, Examples) {
  MotionVector18 m;
  m.twist << 0, 0, 0, 0, 0, 1;
  const MotionVector18 same = transport_motion(m, Vec3::Zero());
  EXPECT_EQ(same.stacked(), m.stacked());
  // PC = [1,0,0] -> CP = [-1,0,0].
  const MotionVector18 c = transport_motion(m, Vec3(-1, 0, 0));
  expect_near(c.twist.head<3>(), Vec3(0, 1, 0), 1e-15);
  expect_near(c.position, Vec3(1, 0, 0), 1e-15);
}

TEST(TransportMotion, InverseRoundtrip) {
  gen::Rng rng(15);
  for (int i = 0; i < kSamples; ++i) {
    MotionVector18 m;
    m.accel = rng.vec6(2);
    m.twist = rng.vec6(2);
    m.position = rng.vec3(3);
    m.attitude = {rng.euler(), EulerSequence::kZYX};
    const Vec3 cp = rng.vec3(2);
    const MotionVector18 back = transport_motion(transport_motion(m, cp), -cp);
    expect_near(back.stacked(), m.stacked(), 1e-13);
    EXPECT_EQ(transport_motion(m, cp).attitude.angles, m.attitude.angles);
  }
}

TEST(Augment, Properties) {
  expect_near(augment2(Dcm::identity()), Mat12::Identity(), 0.0);
  expect_near(augment18(Dcm::identity()), Mat18::Identity(), 0.0);
  gen::Rng rng(16);
  const Dcm p = rng.dcm();
  expect_near(augment_dual(p).transpose() * augment_dual(p), Mat6::Identity(), 1e-14);
  expect_near(augment2(p).transpose() * augment2(p), Mat12::Identity(), 1e-14);
  MotionVector18 m;
  m.accel = rng.vec6();
  m.twist = rng.vec6();
  m.position = rng.vec3();
  m.attitude.angles = rng.euler();
  const Vec18 out = augment18(p) * m.stacked();
  EXPECT_EQ(out.tail<3>(), m.attitude.angles);
  const MotionVector18 r = reframe(m, p, FrameId{3});
  EXPECT_EQ(r.attitude.angles, m.attitude.angles);
  expect_near(r.stacked(), out, 1e-15);
  EXPECT_EQ(r.frame, FrameId{3});
}

TEST(Frames, MixingFramesIsReported) {
  const Twist a = Twist::from(Vec6::Ones(), FrameId{1});
  const Twist b = Twist::from(Vec6::Ones(), FrameId{2});
  EXPECT_THROW(a + b, FrameMismatch);
  EXPECT_NO_THROW(a + a);
  const Wrench wa = Wrench::from(Vec6::Ones(), FrameId{1});
  const Wrench wb = Wrench::from(Vec6::Ones(), FrameId{2});
  EXPECT_THROW(wa + wb, FrameMismatch);
}
