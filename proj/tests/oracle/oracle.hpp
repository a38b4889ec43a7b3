#pragma once

// Minimal-coordinate reference model for open-chain scenarios. It reads the
// same ScenarioConfig as the engine but rebuilds kinematics, energies and
// generalized forces from scratch; nothing here touches blocks, joints or the
// assembled system.
//
// Coordinates: per base body [r (inertial position of the reference point),
// Euler angles], then one coordinate per revolute/prismatic joint, in the
// order of scenario_dof_names().

#include "blockdyn/scenario.hpp"

#include <Eigen/Dense>

#include <string>
#include <type_traits>
#include <vector>

namespace oracle {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Inertial-frame placement and motion of one body frame.
struct BodyFrame {
  Mat3 rotation = Mat3::Identity();     // body components -> inertial
  Vec3 origin = Vec3::Zero();           // body frame origin
  Vec3 omega = Vec3::Zero();            // angular velocity
  Vec3 origin_velocity = Vec3::Zero();  // velocity of the material point at the origin

  Vec3 point(const Vec3& x) const { return origin + rotation * x; }
  Vec3 velocity(const Vec3& x) const { return origin_velocity + omega.cross(rotation * x); }
};

Mat3 euler_rotation(const Vec3& angles, blockdyn::EulerSequence seq);
/// Inertial angular velocity for Euler angle rates.
Vec3 euler_omega(const Vec3& angles, const Vec3& rates, blockdyn::EulerSequence seq);

class MinimalModel {
 public:
  /// Throws std::invalid_argument for closed chains (closures).
  explicit MinimalModel(blockdyn::ScenarioConfig config);

  int size() const { return n_; }
  const std::vector<std::string>& dof_names() const { return names_; }
  const blockdyn::ScenarioConfig& config() const { return config_; }
  Vec initial_q() const;
  Vec initial_qd() const;

  /// One frame per config body, same order.
  std::vector<BodyFrame> kinematics(const Vec& q, const Vec& qd) const;

  double kinetic_energy(const Vec& q, const Vec& qd) const;
  /// Gravity, constant inertial forces (buoyancy included) and drive springs.
  double potential_energy(const Vec& q) const;
  double gravity_potential(const Vec& q) const;

  /// M_ij from T by polarization: exact for a quadratic form in qd.
  Mat mass_matrix(const Vec& q) const;
  /// d/dt(dT/dqd) - dT/dq evaluated at qdd = 0.
  Vec bias(const Vec& q, const Vec& qd) const;
  /// Everything except gravity: applied loads by virtual work, drive laws.
  Vec applied_forces(const Vec& q, const Vec& qd, double t) const;
  /// -dV_gravity/dq.
  Vec gravity_forces(const Vec& q) const;
  Vec accel(const Vec& q, const Vec& qd, double t) const;

  Vec3 linear_momentum(const Vec& q, const Vec& qd) const;
  Vec3 angular_momentum(const Vec& q, const Vec& qd) const;

 private:
  struct Link {
    int body = -1;          // index in config.bodies
    int parent_body = -1;   // -1 when the parent is an anchor or none
    int joint = -1;         // index in config.joints, -1 for a base
    int coord = -1;         // first coordinate
    Vec3 parent_point = Vec3::Zero();  // parent body coords, or inertial for anchors
    Vec3 child_point = Vec3::Zero();
    Vec3 reference = Vec3::Zero();     // base reference point, body coords
  };

  Vec3 point_of(int body, const std::string& name) const;

  blockdyn::ScenarioConfig config_;
  std::vector<Link> order_;  // parents first
  std::vector<std::string> names_;
  int n_ = 0;
};

struct Sample {
  double t = 0.0;
  Vec q;
  Vec qd;
};

/// Classic RK4 on (q, qd); keeps every `every`-th step and the last one.
std::vector<Sample> integrate_rk4(const MinimalModel& model, const Vec& q0, const Vec& qd0,
                                  double dt, double t_final, int every = 1);

/// Fourth-order central difference of f at x along unit step h.
template <typename F>
auto central_diff(const F& f, double h) -> std::decay_t<decltype(f(0.0))> {
  using T = std::decay_t<decltype(f(0.0))>;
  const T a = f(-2.0 * h), b = f(-h), c = f(h), d = f(2.0 * h);
  return T((a - 8.0 * b + 8.0 * c - d) / (12.0 * h));
}

namespace analytic {

double small_angle_period(double length, double g);
/// 4 sqrt(L/g) K(sin(amplitude/2)), K by adaptive Simpson quadrature.
double pendulum_period(double length, double g, double amplitude);
double complete_elliptic_k(double k);
double oscillator_frequency(double stiffness, double mass);
/// Body-frame precession rate of a torque-free symmetric top.
double top_precession_rate(double i_transverse, double i_axial, double spin);

/// Mean interval between successive upward zero crossings of `values`,
/// located by linear interpolation. Returns 0 with fewer than two crossings.
double measured_period(const std::vector<double>& t, const std::vector<double>& values);

}  // namespace analytic

}  // namespace oracle
