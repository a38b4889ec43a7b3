#pragma once

// Hand-rolled random generators for property tests. Deterministic per seed.

#include "blockdyn/rigid_body.hpp"
#include "blockdyn/spatial.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <string>

namespace gen {

using namespace blockdyn;

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 20240917) : engine_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

  Vec3 vec3(double scale = 1.0) {
    return Vec3(uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale));
  }
  Vec6 vec6(double scale = 1.0) {
    Vec6 v;
    for (int i = 0; i < 6; ++i) v(i) = uniform(-scale, scale);
    return v;
  }
  Vec3 unit() {
    Vec3 v;
    do {
      v = vec3();
    } while (v.norm() < 1e-3 || v.norm() > 1.0);
    return v.normalized();
  }
  Dcm dcm(double max_angle = M_PI) { return rot_exp(unit(), uniform(-max_angle, max_angle)); }

  /// Euler angles with |pitch| below `max_pitch`.
  Vec3 euler(double max_pitch = 1.3) {
    return Vec3(uniform(-M_PI, M_PI), uniform(-max_pitch, max_pitch), uniform(-M_PI, M_PI));
  }

  /// Physical inertia: rotated diagonal with moments obeying the triangle inequality.
  Mat3 inertia() {
    const double a = uniform(0.2, 3.0), b = uniform(0.2, 3.0);
    const double c = uniform(std::abs(a - b) + 0.05, a + b);
    const Mat3 r = dcm().matrix();
    return r * Vec3(a, b, c).asDiagonal() * r.transpose();
  }

  RigidBodyParams body(const std::string& name = "body") {
    RigidBodyParams b;
    b.name = name;
    b.mass = uniform(0.5, 5.0);
    b.inertia = inertia();
    b.com = vec3(0.5);
    b.points["P"] = vec3(1.0);
    b.points["C"] = vec3(1.0);
    b.points["C2"] = vec3(1.0);
    return b;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gen
