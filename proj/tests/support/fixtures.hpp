#pragma once

// Scenario texts shared by the test suites.

#include "blockdyn/scenario.hpp"

#include <string>

namespace fixtures {

inline std::string balloon_path() { return std::string(BLOCKDYN_SCENARIOS) + "/balloon.scn"; }

inline blockdyn::ScenarioConfig balloon() { return blockdyn::load_scenario(balloon_path()); }

/// Replaces every occurrence of `key` in `text`.
inline std::string subst(std::string text, const std::string& key, const std::string& value) {
  for (auto p = text.find(key); p != std::string::npos; p = text.find(key, p + value.size())) {
    text.replace(p, key.size(), value);
  }
  return text;
}

/// Free body with principal inertia diag(1, 2, 3) spinning at `omega`.
inline std::string tumbling_body(const std::string& omega = "[1, 0.5, -0.3]") {
  return subst(R"(schema_version: 1
name: tumbling
gravity: [0, 0, 0]
bodies:
  - name: body
    mass: 1
    inertia: [1, 2, 3]
    points: {O: [0, 0, 0]}
    base:
      reference_point: O
      twist: [0, 0, 0, OMEGA]
)",
               "OMEGA", omega.substr(1, omega.size() - 2));
}

/// Point pendulum of mass 2 kg and length 1.2 m, hinged to the ground.
inline std::string point_pendulum(double theta_deg, double damping = 0.0) {
  return subst(subst(R"(schema_version: 1
name: pendulum
gravity: [0, -9.81, 0]
anchors:
  - name: ground
    points: {O: [0, 0, 0]}
bodies:
  - name: pendulum1
    mass: 2
    inertia: 0
    com: [0, -1.2, 0]
    points: {S: [0, 0, 0]}
joints:
  - name: theta1
    type: revolute
    parent: ground
    parent_point: O
    child: pendulum1
    child_point: S
    axis: [0, 0, 1]
    initial: {position_deg: THETA}
    drive: {damping: DAMP}
)",
                     "THETA", std::to_string(theta_deg)),
               "DAMP", std::to_string(damping));
}

/// Ground-hinged double point pendulum with the balloon's pendulum values.
inline std::string double_pendulum(double theta1_deg = 170, double theta2_deg = -170,
                                   double damping = 0.0) {
  return subst(subst(subst(R"(schema_version: 1
name: double_pendulum
gravity: [0, -9.81, 0]
anchors:
  - name: ground
    points: {O: [0, 0, 0]}
bodies:
  - name: pendulum1
    mass: 2
    inertia: 0
    com: [0, -1.2, 0]
    points: {S: [0, 0, 0], P1: [0, -1.2, 0]}
  - name: pendulum2
    mass: 3
    inertia: 0
    com: [0, -1.6, 0]
    points: {P1: [0, 0, 0]}
joints:
  - name: theta1
    type: revolute
    parent: ground
    parent_point: O
    child: pendulum1
    child_point: S
    axis: [0, 0, 1]
    initial: {position_deg: T1}
    drive: {damping: DAMP}
  - name: theta2
    type: revolute
    parent: pendulum1
    parent_point: P1
    child: pendulum2
    child_point: P1
    axis: [0, 0, 1]
    initial: {position_deg: T2}
    drive: {damping: DAMP}
)",
                           "T1", std::to_string(theta1_deg)),
                     "T2", std::to_string(theta2_deg)),
               "DAMP", std::to_string(damping));
}

/// Unit mass on a grounded prismatic joint with a linear spring.
inline std::string spring_slider(double stiffness, double mass, double x0) {
  return subst(subst(subst(R"(schema_version: 1
name: spring_slider
gravity: [0, 0, 0]
anchors:
  - name: ground
    points: {O: [0, 0, 0]}
bodies:
  - name: slider
    mass: MASS
    inertia: 0
    points: {P: [0, 0, 0]}
joints:
  - name: x
    type: prismatic
    parent: ground
    parent_point: O
    child: slider
    child_point: P
    axis: [1, 0, 0]
    initial: {position: X0}
    drive: {stiffness: K}
)",
                           "MASS", std::to_string(mass)),
                     "X0", std::to_string(x0)),
               "K", std::to_string(stiffness));
}

/// Two free bodies joined by a revolute joint, no gravity, spinning.
inline std::string free_pair() {
  return R"(schema_version: 1
name: free_pair
gravity: [0, 0, 0]
bodies:
  - name: hub
    mass: 4
    inertia: [[2, 0.1, 0], [0.1, 3, 0.2], [0, 0.2, 2.5]]
    com: [0.1, 0, 0]
    points: {O: [0, 0, 0], H: [0.5, 0.2, 0]}
    base:
      reference_point: O
      twist: [0.3, -0.2, 0.1, 0.4, -0.5, 0.9]
      position: [1, 2, 3]
      attitude: [0.2, 0.1, -0.3]
  - name: arm
    mass: 1.5
    inertia: [0.2, 0.3, 0.1]
    com: [0, -0.8, 0]
    points: {A: [0, 0, 0]}
joints:
  - name: hinge
    type: revolute
    parent: hub
    parent_point: H
    child: arm
    child_point: A
    axis: [0.2, 0.1, 1]
    initial: {position: 0.4, rate: 2}
)";
}

}  // namespace fixtures
