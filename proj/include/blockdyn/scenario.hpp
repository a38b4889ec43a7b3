#pragma once

// Scenario description and its on-disk format (YAML, `schema_version: 1`).
// This layer only knows about data; build_system() in build_system.hpp turns
// a validated config into blocks.

#include "blockdyn/spatial.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace blockdyn {

struct SourceLocation {
  int line = 0;    // 1-based, 0 when unknown
  int column = 0;  // 1-based, 0 when unknown
};

struct ScenarioIssue {
  std::string path;  // e.g. "joints[1].axis"
  SourceLocation where;
  std::string message;

  std::string to_string() const;
};

/// Every problem found in a scenario, not just the first.
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<ScenarioIssue> issues);
  const std::vector<ScenarioIssue>& issues() const { return issues_; }

 private:
  std::vector<ScenarioIssue> issues_;
};

/// The scenario file could not be opened.
class ScenarioFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NamedPoint {
  std::string name;
  Vec3 position = Vec3::Zero();
};

struct BaseSpec {
  std::string reference_point;
  Vec6 twist = Vec6::Zero();     // [v; w] at the reference point, body frame
  Vec3 position = Vec3::Zero();  // reference point, inertial frame
  Vec3 attitude = Vec3::Zero();  // Euler angles in the scenario's sequence
};

struct BodySpec {
  std::string name;
  double mass = 0.0;
  Mat3 inertia = Mat3::Zero();
  Vec3 com = Vec3::Zero();
  std::vector<NamedPoint> points;
  std::optional<BaseSpec> base;
  SourceLocation where;

  const NamedPoint* point(const std::string& id) const;
};

struct AnchorSpec {
  std::string name;
  std::vector<NamedPoint> points;
  SourceLocation where;

  const NamedPoint* point(const std::string& id) const;
};

enum class ProfileKind { kNone, kConstant, kSine, kTable };

struct ProfileSpec {
  ProfileKind kind = ProfileKind::kNone;
  double value = 0.0;
  double amplitude = 0.0;
  double frequency = 0.0;  // Hz
  double phase = 0.0;      // rad
  std::vector<double> times;
  std::vector<double> values;

  /// Piecewise-linear tables are held constant outside their range.
  double at(double t) const;
};

struct DriveSpec {
  double stiffness = 0.0;
  double damping = 0.0;
  double rest = 0.0;
  ProfileSpec profile;

  double force(double q, double qd, double t) const;
};

enum class JointKind { kWeld, kRevolute, kPrismatic };

std::string to_string(JointKind kind);

struct JointSpec {
  std::string name;
  JointKind type = JointKind::kWeld;
  std::string parent;
  std::string parent_point;
  std::string child;
  std::string child_point;
  Vec3 axis = Vec3::UnitZ();            // as written, any non-zero length
  Mat3 orientation = Mat3::Identity();  // P_{a0/b}
  double q0 = 0.0;
  double qd0 = 0.0;
  DriveSpec drive;
  SourceLocation where;
};

enum class ForceKind { kConstantInertial, kConstantBody, kTabulated, kBuoyancy };

std::string to_string(ForceKind kind);

struct ForceSpec {
  std::string name;
  ForceKind kind = ForceKind::kConstantInertial;
  std::string body;
  std::string point;
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
  bool inertial = true;  // projection frame of tabulated samples
  std::vector<double> times;
  std::vector<Vec6> samples;
  SourceLocation where;
};

struct ClosureEndSpec {
  std::string body;
  std::string point;
};

struct ClosureSpec {
  std::string name;
  ClosureEndSpec left;
  ClosureEndSpec right;
  Mat6 stiffness = Mat6::Zero();
  Mat6 damping = Mat6::Zero();
  SourceLocation where;
};

struct OutputSpec {
  std::vector<std::string> dofs;  // empty: all
  int every = 1;
};

struct IntegrationSpec {
  double dt = 1e-3;
  double t_final = 1.0;
  std::string scheme = "rk4";
};

struct ScenarioConfig {
  int schema_version = 1;
  std::string name = "scenario";
  Vec3 gravity = Vec3::Zero();
  EulerSequence sequence = EulerSequence::kZYX;
  std::vector<BodySpec> bodies;
  std::vector<AnchorSpec> anchors;
  std::vector<JointSpec> joints;
  std::vector<ForceSpec> forces;
  std::vector<ClosureSpec> closures;
  OutputSpec outputs;
  IntegrationSpec integration;

  const BodySpec* body(const std::string& name) const;
  const AnchorSpec* anchor(const std::string& name) const;
  double total_mass() const;
};

inline constexpr int kSchemaVersion = 1;

/// Parses and validates; throws ScenarioError listing every issue found.
ScenarioConfig parse_scenario(const std::string& text);
/// Reads a file; throws ScenarioFileError when it cannot be opened.
ScenarioConfig load_scenario(const std::string& path);
/// Serializes in the canonical layout accepted by parse_scenario.
std::string emit_scenario(const ScenarioConfig& config);
/// Semantic checks on an already-built config (references, topology, ranges).
std::vector<ScenarioIssue> validate_scenario(const ScenarioConfig& config);

/// Output DOF names in state order: base bodies (x, y, z, phi, theta, psi)
/// in body order, then revolute and prismatic joints in joint order.
std::vector<std::string> scenario_dof_names(const ScenarioConfig& config);

}  // namespace blockdyn
