#pragma once

// Blocks and the system graph that wires them. A block is an immutable
// description (parameters, ports, state layout); the evolving state lives in
// the state vector handed to the assembled System.

#include "blockdyn/joints.hpp"
#include "blockdyn/rigid_body.hpp"
#include "blockdyn/spatial.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace blockdyn {

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scalar force/torque law driving one joint DOF:
///   u = -k (q - rest) - d qd + profile(t) + custom(q, qd, t).
struct DriveLaw {
  double stiffness = 0.0;
  double damping = 0.0;
  double rest = 0.0;
  std::function<double(double)> profile;
  std::function<double(double, double, double)> custom;

  double force(double q, double qd, double t) const;
  double potential(double q) const;
  double dissipation_power(double qd) const;
  /// Power of the profile and custom parts, counted as external work.
  double actuation_power(double q, double qd, double t) const;
};

enum class LoadKind {
  kInertialForce,  // constant force fixed in the inertial frame (conservative)
  kBodyWrench,     // constant wrench fixed in the body frame
  kTabulated,      // time series, linearly interpolated, held at the ends
};

struct ExternalLoad {
  std::string name;
  LoadKind kind = LoadKind::kInertialForce;
  std::string point;
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
  bool inertial = true;  // projection frame of tabulated samples
  std::vector<double> times;
  std::vector<Vec6> samples;

  /// [F; T] at the load point in the load's own projection frame.
  Vec6 wrench_at(double t) const;
};

enum class BlockKind { kAnchor, kBase, kJoint, kLoopClosure };

enum class PortKind { kMotionIn, kMotionOut, kWrenchIn, kWrenchOut, kDriveIn, kJointMotionOut };

struct Port {
  PortKind kind;
  std::string point;
};

class Block {
 public:
  explicit Block(std::string name) : name_(std::move(name)) {}
  virtual ~Block() = default;

  const std::string& name() const { return name_; }
  virtual BlockKind kind() const = 0;
  virtual int state_size() const = 0;
  /// Number of fast unknowns the block contributes to the assembled system.
  virtual int fast_size() const = 0;
  virtual Eigen::VectorXd initial_state() const = 0;
  virtual std::vector<std::string> dof_names() const = 0;
  virtual std::vector<Port> ports() const = 0;
  /// Whether `point` is a point where other blocks may attach.
  virtual bool has_point(const std::string& point) const = 0;

 private:
  std::string name_;
};

/// Clamped ground: emits the zero motion vector with the inertial attitude
/// at fixed inertial points.
class AnchorBlock final : public Block {
 public:
  AnchorBlock(std::string name, std::map<std::string, Vec3> points);

  BlockKind kind() const override { return BlockKind::kAnchor; }
  int state_size() const override { return 0; }
  int fast_size() const override { return 0; }
  Eigen::VectorXd initial_state() const override { return {}; }
  std::vector<std::string> dof_names() const override { return {}; }
  std::vector<Port> ports() const override;
  bool has_point(const std::string& point) const override;

  const Vec3& point(const std::string& id) const;

 private:
  std::map<std::string, Vec3> points_;
};

struct BaseInitial {
  Vec6 twist = Vec6::Zero();      // at the reference point, body frame
  Vec3 position = Vec3::Zero();   // [IP]_b
  Vec3 attitude = Vec3::Zero();   // Euler angles
};

/// Free-floating body with 12 states [x'; IP; Theta] at its reference point.
class BaseBlock final : public Block {
 public:
  BaseBlock(RigidBodyParams body, std::string reference_point, BaseInitial initial);

  BlockKind kind() const override { return BlockKind::kBase; }
  int state_size() const override { return 12; }
  int fast_size() const override { return 6; }
  Eigen::VectorXd initial_state() const override;
  std::vector<std::string> dof_names() const override;
  std::vector<Port> ports() const override;
  bool has_point(const std::string& point) const override;

  const RigidBodyParams& body() const { return body_; }
  const std::string& reference_point() const { return reference_; }
  const Mat6& dynamic_model() const { return d_; }
  const Mat6& dynamic_model_inverse() const { return d_inv_; }

 private:
  RigidBodyParams body_;
  std::string reference_;
  BaseInitial initial_;
  Mat6 d_;
  Mat6 d_inv_;
};

/// Child body with its joint to the parent (weld, revolute or prismatic).
class JointBlock final : public Block {
 public:
  JointBlock(Joint joint, double q0, double qd0, DriveLaw drive);

  BlockKind kind() const override { return BlockKind::kJoint; }
  int state_size() const override { return 2 * joint_.dof(); }
  int fast_size() const override { return joint_.dof() + 6; }
  Eigen::VectorXd initial_state() const override;
  std::vector<std::string> dof_names() const override;
  std::vector<Port> ports() const override;
  bool has_point(const std::string& point) const override;

  const Joint& joint() const { return joint_; }
  const DriveLaw& drive() const { return drive_; }

 private:
  Joint joint_;
  double q0_;
  double qd0_;
  DriveLaw drive_;
};

/// Spring-damper between two chain ends; no state, no fast unknowns.
class LoopClosureBlock final : public Block {
 public:
  explicit LoopClosureBlock(LoopClosureParams params);

  BlockKind kind() const override { return BlockKind::kLoopClosure; }
  int state_size() const override { return 0; }
  int fast_size() const override { return 0; }
  Eigen::VectorXd initial_state() const override { return {}; }
  std::vector<std::string> dof_names() const override { return {}; }
  std::vector<Port> ports() const override;
  bool has_point(const std::string&) const override { return false; }

  const LoopClosureParams& params() const { return params_; }

 private:
  LoopClosureParams params_;
};

/// Blocks plus their wiring, before assembly.
class SystemGraph {
 public:
  explicit SystemGraph(Vec3 gravity = Vec3::Zero(),
                       EulerSequence sequence = EulerSequence::kZYX);

  int add(std::shared_ptr<const Block> block);
  /// Wires the parent port of joint block `child` to `parent` at `parent_point`.
  void connect(int parent, const std::string& parent_point, int child);
  void add_load(int block, ExternalLoad load);
  void close_loop(int closure, int left, const std::string& left_point, int right,
                  const std::string& right_point);

  struct Connection {
    int parent = -1;
    std::string parent_point;
    int child = -1;
  };
  struct LoadBinding {
    int block = -1;
    ExternalLoad load;
  };
  struct ClosureBinding {
    int closure = -1;
    int left = -1;
    std::string left_point;
    int right = -1;
    std::string right_point;
  };

  const Vec3& gravity() const { return gravity_; }
  EulerSequence sequence() const { return sequence_; }
  const std::vector<std::shared_ptr<const Block>>& blocks() const { return blocks_; }
  const std::vector<Connection>& connections() const { return connections_; }
  const std::vector<LoadBinding>& loads() const { return loads_; }
  const std::vector<ClosureBinding>& closures() const { return closures_; }
  int find(const std::string& name) const;

 private:
  void check_index(int i, const char* what) const;

  Vec3 gravity_;
  EulerSequence sequence_;
  std::vector<std::shared_ptr<const Block>> blocks_;
  std::vector<Connection> connections_;
  std::vector<LoadBinding> loads_;
  std::vector<ClosureBinding> closures_;
};

}  // namespace blockdyn
