#pragma once

// Assembled system: state layout, the per-evaluation fast system in the
// stacked unknowns (base spatial accelerations, joint accelerations and
// joint wrenches) and the resulting state derivative.

#include "blockdyn/affine.hpp"
#include "blockdyn/block.hpp"
#include "blockdyn/joints.hpp"

#include <Eigen/Dense>

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace blockdyn {

/// The fast system has no unique solution; the message names a block.
class SingularSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-body results of one evaluation (anchors and closures included with
/// zero motion).
struct BlockResult {
  Dcm to_inertial;
  Vec6 twist = Vec6::Zero();     // at the reference point, own frame
  Vec3 position = Vec3::Zero();  // [I ref]_own
  Vec6 accel = Vec6::Zero();     // spatial acceleration at the reference point
  double q = 0.0;
  double qd = 0.0;
  double qdd = 0.0;
  double drive = 0.0;
  Vec6 parent_wrench = Vec6::Zero();  // W_{A/B} at the parent point, parent frame
  Vec6 wrench_at_p = Vec6::Zero();    // W_{A/B,P}, own frame
};

struct Evaluation {
  double t = 0.0;
  Eigen::VectorXd rate;
  double dissipation_power = 0.0;
  double actuation_power = 0.0;
  Eigen::VectorXd fast;
  std::vector<BlockResult> blocks;
  std::vector<ClosureResult> closures;
  double closure_drift = 0.0;
};

struct EnergyTerms {
  double kinetic = 0.0;
  double gravity = 0.0;   // -sum m g . r_com
  double springs = 0.0;   // joint drive springs
  double loads = 0.0;     // constant inertial forces, -F . r_point
  double closures = 0.0;  // closure springs
  double potential() const { return gravity + springs + loads + closures; }
  double total() const { return kinetic + potential(); }
};

struct FastSystem {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;  // residual(f) = a f + b
};

class System {
 public:
  /// Validates the graph and fixes the state and fast layouts.
  explicit System(const SystemGraph& graph);

  int state_size() const { return state_size_; }
  int fast_size() const { return fast_size_; }
  int block_count() const { return static_cast<int>(nodes_.size()); }
  const Block& block(int i) const { return *nodes_.at(i).block; }
  int find(const std::string& name) const;
  int state_offset(int block) const { return nodes_.at(block).state_offset; }
  int fast_offset(int block) const { return nodes_.at(block).fast_offset; }
  const Vec3& gravity() const { return gravity_; }
  EulerSequence sequence() const { return sequence_; }

  Eigen::VectorXd initial_state() const;
  const std::vector<std::string>& dof_names() const { return dof_names_; }
  /// Base inertial position and Euler angles, then joint coordinates.
  Eigen::VectorXd dofs(const Eigen::VectorXd& state) const;
  /// true for velocity-like entries of the state (twists, joint rates).
  const std::vector<bool>& velocity_mask() const { return velocity_mask_; }

  Eigen::VectorXd derivative(double t, const Eigen::VectorXd& state) const;
  /// `details` fills per-block accelerations and wrenches and closure data.
  Evaluation evaluate(double t, const Eigen::VectorXd& state, bool details = true) const;
  FastSystem fast_system(double t, const Eigen::VectorXd& state) const;
  /// Solves a f + b = 0 after row equilibration. Throws SingularSystem naming
  /// the block that owns the dominant entry of the null space.
  Eigen::VectorXd solve_fast(const FastSystem& fs) const;
  /// Residuals re-evaluated block by block at the given fast values.
  Eigen::VectorXd residual(double t, const Eigen::VectorXd& state,
                           const Eigen::VectorXd& fast) const;

  EnergyTerms energy(double t, const Eigen::VectorXd& state) const;
  /// Total linear momentum and angular momentum about the inertial origin,
  /// both in inertial components.
  std::pair<Vec3, Vec3> momentum(const Eigen::VectorXd& state) const;

  /// Joint-space mass matrix of a clamped-base system, obtained by probing
  /// the fast system with unit drive inputs at zero velocity and gravity.
  Eigen::MatrixXd joint_space_mass_matrix(const Eigen::VectorXd& state) const;

  /// Motion vector of a body block at one of its points, own frame.
  MotionVector18 motion_at(const Evaluation& eval, int block, const std::string& point) const;
  /// Inertial position of a body point.
  Vec3 point_position(const Eigen::VectorXd& state, int block, const std::string& point) const;

 private:
  struct Node {
    std::shared_ptr<const Block> block;
    const BaseBlock* base = nullptr;
    const JointBlock* joint = nullptr;
    const AnchorBlock* anchor = nullptr;
    int parent = -1;
    std::string parent_point;
    Vec3 parent_offset = Vec3::Zero();  // parent reference - parent point, parent frame
    Vec3 anchor_point = Vec3::Zero();   // inertial parent point when parent is an anchor
    std::vector<int> children;
    int state_offset = 0;
    int fast_offset = 0;
    int dof_index = -1;
  };
  struct LoadRef {
    int node = -1;
    ExternalLoad load;
    Vec3 arm = Vec3::Zero();  // point - reference, own frame
  };
  struct ClosureRef {
    const LoopClosureBlock* block = nullptr;
    int left = -1;
    int right = -1;
    Vec3 left_arm = Vec3::Zero();
    Vec3 right_arm = Vec3::Zero();
  };
  struct Options {
    bool zero_velocity = false;
    bool zero_gravity = false;
    bool no_loads = false;  // also disables loop closures
    const Eigen::VectorXd* drives = nullptr;
  };
  struct Slow;

  const RigidBodyParams* body_of(int node) const;
  Vec3 reference_of(int node) const;
  Slow slow_pass(double t, const Eigen::VectorXd& state, const Options& opt) const;
  /// Residual rows with `values == nullptr` (symbolic) or at given values.
  Eigen::MatrixXd fast_pass(const Slow& s, const Eigen::VectorXd* values,
                            std::vector<Lin6>* accels, std::vector<JointPortOutput>* ports) const;
  Evaluation finish(double t, const Eigen::VectorXd& state, const Slow& s,
                    const Eigen::VectorXd& f, bool details) const;

  Vec3 gravity_;
  EulerSequence sequence_;
  std::vector<Node> nodes_;
  std::vector<int> order_;  // parents before children
  std::vector<LoadRef> loads_;
  std::vector<ClosureRef> closures_;
  std::vector<std::string> dof_names_;
  std::vector<bool> velocity_mask_;
  int state_size_ = 0;
  int fast_size_ = 0;
};

}  // namespace blockdyn
