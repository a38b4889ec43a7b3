#include "blockdyn/block.hpp"

#include <algorithm>

namespace blockdyn {

double DriveLaw::force(double q, double qd, double t) const {
  double u = -stiffness * (q - rest) - damping * qd;
  if (profile) u += profile(t);
  if (custom) u += custom(q, qd, t);
  return u;
}

double DriveLaw::potential(double q) const {
  return 0.5 * stiffness * (q - rest) * (q - rest);
}

double DriveLaw::dissipation_power(double qd) const { return damping * qd * qd; }

double DriveLaw::actuation_power(double q, double qd, double t) const {
  double u = 0.0;
  if (profile) u += profile(t);
  if (custom) u += custom(q, qd, t);
  return u * qd;
}

Vec6 ExternalLoad::wrench_at(double t) const {
  Vec6 w;
  if (kind != LoadKind::kTabulated) {
    w << force, torque;
    return w;
  }
  if (times.empty()) return Vec6::Zero();
  if (t <= times.front()) return samples.front();
  if (t >= times.back()) return samples.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - times.begin());
  const std::size_t lo = hi - 1;
  const double s = (t - times[lo]) / (times[hi] - times[lo]);
  return (1.0 - s) * samples[lo] + s * samples[hi];
}

AnchorBlock::AnchorBlock(std::string name, std::map<std::string, Vec3> points)
    : Block(std::move(name)), points_(std::move(points)) {}

std::vector<Port> AnchorBlock::ports() const {
  std::vector<Port> out;
  for (const auto& [id, p] : points_) {
    out.push_back({PortKind::kMotionOut, id});
    out.push_back({PortKind::kWrenchIn, id});
  }
  return out;
}

bool AnchorBlock::has_point(const std::string& point) const { return points_.count(point) > 0; }

const Vec3& AnchorBlock::point(const std::string& id) const {
  auto it = points_.find(id);
  if (it == points_.end()) {
    throw std::out_of_range("anchor '" + name() + "' has no point '" + id + "'");
  }
  return it->second;
}

BaseBlock::BaseBlock(RigidBodyParams body, std::string reference_point, BaseInitial initial)
    : Block(body.name),
      body_(std::move(body)),
      reference_(std::move(reference_point)),
      initial_(initial) {
  d_ = dynamic_model_at(body_, reference_);
  Eigen::LDLT<Mat6> ldlt(d_);
  if (!(body_.mass > 0.0) || ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-14 * std::max(1.0, d_.cwiseAbs().maxCoeff())) {
    throw AssemblyError("base body '" + name() +
                        "' has a singular dynamic model and cannot be a dynamic terminal");
  }
  d_inv_ = ldlt.solve(Mat6::Identity());
  d_inv_ = 0.5 * (d_inv_ + d_inv_.transpose());
}

Eigen::VectorXd BaseBlock::initial_state() const {
  Eigen::VectorXd x(12);
  x << initial_.twist, initial_.position, initial_.attitude;
  return x;
}

std::vector<std::string> BaseBlock::dof_names() const {
  const std::string& n = name();
  return {n + ".x", n + ".y", n + ".z", n + ".phi", n + ".theta", n + ".psi"};
}

std::vector<Port> BaseBlock::ports() const {
  std::vector<Port> out;
  for (const auto& [id, p] : body_.points) {
    out.push_back({PortKind::kWrenchIn, id});
    out.push_back({PortKind::kMotionOut, id});
  }
  return out;
}

bool BaseBlock::has_point(const std::string& point) const {
  return body_.points.count(point) > 0;
}

JointBlock::JointBlock(Joint joint, double q0, double qd0, DriveLaw drive)
    : Block(joint.name()), joint_(std::move(joint)), q0_(q0), qd0_(qd0), drive_(std::move(drive)) {}

Eigen::VectorXd JointBlock::initial_state() const {
  if (joint_.dof() == 0) return {};
  Eigen::VectorXd x(2);
  x << q0_, qd0_;
  return x;
}

std::vector<std::string> JointBlock::dof_names() const {
  if (joint_.dof() == 0) return {};
  return {name()};
}

std::vector<Port> JointBlock::ports() const {
  std::vector<Port> out;
  out.push_back({PortKind::kMotionIn, joint_.joint_point()});
  out.push_back({PortKind::kWrenchOut, joint_.joint_point()});
  for (const auto& c : joint_.child_points()) {
    out.push_back({PortKind::kWrenchIn, c});
    out.push_back({PortKind::kMotionOut, c});
  }
  if (joint_.dof() > 0) {
    out.push_back({PortKind::kDriveIn, joint_.joint_point()});
    out.push_back({PortKind::kJointMotionOut, joint_.joint_point()});
  }
  return out;
}

bool JointBlock::has_point(const std::string& point) const {
  return joint_.body().points.count(point) > 0;
}

LoopClosureBlock::LoopClosureBlock(LoopClosureParams params)
    : Block(params.name), params_(std::move(params)) {
  auto check = [&](const Mat6& m, const char* what) {
    if (!m.allFinite() || (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + m.norm())) {
      throw AssemblyError("loop closure '" + name() + "': " + what + " matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat6> eig(m);
    if (eig.eigenvalues().minCoeff() < -1e-9 * (1.0 + m.norm())) {
      throw AssemblyError("loop closure '" + name() + "': " + what +
                          " matrix is not positive semidefinite");
    }
  };
  check(params_.stiffness, "stiffness");
  check(params_.damping, "damping");
}

std::vector<Port> LoopClosureBlock::ports() const {
  return {{PortKind::kMotionIn, "left"},
          {PortKind::kMotionIn, "right"},
          {PortKind::kWrenchOut, "left"},
          {PortKind::kWrenchOut, "right"}};
}

SystemGraph::SystemGraph(Vec3 gravity, EulerSequence sequence)
    : gravity_(gravity), sequence_(sequence) {}

int SystemGraph::add(std::shared_ptr<const Block> block) {
  if (!block) throw AssemblyError("null block");
  if (find(block->name()) >= 0) {
    throw AssemblyError("duplicate block name '" + block->name() + "'");
  }
  blocks_.push_back(std::move(block));
  return static_cast<int>(blocks_.size()) - 1;
}

void SystemGraph::check_index(int i, const char* what) const {
  if (i < 0 || i >= static_cast<int>(blocks_.size())) {
    throw AssemblyError(std::string("invalid block index for ") + what);
  }
}

void SystemGraph::connect(int parent, const std::string& parent_point, int child) {
  check_index(parent, "connection parent");
  check_index(child, "connection child");
  connections_.push_back({parent, parent_point, child});
}

void SystemGraph::add_load(int block, ExternalLoad load) {
  check_index(block, "load");
  loads_.push_back({block, std::move(load)});
}

void SystemGraph::close_loop(int closure, int left, const std::string& left_point, int right,
                             const std::string& right_point) {
  check_index(closure, "loop closure");
  check_index(left, "loop closure left end");
  check_index(right, "loop closure right end");
  closures_.push_back({closure, left, left_point, right, right_point});
}

int SystemGraph::find(const std::string& name) const {
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i]->name() == name) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace blockdyn
