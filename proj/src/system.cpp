#include "blockdyn/system.hpp"

#include <cmath>
#include <deque>
#include <sstream>

namespace blockdyn {

struct System::Slow {
  double t = 0.0;
  Vec3 g = Vec3::Zero();
  std::vector<Dcm> to_inertial;
  std::vector<Vec6> twist;
  std::vector<Vec3> position;
  std::vector<EulerAngles> attitude;  // bases only
  std::vector<JointKinematics> kin;   // joints only
  std::vector<Vec6> gyro;             // bases only
  std::vector<Vec6> gravity;          // bases only
  std::vector<double> drive;
  std::vector<Vec6> applied;  // loads and closures at the reference point, own frame
  std::vector<ClosureResult> closures;
  double dissipation = 0.0;
  double actuation = 0.0;
};

System::System(const SystemGraph& graph) : gravity_(graph.gravity()), sequence_(graph.sequence()) {
  const auto& blocks = graph.blocks();
  nodes_.resize(blocks.size());
  bool any_body = false;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    Node& n = nodes_[i];
    n.block = blocks[i];
    n.base = dynamic_cast<const BaseBlock*>(n.block.get());
    n.joint = dynamic_cast<const JointBlock*>(n.block.get());
    n.anchor = dynamic_cast<const AnchorBlock*>(n.block.get());
    any_body = any_body || n.base || n.joint;
  }
  if (!any_body) throw AssemblyError("no dynamic terminal: the system has no bodies");

  for (const auto& c : graph.connections()) {
    Node& child = nodes_[c.child];
    const Node& parent = nodes_[c.parent];
    if (!child.joint) {
      throw AssemblyError("block '" + child.block->name() +
                          "' has no parent port; only joint blocks can be attached");
    }
    if (child.parent >= 0) {
      throw AssemblyError("closed kinematic chain without loop closure: block '" +
                          child.block->name() + "' has two parents");
    }
    if (!(parent.base || parent.joint || parent.anchor)) {
      throw AssemblyError("block '" + parent.block->name() + "' cannot carry children");
    }
    if (!parent.block->has_point(c.parent_point)) {
      throw AssemblyError("dangling port: block '" + parent.block->name() + "' has no point '" +
                          c.parent_point + "'");
    }
    child.parent = c.parent;
    child.parent_point = c.parent_point;
    if (parent.anchor) {
      child.anchor_point = parent.anchor->point(c.parent_point);
    } else {
      const RigidBodyParams* pb = parent.base ? &parent.base->body() : &parent.joint->joint().body();
      child.parent_offset = reference_of(c.parent) - pb->point(c.parent_point);
    }
    nodes_[c.parent].children.push_back(c.child);
  }
  for (const Node& n : nodes_) {
    if (n.joint && n.parent < 0) {
      throw AssemblyError("dangling port: joint '" + n.block->name() + "' has no parent");
    }
    if (n.joint) {
      for (const auto& cp : n.joint->joint().child_points()) {
        if (!n.joint->joint().body().points.count(cp)) {
          throw AssemblyError("joint '" + n.block->name() + "': unknown child point '" + cp + "'");
        }
      }
    }
  }

  // Topological order from the roots; anything unreachable sits on a cycle.
  std::deque<int> queue;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].base || nodes_[i].anchor) queue.push_back(static_cast<int>(i));
  }
  std::vector<bool> seen(nodes_.size(), false);
  while (!queue.empty()) {
    const int i = queue.front();
    queue.pop_front();
    seen[i] = true;
    order_.push_back(i);
    for (int c : nodes_[i].children) queue.push_back(c);
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].joint && !seen[i]) {
      throw AssemblyError("closed kinematic chain without loop closure through block '" +
                          nodes_[i].block->name() + "'");
    }
  }

  int dof = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    Node& n = nodes_[i];
    n.state_offset = state_size_;
    n.fast_offset = fast_size_;
    state_size_ += n.block->state_size();
    fast_size_ += n.block->fast_size();
    for (const auto& name : n.block->dof_names()) dof_names_.push_back(name);
    if (n.base) {
      for (int k = 0; k < 12; ++k) velocity_mask_.push_back(k < 6);
    } else if (n.joint && n.joint->joint().dof() > 0) {
      n.dof_index = dof++;
      velocity_mask_.push_back(false);
      velocity_mask_.push_back(true);
    }
  }

  for (const auto& lb : graph.loads()) {
    const RigidBodyParams* body = body_of(lb.block);
    if (!body) {
      throw AssemblyError("load '" + lb.load.name + "' is bound to non-body block '" +
                          nodes_[lb.block].block->name() + "'");
    }
    if (!body->points.count(lb.load.point)) {
      throw AssemblyError("load '" + lb.load.name + "': body '" + body->name +
                          "' has no point '" + lb.load.point + "'");
    }
    if (lb.load.kind == LoadKind::kTabulated) {
      const auto& t = lb.load.times;
      if (t.empty() || t.size() != lb.load.samples.size()) {
        throw AssemblyError("load '" + lb.load.name + "': table times and samples differ in size");
      }
      for (std::size_t k = 1; k < t.size(); ++k) {
        if (!(t[k] > t[k - 1])) {
          throw AssemblyError("load '" + lb.load.name + "': table times must increase");
        }
      }
    }
    loads_.push_back({lb.block, lb.load, body->point(lb.load.point) - reference_of(lb.block)});
  }

  for (const auto& cb : graph.closures()) {
    const auto* block = dynamic_cast<const LoopClosureBlock*>(nodes_[cb.closure].block.get());
    if (!block) {
      throw AssemblyError("block '" + nodes_[cb.closure].block->name() + "' is not a loop closure");
    }
    ClosureRef ref{block, cb.left, cb.right, Vec3::Zero(), Vec3::Zero()};
    auto arm = [&](int node, const std::string& point) -> Vec3 {
      const Node& n = nodes_[node];
      if (n.anchor) return n.anchor->point(point);
      const RigidBodyParams* body = body_of(node);
      if (!body || !body->points.count(point)) {
        throw AssemblyError("loop closure '" + block->name() + "': block '" + n.block->name() +
                            "' has no point '" + point + "'");
      }
      return body->point(point) - reference_of(node);
    };
    ref.left_arm = arm(cb.left, cb.left_point);
    ref.right_arm = arm(cb.right, cb.right_point);
    closures_.push_back(ref);
  }
}

const RigidBodyParams* System::body_of(int node) const {
  const Node& n = nodes_.at(node);
  if (n.base) return &n.base->body();
  if (n.joint) return &n.joint->joint().body();
  return nullptr;
}

Vec3 System::reference_of(int node) const {
  const Node& n = nodes_.at(node);
  if (n.base) return n.base->body().point(n.base->reference_point());
  if (n.joint) return n.joint->joint().body().point(n.joint->joint().joint_point());
  return Vec3::Zero();
}

int System::find(const std::string& name) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].block->name() == name) return static_cast<int>(i);
  }
  return -1;
}

Eigen::VectorXd System::initial_state() const {
  Eigen::VectorXd x(state_size_);
  for (const Node& n : nodes_) {
    if (n.block->state_size() > 0) {
      x.segment(n.state_offset, n.block->state_size()) = n.block->initial_state();
    }
  }
  return x;
}

Eigen::VectorXd System::dofs(const Eigen::VectorXd& state) const {
  Eigen::VectorXd out(dof_names_.size());
  int k = 0;
  for (const Node& n : nodes_) {
    if (n.base) {
      const EulerAngles th{state.segment<3>(n.state_offset + 9), sequence_};
      out.segment<3>(k) = euler_to_dcm(th) * Vec3(state.segment<3>(n.state_offset + 6));
      out.segment<3>(k + 3) = th.angles;
      k += 6;
    } else if (n.joint && n.joint->joint().dof() > 0) {
      out(k++) = state(n.state_offset);
    }
  }
  return out;
}

System::Slow System::slow_pass(double t, const Eigen::VectorXd& state, const Options& opt) const {
  if (state.size() != state_size_) {
    throw std::invalid_argument("state has " + std::to_string(state.size()) +
                                " entries, expected " + std::to_string(state_size_));
  }
  const std::size_t count = nodes_.size();
  Slow s;
  s.t = t;
  s.g = opt.zero_gravity ? Vec3::Zero() : gravity_;
  s.to_inertial.assign(count, Dcm::identity());
  s.twist.assign(count, Vec6::Zero());
  s.position.assign(count, Vec3::Zero());
  s.attitude.assign(count, EulerAngles{Vec3::Zero(), sequence_});
  s.kin.assign(count, JointKinematics{});
  s.gyro.assign(count, Vec6::Zero());
  s.gravity.assign(count, Vec6::Zero());
  s.drive.assign(count, 0.0);
  s.applied.assign(count, Vec6::Zero());

  for (int i : order_) {
    const Node& n = nodes_[i];
    if (n.base) {
      const int o = n.state_offset;
      if (!opt.zero_velocity) s.twist[i] = state.segment<6>(o);
      s.position[i] = state.segment<3>(o + 6);
      s.attitude[i] = EulerAngles{state.segment<3>(o + 9), sequence_};
      s.to_inertial[i] = euler_to_dcm(s.attitude[i]);
      s.gyro[i] = gyroscopic_wrench(n.base->dynamic_model(), s.twist[i]);
      s.gravity[i] = gravity_accel(s.to_inertial[i], s.g);
    } else if (n.joint) {
      ParentMotion pm;
      const Node& p = nodes_[n.parent];
      if (p.anchor) {
        pm.position = n.anchor_point;
      } else {
        pm.twist = tau(n.parent_offset).apply(s.twist[n.parent]);
        pm.position = s.position[n.parent] - n.parent_offset;
        pm.to_inertial = s.to_inertial[n.parent];
      }
      const Joint& j = n.joint->joint();
      double q = 0.0, qd = 0.0;
      if (j.dof() > 0) {
        q = state(n.state_offset);
        qd = opt.zero_velocity ? 0.0 : state(n.state_offset + 1);
      }
      s.kin[i] = j.kinematics(pm, q, qd, s.g);
      s.to_inertial[i] = s.kin[i].to_inertial;
      s.twist[i] = s.kin[i].twist;
      s.position[i] = s.kin[i].position;
      if (j.dof() > 0) {
        const DriveLaw& law = n.joint->drive();
        if (opt.drives) {
          s.drive[i] = (*opt.drives)(n.dof_index);
        } else {
          s.drive[i] = law.force(q, qd, t);
          s.dissipation += law.dissipation_power(qd);
          s.actuation += law.actuation_power(q, qd, t);
        }
      }
    }
  }

  if (opt.no_loads) return s;

  for (const LoadRef& l : loads_) {
    const int i = l.node;
    const Mat3 rt = s.to_inertial[i].matrix().transpose();
    const Vec6 w = l.load.wrench_at(t);
    Vec3 f = w.head<3>();
    Vec3 tq = w.tail<3>();
    if (l.load.kind == LoadKind::kInertialForce ||
        (l.load.kind == LoadKind::kTabulated && l.load.inertial)) {
      f = rt * f;
      tq = rt * tq;
    }
    s.applied[i].head<3>() += f;
    s.applied[i].tail<3>() += tq + l.arm.cross(f);
    const Vec3 v = s.twist[i].head<3>() + s.twist[i].tail<3>().cross(l.arm);
    const Vec3 w_body = s.twist[i].tail<3>();
    if (l.load.kind == LoadKind::kInertialForce) {
      s.actuation += tq.dot(w_body);
    } else {
      s.actuation += f.dot(v) + tq.dot(w_body);
    }
  }

  for (const ClosureRef& c : closures_) {
    auto end = [&](int i, const Vec3& arm) {
      ClosureEnd e;
      const Node& n = nodes_[i];
      if (n.anchor) {
        e.position_inertial = arm;
        e.attitude = EulerAngles{Vec3::Zero(), sequence_};
        return e;
      }
      const Mat3& r = s.to_inertial[i].matrix();
      e.to_inertial = s.to_inertial[i];
      e.position_inertial = r * (s.position[i] + arm);
      e.velocity_inertial = r * (s.twist[i].head<3>() + s.twist[i].tail<3>().cross(arm));
      e.omega_inertial = r * s.twist[i].tail<3>();
      e.attitude = n.base ? s.attitude[i] : dcm_to_euler(s.to_inertial[i], sequence_);
      return e;
    };
    ClosureResult r = loop_closure(c.block->params(), end(c.left, c.left_arm),
                                   end(c.right, c.right_arm));
    if (!nodes_[c.left].anchor) {
      s.applied[c.left] += tau(-c.left_arm).apply_transpose(r.wrench_left);
    }
    if (!nodes_[c.right].anchor) {
      s.applied[c.right] += tau(-c.right_arm).apply_transpose(r.wrench_right);
    }
    s.dissipation += r.dissipation;
    s.closures.push_back(r);
  }
  return s;
}

Eigen::MatrixXd System::fast_pass(const Slow& s, const Eigen::VectorXd* values,
                                  std::vector<Lin6>* accels,
                                  std::vector<JointPortOutput>* ports) const {
  const int n = values ? 0 : fast_size_;
  auto unk6 = [&](int off) {
    return values ? Lin6(values->segment<6>(off), 0) : Lin6::unknown(off, n);
  };
  auto unk1 = [&](int off) {
    return values ? Lin1((*values)(off), 0) : Lin1::unknown(off, n);
  };

  const std::size_t count = nodes_.size();
  std::vector<Lin6> accel(count, Lin6(n));
  std::vector<Lin6> parent_accel(count, Lin6(n));
  for (int i : order_) {
    const Node& node = nodes_[i];
    if (node.base) {
      accel[i] = unk6(node.fast_offset);
    } else if (node.joint) {
      if (!nodes_[node.parent].anchor) {
        parent_accel[i] = apply(tau(node.parent_offset), accel[node.parent]);
      }
      const Joint& j = node.joint->joint();
      const Lin1 qdd = j.dof() > 0 ? unk1(node.fast_offset) : Lin1(0.0, n);
      accel[i] = j.accel_across(s.kin[i], parent_accel[i], qdd);
    }
  }

  std::vector<Lin6> load(count, Lin6(n));
  for (std::size_t i = 0; i < count; ++i) load[i] += s.applied[i];
  for (std::size_t i = 0; i < count; ++i) {
    const Node& node = nodes_[i];
    if (!node.joint || nodes_[node.parent].anchor) continue;
    const Lin6 w = unk6(node.fast_offset + node.joint->joint().dof());
    load[node.parent] += apply_transpose(tau(node.parent_offset), w);
  }

  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(fast_size_, n + 1);
  if (ports) ports->assign(count, JointPortOutput{});
  for (std::size_t i = 0; i < count; ++i) {
    const Node& node = nodes_[i];
    const int o = node.fast_offset;
    if (node.base) {
      const Lin6 causal =
          node.base->dynamic_model_inverse() * (load[i] - s.gyro[i]) + s.gravity[i];
      rows.middleRows<6>(o) = (causal - unk6(o)).c;
    } else if (node.joint) {
      const Joint& j = node.joint->joint();
      const JointPortOutput out = j.port(s.kin[i], parent_accel[i], load[i], s.drive[i]);
      const int d = j.dof();
      if (d > 0) rows.row(o) = (out.qdd - unk1(o)).c;
      rows.middleRows<6>(o + d) = (out.parent_wrench - unk6(o + d)).c;
      if (ports) (*ports)[i] = out;
    }
  }
  if (accels) *accels = std::move(accel);
  return rows;
}

Eigen::VectorXd System::solve_fast(const FastSystem& fs) const {
  const int n = fast_size_;
  if (n == 0) return {};
  Eigen::VectorXd scale(n);
  for (int r = 0; r < n; ++r) {
    const double m = fs.a.row(r).cwiseAbs().maxCoeff();
    scale(r) = m > 0.0 ? 1.0 / m : 1.0;
  }
  const Eigen::MatrixXd a = scale.asDiagonal() * fs.a;
  const Eigen::VectorXd b = scale.asDiagonal() * fs.b;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-13)) {
    Eigen::FullPivLU<Eigen::MatrixXd> full(a);
    std::string culprit = "unknown";
    const Eigen::MatrixXd ker = full.kernel();
    if (ker.cols() > 0 && ker.norm() > 0.0) {
      Eigen::Index worst = 0;
      ker.col(0).cwiseAbs().maxCoeff(&worst);
      for (const Node& node : nodes_) {
        if (worst >= node.fast_offset && worst < node.fast_offset + node.block->fast_size()) {
          culprit = node.block->name();
        }
      }
    }
    std::ostringstream msg;
    msg << "fast system is singular (rcond " << rcond << "); check block '" << culprit << "'";
    throw SingularSystem(msg.str());
  }
  return lu.solve(-b);
}

FastSystem System::fast_system(double t, const Eigen::VectorXd& state) const {
  const Slow s = slow_pass(t, state, {});
  const Eigen::MatrixXd rows = fast_pass(s, nullptr, nullptr, nullptr);
  return {rows.rightCols(fast_size_), rows.col(0)};
}

Eigen::VectorXd System::residual(double t, const Eigen::VectorXd& state,
                                 const Eigen::VectorXd& fast) const {
  const Slow s = slow_pass(t, state, {});
  return fast_pass(s, &fast, nullptr, nullptr).col(0);
}

Evaluation System::finish(double t, const Eigen::VectorXd& state, const Slow& s,
                          const Eigen::VectorXd& f, bool details) const {
  Evaluation e;
  e.t = t;
  e.fast = f;
  e.rate = Eigen::VectorXd::Zero(state_size_);
  e.dissipation_power = s.dissipation;
  e.actuation_power = s.actuation;
  for (const Node& node : nodes_) {
    const int o = node.state_offset;
    if (node.base) {
      e.rate.segment<6>(o) = f.segment<6>(node.fast_offset);
      const int i = static_cast<int>(&node - nodes_.data());
      const PoseRate pr = pose_rate(s.twist[i], Pose{s.position[i], s.attitude[i]});
      e.rate.segment<3>(o + 6) = pr.position;
      e.rate.segment<3>(o + 9) = pr.attitude;
    } else if (node.joint && node.joint->joint().dof() > 0) {
      e.rate(o) = state(o + 1);
      e.rate(o + 1) = f(node.fast_offset);
    }
  }
  if (!details) return e;

  std::vector<Lin6> accels;
  std::vector<JointPortOutput> ports;
  fast_pass(s, &f, &accels, &ports);
  e.blocks.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    BlockResult& r = e.blocks[i];
    r.to_inertial = s.to_inertial[i];
    r.twist = s.twist[i];
    r.position = s.position[i];
    r.accel = accels[i].constant();
    if (nodes_[i].joint) {
      r.q = s.kin[i].q;
      r.qd = s.kin[i].qd;
      r.qdd = ports[i].qdd.value({});
      r.drive = s.drive[i];
      r.parent_wrench = ports[i].parent_wrench.constant();
      r.wrench_at_p = ports[i].wrench_at_p.constant();
    }
  }
  e.closures = s.closures;
  for (const auto& c : s.closures) e.closure_drift = std::max(e.closure_drift, c.drift);
  return e;
}

Evaluation System::evaluate(double t, const Eigen::VectorXd& state, bool details) const {
  const Slow s = slow_pass(t, state, {});
  const Eigen::MatrixXd rows = fast_pass(s, nullptr, nullptr, nullptr);
  const Eigen::VectorXd f = solve_fast({rows.rightCols(fast_size_), rows.col(0)});
  return finish(t, state, s, f, details);
}

Eigen::VectorXd System::derivative(double t, const Eigen::VectorXd& state) const {
  return evaluate(t, state, false).rate;
}

EnergyTerms System::energy(double t, const Eigen::VectorXd& state) const {
  const Slow s = slow_pass(t, state, {});
  EnergyTerms e;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    const RigidBodyParams* body = body_of(static_cast<int>(i));
    if (!body) continue;
    const Mat6& d = n.base ? n.base->dynamic_model() : n.joint->joint().dynamic_model();
    e.kinetic += 0.5 * s.twist[i].dot(d * s.twist[i]);
    const Vec3 r_com =
        s.to_inertial[i] * Vec3(s.position[i] + body->com - reference_of(static_cast<int>(i)));
    e.gravity -= body->mass * gravity_.dot(r_com);
    if (n.joint && n.joint->joint().dof() > 0) e.springs += n.joint->drive().potential(s.kin[i].q);
  }
  for (const LoadRef& l : loads_) {
    if (l.load.kind != LoadKind::kInertialForce) continue;
    const Vec3 r = s.to_inertial[l.node] * Vec3(s.position[l.node] + l.arm);
    e.loads -= l.load.force.dot(r);
  }
  for (const auto& c : s.closures) e.closures += c.potential;
  return e;
}

std::pair<Vec3, Vec3> System::momentum(const Eigen::VectorXd& state) const {
  const Slow s = slow_pass(0.0, state, {});
  Vec3 p = Vec3::Zero();
  Vec3 h = Vec3::Zero();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const RigidBodyParams* body = body_of(static_cast<int>(i));
    if (!body) continue;
    const Mat3& r = s.to_inertial[i].matrix();
    const Vec3 arm = body->com - reference_of(static_cast<int>(i));
    const Vec3 w = s.twist[i].tail<3>();
    const Vec3 v_com = r * (s.twist[i].head<3>() + w.cross(arm));
    const Vec3 r_com = r * (s.position[i] + arm);
    p += body->mass * v_com;
    h += r_com.cross(body->mass * v_com) + r * (body->inertia * w);
  }
  return {p, h};
}

Eigen::MatrixXd System::joint_space_mass_matrix(const Eigen::VectorXd& state) const {
  for (const Node& n : nodes_) {
    if (n.base) throw std::logic_error("joint-space mass matrix needs a clamped base");
  }
  int dof = 0;
  for (const Node& n : nodes_) {
    if (n.dof_index >= 0) ++dof;
  }
  Eigen::MatrixXd minv(dof, dof);
  for (int j = 0; j < dof; ++j) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(dof);
    u(j) = 1.0;
    Options opt;
    opt.zero_velocity = true;
    opt.zero_gravity = true;
    opt.no_loads = true;
    opt.drives = &u;
    const Slow s = slow_pass(0.0, state, opt);
    const Eigen::MatrixXd rows = fast_pass(s, nullptr, nullptr, nullptr);
    const Eigen::VectorXd f = solve_fast({rows.rightCols(fast_size_), rows.col(0)});
    for (const Node& n : nodes_) {
      if (n.dof_index >= 0) minv(n.dof_index, j) = f(n.fast_offset);
    }
  }
  return minv.inverse();
}

MotionVector18 System::motion_at(const Evaluation& eval, int block, const std::string& point) const {
  const RigidBodyParams* body = body_of(block);
  if (!body) throw std::invalid_argument("block '" + nodes_.at(block).block->name() + "' is not a body");
  if (eval.blocks.empty()) throw std::invalid_argument("evaluation was run without details");
  const BlockResult& r = eval.blocks.at(block);
  MotionVector18 m;
  m.accel = r.accel;
  m.twist = r.twist;
  m.position = r.position;
  m.attitude = dcm_to_euler(r.to_inertial, sequence_);
  m.frame = FrameId{block + 1};
  return transport_motion(m, reference_of(block) - body->point(point));
}

Vec3 System::point_position(const Eigen::VectorXd& state, int block, const std::string& point) const {
  const RigidBodyParams* body = body_of(block);
  if (!body) throw std::invalid_argument("block '" + nodes_.at(block).block->name() + "' is not a body");
  const Slow s = slow_pass(0.0, state, {true, false, true, nullptr});
  return s.to_inertial[block] * Vec3(s.position[block] + body->point(point) - reference_of(block));
}

}  // namespace blockdyn
