#include "blockdyn/build_system.hpp"

#include <map>
#include <memory>

namespace blockdyn {

namespace {

JointType joint_type(JointKind kind) {
  switch (kind) {
    case JointKind::kRevolute:
      return JointType::kRevolute;
    case JointKind::kPrismatic:
      return JointType::kPrismatic;
    case JointKind::kWeld:
      break;
  }
  return JointType::kWeld;
}

std::map<std::string, Vec3> point_map(const std::vector<NamedPoint>& points) {
  std::map<std::string, Vec3> out;
  for (const auto& p : points) out[p.name] = p.position;
  return out;
}

}  // namespace

RigidBodyParams rigid_body_params(const BodySpec& body) {
  RigidBodyParams p;
  p.name = body.name;
  p.mass = body.mass;
  p.inertia = body.inertia;
  p.com = body.com;
  p.points = point_map(body.points);
  return p;
}

DriveLaw drive_law(const DriveSpec& drive) {
  DriveLaw law;
  law.stiffness = drive.stiffness;
  law.damping = drive.damping;
  law.rest = drive.rest;
  if (drive.profile.kind != ProfileKind::kNone) {
    law.profile = [profile = drive.profile](double t) { return profile.at(t); };
  }
  return law;
}

SystemGraph build_system(const ScenarioConfig& config) {
  const std::vector<ScenarioIssue> issues = validate_scenario(config);
  if (!issues.empty()) throw AssemblyError(ScenarioError(issues).what());

  SystemGraph graph(config.gravity, config.sequence);
  std::map<std::string, int> index;

  for (const BodySpec& b : config.bodies) {
    if (!b.base) continue;
    // The file gives the inertial position of the reference point; the base
    // state holds it in body components.
    const Dcm to_inertial = euler_to_dcm(EulerAngles{b.base->attitude, config.sequence});
    BaseInitial init{b.base->twist, to_inertial.transpose() * b.base->position,
                     b.base->attitude};
    index[b.name] =
        graph.add(std::make_shared<BaseBlock>(rigid_body_params(b), b.base->reference_point, init));
  }
  for (const AnchorSpec& a : config.anchors) {
    index[a.name] = graph.add(std::make_shared<AnchorBlock>(a.name, point_map(a.points)));
  }
  // The child body's block carries the joint's name.
  std::map<std::string, std::string> block_of_body;
  for (const auto& [name, i] : index) block_of_body[name] = name;
  for (const JointSpec& j : config.joints) {
    const BodySpec& body = *config.body(j.child);
    std::vector<std::string> child_points;
    for (const auto& p : body.points) {
      if (p.name != j.child_point) child_points.push_back(p.name);
    }
    Joint joint(joint_type(j.type), j.name, rigid_body_params(body), j.child_point, child_points,
                Dcm::from_matrix(j.orientation, 1e-9), j.axis);
    index[j.name] =
        graph.add(std::make_shared<JointBlock>(std::move(joint), j.q0, j.qd0, drive_law(j.drive)));
    block_of_body[j.child] = j.name;
  }
  for (const JointSpec& j : config.joints) {
    graph.connect(index.at(block_of_body.at(j.parent)), j.parent_point, index.at(j.name));
  }

  for (const ForceSpec& f : config.forces) {
    ExternalLoad load;
    load.name = f.name;
    load.point = f.point;
    switch (f.kind) {
      case ForceKind::kConstantInertial:
        load.kind = LoadKind::kInertialForce;
        load.force = f.force;
        load.torque = f.torque;
        break;
      case ForceKind::kBuoyancy:
        load.kind = LoadKind::kInertialForce;
        load.force = -config.total_mass() * config.gravity;
        break;
      case ForceKind::kConstantBody:
        load.kind = LoadKind::kBodyWrench;
        load.force = f.force;
        load.torque = f.torque;
        load.inertial = false;
        break;
      case ForceKind::kTabulated:
        load.kind = LoadKind::kTabulated;
        load.inertial = f.inertial;
        load.times = f.times;
        load.samples = f.samples;
        break;
    }
    graph.add_load(index.at(block_of_body.at(f.body)), std::move(load));
  }

  for (const ClosureSpec& c : config.closures) {
    LoopClosureParams params;
    params.name = c.name;
    params.stiffness = c.stiffness;
    params.damping = c.damping;
    const int k = graph.add(std::make_shared<LoopClosureBlock>(params));
    graph.close_loop(k, index.at(block_of_body.at(c.left.body)), c.left.point,
                     index.at(block_of_body.at(c.right.body)), c.right.point);
  }
  return graph;
}

}  // namespace blockdyn
