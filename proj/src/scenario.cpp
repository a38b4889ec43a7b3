#include "blockdyn/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace blockdyn {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string join_issues(const std::vector<ScenarioIssue>& issues) {
  std::ostringstream out;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) out << '\n';
    out << issues[i].to_string();
  }
  return out.str();
}

SourceLocation location_of(const YAML::Node& node) {
  if (!node.IsDefined()) return {};
  const YAML::Mark m = node.Mark();
  if (m.is_null()) return {};
  return {m.line + 1, m.column + 1};
}

/// Walks the YAML tree and records every problem instead of stopping.
class Reader {
 public:
  std::vector<ScenarioIssue> issues;

  void error(const YAML::Node& node, const std::string& path, const std::string& message) {
    issues.push_back({path, location_of(node), message});
  }

  bool is_map(const YAML::Node& node, const std::string& path) {
    if (node.IsMap()) return true;
    error(node, path, "expected a mapping");
    return false;
  }

  bool is_seq(const YAML::Node& node, const std::string& path) {
    if (node.IsSequence()) return true;
    error(node, path, "expected a list");
    return false;
  }

  void check_keys(const YAML::Node& map, const std::string& path,
                  std::initializer_list<const char*> allowed) {
    for (const auto& kv : map) {
      std::string key;
      try {
        key = kv.first.as<std::string>();
      } catch (const YAML::Exception&) {
        error(kv.first, path, "keys must be plain strings");
        continue;
      }
      const bool known = std::any_of(allowed.begin(), allowed.end(),
                                     [&](const char* a) { return key == a; });
      if (!known) error(kv.first, join(path, key), "unknown key '" + key + "'");
    }
  }

  /// The child node, or an undefined node after recording "missing" when required.
  YAML::Node child(const YAML::Node& map, const char* key, const std::string& path,
                   bool required) {
    YAML::Node n = map[key];
    if (!n.IsDefined() || n.IsNull()) {
      if (required) error(map, join(path, key), std::string("missing required field '") + key + "'");
      return YAML::Node(YAML::NodeType::Undefined);
    }
    return n;
  }

  std::optional<double> number(const YAML::Node& node, const std::string& path) {
    if (!node.IsScalar()) {
      error(node, path, "expected a number");
      return std::nullopt;
    }
    try {
      const double v = node.as<double>();
      if (!std::isfinite(v)) {
        error(node, path, "value must be finite");
        return std::nullopt;
      }
      return v;
    } catch (const YAML::Exception&) {
      error(node, path, "expected a number, got '" + node.Scalar() + "'");
      return std::nullopt;
    }
  }

  std::optional<int> integer(const YAML::Node& node, const std::string& path) {
    if (!node.IsScalar()) {
      error(node, path, "expected an integer");
      return std::nullopt;
    }
    try {
      return node.as<int>();
    } catch (const YAML::Exception&) {
      error(node, path, "expected an integer, got '" + node.Scalar() + "'");
      return std::nullopt;
    }
  }

  std::optional<std::string> text(const YAML::Node& node, const std::string& path) {
    if (!node.IsScalar()) {
      error(node, path, "expected a string");
      return std::nullopt;
    }
    return node.Scalar();
  }

  std::optional<std::vector<double>> numbers(const YAML::Node& node, const std::string& path,
                                             int expected = -1) {
    if (!is_seq(node, path)) return std::nullopt;
    if (expected >= 0 && static_cast<int>(node.size()) != expected) {
      error(node, path, "expected " + std::to_string(expected) + " numbers, got " +
                            std::to_string(node.size()));
      return std::nullopt;
    }
    std::vector<double> out;
    bool ok = true;
    for (std::size_t i = 0; i < node.size(); ++i) {
      auto v = number(node[i], path + "[" + std::to_string(i) + "]");
      if (v) out.push_back(*v);
      else ok = false;
    }
    if (!ok) return std::nullopt;
    return out;
  }

  std::optional<Vec3> vec3(const YAML::Node& node, const std::string& path) {
    auto v = numbers(node, path, 3);
    if (!v) return std::nullopt;
    return Vec3((*v)[0], (*v)[1], (*v)[2]);
  }

  std::optional<Vec6> vec6(const YAML::Node& node, const std::string& path) {
    auto v = numbers(node, path, 6);
    if (!v) return std::nullopt;
    Vec6 out;
    for (int i = 0; i < 6; ++i) out(i) = (*v)[i];
    return out;
  }

  /// n x n matrix given as nested rows; a flat list of n is a diagonal.
  template <int N>
  std::optional<Eigen::Matrix<double, N, N>> matrix(const YAML::Node& node,
                                                    const std::string& path,
                                                    bool allow_scalar) {
    using M = Eigen::Matrix<double, N, N>;
    if (allow_scalar && node.IsScalar()) {
      auto v = number(node, path);
      if (!v) return std::nullopt;
      return M(M::Identity() * *v);
    }
    if (!is_seq(node, path)) return std::nullopt;
    if (static_cast<int>(node.size()) != N) {
      error(node, path, "expected " + std::to_string(N) + " rows or diagonal entries");
      return std::nullopt;
    }
    if (node[0].IsScalar()) {
      auto d = numbers(node, path, N);
      if (!d) return std::nullopt;
      M out = M::Zero();
      for (int i = 0; i < N; ++i) out(i, i) = (*d)[i];
      return out;
    }
    M out;
    bool ok = true;
    for (int r = 0; r < N; ++r) {
      auto row = numbers(node[r], path + "[" + std::to_string(r) + "]", N);
      if (!row) {
        ok = false;
        continue;
      }
      for (int c = 0; c < N; ++c) out(r, c) = (*row)[c];
    }
    if (!ok) return std::nullopt;
    return out;
  }

  std::vector<NamedPoint> points(const YAML::Node& node, const std::string& path) {
    std::vector<NamedPoint> out;
    if (!is_map(node, path)) return out;
    for (const auto& kv : node) {
      std::string name;
      try {
        name = kv.first.as<std::string>();
      } catch (const YAML::Exception&) {
        error(kv.first, path, "point names must be plain strings");
        continue;
      }
      if (auto p = vec3(kv.second, join(path, name))) out.push_back({name, *p});
    }
    return out;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
};

std::string indexed(const std::string& list, std::size_t i) {
  return list + "[" + std::to_string(i) + "]";
}

void read_base(Reader& r, const YAML::Node& n, const std::string& path, BodySpec& body) {
  if (!r.is_map(n, path)) return;
  r.check_keys(n, path, {"reference_point", "twist", "position", "attitude"});
  BaseSpec base;
  if (auto v = r.child(n, "reference_point", path, true); v.IsDefined()) {
    if (auto s = r.text(v, path + ".reference_point")) base.reference_point = *s;
  }
  if (auto v = r.child(n, "twist", path, false); v.IsDefined()) {
    if (auto t = r.vec6(v, path + ".twist")) base.twist = *t;
  }
  if (auto v = r.child(n, "position", path, false); v.IsDefined()) {
    if (auto t = r.vec3(v, path + ".position")) base.position = *t;
  }
  if (auto v = r.child(n, "attitude", path, false); v.IsDefined()) {
    if (auto t = r.vec3(v, path + ".attitude")) base.attitude = *t;
  }
  body.base = base;
}

BodySpec read_body(Reader& r, const YAML::Node& n, const std::string& path) {
  BodySpec b;
  b.where = location_of(n);
  if (!r.is_map(n, path)) return b;
  r.check_keys(n, path, {"name", "mass", "inertia", "com", "points", "base"});
  if (auto v = r.child(n, "name", path, true); v.IsDefined()) {
    if (auto s = r.text(v, path + ".name")) b.name = *s;
  }
  if (auto v = r.child(n, "mass", path, true); v.IsDefined()) {
    if (auto m = r.number(v, path + ".mass")) b.mass = *m;
  }
  if (auto v = r.child(n, "inertia", path, false); v.IsDefined()) {
    if (auto m = r.matrix<3>(v, path + ".inertia", true)) b.inertia = *m;
  }
  if (auto v = r.child(n, "com", path, false); v.IsDefined()) {
    if (auto c = r.vec3(v, path + ".com")) b.com = *c;
  }
  if (auto v = r.child(n, "points", path, false); v.IsDefined()) {
    b.points = r.points(v, path + ".points");
  }
  if (auto v = r.child(n, "base", path, false); v.IsDefined()) read_base(r, v, path + ".base", b);
  return b;
}

AnchorSpec read_anchor(Reader& r, const YAML::Node& n, const std::string& path) {
  AnchorSpec a;
  a.where = location_of(n);
  if (!r.is_map(n, path)) return a;
  r.check_keys(n, path, {"name", "points"});
  if (auto v = r.child(n, "name", path, true); v.IsDefined()) {
    if (auto s = r.text(v, path + ".name")) a.name = *s;
  }
  if (auto v = r.child(n, "points", path, true); v.IsDefined()) {
    a.points = r.points(v, path + ".points");
  }
  return a;
}

void read_profile(Reader& r, const YAML::Node& n, const std::string& path, ProfileSpec& p) {
  if (!r.is_map(n, path)) return;
  auto type_node = r.child(n, "type", path, true);
  if (!type_node.IsDefined()) return;
  auto type = r.text(type_node, path + ".type");
  if (!type) return;
  if (*type == "constant") {
    r.check_keys(n, path, {"type", "value"});
    p.kind = ProfileKind::kConstant;
    if (auto v = r.child(n, "value", path, true); v.IsDefined()) {
      if (auto x = r.number(v, path + ".value")) p.value = *x;
    }
  } else if (*type == "sine") {
    r.check_keys(n, path, {"type", "amplitude", "frequency", "phase"});
    p.kind = ProfileKind::kSine;
    if (auto v = r.child(n, "amplitude", path, true); v.IsDefined()) {
      if (auto x = r.number(v, path + ".amplitude")) p.amplitude = *x;
    }
    if (auto v = r.child(n, "frequency", path, true); v.IsDefined()) {
      if (auto x = r.number(v, path + ".frequency")) p.frequency = *x;
    }
    if (auto v = r.child(n, "phase", path, false); v.IsDefined()) {
      if (auto x = r.number(v, path + ".phase")) p.phase = *x;
    }
  } else if (*type == "table") {
    r.check_keys(n, path, {"type", "times", "values"});
    p.kind = ProfileKind::kTable;
    if (auto v = r.child(n, "times", path, true); v.IsDefined()) {
      if (auto x = r.numbers(v, path + ".times")) p.times = *x;
    }
    if (auto v = r.child(n, "values", path, true); v.IsDefined()) {
      if (auto x = r.numbers(v, path + ".values")) p.values = *x;
    }
    if (p.times.size() != p.values.size()) {
      r.error(n, path, "times and values must have the same length");
    } else if (p.times.empty()) {
      r.error(n, path, "table needs at least one sample");
    }
    for (std::size_t i = 1; i < p.times.size(); ++i) {
      if (!(p.times[i] > p.times[i - 1])) {
        r.error(n, path + ".times", "times must be strictly increasing");
        break;
      }
    }
  } else {
    r.error(type_node, path + ".type",
            "unknown profile type '" + *type + "' (expected constant, sine or table)");
  }
}

void read_drive(Reader& r, const YAML::Node& n, const std::string& path, DriveSpec& d) {
  if (!r.is_map(n, path)) return;
  r.check_keys(n, path, {"stiffness", "damping", "rest", "profile"});
  if (auto v = r.child(n, "stiffness", path, false); v.IsDefined()) {
    if (auto x = r.number(v, path + ".stiffness")) d.stiffness = *x;
  }
  if (auto v = r.child(n, "damping", path, false); v.IsDefined()) {
    if (auto x = r.number(v, path + ".damping")) d.damping = *x;
  }
  if (auto v = r.child(n, "rest", path, false); v.IsDefined()) {
    if (auto x = r.number(v, path + ".rest")) d.rest = *x;
  }
  if (auto v = r.child(n, "profile", path, false); v.IsDefined()) {
    read_profile(r, v, path + ".profile", d.profile);
  }
  if (d.stiffness < 0.0) r.error(n, path + ".stiffness", "stiffness must be non-negative");
  if (d.damping < 0.0) r.error(n, path + ".damping", "damping must be non-negative");
}

void read_initial(Reader& r, const YAML::Node& n, const std::string& path, JointSpec& j) {
  if (!r.is_map(n, path)) return;
  r.check_keys(n, path, {"position", "position_deg", "rate", "rate_deg"});
  auto pos = r.child(n, "position", path, false);
  auto pos_deg = r.child(n, "position_deg", path, false);
  if (pos.IsDefined() && pos_deg.IsDefined()) {
    r.error(n, path, "give either position or position_deg, not both");
  } else if (pos.IsDefined()) {
    if (auto x = r.number(pos, path + ".position")) j.q0 = *x;
  } else if (pos_deg.IsDefined()) {
    if (auto x = r.number(pos_deg, path + ".position_deg")) j.q0 = *x * kPi / 180.0;
  }
  auto rate = r.child(n, "rate", path, false);
  auto rate_deg = r.child(n, "rate_deg", path, false);
  if (rate.IsDefined() && rate_deg.IsDefined()) {
    r.error(n, path, "give either rate or rate_deg, not both");
  } else if (rate.IsDefined()) {
    if (auto x = r.number(rate, path + ".rate")) j.qd0 = *x;
  } else if (rate_deg.IsDefined()) {
    if (auto x = r.number(rate_deg, path + ".rate_deg")) j.qd0 = *x * kPi / 180.0;
  }
}

JointSpec read_joint(Reader& r, const YAML::Node& n, const std::string& path) {
  JointSpec j;
  j.where = location_of(n);
  if (!r.is_map(n, path)) return j;
  r.check_keys(n, path, {"name", "type", "parent", "parent_point", "child", "child_point", "axis",
                         "orientation", "initial", "drive"});
  auto str = [&](const char* key, std::string& out) {
    if (auto v = r.child(n, key, path, true); v.IsDefined()) {
      if (auto s = r.text(v, path + "." + key)) out = *s;
    }
  };
  str("name", j.name);
  str("parent", j.parent);
  str("parent_point", j.parent_point);
  str("child", j.child);
  str("child_point", j.child_point);
  if (auto v = r.child(n, "type", path, true); v.IsDefined()) {
    if (auto s = r.text(v, path + ".type")) {
      if (*s == "weld") j.type = JointKind::kWeld;
      else if (*s == "revolute") j.type = JointKind::kRevolute;
      else if (*s == "prismatic") j.type = JointKind::kPrismatic;
      else r.error(v, path + ".type", "unknown joint type '" + *s + "' (expected weld, revolute or prismatic)");
    }
  }
  const bool needs_axis = j.type != JointKind::kWeld;
  if (auto v = r.child(n, "axis", path, needs_axis); v.IsDefined()) {
    if (auto a = r.vec3(v, path + ".axis")) {
      if (a->norm() < 1e-12 || !a->allFinite()) {
        r.error(v, path + ".axis", "axis cannot be normalized (zero length)");
      } else {
        j.axis = *a;  // normalized by the joint block
      }
    }
  }
  if (auto v = r.child(n, "orientation", path, false); v.IsDefined()) {
    if (auto m = r.matrix<3>(v, path + ".orientation", false)) {
      const double orth = (m->transpose() * *m - Mat3::Identity()).cwiseAbs().maxCoeff();
      if (orth > 1e-9 || m->determinant() < 0.0) {
        r.error(v, path + ".orientation", "orientation is not a proper rotation matrix");
      } else {
        j.orientation = *m;
      }
    }
  }
  if (auto v = r.child(n, "initial", path, false); v.IsDefined()) {
    read_initial(r, v, path + ".initial", j);
  }
  if (auto v = r.child(n, "drive", path, false); v.IsDefined()) {
    read_drive(r, v, path + ".drive", j.drive);
  }
  return j;
}

ForceSpec read_force(Reader& r, const YAML::Node& n, const std::string& path) {
  ForceSpec f;
  f.where = location_of(n);
  if (!r.is_map(n, path)) return f;
  auto str = [&](const char* key, std::string& out) {
    if (auto v = r.child(n, key, path, true); v.IsDefined()) {
      if (auto s = r.text(v, path + "." + key)) out = *s;
    }
  };
  str("name", f.name);
  str("body", f.body);
  str("point", f.point);
  auto type_node = r.child(n, "type", path, true);
  std::string type;
  if (type_node.IsDefined()) {
    if (auto s = r.text(type_node, path + ".type")) type = *s;
  }
  auto force_torque = [&](bool required) {
    if (auto v = r.child(n, "force", path, required); v.IsDefined()) {
      if (auto x = r.vec3(v, path + ".force")) f.force = *x;
    }
    if (auto v = r.child(n, "torque", path, false); v.IsDefined()) {
      if (auto x = r.vec3(v, path + ".torque")) f.torque = *x;
    }
  };
  if (type == "constant_inertial" || type == "constant_body") {
    f.kind = type == "constant_inertial" ? ForceKind::kConstantInertial : ForceKind::kConstantBody;
    r.check_keys(n, path, {"name", "type", "body", "point", "force", "torque"});
    force_torque(true);
  } else if (type == "buoyancy") {
    f.kind = ForceKind::kBuoyancy;
    r.check_keys(n, path, {"name", "type", "body", "point"});
  } else if (type == "tabulated") {
    f.kind = ForceKind::kTabulated;
    r.check_keys(n, path, {"name", "type", "body", "point", "frame", "table"});
    if (auto v = r.child(n, "frame", path, false); v.IsDefined()) {
      if (auto s = r.text(v, path + ".frame")) {
        if (*s == "inertial") f.inertial = true;
        else if (*s == "body") f.inertial = false;
        else r.error(v, path + ".frame", "frame must be 'inertial' or 'body'");
      }
    }
    if (auto v = r.child(n, "table", path, true); v.IsDefined() && r.is_seq(v, path + ".table")) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        auto row = r.numbers(v[i], indexed(path + ".table", i), 7);
        if (!row) continue;
        f.times.push_back((*row)[0]);
        Vec6 w;
        for (int k = 0; k < 6; ++k) w(k) = (*row)[k + 1];
        f.samples.push_back(w);
      }
      if (f.times.empty()) r.error(v, path + ".table", "table needs at least one row");
      for (std::size_t i = 1; i < f.times.size(); ++i) {
        if (!(f.times[i] > f.times[i - 1])) {
          r.error(v, path + ".table", "times must be strictly increasing");
          break;
        }
      }
    }
  } else if (!type.empty()) {
    r.error(type_node, path + ".type",
            "unknown force type '" + type +
                "' (expected constant_inertial, constant_body, tabulated or buoyancy)");
  }
  return f;
}

ClosureEndSpec read_end(Reader& r, const YAML::Node& n, const std::string& path) {
  ClosureEndSpec e;
  if (!r.is_map(n, path)) return e;
  r.check_keys(n, path, {"body", "point"});
  if (auto v = r.child(n, "body", path, true); v.IsDefined()) {
    if (auto s = r.text(v, path + ".body")) e.body = *s;
  }
  if (auto v = r.child(n, "point", path, true); v.IsDefined()) {
    if (auto s = r.text(v, path + ".point")) e.point = *s;
  }
  return e;
}

ClosureSpec read_closure(Reader& r, const YAML::Node& n, const std::string& path) {
  ClosureSpec c;
  c.where = location_of(n);
  if (!r.is_map(n, path)) return c;
  r.check_keys(n, path, {"name", "left", "right", "stiffness", "damping"});
  if (auto v = r.child(n, "name", path, true); v.IsDefined()) {
    if (auto s = r.text(v, path + ".name")) c.name = *s;
  }
  if (auto v = r.child(n, "left", path, true); v.IsDefined()) c.left = read_end(r, v, path + ".left");
  if (auto v = r.child(n, "right", path, true); v.IsDefined()) {
    c.right = read_end(r, v, path + ".right");
  }
  if (auto v = r.child(n, "stiffness", path, true); v.IsDefined()) {
    if (auto m = r.matrix<6>(v, path + ".stiffness", true)) c.stiffness = *m;
  }
  if (auto v = r.child(n, "damping", path, false); v.IsDefined()) {
    if (auto m = r.matrix<6>(v, path + ".damping", true)) c.damping = *m;
  }
  return c;
}

void read_outputs(Reader& r, const YAML::Node& n, ScenarioConfig& c) {
  if (!r.is_map(n, "outputs")) return;
  r.check_keys(n, "outputs", {"dofs", "every"});
  if (auto v = r.child(n, "dofs", "outputs", false); v.IsDefined() && r.is_seq(v, "outputs.dofs")) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (auto s = r.text(v[i], indexed("outputs.dofs", i))) c.outputs.dofs.push_back(*s);
    }
  }
  if (auto v = r.child(n, "every", "outputs", false); v.IsDefined()) {
    if (auto k = r.integer(v, "outputs.every")) {
      if (*k < 1) r.error(v, "outputs.every", "every must be >= 1");
      else c.outputs.every = *k;
    }
  }
}

void read_integration(Reader& r, const YAML::Node& n, ScenarioConfig& c) {
  if (!r.is_map(n, "integration")) return;
  r.check_keys(n, "integration", {"dt", "t_final", "scheme"});
  if (auto v = r.child(n, "dt", "integration", false); v.IsDefined()) {
    if (auto x = r.number(v, "integration.dt")) {
      if (!(*x > 0.0)) r.error(v, "integration.dt", "dt must be positive");
      else c.integration.dt = *x;
    }
  }
  if (auto v = r.child(n, "t_final", "integration", false); v.IsDefined()) {
    if (auto x = r.number(v, "integration.t_final")) {
      if (*x < 0.0) r.error(v, "integration.t_final", "t_final must be non-negative");
      else c.integration.t_final = *x;
    }
  }
  if (auto v = r.child(n, "scheme", "integration", false); v.IsDefined()) {
    if (auto s = r.text(v, "integration.scheme")) {
      if (*s != "rk4" && *s != "semi-implicit-euler") {
        r.error(v, "integration.scheme",
                "unknown scheme '" + *s + "' (expected rk4 or semi-implicit-euler)");
      } else {
        c.integration.scheme = *s;
      }
    }
  }
}

/// Config-level location lookup for semantic issues.
SourceLocation where_of_block(const ScenarioConfig& c, const std::string& name) {
  if (const BodySpec* b = c.body(name)) return b->where;
  if (const AnchorSpec* a = c.anchor(name)) return a->where;
  return {};
}

bool inertia_ok(const Mat3& inertia, std::string& why) {
  if ((inertia - inertia.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + inertia.norm())) {
    why = "inertia is not symmetric";
    return false;
  }
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(0.5 * (inertia + inertia.transpose()));
  const Vec3 l = eig.eigenvalues();
  const double tol = 1e-12 * (1.0 + l.cwiseAbs().maxCoeff());
  if (l.minCoeff() < -tol) {
    why = "inertia is not positive semi-definite";
    return false;
  }
  return true;
}

}  // namespace

std::string ScenarioIssue::to_string() const {
  std::ostringstream out;
  if (where.line > 0) out << "line " << where.line << ", column " << where.column << ": ";
  if (!path.empty()) out << path << ": ";
  out << message;
  return out.str();
}

ScenarioError::ScenarioError(std::vector<ScenarioIssue> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

const NamedPoint* BodySpec::point(const std::string& id) const {
  for (const auto& p : points) {
    if (p.name == id) return &p;
  }
  return nullptr;
}

const NamedPoint* AnchorSpec::point(const std::string& id) const {
  for (const auto& p : points) {
    if (p.name == id) return &p;
  }
  return nullptr;
}

double ProfileSpec::at(double t) const {
  switch (kind) {
    case ProfileKind::kNone:
      return 0.0;
    case ProfileKind::kConstant:
      return value;
    case ProfileKind::kSine:
      return amplitude * std::sin(2.0 * kPi * frequency * t + phase);
    case ProfileKind::kTable: {
      if (times.empty()) return 0.0;
      if (t <= times.front()) return values.front();
      if (t >= times.back()) return values.back();
      const auto it = std::upper_bound(times.begin(), times.end(), t);
      const std::size_t i = static_cast<std::size_t>(it - times.begin());
      const double s = (t - times[i - 1]) / (times[i] - times[i - 1]);
      return values[i - 1] + s * (values[i] - values[i - 1]);
    }
  }
  return 0.0;
}

double DriveSpec::force(double q, double qd, double t) const {
  return -stiffness * (q - rest) - damping * qd + profile.at(t);
}

std::string to_string(JointKind kind) {
  switch (kind) {
    case JointKind::kWeld:
      return "weld";
    case JointKind::kRevolute:
      return "revolute";
    case JointKind::kPrismatic:
      return "prismatic";
  }
  return "weld";
}

std::string to_string(ForceKind kind) {
  switch (kind) {
    case ForceKind::kConstantInertial:
      return "constant_inertial";
    case ForceKind::kConstantBody:
      return "constant_body";
    case ForceKind::kTabulated:
      return "tabulated";
    case ForceKind::kBuoyancy:
      return "buoyancy";
  }
  return "constant_inertial";
}

const BodySpec* ScenarioConfig::body(const std::string& id) const {
  for (const auto& b : bodies) {
    if (b.name == id) return &b;
  }
  return nullptr;
}

const AnchorSpec* ScenarioConfig::anchor(const std::string& id) const {
  for (const auto& a : anchors) {
    if (a.name == id) return &a;
  }
  return nullptr;
}

double ScenarioConfig::total_mass() const {
  double m = 0.0;
  for (const auto& b : bodies) m += b.mass;
  return m;
}

std::vector<ScenarioIssue> validate_scenario(const ScenarioConfig& c) {
  std::vector<ScenarioIssue> issues;
  auto add = [&](std::string path, SourceLocation where, std::string msg) {
    issues.push_back({std::move(path), where, std::move(msg)});
  };

  if (c.schema_version != kSchemaVersion) {
    add("schema_version", {}, "unsupported schema_version " + std::to_string(c.schema_version));
  }
  if (c.bodies.empty()) {
    add("bodies", {}, "no dynamic terminal: the scenario declares no bodies");
  }

  // Bodies and anchors share one namespace with joints (block names).
  std::set<std::string> names;
  auto claim = [&](const std::string& name, const std::string& path, SourceLocation where) {
    if (name.empty()) return;
    if (!names.insert(name).second) add(path + ".name", where, "duplicate name '" + name + "'");
  };
  for (std::size_t i = 0; i < c.bodies.size(); ++i) {
    const BodySpec& b = c.bodies[i];
    const std::string path = indexed("bodies", i);
    claim(b.name, path, b.where);
    if (!(b.mass >= 0.0)) add(path + ".mass", b.where, "mass must be non-negative");
    std::string why;
    if (!inertia_ok(b.inertia, why)) add(path + ".inertia", b.where, why);
    std::set<std::string> pts;
    for (const auto& p : b.points) {
      if (!pts.insert(p.name).second) {
        add(path + ".points", b.where, "duplicate point '" + p.name + "'");
      }
    }
    if (b.base && !b.base->reference_point.empty() && !b.point(b.base->reference_point)) {
      add(path + ".base.reference_point", b.where,
          "unknown point '" + b.base->reference_point + "' on body '" + b.name + "'");
    }
  }
  for (std::size_t i = 0; i < c.anchors.size(); ++i) {
    claim(c.anchors[i].name, indexed("anchors", i), c.anchors[i].where);
  }
  for (std::size_t i = 0; i < c.joints.size(); ++i) {
    claim(c.joints[i].name, indexed("joints", i), c.joints[i].where);
  }

  // Joint references and the parent of every body.
  std::map<std::string, std::string> parent_of;
  for (std::size_t i = 0; i < c.joints.size(); ++i) {
    const JointSpec& j = c.joints[i];
    const std::string path = indexed("joints", i);
    if (j.type != JointKind::kWeld && (!j.axis.allFinite() || j.axis.norm() < 1e-12)) {
      add(path + ".axis", j.where, "axis cannot be normalized (zero length)");
    }
    const BodySpec* pb = c.body(j.parent);
    const AnchorSpec* pa = c.anchor(j.parent);
    if (!pb && !pa) {
      add(path + ".parent", j.where, "unknown parent '" + j.parent + "'");
    } else if ((pb && !pb->point(j.parent_point)) || (pa && !pa->point(j.parent_point))) {
      add(path + ".parent_point", j.where,
          "unknown point '" + j.parent_point + "' on '" + j.parent + "'");
    }
    const BodySpec* cb = c.body(j.child);
    if (!cb) {
      add(path + ".child", j.where,
          c.anchor(j.child) ? "an anchor cannot be a joint child"
                            : "unknown child body '" + j.child + "'");
      continue;
    }
    if (!cb->point(j.child_point)) {
      add(path + ".child_point", j.where,
          "unknown point '" + j.child_point + "' on '" + j.child + "'");
    }
    if (cb->base) {
      add(path + ".child", j.where,
          "body '" + j.child + "' is a free base and cannot also be a joint child");
    }
    if (j.child == j.parent) add(path + ".child", j.where, "a joint cannot connect a body to itself");
    if (parent_of.count(j.child)) {
      add(path + ".child", j.where,
          "closed kinematic chain without loop closure: body '" + j.child +
              "' already has parent '" + parent_of[j.child] + "'");
    } else {
      parent_of[j.child] = j.parent;
    }
  }
  for (const BodySpec& b : c.bodies) {
    if (b.base || parent_of.count(b.name)) continue;
    add("bodies", b.where,
        "body '" + b.name + "' has neither a base nor a parent joint (no dynamic terminal)");
  }
  // Following parents must reach a base or an anchor.
  std::set<std::string> reported;
  for (const auto& [child, parent] : parent_of) {
    std::set<std::string> seen{child};
    std::string cur = parent;
    while (parent_of.count(cur)) {
      if (!seen.insert(cur).second) break;
      cur = parent_of.at(cur);
    }
    if (seen.count(cur) && !reported.count(cur)) {
      reported.insert(seen.begin(), seen.end());
      add("joints", where_of_block(c, cur),
          "closed kinematic chain without loop closure through body '" + cur + "'");
    }
  }

  std::set<std::string> force_names;
  for (std::size_t i = 0; i < c.forces.size(); ++i) {
    const ForceSpec& f = c.forces[i];
    const std::string path = indexed("forces", i);
    if (!f.name.empty() && !force_names.insert(f.name).second) {
      add(path + ".name", f.where, "duplicate force name '" + f.name + "'");
    }
    const BodySpec* b = c.body(f.body);
    if (!b) {
      add(path + ".body", f.where, "unknown body '" + f.body + "'");
    } else if (!b->point(f.point)) {
      add(path + ".point", f.where, "unknown point '" + f.point + "' on '" + f.body + "'");
    }
  }

  std::set<std::string> closure_names;
  for (std::size_t i = 0; i < c.closures.size(); ++i) {
    const ClosureSpec& cl = c.closures[i];
    const std::string path = indexed("closures", i);
    if (!cl.name.empty() && (!closure_names.insert(cl.name).second || names.count(cl.name))) {
      add(path + ".name", cl.where, "duplicate name '" + cl.name + "'");
    }
    for (const auto& [end, side] : {std::pair{&cl.left, "left"}, std::pair{&cl.right, "right"}}) {
      const BodySpec* b = c.body(end->body);
      const AnchorSpec* a = c.anchor(end->body);
      if (!b && !a) {
        add(path + "." + side + ".body", cl.where, "unknown body '" + end->body + "'");
      } else if ((b && !b->point(end->point)) || (a && !a->point(end->point))) {
        add(path + "." + side + ".point", cl.where,
            "unknown point '" + end->point + "' on '" + end->body + "'");
      }
    }
    for (const auto& [m, what] :
         {std::pair{&cl.stiffness, "stiffness"}, std::pair{&cl.damping, "damping"}}) {
      if ((*m - m->transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + m->norm())) {
        add(path + "." + what, cl.where, std::string(what) + " must be symmetric");
        continue;
      }
      const Eigen::SelfAdjointEigenSolver<Mat6> eig(*m);
      if (eig.eigenvalues().minCoeff() < -1e-12 * (1.0 + m->norm())) {
        add(path + "." + what, cl.where, std::string(what) + " must be positive semi-definite");
      }
    }
  }

  const std::vector<std::string> dofs = scenario_dof_names(c);
  for (std::size_t i = 0; i < c.outputs.dofs.size(); ++i) {
    if (std::find(dofs.begin(), dofs.end(), c.outputs.dofs[i]) == dofs.end()) {
      add(indexed("outputs.dofs", i), {}, "unknown DOF '" + c.outputs.dofs[i] + "'");
    }
  }
  if (c.outputs.every < 1) add("outputs.every", {}, "every must be >= 1");
  if (!(c.integration.dt > 0.0)) add("integration.dt", {}, "dt must be positive");
  if (!(c.integration.t_final >= 0.0)) add("integration.t_final", {}, "t_final must be non-negative");
  return issues;
}

ScenarioConfig parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ScenarioError({{"", {e.mark.line + 1, e.mark.column + 1}, e.msg}});
  } catch (const YAML::Exception& e) {
    throw ScenarioError({{"", {}, e.what()}});
  }

  Reader r;
  ScenarioConfig c;
  if (!root.IsMap()) {
    r.error(root, "", "scenario must be a mapping at the top level");
    throw ScenarioError(r.issues);
  }
  r.check_keys(root, "", {"schema_version", "name", "gravity", "euler_sequence", "bodies",
                          "anchors", "joints", "forces", "closures", "outputs", "integration"});
  if (auto v = r.child(root, "schema_version", "", true); v.IsDefined()) {
    if (auto k = r.integer(v, "schema_version")) {
      if (*k != kSchemaVersion) {
        r.error(v, "schema_version", "unsupported schema_version " + std::to_string(*k) +
                                         " (this build reads " + std::to_string(kSchemaVersion) + ")");
      }
      c.schema_version = kSchemaVersion;
    }
  }
  if (auto v = r.child(root, "name", "", false); v.IsDefined()) {
    if (auto s = r.text(v, "name")) c.name = *s;
  }
  if (auto v = r.child(root, "gravity", "", false); v.IsDefined()) {
    if (auto g = r.vec3(v, "gravity")) c.gravity = *g;
  }
  if (auto v = r.child(root, "euler_sequence", "", false); v.IsDefined()) {
    if (auto s = r.text(v, "euler_sequence")) {
      try {
        c.sequence = parse_euler_sequence(*s);
      } catch (const std::exception& e) {
        r.error(v, "euler_sequence", e.what());
      }
    }
  }

  if (auto v = r.child(root, "bodies", "", false); v.IsDefined() && r.is_seq(v, "bodies")) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      c.bodies.push_back(read_body(r, v[i], indexed("bodies", i)));
    }
  }
  if (auto v = r.child(root, "anchors", "", false); v.IsDefined() && r.is_seq(v, "anchors")) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      c.anchors.push_back(read_anchor(r, v[i], indexed("anchors", i)));
    }
  }
  if (auto v = r.child(root, "joints", "", false); v.IsDefined() && r.is_seq(v, "joints")) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      c.joints.push_back(read_joint(r, v[i], indexed("joints", i)));
    }
  }
  if (auto v = r.child(root, "forces", "", false); v.IsDefined() && r.is_seq(v, "forces")) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      c.forces.push_back(read_force(r, v[i], indexed("forces", i)));
    }
  }
  if (auto v = r.child(root, "closures", "", false); v.IsDefined() && r.is_seq(v, "closures")) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      c.closures.push_back(read_closure(r, v[i], indexed("closures", i)));
    }
  }
  if (auto v = r.child(root, "outputs", "", false); v.IsDefined()) read_outputs(r, v, c);
  if (auto v = r.child(root, "integration", "", false); v.IsDefined()) read_integration(r, v, c);

  // Semantic checks only make sense once the structure parsed cleanly; the
  // empty-body case is reported either way.
  std::vector<ScenarioIssue> issues = std::move(r.issues);
  if (issues.empty()) {
    issues = validate_scenario(c);
  } else if (c.bodies.empty()) {
    issues.push_back({"bodies", location_of(root), "no dynamic terminal: the scenario declares no bodies"});
  }
  if (!issues.empty()) throw ScenarioError(std::move(issues));
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioFileError("cannot open scenario file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

namespace {

void emit_vec(YAML::Emitter& out, const Eigen::Ref<const Eigen::VectorXd>& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (Eigen::Index i = 0; i < v.size(); ++i) out << v(i);
  out << YAML::EndSeq;
}

template <typename M>
void emit_matrix(YAML::Emitter& out, const M& m) {
  out << YAML::BeginSeq;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << YAML::Flow << YAML::BeginSeq;
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << m(r, c);
    out << YAML::EndSeq;
  }
  out << YAML::EndSeq;
}

void emit_points(YAML::Emitter& out, const std::vector<NamedPoint>& points) {
  out << YAML::BeginMap;
  for (const auto& p : points) {
    out << YAML::Key << p.name << YAML::Value;
    emit_vec(out, p.position);
  }
  out << YAML::EndMap;
}

void emit_profile(YAML::Emitter& out, const ProfileSpec& p) {
  out << YAML::BeginMap;
  switch (p.kind) {
    case ProfileKind::kConstant:
      out << YAML::Key << "type" << YAML::Value << "constant";
      out << YAML::Key << "value" << YAML::Value << p.value;
      break;
    case ProfileKind::kSine:
      out << YAML::Key << "type" << YAML::Value << "sine";
      out << YAML::Key << "amplitude" << YAML::Value << p.amplitude;
      out << YAML::Key << "frequency" << YAML::Value << p.frequency;
      out << YAML::Key << "phase" << YAML::Value << p.phase;
      break;
    case ProfileKind::kTable:
      out << YAML::Key << "type" << YAML::Value << "table";
      out << YAML::Key << "times" << YAML::Value << YAML::Flow << p.times;
      out << YAML::Key << "values" << YAML::Value << YAML::Flow << p.values;
      break;
    case ProfileKind::kNone:
      break;
  }
  out << YAML::EndMap;
}

}  // namespace

std::string emit_scenario(const ScenarioConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "schema_version" << YAML::Value << c.schema_version;
  out << YAML::Key << "name" << YAML::Value << c.name;
  out << YAML::Key << "euler_sequence" << YAML::Value << YAML::DoubleQuoted << to_string(c.sequence);
  out << YAML::Key << "gravity" << YAML::Value;
  emit_vec(out, c.gravity);

  out << YAML::Key << "bodies" << YAML::Value << YAML::BeginSeq;
  for (const BodySpec& b : c.bodies) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << b.name;
    out << YAML::Key << "mass" << YAML::Value << b.mass;
    out << YAML::Key << "inertia" << YAML::Value;
    emit_matrix(out, b.inertia);
    out << YAML::Key << "com" << YAML::Value;
    emit_vec(out, b.com);
    out << YAML::Key << "points" << YAML::Value;
    emit_points(out, b.points);
    if (b.base) {
      out << YAML::Key << "base" << YAML::Value << YAML::BeginMap;
      out << YAML::Key << "reference_point" << YAML::Value << b.base->reference_point;
      out << YAML::Key << "twist" << YAML::Value;
      emit_vec(out, b.base->twist);
      out << YAML::Key << "position" << YAML::Value;
      emit_vec(out, b.base->position);
      out << YAML::Key << "attitude" << YAML::Value;
      emit_vec(out, b.base->attitude);
      out << YAML::EndMap;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  if (!c.anchors.empty()) {
    out << YAML::Key << "anchors" << YAML::Value << YAML::BeginSeq;
    for (const AnchorSpec& a : c.anchors) {
      out << YAML::BeginMap;
      out << YAML::Key << "name" << YAML::Value << a.name;
      out << YAML::Key << "points" << YAML::Value;
      emit_points(out, a.points);
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }

  if (!c.joints.empty()) {
    out << YAML::Key << "joints" << YAML::Value << YAML::BeginSeq;
    for (const JointSpec& j : c.joints) {
      out << YAML::BeginMap;
      out << YAML::Key << "name" << YAML::Value << j.name;
      out << YAML::Key << "type" << YAML::Value << to_string(j.type);
      out << YAML::Key << "parent" << YAML::Value << j.parent;
      out << YAML::Key << "parent_point" << YAML::Value << j.parent_point;
      out << YAML::Key << "child" << YAML::Value << j.child;
      out << YAML::Key << "child_point" << YAML::Value << j.child_point;
      out << YAML::Key << "axis" << YAML::Value;
      emit_vec(out, j.axis);
      out << YAML::Key << "orientation" << YAML::Value;
      emit_matrix(out, j.orientation);
      out << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
      out << YAML::Key << "position" << YAML::Value << j.q0;
      out << YAML::Key << "rate" << YAML::Value << j.qd0;
      out << YAML::EndMap;
      out << YAML::Key << "drive" << YAML::Value << YAML::BeginMap;
      out << YAML::Key << "stiffness" << YAML::Value << j.drive.stiffness;
      out << YAML::Key << "damping" << YAML::Value << j.drive.damping;
      out << YAML::Key << "rest" << YAML::Value << j.drive.rest;
      if (j.drive.profile.kind != ProfileKind::kNone) {
        out << YAML::Key << "profile" << YAML::Value;
        emit_profile(out, j.drive.profile);
      }
      out << YAML::EndMap;
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }

  if (!c.forces.empty()) {
    out << YAML::Key << "forces" << YAML::Value << YAML::BeginSeq;
    for (const ForceSpec& f : c.forces) {
      out << YAML::BeginMap;
      out << YAML::Key << "name" << YAML::Value << f.name;
      out << YAML::Key << "type" << YAML::Value << to_string(f.kind);
      out << YAML::Key << "body" << YAML::Value << f.body;
      out << YAML::Key << "point" << YAML::Value << f.point;
      if (f.kind == ForceKind::kConstantInertial || f.kind == ForceKind::kConstantBody) {
        out << YAML::Key << "force" << YAML::Value;
        emit_vec(out, f.force);
        out << YAML::Key << "torque" << YAML::Value;
        emit_vec(out, f.torque);
      } else if (f.kind == ForceKind::kTabulated) {
        out << YAML::Key << "frame" << YAML::Value << (f.inertial ? "inertial" : "body");
        out << YAML::Key << "table" << YAML::Value << YAML::BeginSeq;
        for (std::size_t i = 0; i < f.times.size(); ++i) {
          out << YAML::Flow << YAML::BeginSeq << f.times[i];
          for (int k = 0; k < 6; ++k) out << f.samples[i](k);
          out << YAML::EndSeq;
        }
        out << YAML::EndSeq;
      }
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }

  if (!c.closures.empty()) {
    out << YAML::Key << "closures" << YAML::Value << YAML::BeginSeq;
    for (const ClosureSpec& cl : c.closures) {
      out << YAML::BeginMap;
      out << YAML::Key << "name" << YAML::Value << cl.name;
      for (const auto& [end, side] : {std::pair{&cl.left, "left"}, std::pair{&cl.right, "right"}}) {
        out << YAML::Key << side << YAML::Value << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "body" << YAML::Value << end->body;
        out << YAML::Key << "point" << YAML::Value << end->point;
        out << YAML::EndMap;
      }
      out << YAML::Key << "stiffness" << YAML::Value;
      emit_matrix(out, cl.stiffness);
      out << YAML::Key << "damping" << YAML::Value;
      emit_matrix(out, cl.damping);
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }

  out << YAML::Key << "outputs" << YAML::Value << YAML::BeginMap;
  if (!c.outputs.dofs.empty()) {
    out << YAML::Key << "dofs" << YAML::Value << YAML::Flow << c.outputs.dofs;
  }
  out << YAML::Key << "every" << YAML::Value << c.outputs.every;
  out << YAML::EndMap;

  out << YAML::Key << "integration" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dt" << YAML::Value << c.integration.dt;
  out << YAML::Key << "t_final" << YAML::Value << c.integration.t_final;
  out << YAML::Key << "scheme" << YAML::Value << c.integration.scheme;
  out << YAML::EndMap;

  out << YAML::EndMap;
  std::string text = out.c_str();
  text.push_back('\n');
  return text;
}

std::vector<std::string> scenario_dof_names(const ScenarioConfig& c) {
  std::vector<std::string> names;
  for (const BodySpec& b : c.bodies) {
    if (!b.base) continue;
    for (const char* s : {".x", ".y", ".z", ".phi", ".theta", ".psi"}) names.push_back(b.name + s);
  }
  for (const JointSpec& j : c.joints) {
    if (j.type != JointKind::kWeld) names.push_back(j.name);
  }
  return names;
}

}  // namespace blockdyn
