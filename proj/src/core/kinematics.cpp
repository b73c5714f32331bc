// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#include "kinematics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "error.hpp"

namespace splatrig {

namespace {

constexpr double kAxisTolerance = 1e-9;

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& message) {
  fail(ErrorCode::kFormat, "kinematic model line " + std::to_string(line_no) + ": " + message);
}

double parse_number(std::string_view s, std::size_t line_no) {
  // std::from_chars does not accept a leading '+'.
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    parse_fail(line_no, "bad number '" + std::string(s) + "'");
  }
  return v;
}

std::vector<double> parse_list(std::string_view s, std::size_t expected, std::size_t line_no) {
  std::vector<double> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(parse_number(s.substr(0, comma), line_no));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  if (out.size() != expected) {
    parse_fail(line_no, "expected " + std::to_string(expected) + " comma-separated values");
  }
  return out;
}

// Splits "key=value" attributes; returns false for a token without '='.
bool split_attr(const std::string& token, std::string* key, std::string* value) {
  const auto eq = token.find('=');
  if (eq == std::string::npos) return false;
  *key = token.substr(0, eq);
  *value = token.substr(eq + 1);
  return true;
}

struct RawJoint {
  Joint joint;
  std::string parent;
  std::string child;
  std::size_t line_no = 0;
};

struct RawMimic {
  std::string group;
  std::string joint;
  double multiplier = 1.0;
  std::optional<double> offset;
  std::size_t line_no = 0;
};

Mat3 axis_rotation(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

}  // namespace

int KinematicModel::link_index(std::string_view name) const {
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (links[i] == name) return static_cast<int>(i);
  }
  return -1;
}

int KinematicModel::joint_index(std::string_view name) const {
  for (std::size_t i = 0; i < joints.size(); ++i) {
    if (joints[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

Mat3 rpy_to_rotation(double roll, double pitch, double yaw) {
  return (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
          Eigen::AngleAxisd(roll, Vec3::UnitX()))
      .toRotationMatrix();
}

KinematicModel parse_kinematic_model(std::string_view text) {
  KinematicModel model;
  std::vector<RawJoint> raw_joints;
  std::vector<RawMimic> raw_mimics;

  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::string keyword;
    if (!(ss >> keyword)) continue;
    std::vector<std::string> tokens;
    for (std::string t; ss >> t;) tokens.push_back(t);

    if (keyword == "link") {
      if (tokens.size() != 1) parse_fail(line_no, "expected 'link NAME'");
      if (model.link_index(tokens[0]) >= 0) parse_fail(line_no, "duplicate link '" + tokens[0] + "'");
      model.links.push_back(tokens[0]);
    } else if (keyword == "joint") {
      if (tokens.size() < 4) parse_fail(line_no, "expected 'joint NAME TYPE PARENT CHILD ...'");
      RawJoint rj;
      rj.line_no = line_no;
      rj.joint.name = tokens[0];
      const std::string& type = tokens[1];
      if (type == "revolute") {
        rj.joint.type = JointType::kRevolute;
      } else if (type == "prismatic") {
        rj.joint.type = JointType::kPrismatic;
      } else if (type == "fixed") {
        rj.joint.type = JointType::kFixed;
      } else {
        parse_fail(line_no, "unknown joint type '" + type + "'");
      }
      rj.parent = tokens[2];
      rj.child = tokens[3];
      Vec3 xyz = Vec3::Zero();
      Vec3 rpy = Vec3::Zero();
      for (std::size_t i = 4; i < tokens.size(); ++i) {
        std::string key, value;
        if (!split_attr(tokens[i], &key, &value)) parse_fail(line_no, "expected key=value, got '" + tokens[i] + "'");
        if (key == "xyz") {
          const auto v = parse_list(value, 3, line_no);
          xyz = Vec3(v[0], v[1], v[2]);
        } else if (key == "rpy") {
          const auto v = parse_list(value, 3, line_no);
          rpy = Vec3(v[0], v[1], v[2]);
        } else if (key == "axis") {
          const auto v = parse_list(value, 3, line_no);
          rj.joint.axis = Vec3(v[0], v[1], v[2]);
        } else if (key == "limits") {
          const auto v = parse_list(value, 2, line_no);
          rj.joint.lower = v[0];
          rj.joint.upper = v[1];
        } else {
          parse_fail(line_no, "unknown joint attribute '" + key + "'");
        }
      }
      if (std::abs(rj.joint.axis.norm() - 1.0) > kAxisTolerance) {
        parse_fail(line_no, "joint '" + rj.joint.name + "' axis is not unit length");
      }
      if (!(rj.joint.lower <= rj.joint.upper)) {
        parse_fail(line_no, "joint '" + rj.joint.name + "' has lower limit above upper limit");
      }
      rj.joint.origin = RigidTransform(rpy_to_rotation(rpy[0], rpy[1], rpy[2]), xyz);
      raw_joints.push_back(std::move(rj));
    } else if (keyword == "mimic") {
      if (tokens.size() < 2) parse_fail(line_no, "expected 'mimic GROUP JOINT ...'");
      RawMimic rm;
      rm.line_no = line_no;
      rm.group = tokens[0];
      rm.joint = tokens[1];
      for (std::size_t i = 2; i < tokens.size(); ++i) {
        std::string key, value;
        if (!split_attr(tokens[i], &key, &value)) parse_fail(line_no, "expected key=value, got '" + tokens[i] + "'");
        if (key == "multiplier") {
          rm.multiplier = parse_number(value, line_no);
        } else if (key == "offset") {
          rm.offset = parse_number(value, line_no);
        } else {
          parse_fail(line_no, "unknown mimic attribute '" + key + "'");
        }
      }
      raw_mimics.push_back(std::move(rm));
    } else {
      parse_fail(line_no, "unknown keyword '" + keyword + "'");
    }
  }

  if (model.links.empty()) fail(ErrorCode::kFormat, "kinematic model declares no links");

  // Resolve link names and check that every link has at most one parent.
  std::vector<int> parent_joint(model.links.size(), -1);
  std::vector<Joint> declared;
  for (auto& rj : raw_joints) {
    for (const auto& j : declared) {
      if (j.name == rj.joint.name) parse_fail(rj.line_no, "duplicate joint '" + rj.joint.name + "'");
    }
    rj.joint.parent = model.link_index(rj.parent);
    rj.joint.child = model.link_index(rj.child);
    if (rj.joint.parent < 0) parse_fail(rj.line_no, "unknown parent link '" + rj.parent + "'");
    if (rj.joint.child < 0) parse_fail(rj.line_no, "unknown child link '" + rj.child + "'");
    if (rj.joint.parent == rj.joint.child) {
      parse_fail(rj.line_no, "cycle: joint '" + rj.joint.name + "' connects a link to itself");
    }
    if (parent_joint[rj.joint.child] >= 0) {
      parse_fail(rj.line_no, "link '" + rj.child + "' has more than one parent joint");
    }
    parent_joint[rj.joint.child] = static_cast<int>(declared.size());
    declared.push_back(rj.joint);
  }

  std::vector<int> roots;
  for (std::size_t l = 0; l < model.links.size(); ++l) {
    if (parent_joint[l] < 0) roots.push_back(static_cast<int>(l));
  }
  if (roots.empty()) fail(ErrorCode::kFormat, "kinematic model contains a cycle (no root link)");
  if (roots.size() > 1) {
    fail(ErrorCode::kFormat, "kinematic model has multiple roots: '" + model.links[roots[0]] +
                                 "' and '" + model.links[roots[1]] + "'");
  }
  model.root = roots[0];

  // Breadth-first order from the root; anything unreached sits on a cycle.
  std::vector<std::vector<int>> children(model.links.size());
  for (std::size_t j = 0; j < declared.size(); ++j) children[declared[j].parent].push_back(static_cast<int>(j));
  std::vector<int> order;
  std::vector<char> reached(model.links.size(), 0);
  std::deque<int> queue{model.root};
  reached[model.root] = 1;
  while (!queue.empty()) {
    const int link = queue.front();
    queue.pop_front();
    for (int j : children[link]) {
      order.push_back(j);
      reached[declared[j].child] = 1;
      queue.push_back(declared[j].child);
    }
  }
  for (std::size_t l = 0; l < model.links.size(); ++l) {
    if (!reached[l]) fail(ErrorCode::kFormat, "kinematic model contains a cycle through link '" + model.links[l] + "'");
  }

  std::vector<int> declared_to_stored(declared.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    declared_to_stored[order[i]] = static_cast<int>(i);
    model.joints.push_back(declared[order[i]]);
  }

  for (const auto& rm : raw_mimics) {
    const int j = model.joint_index(rm.joint);
    if (j < 0) parse_fail(rm.line_no, "mimic references unknown joint '" + rm.joint + "'");
    const Joint& joint = model.joints[j];
    if (joint.type == JointType::kFixed) parse_fail(rm.line_no, "mimic joint '" + rm.joint + "' is fixed");
    if (!std::isfinite(joint.lower) || !std::isfinite(joint.upper)) {
      parse_fail(rm.line_no, "mimic joint '" + rm.joint + "' needs finite limits");
    }
    for (const auto& m : model.mimics) {
      if (m.joint == j) parse_fail(rm.line_no, "joint '" + rm.joint + "' is in more than one mimic entry");
    }
    MimicEntry entry{rm.group, j, rm.multiplier, rm.offset.value_or(rm.multiplier >= 0.0 ? 0.0 : -rm.multiplier)};
    const double f0 = entry.offset;
    const double f1 = entry.offset + entry.multiplier;
    if (f0 < 0.0 || f0 > 1.0 || f1 < 0.0 || f1 > 1.0) {
      parse_fail(rm.line_no, "mimic mapping for '" + rm.joint + "' leaves the joint range");
    }
    model.mimics.push_back(entry);
  }

  for (std::size_t d = 0; d < declared.size(); ++d) {
    const int j = declared_to_stored[d];
    if (model.joints[j].type == JointType::kFixed) continue;
    const bool mimic = std::any_of(model.mimics.begin(), model.mimics.end(),
                                   [j](const MimicEntry& m) { return m.joint == j; });
    if (!mimic) model.actuated.push_back(j);
  }
  return model;
}

KinematicModel load_kinematic_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_kinematic_model(buffer.str());
}

std::vector<double> mimic_joint_values(const KinematicModel& model, double aperture) {
  if (!(aperture >= 0.0 && aperture <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "gripper aperture must be in [0,1]");
  }
  std::vector<double> values;
  values.reserve(model.mimics.size());
  for (const auto& m : model.mimics) {
    const Joint& joint = model.joints[m.joint];
    const double f = std::clamp(m.offset + m.multiplier * aperture, 0.0, 1.0);
    values.push_back((1.0 - f) * joint.lower + f * joint.upper);
  }
  return values;
}

FkResult forward_kinematics(const KinematicModel& model, const JointState& q, LimitMode mode) {
  if (q.values.size() != model.dof()) {
    fail(ErrorCode::kLengthMismatch, "joint state has " + std::to_string(q.values.size()) +
                                         " values, model expects " + std::to_string(model.dof()));
  }
  std::vector<double> value(model.joints.size(), 0.0);
  for (std::size_t i = 0; i < model.actuated.size(); ++i) {
    const Joint& joint = model.joints[model.actuated[i]];
    double v = q.values[i];
    if (!std::isfinite(v)) fail(ErrorCode::kInvalidArgument, "joint '" + joint.name + "' value is not finite");
    if (v < joint.lower || v > joint.upper) {
      if (mode == LimitMode::kStrict) {
        fail(ErrorCode::kLimit, "joint '" + joint.name + "' value " + std::to_string(v) +
                                    " outside limits [" + std::to_string(joint.lower) + ", " +
                                    std::to_string(joint.upper) + "]");
      }
      v = std::clamp(v, joint.lower, joint.upper);
    }
    value[model.actuated[i]] = v;
  }
  const auto fingers = mimic_joint_values(model, q.aperture);
  for (std::size_t i = 0; i < model.mimics.size(); ++i) value[model.mimics[i].joint] = fingers[i];

  FkResult fk;
  fk.link_poses.assign(model.links.size(), RigidTransform::identity());
  for (std::size_t j = 0; j < model.joints.size(); ++j) {
    const Joint& joint = model.joints[j];
    RigidTransform motion;
    switch (joint.type) {
      case JointType::kRevolute:
        motion = RigidTransform(axis_rotation(joint.axis, value[j]), Vec3::Zero());
        break;
      case JointType::kPrismatic:
        motion = RigidTransform::translation_only(joint.axis * value[j]);
        break;
      case JointType::kFixed:
        break;
    }
    fk.link_poses[joint.child] = compose(compose(fk.link_poses[joint.parent], joint.origin), motion);
  }
  return fk;
}

FkResult gripper_fk(const KinematicModel& model, double aperture) {
  JointState q;
  q.values.assign(model.dof(), 0.0);
  q.aperture = aperture;
  return forward_kinematics(model, q, LimitMode::kClamp);
}

}  // namespace splatrig
