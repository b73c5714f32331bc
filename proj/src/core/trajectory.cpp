// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#include "trajectory.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "error.hpp"

namespace splatrig {

namespace {

constexpr double kQuatTolerance = 1e-3;

[[noreturn]] void record_fail(std::size_t line_no, const std::string& message) {
  fail(ErrorCode::kFormat, "trajectory line " + std::to_string(line_no) + ": " + message);
}

double to_double(std::string_view s, std::size_t line_no) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    record_fail(line_no, "bad number '" + std::string(s) + "'");
  }
  return v;
}

std::vector<double> to_list(std::string_view s, std::size_t line_no) {
  std::vector<double> out;
  if (s.empty()) return out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(to_double(s.substr(0, comma), line_no));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

Quat checked_quat(double w, double x, double y, double z, std::size_t line_no, const std::string& what) {
  Quat q(w, x, y, z);
  const double n = q.norm();
  if (std::abs(n - 1.0) > kQuatTolerance) {
    record_fail(line_no, what + " quaternion norm " + std::to_string(n) + " is not within 1e-3 of 1");
  }
  q.coeffs() /= n;
  return q;
}

void parse_pose7(std::string_view s, std::size_t line_no, const std::string& what, Vec3* p, Quat* q) {
  const auto v = to_list(s, line_no);
  if (v.size() != 7) record_fail(line_no, what + " needs 7 values px,py,pz,qw,qx,qy,qz");
  *p = Vec3(v[0], v[1], v[2]);
  *q = checked_quat(v[3], v[4], v[5], v[6], line_no, what);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) fail(ErrorCode::kInternal, "number formatting failed");
  return std::string(buf, ptr);
}

TrajectoryLog parse_trajectory(std::istream& in) {
  TrajectoryLog log;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    if (line[start] == '#') {
      log.metadata.push_back(line);
      continue;
    }
    std::istringstream ss(line);
    TrajectoryState state;
    std::vector<std::string> names;
    bool has_t = false, has_q = false, has_grip = false, has_act = false;
    for (std::string token; ss >> token;) {
      const auto eq = token.find('=');
      if (eq == std::string::npos) record_fail(line_no, "expected key=value, got '" + token + "'");
      const std::string key = token.substr(0, eq);
      const std::string_view value = std::string_view(token).substr(eq + 1);
      if (key == "t") {
        std::int64_t t = 0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), t);
        if (ec != std::errc() || ptr != value.data() + value.size() || t < 0) {
          record_fail(line_no, "timestep must be a non-negative integer");
        }
        state.t = t;
        has_t = true;
      } else if (key == "q") {
        state.q = to_list(value, line_no);
        has_q = true;
      } else if (key == "grip") {
        state.aperture = to_double(value, line_no);
        has_grip = true;
      } else if (key == "act") {
        parse_pose7(value, line_no, "act", &state.action.position, &state.action.orientation);
        has_act = true;
      } else if (key.rfind("obj:", 0) == 0 && key.size() > 4) {
        const std::string name = key.substr(4);
        ObjectPose pose;
        parse_pose7(value, line_no, "obj:" + name, &pose.position, &pose.orientation);
        names.push_back(name);
        state.object_poses.push_back(pose);
      } else {
        record_fail(line_no, "unknown field '" + key + "'");
      }
    }
    if (!has_t) record_fail(line_no, "missing t=");
    if (!has_q) record_fail(line_no, "missing q=");
    if (!has_grip) record_fail(line_no, "missing grip=");
    if (!has_act) record_fail(line_no, "missing act=");
    if (first) {
      log.object_ids = names;
      first = false;
    } else {
      if (names != log.object_ids) record_fail(line_no, "object list differs from the first record");
      if (state.t <= log.states.back().t) {
        record_fail(line_no, "timestep " + std::to_string(state.t) + " does not increase (previous " +
                                 std::to_string(log.states.back().t) + ")");
      }
    }
    log.states.push_back(std::move(state));
  }
  return log;
}

TrajectoryLog load_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  return parse_trajectory(in);
}

std::string format_trajectory_record(const TrajectoryState& state, const std::vector<std::string>& object_ids) {
  auto pose7 = [](const Vec3& p, const Quat& q) {
    return format_double(p.x()) + "," + format_double(p.y()) + "," + format_double(p.z()) + "," +
           format_double(q.w()) + "," + format_double(q.x()) + "," + format_double(q.y()) + "," +
           format_double(q.z());
  };
  std::string out = "t=" + std::to_string(state.t) + " q=";
  for (std::size_t i = 0; i < state.q.size(); ++i) {
    if (i > 0) out += ",";
    out += format_double(state.q[i]);
  }
  out += " grip=" + format_double(state.aperture);
  for (std::size_t k = 0; k < object_ids.size() && k < state.object_poses.size(); ++k) {
    out += " obj:" + object_ids[k] + "=" + pose7(state.object_poses[k].position, state.object_poses[k].orientation);
  }
  out += " act=" + pose7(state.action.position, state.action.orientation);
  return out;
}

}  // namespace splatrig
