// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#include "fixture.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "kinematics.hpp"
#include "splat_io.hpp"
#include "trajectory.hpp"

namespace splatrig::fixture {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kShC0 = 0.28209479177387814;

// Link body: a cylinder along local +z, or a box when half_x > 0.
struct Body {
  const char* link;
  double length;
  double radius;
  double half_x = 0.0;
  double half_y = 0.0;
  Vec3 color;
};

const char* const kRobotModel = R"(# 6-joint arm with a parallel gripper
link base
link link1
link link2
link link3
link link4
link link5
link link6
link hand
link finger_l
link finger_r
joint j1 revolute base link1 xyz=0,0,0.1 axis=0,0,1 limits=-3,3
joint j2 revolute link1 link2 xyz=0,0,0.15 axis=0,1,0 limits=-2,2
joint j3 revolute link2 link3 xyz=0,0,0.3 axis=0,1,0 limits=-2.5,2.5
joint j4 revolute link3 link4 xyz=0,0,0.25 axis=0,0,1 limits=-3,3
joint j5 revolute link4 link5 xyz=0,0,0.08 axis=0,1,0 limits=-2,2
joint j6 revolute link5 link6 xyz=0,0,0.08 axis=0,0,1 limits=-3,3
joint wrist_mount fixed link6 hand xyz=0,0,0.05
joint finger_l_joint prismatic hand finger_l xyz=0,0.01,0.03 axis=0,1,0 limits=0,0.04
joint finger_r_joint prismatic hand finger_r xyz=0,-0.01,0.03 axis=0,-1,0 limits=0,0.04
mimic gripper finger_l_joint
mimic gripper finger_r_joint
)";

std::vector<Body> robot_bodies() {
  return {
      {"base", 0.1, 0.06, 0.0, 0.0, Vec3(0.25, 0.25, 0.28)},
      {"link1", 0.15, 0.045, 0.0, 0.0, Vec3(0.9, 0.45, 0.1)},
      {"link2", 0.3, 0.04, 0.0, 0.0, Vec3(0.92, 0.92, 0.9)},
      {"link3", 0.25, 0.035, 0.0, 0.0, Vec3(0.9, 0.45, 0.1)},
      {"link4", 0.08, 0.03, 0.0, 0.0, Vec3(0.92, 0.92, 0.9)},
      {"link5", 0.08, 0.03, 0.0, 0.0, Vec3(0.9, 0.45, 0.1)},
      {"link6", 0.05, 0.03, 0.0, 0.0, Vec3(0.3, 0.3, 0.32)},
      {"hand", 0.03, 0.0, 0.02, 0.05, Vec3(0.2, 0.2, 0.22)},
      {"finger_l", 0.05, 0.0, 0.01, 0.008, Vec3(0.15, 0.15, 0.15)},
      {"finger_r", 0.05, 0.0, 0.01, 0.008, Vec3(0.15, 0.15, 0.15)},
  };
}

// Capture pose: arm straight up, gripper half open.
const std::vector<double> kCaptureQ = {0, 0, 0, 0, 0, 0};
constexpr double kCaptureAperture = 0.5;

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  Quat rotation() {
    std::normal_distribution<double> n(0.0, 1.0);
    Quat q(n(rng_), n(rng_), n(rng_), n(rng_));
    q.normalize();
    return q;
  }

 private:
  std::mt19937_64 rng_;
};

Vec3 sample_body(const Body& b, Sampler& s) {
  const double z = s.uniform(0.005, b.length - 0.005);
  if (b.half_x > 0.0) {
    return {s.uniform(-b.half_x, b.half_x), s.uniform(-b.half_y, b.half_y), z};
  }
  const double theta = s.uniform(0.0, 2.0 * std::numbers::pi);
  const double r = b.radius * std::sqrt(s.uniform(0.6, 1.0));
  return {r * std::cos(theta), r * std::sin(theta), z};
}

Aabb body_box(const Body& b) {
  const double hx = b.half_x > 0.0 ? b.half_x : b.radius;
  const double hy = b.half_x > 0.0 ? b.half_y : b.radius;
  return {Vec3(-hx - 0.005, -hy - 0.005, 0.0), Vec3(hx + 0.005, hy + 0.005, b.length)};
}

Gaussian3D make_gaussian(const Vec3& mean, const Vec3& color, const Vec3& scale, Sampler& s) {
  Gaussian3D g;
  g.mean = mean;
  g.rotation = s.rotation();
  g.scale = scale;
  g.opacity = s.uniform(0.7, 0.95);
  for (int c = 0; c < 3; ++c) {
    const double v = std::clamp(color[c] + s.uniform(-0.04, 0.04), 0.0, 1.0);
    g.sh[0][c] = (v - 0.5) / kShC0;
    for (int b = 1; b < 4; ++b) g.sh[b][c] = s.uniform(-0.05, 0.05);
  }
  return g;
}

json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

json box_json(const Aabb& b) { return {{"min", vec_json(b.min)}, {"max", vec_json(b.max)}}; }

json transform_json(const RigidTransform& t) {
  const Quat& q = t.quaternion();
  return {{"rotation", {q.w(), q.x(), q.y(), q.z()}}, {"translation", vec_json(t.translation())}};
}

void write_string(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << text;
}

json camera_json(const std::string& id, const Vec3& eye, const Vec3& target, int size) {
  const Vec3 forward = (target - eye).normalized();
  const Vec3 right = forward.cross(Vec3::UnitZ()).normalized();
  const Vec3 down = forward.cross(right);
  Mat3 r;
  r.row(0) = right.transpose();
  r.row(1) = down.transpose();
  r.row(2) = forward.transpose();
  const RigidTransform world_to_cam(r, -(r * eye));
  const double f = 0.9 * size;
  const double c = 0.5 * (size - 1);
  return {{"id", id},   {"fx", f},         {"fy", f},         {"cx", c},
          {"cy", c},    {"width", size},   {"height", size},  {"world_to_cam", transform_json(world_to_cam)},
          {"near", 0.05}, {"far", 20.0}};
}

}  // namespace

RigidTransform splat_to_robot_truth() {
  return {Quat(Eigen::AngleAxisd(8.0 * std::numbers::pi / 180.0, Vec3::UnitZ())), Vec3(0.03, -0.02, 0.01)};
}

std::vector<std::string> scene_link_order() {
  std::vector<std::string> links;
  for (const Body& body : robot_bodies()) links.push_back(body.link);
  return links;
}

void write_workcell(const fs::path& dir, const WorkcellOptions& options) {
  if (options.states < 1 || options.image_size < 16) {
    fail(ErrorCode::kInvalidArgument, "fixture needs at least one state and 16 px frames");
  }
  fs::create_directories(dir);
  Sampler sampler(options.seed);

  write_string(dir / "robot.kin", kRobotModel);
  const KinematicModel model = parse_kinematic_model(kRobotModel);
  const FkResult capture = forward_kinematics(model, JointState{kCaptureQ, kCaptureAperture});
  const RigidTransform truth = splat_to_robot_truth();
  const RigidTransform robot_to_splat = invert(truth);
  const auto bodies = robot_bodies();

  SplatScene scene;
  scene.sh_degree = 1;
  std::ostringstream reference;
  reference.precision(17);
  std::ostringstream knn;
  knn.precision(17);
  knn << "# x y z link, robot frame at the capture pose\n";
  json boxes = json::object();
  for (const Body& body : bodies) {
    const int l = model.link_index(body.link);
    const RigidTransform& pose = capture.link_poses[l];
    boxes[body.link] = box_json(body_box(body));
    for (int i = 0; i < options.gaussians_per_link; ++i) {
      const Vec3 robot = pose.apply(sample_body(body, sampler));
      reference << robot.x() << ' ' << robot.y() << ' ' << robot.z() << '\n';
      const double s = sampler.uniform(0.008, 0.014);
      scene.gaussians.push_back(
          make_gaussian(robot_to_splat.apply(robot), body.color, Vec3(s, s, 0.7 * s), sampler));
    }
    if (l >= model.link_index("link3")) {
      for (int i = 0; i < 40; ++i) {
        const Vec3 p = pose.apply(sample_body(body, sampler));
        knn << p.x() << ' ' << p.y() << ' ' << p.z() << ' ' << body.link << '\n';
      }
    }
  }
  for (int i = 0; i < options.table_gaussians; ++i) {
    const Vec3 robot(sampler.uniform(-0.3, 0.9), sampler.uniform(-0.6, 0.6), sampler.uniform(-0.004, 0.0));
    const double shade = 0.55 + 0.1 * std::sin(12.0 * robot.x()) * std::cos(9.0 * robot.y());
    Gaussian3D g = make_gaussian(robot_to_splat.apply(robot), Vec3(shade, 0.8 * shade, 0.6 * shade),
                                 Vec3(0.035, 0.035, 0.003), sampler);
    g.rotation = truth.quaternion().conjugate();
    scene.gaussians.push_back(g);
  }
  save_splat_ply(scene, (dir / "scene.ply").string());
  write_string(dir / "robot_reference.xyz", reference.str());
  write_string(dir / "knn_points.txt", knn.str());

  // Cube of side 0.05 whose scan frame is offset by +0.1 m in x.
  SplatScene cube;
  cube.sh_degree = 0;
  for (int i = 0; i < 300; ++i) {
    Vec3 p(sampler.uniform(-0.025, 0.025), sampler.uniform(-0.025, 0.025), sampler.uniform(-0.025, 0.025));
    const int axis = i % 3;
    p[axis] = (i / 3) % 2 == 0 ? -0.025 : 0.025;
    p += Vec3(0.1, 0.0, 0.025);
    cube.gaussians.push_back(make_gaussian(p, Vec3(0.1, 0.35, 0.85), Vec3(0.006, 0.006, 0.006), sampler));
  }
  save_splat_ply(cube, (dir / "cube.ply").string());

  const int size = options.image_size;
  json cameras = {{"cameras",
                   {camera_json("front", Vec3(1.7, 0.1, 0.9), Vec3(0.25, 0.0, 0.45), size),
                    camera_json("side", Vec3(0.4, 1.6, 0.8), Vec3(0.25, 0.0, 0.45), size)}}};
  write_string(dir / "cameras.json", cameras.dump(2) + "\n");

  const RigidTransform init(Quat(Eigen::AngleAxisd(6.0 * std::numbers::pi / 180.0, Vec3::UnitZ())),
                            Vec3(0.02, -0.015, 0.005));
  json config = {
      {"scene", "scene.ply"},
      {"kinematics", "robot.kin"},
      {"cameras", "cameras.json"},
      {"alignment",
       {{"reference_points", "robot_reference.xyz"},
        {"crop", box_json({Vec3(-0.5, -0.5, 0.02), Vec3(0.5, 0.5, 1.5)})},
        {"init", transform_json(init)},
        {"icp",
         {{"max_iterations", 60},
          {"convergence_tol", 1e-9},
          {"max_correspondence_dist", 0.1},
          {"trim_fraction", 0.05},
          {"estimate_scale", true}}}}},
      {"capture", {{"q", kCaptureQ}, {"aperture", kCaptureAperture}}},
      {"segmentation",
       {{"boxes", boxes},
        {"knn",
         {{"points", "knn_points.txt"},
          {"k", 5},
          {"region", box_json({Vec3(-0.12, -0.12, 0.78), Vec3(0.12, 0.12, 1.2)})}}}}},
      {"objects",
       {{{"name", "cube"}, {"scene", "cube.ply"}, {"alignment", {{"fixed", {{"translation", {-0.1, 0.0, 0.0}}}}}}}}},
      {"render", {{"background", {1.0, 1.0, 1.0}}}},
      {"augment",
       {{"noise_sigma", 5.0},
        {"erase_prob", 0.5},
        {"erase_area", {0.02, 0.2}},
        {"brightness", {0.8, 1.2}},
        {"contrast", {0.8, 1.2}}}},
      {"seed", 42},
      {"limits", "strict"},
      {"output_dir", "out"}};
  write_string(dir / "config.json", config.dump(2) + "\n");

  const int hand = model.link_index("hand");
  const std::vector<std::string> objects = {"cube"};
  auto state_at = [&](std::int64_t t, double s) {
    TrajectoryState st;
    st.t = t;
    st.q = {0.6 * std::sin(2.0 * std::numbers::pi * s), 0.5 * s, -0.4 * s, 0.3 * std::sin(std::numbers::pi * s),
            0.4 * s, 0.2 * std::cos(std::numbers::pi * s)};
    st.aperture = 0.5 + 0.5 * std::cos(2.0 * std::numbers::pi * s);
    ObjectPose cube_pose;
    cube_pose.position = Vec3(0.45 - 0.1 * s, 0.1 + 0.05 * s, 0.0);
    cube_pose.orientation = Quat(Eigen::AngleAxisd(0.5 * s, Vec3::UnitZ()));
    st.object_poses = {cube_pose};
    const RigidTransform ee = forward_kinematics(model, JointState{st.q, st.aperture}).link_poses[hand];
    st.action.position = ee.translation();
    st.action.orientation = ee.quaternion();
    return st;
  };

  std::string log = "# synthetic pick trajectory\n";
  for (int i = 0; i < options.states; ++i) {
    const double s = options.states == 1 ? 0.0 : static_cast<double>(i) / (options.states - 1);
    log += format_trajectory_record(state_at(5 * i, s), objects) + "\n";
  }
  write_string(dir / "trajectory.log", log);

  TrajectoryState still = state_at(0, 0.0);
  still.q = kCaptureQ;
  still.aperture = kCaptureAperture;
  const RigidTransform ee = capture.link_poses[hand];
  still.action.position = ee.translation();
  still.action.orientation = ee.quaternion();
  write_string(dir / "capture.log", "# capture pose\n" + format_trajectory_record(still, objects) + "\n");
}

}  // namespace splatrig::fixture
