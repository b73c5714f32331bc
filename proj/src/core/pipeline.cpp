// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#include "pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "log.hpp"
#include "parallel.hpp"

namespace splatrig {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kConfigQuatTolerance = 1e-6;

[[noreturn]] void config_fail(const std::string& where, const std::string& message) {
  fail(ErrorCode::kFormat, where + ": " + message);
}

json parse_json(std::string_view text, const std::string& what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, what + ": " + e.what());
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) config_fail(where, "expected an object");
}

void warn_unknown_keys(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      log_warn("{}: ignoring unknown key '{}'", where, key);
    }
  }
}

const json* member(const json& j, const char* key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

const json& required(const json& j, const char* key, const std::string& where) {
  const json* m = member(j, key);
  if (m == nullptr) config_fail(where, std::string("missing '") + key + "'");
  return *m;
}

double as_number(const json& j, const std::string& where) {
  if (!j.is_number()) config_fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) config_fail(where, "expected a finite number");
  return v;
}

std::int64_t as_integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) config_fail(where, "expected an integer");
  return j.get<std::int64_t>();
}

std::string as_string(const json& j, const std::string& where) {
  if (!j.is_string()) config_fail(where, "expected a string");
  return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& where) {
  if (!j.is_boolean()) config_fail(where, "expected true or false");
  return j.get<bool>();
}

std::vector<double> as_numbers(const json& j, const std::string& where, std::optional<std::size_t> count = {}) {
  if (!j.is_array()) config_fail(where, "expected an array of numbers");
  if (count && j.size() != *count) config_fail(where, "expected " + std::to_string(*count) + " numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

Vec3 as_vec3(const json& j, const std::string& where) {
  const auto v = as_numbers(j, where, 3);
  return {v[0], v[1], v[2]};
}

void read_range(const json& j, const std::string& where, double* lo, double* hi) {
  const auto v = as_numbers(j, where, 2);
  *lo = v[0];
  *hi = v[1];
}

Aabb as_box(const json& j, const std::string& where) {
  require_object(j, where);
  warn_unknown_keys(j, {"min", "max"}, where);
  Aabb box{as_vec3(required(j, "min", where), where + ".min"), as_vec3(required(j, "max", where), where + ".max")};
  if (!box.valid()) config_fail(where, "min must be below max on every axis");
  return box;
}

Quat as_quat(const json& j, const std::string& where) {
  const auto v = as_numbers(j, where, 4);
  Quat q(v[0], v[1], v[2], v[3]);
  const double n = q.norm();
  if (std::abs(n - 1.0) > kConfigQuatTolerance) config_fail(where, "rotation quaternion [w,x,y,z] must be unit length");
  if (n != 1.0) q.coeffs() /= n;
  return q;
}

RigidTransform as_transform(const json& j, const std::string& where) {
  require_object(j, where);
  Quat q = Quat::Identity();
  Vec3 t = Vec3::Zero();
  if (const json* r = member(j, "rotation")) q = as_quat(*r, where + ".rotation");
  if (const json* tr = member(j, "translation")) t = as_vec3(*tr, where + ".translation");
  return {q, t};
}

json transform_json(const RigidTransform& t) {
  const Quat& q = t.quaternion();
  return {{"rotation", {q.w(), q.x(), q.y(), q.z()}},
          {"translation", {t.translation().x(), t.translation().y(), t.translation().z()}}};
}

IcpParams as_icp(const json& j, const std::string& where) {
  require_object(j, where);
  warn_unknown_keys(j, {"max_iterations", "convergence_tol", "max_correspondence_dist", "trim_fraction",
                        "estimate_scale"},
                    where);
  IcpParams p;
  if (const json* m = member(j, "max_iterations")) {
    p.max_iterations = static_cast<int>(as_integer(*m, where + ".max_iterations"));
  }
  if (const json* m = member(j, "convergence_tol")) p.convergence_tol = as_number(*m, where + ".convergence_tol");
  if (const json* m = member(j, "max_correspondence_dist")) {
    p.max_correspondence_dist = as_number(*m, where + ".max_correspondence_dist");
  }
  if (const json* m = member(j, "trim_fraction")) p.trim_fraction = as_number(*m, where + ".trim_fraction");
  if (const json* m = member(j, "estimate_scale")) p.estimate_scale = as_bool(*m, where + ".estimate_scale");
  return p;
}

AlignmentSpec as_alignment(const json& j, const std::string& where) {
  require_object(j, where);
  warn_unknown_keys(j, {"reference_points", "crop", "init", "icp", "fixed"}, where);
  AlignmentSpec spec;
  const json* fixed = member(j, "fixed");
  const json* ref = member(j, "reference_points");
  if ((fixed == nullptr) == (ref == nullptr)) {
    config_fail(where, "exactly one of 'reference_points' or 'fixed' is required");
  }
  if (fixed != nullptr) {
    SimilarityFit fit;
    fit.transform = as_transform(*fixed, where + ".fixed");
    if (const json* s = member(*fixed, "scale")) fit.scale = as_number(*s, where + ".fixed.scale");
    if (!(fit.scale > 0.0)) config_fail(where + ".fixed.scale", "must be positive");
    spec.fixed = fit;
    return spec;
  }
  spec.reference_points = as_string(*ref, where + ".reference_points");
  spec.init = as_transform(required(j, "init", where), where + ".init");
  if (const json* c = member(j, "crop")) spec.crop = as_box(*c, where + ".crop");
  if (const json* icp = member(j, "icp")) spec.icp = as_icp(*icp, where + ".icp");
  return spec;
}

RenderParams as_render(const json& j, const std::string& where) {
  require_object(j, where);
  warn_unknown_keys(j, {"tile_size", "alpha_min", "transmittance_min", "background"}, where);
  RenderParams p;
  if (const json* m = member(j, "tile_size")) p.tile_size = static_cast<int>(as_integer(*m, where + ".tile_size"));
  if (const json* m = member(j, "alpha_min")) p.alpha_min = as_number(*m, where + ".alpha_min");
  if (const json* m = member(j, "transmittance_min")) {
    p.transmittance_min = as_number(*m, where + ".transmittance_min");
  }
  if (const json* m = member(j, "background")) p.background = as_vec3(*m, where + ".background");
  return p;
}

AugmentParams as_augment(const json& j, const std::string& where) {
  require_object(j, where);
  warn_unknown_keys(j, {"noise_sigma", "erase_prob", "erase_area", "brightness", "contrast"}, where);
  AugmentParams p;
  if (const json* m = member(j, "noise_sigma")) p.noise_sigma = as_number(*m, where + ".noise_sigma");
  if (const json* m = member(j, "erase_prob")) p.erase_prob = as_number(*m, where + ".erase_prob");
  if (const json* m = member(j, "erase_area")) {
    read_range(*m, where + ".erase_area", &p.erase_area_min, &p.erase_area_max);
  }
  if (const json* m = member(j, "brightness")) {
    read_range(*m, where + ".brightness", &p.brightness_lo, &p.brightness_hi);
  }
  if (const json* m = member(j, "contrast")) read_range(*m, where + ".contrast", &p.contrast_lo, &p.contrast_hi);
  return p;
}

json result_json(const AlignmentResult& r) {
  json j = transform_json(r.transform);
  j["scale"] = r.scale;
  j["rms_residual"] = r.rms_residual;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["residual_history"] = r.residual_history;
  return j;
}

AlignmentResult as_result(const json& j, const std::string& where) {
  require_object(j, where);
  AlignmentResult r;
  r.transform = as_transform(j, where);
  r.scale = as_number(required(j, "scale", where), where + ".scale");
  if (!(r.scale > 0.0)) config_fail(where + ".scale", "must be positive");
  r.rms_residual = as_number(required(j, "rms_residual", where), where + ".rms_residual");
  r.iterations = static_cast<int>(as_integer(required(j, "iterations", where), where + ".iterations"));
  r.converged = as_bool(required(j, "converged", where), where + ".converged");
  if (const json* h = member(j, "residual_history")) r.residual_history = as_numbers(*h, where + ".residual_history");
  return r;
}

bool valid_camera_id(const std::string& id) {
  return !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
           c == '.';
  });
}

AlignmentResult register_scene(const SplatScene& scene, const AlignmentSpec& spec, const PipelineConfig& config,
                               const std::string& what) {
  if (spec.fixed) {
    AlignmentResult r;
    r.transform = spec.fixed->transform;
    r.scale = spec.fixed->scale;
    r.converged = true;
    return r;
  }
  const auto reference = load_points_xyz(config.resolve(spec.reference_points).string());
  IcpParams icp = spec.icp;
  icp.jobs = config.jobs;
  Aabb crop;
  if (spec.crop) {
    crop = *spec.crop;
  } else {
    crop.min = Vec3::Constant(-std::numeric_limits<double>::infinity());
    crop.max = Vec3::Constant(std::numeric_limits<double>::infinity());
  }
  try {
    AlignmentResult r = align_scene_to_robot(scene, reference, crop, spec.init, icp);
    log_info("{}: rms {:.6g} after {} iterations{}", what, r.rms_residual, r.iterations,
             r.converged ? "" : " (not converged)");
    if (!r.converged) log_warn("{}: icp stopped at the iteration cap without converging", what);
    return r;
  } catch (const Error& e) {
    fail(e.code(), what + ": " + e.what());
  }
}

SplatScene scaled(SplatScene scene, double s) {
  if (s == 1.0) return scene;
  return rescale_scene(scene, s);
}

std::string prefix_t(std::int64_t t) { return "t=" + std::to_string(t) + ": "; }

// The rig restricted to objects present in the log, with each kept object's
// position in the log's object list.
struct ObjectBinding {
  std::optional<SceneRig> subset;
  std::vector<std::size_t> log_index;
};

ObjectBinding bind_objects(const SceneRig& rig, const std::vector<std::string>& object_ids) {
  std::map<std::string, std::size_t> in_log;
  for (std::size_t i = 0; i < object_ids.size(); ++i) in_log[object_ids[i]] = i;
  std::set<std::string> in_rig;
  for (const auto& obj : rig.objects) in_rig.insert(obj.name);
  for (const auto& id : object_ids) {
    if (!in_rig.count(id)) fail(ErrorCode::kNotFound, "trajectory object '" + id + "' is not in the rig");
  }
  ObjectBinding binding;
  bool all = true;
  for (const auto& obj : rig.objects) {
    const auto it = in_log.find(obj.name);
    if (it == in_log.end()) {
      all = false;
      log_info("rig object '{}' is absent from the trajectory and is not rendered", obj.name);
      continue;
    }
    binding.log_index.push_back(it->second);
  }
  if (!all) {
    SceneRig subset;
    subset.static_scene = rig.static_scene;
    subset.assignment = rig.assignment;
    subset.splat_to_robot = rig.splat_to_robot;
    subset.capture_fk = rig.capture_fk;
    for (const auto& obj : rig.objects) {
      if (in_log.count(obj.name)) subset.objects.push_back(obj);
    }
    binding.subset = std::move(subset);
  }
  return binding;
}

SplatScene pose_state(const Workcell& cell, const SceneRig& rig, const ObjectBinding& binding,
                      const TrajectoryState& state, unsigned jobs) {
  try {
    std::vector<ObjectPose> poses;
    poses.reserve(binding.log_index.size());
    for (std::size_t i : binding.log_index) poses.push_back(state.object_poses.at(i));
    const JointState q{state.q, state.aperture};
    return pose_scene(rig, cell.model, q, poses, cell.config.limits, jobs);
  } catch (const Error& e) {
    fail(e.code(), prefix_t(state.t) + e.what());
  }
}

std::int64_t parse_int(std::string_view s, std::size_t row) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    fail(ErrorCode::kFormat, "manifest row " + std::to_string(row) + ": bad integer '" + std::string(s) + "'");
  }
  return v;
}

double parse_real(std::string_view s, std::size_t row) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    fail(ErrorCode::kFormat, "manifest row " + std::to_string(row) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

fs::path PipelineConfig::resolve(const std::string& path) const {
  const fs::path p(path);
  return p.is_absolute() ? p : base_dir / p;
}

PipelineConfig parse_pipeline_config(std::string_view text, const fs::path& base_dir) {
  const json j = parse_json(text, "config");
  const std::string where = "config";
  require_object(j, where);
  warn_unknown_keys(j,
                    {"scene", "kinematics", "cameras", "alignment", "capture", "segmentation", "objects", "render",
                     "augment", "seed", "limits", "jobs", "output_dir"},
                    where);
  PipelineConfig c;
  c.base_dir = base_dir;
  c.scene = as_string(required(j, "scene", where), "config.scene");
  c.kinematics = as_string(required(j, "kinematics", where), "config.kinematics");
  c.cameras = as_string(required(j, "cameras", where), "config.cameras");
  c.alignment = as_alignment(required(j, "alignment", where), "config.alignment");

  const json& capture = required(j, "capture", where);
  require_object(capture, "config.capture");
  warn_unknown_keys(capture, {"q", "aperture"}, "config.capture");
  c.capture_q = as_numbers(required(capture, "q", "config.capture"), "config.capture.q");
  if (const json* a = member(capture, "aperture")) c.capture_aperture = as_number(*a, "config.capture.aperture");

  const json& seg = required(j, "segmentation", where);
  require_object(seg, "config.segmentation");
  warn_unknown_keys(seg, {"boxes", "knn"}, "config.segmentation");
  if (const json* boxes = member(seg, "boxes")) {
    require_object(*boxes, "config.segmentation.boxes");
    for (const auto& [name, box] : boxes->items()) {
      c.link_boxes.emplace_back(name, as_box(box, "config.segmentation.boxes." + name));
    }
  }
  if (const json* knn = member(seg, "knn")) {
    const std::string w = "config.segmentation.knn";
    require_object(*knn, w);
    warn_unknown_keys(*knn, {"points", "k", "region"}, w);
    KnnSpec spec;
    spec.points = as_string(required(*knn, "points", w), w + ".points");
    if (const json* k = member(*knn, "k")) spec.k = static_cast<int>(as_integer(*k, w + ".k"));
    spec.region = as_box(required(*knn, "region", w), w + ".region");
    c.knn = spec;
  }
  if (c.link_boxes.empty() && !c.knn) config_fail("config.segmentation", "needs 'boxes' or 'knn'");

  if (const json* objects = member(j, "objects")) {
    if (!objects->is_array()) config_fail("config.objects", "expected an array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < objects->size(); ++i) {
      const std::string w = "config.objects[" + std::to_string(i) + "]";
      const json& o = (*objects)[i];
      require_object(o, w);
      warn_unknown_keys(o, {"name", "scene", "alignment"}, w);
      ObjectSpec spec;
      spec.name = as_string(required(o, "name", w), w + ".name");
      if (spec.name.empty() || !names.insert(spec.name).second) {
        config_fail(w + ".name", "must be unique and non-empty");
      }
      spec.scene = as_string(required(o, "scene", w), w + ".scene");
      spec.alignment = as_alignment(required(o, "alignment", w), w + ".alignment");
      c.objects.push_back(std::move(spec));
    }
  }
  if (const json* r = member(j, "render")) c.render = as_render(*r, "config.render");
  if (const json* a = member(j, "augment")) c.augment = as_augment(*a, "config.augment");
  if (const json* s = member(j, "seed")) {
    if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<std::int64_t>() >= 0)) {
      config_fail("config.seed", "expected a non-negative integer");
    }
    c.augment.seed = s->get<std::uint64_t>();
  }
  if (const json* l = member(j, "limits")) {
    const std::string mode = as_string(*l, "config.limits");
    if (mode == "strict") {
      c.limits = LimitMode::kStrict;
    } else if (mode == "clamp") {
      c.limits = LimitMode::kClamp;
    } else {
      config_fail("config.limits", "expected \"strict\" or \"clamp\"");
    }
  }
  if (const json* jobs = member(j, "jobs")) {
    const auto n = as_integer(*jobs, "config.jobs");
    if (n < 0) config_fail("config.jobs", "must be >= 0");
    c.jobs = static_cast<unsigned>(n);
  }
  if (const json* out = member(j, "output_dir")) c.output_dir = as_string(*out, "config.output_dir");

  c.alignment.icp.validate();
  for (const auto& o : c.objects) o.alignment.icp.validate();
  c.render.validate();
  c.augment.validate();
  if (c.knn && (c.knn->k <= 0 || c.knn->k % 2 == 0)) {
    fail(ErrorCode::kInvalidArgument, "config.segmentation.knn.k must be positive and odd");
  }
  if (!(c.capture_aperture >= 0.0 && c.capture_aperture <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "config.capture.aperture must be in [0,1]");
  }
  return c;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  const fs::path p(path);
  return parse_pipeline_config(read_text(path), p.has_parent_path() ? p.parent_path() : fs::path("."));
}

std::vector<Camera> parse_cameras(std::string_view text) {
  const json j = parse_json(text, "cameras");
  require_object(j, "cameras");
  const json& list = required(j, "cameras", "cameras");
  if (!list.is_array() || list.empty()) config_fail("cameras.cameras", "expected a non-empty array");
  std::vector<Camera> out;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string w = "cameras[" + std::to_string(i) + "]";
    const json& c = list[i];
    require_object(c, w);
    warn_unknown_keys(c, {"id", "fx", "fy", "cx", "cy", "width", "height", "world_to_cam", "near", "far"}, w);
    Camera cam;
    cam.id = as_string(required(c, "id", w), w + ".id");
    if (!valid_camera_id(cam.id)) config_fail(w + ".id", "must be non-empty and use only [A-Za-z0-9_.-]");
    if (!ids.insert(cam.id).second) config_fail(w + ".id", "duplicate camera id '" + cam.id + "'");
    cam.fx = as_number(required(c, "fx", w), w + ".fx");
    cam.fy = as_number(required(c, "fy", w), w + ".fy");
    cam.cx = as_number(required(c, "cx", w), w + ".cx");
    cam.cy = as_number(required(c, "cy", w), w + ".cy");
    cam.width = static_cast<int>(as_integer(required(c, "width", w), w + ".width"));
    cam.height = static_cast<int>(as_integer(required(c, "height", w), w + ".height"));
    cam.world_to_cam = as_transform(required(c, "world_to_cam", w), w + ".world_to_cam");
    if (const json* n = member(c, "near")) cam.near = as_number(*n, w + ".near");
    if (const json* f = member(c, "far")) cam.far = as_number(*f, w + ".far");
    cam.validate();
    out.push_back(std::move(cam));
  }
  return out;
}

std::vector<Camera> load_cameras(const std::string& path) { return parse_cameras(read_text(path)); }

std::string serialize_alignment(const AlignmentRecord& record) {
  json j;
  j["robot"] = result_json(record.robot);
  j["objects"] = json::array();
  for (const auto& [name, r] : record.objects) {
    json o = result_json(r);
    o["name"] = name;
    j["objects"].push_back(o);
  }
  return j.dump(2) + "\n";
}

AlignmentRecord parse_alignment(std::string_view text) {
  const json j = parse_json(text, "alignment");
  require_object(j, "alignment");
  AlignmentRecord record;
  record.robot = as_result(required(j, "robot", "alignment"), "alignment.robot");
  if (const json* objects = member(j, "objects")) {
    if (!objects->is_array()) config_fail("alignment.objects", "expected an array");
    for (std::size_t i = 0; i < objects->size(); ++i) {
      const std::string w = "alignment.objects[" + std::to_string(i) + "]";
      const json& o = (*objects)[i];
      record.objects.emplace_back(as_string(required(o, "name", w), w + ".name"), as_result(o, w));
    }
  }
  return record;
}

void save_alignment(const AlignmentRecord& record, const std::string& path) {
  write_text(path, serialize_alignment(record));
}

AlignmentRecord load_alignment(const std::string& path) { return parse_alignment(read_text(path)); }

AlignmentRecord run_alignment(const PipelineConfig& config) {
  AlignmentRecord record;
  const SplatScene scene = load_splat_ply(config.resolve(config.scene).string());
  record.robot = register_scene(scene, config.alignment, config, "robot alignment");
  for (const auto& obj : config.objects) {
    const SplatScene object_scene = load_splat_ply(config.resolve(obj.scene).string());
    record.objects.emplace_back(obj.name,
                                register_scene(object_scene, obj.alignment, config, "object '" + obj.name + "'"));
  }
  return record;
}

LinkAssignment run_segmentation(const PipelineConfig& config, const KinematicModel& model,
                                const AlignmentRecord& alignment) {
  const SplatScene scene = scaled(load_splat_ply(config.resolve(config.scene).string()), alignment.robot.scale);
  const RigidTransform& align = alignment.robot.transform;
  const int link_count = static_cast<int>(model.links.size());

  LinkAssignment base;
  base.link_count = link_count;
  base.labels.assign(scene.size(), Label::background());
  if (!config.link_boxes.empty()) {
    LinkBoxes boxes;
    boxes.per_link.resize(model.links.size());
    for (const auto& [name, box] : config.link_boxes) {
      const int l = model.link_index(name);
      if (l < 0) fail(ErrorCode::kNotFound, "segmentation box names unknown link '" + name + "'");
      boxes.per_link[l] = box;
    }
    const FkResult home = forward_kinematics(model, JointState{config.capture_q, config.capture_aperture},
                                             config.limits);
    base = segment_by_aabb(scene, boxes, home, align);
  }
  if (!config.knn) return base;

  const LabeledPoints training = load_labeled_points(config.resolve(config.knn->points).string(), &model);
  const KnnModel knn = train_knn(training.points, training.labels, config.knn->k);
  const LinkAssignment refined = classify_links(knn, scene, align, config.knn->region, link_count, config.jobs);
  return merge_assignments(base, refined, config.knn->region, robot_frame_means(scene, align));
}

const Camera& Workcell::camera(std::string_view id) const {
  for (const auto& c : cameras) {
    if (c.id == id) return c;
  }
  fail(ErrorCode::kNotFound, "unknown camera '" + std::string(id) + "'");
}

JointState Workcell::capture_state() const { return {config.capture_q, config.capture_aperture}; }

SceneRig build_rig(const PipelineConfig& config, const KinematicModel& model, const AlignmentRecord& alignment,
                   const LinkAssignment& assignment) {
  SceneRig rig;
  rig.static_scene = scaled(load_splat_ply(config.resolve(config.scene).string()), alignment.robot.scale);
  rig.assignment = assignment;
  if (assignment.link_count != static_cast<int>(model.links.size())) {
    fail(ErrorCode::kLengthMismatch, "assignment was built for " + std::to_string(assignment.link_count) +
                                         " links but the model has " + std::to_string(model.links.size()));
  }
  rig.splat_to_robot = alignment.robot.transform;
  rig.capture_fk = forward_kinematics(model, JointState{config.capture_q, config.capture_aperture}, config.limits);
  for (const auto& spec : config.objects) {
    const auto it = std::find_if(alignment.objects.begin(), alignment.objects.end(),
                                 [&](const auto& entry) { return entry.first == spec.name; });
    if (it == alignment.objects.end()) {
      fail(ErrorCode::kNotFound, "alignment has no entry for object '" + spec.name + "'");
    }
    RigObject obj;
    obj.name = spec.name;
    obj.scene = scaled(load_splat_ply(config.resolve(spec.scene).string()), it->second.scale);
    obj.align = it->second.transform;
    rig.objects.push_back(std::move(obj));
  }
  rig.validate();
  return rig;
}

Workcell open_workcell(const PipelineConfig& config) {
  Workcell cell;
  cell.config = config;
  cell.model = load_kinematic_model(config.resolve(config.kinematics).string());
  cell.cameras = load_cameras(config.resolve(config.cameras).string());
  const fs::path out = config.output_path();
  const fs::path alignment_path = out / kAlignmentFile;
  const fs::path assignment_path = out / kAssignmentFile;
  if (fs::exists(alignment_path)) {
    cell.alignment = load_alignment(alignment_path.string());
  } else {
    log_info("{} missing, running alignment", alignment_path.string());
    cell.alignment = run_alignment(config);
    fs::create_directories(out);
    save_alignment(cell.alignment, alignment_path.string());
  }
  LinkAssignment assignment;
  if (fs::exists(assignment_path)) {
    assignment = load_assignment(assignment_path.string());
  } else {
    log_info("{} missing, running segmentation", assignment_path.string());
    assignment = run_segmentation(config, cell.model, cell.alignment);
    fs::create_directories(out);
    save_assignment(assignment, assignment_path.string());
  }
  cell.rig = build_rig(config, cell.model, cell.alignment, assignment);
  return cell;
}

Camera scene_camera(const SceneRig& rig, const Camera& robot_camera) {
  Camera c = robot_camera;
  c.world_to_cam = compose(robot_camera.world_to_cam, rig.splat_to_robot);
  return c;
}

Image render_state(const Workcell& cell, const TrajectoryState& state, const std::vector<std::string>& object_ids,
                   const Camera& camera, unsigned jobs) {
  if (state.object_poses.size() != object_ids.size()) {
    fail(ErrorCode::kLengthMismatch, prefix_t(state.t) + "object pose count does not match the object ids");
  }
  const ObjectBinding binding = bind_objects(cell.rig, object_ids);
  const SceneRig& rig = binding.subset ? *binding.subset : cell.rig;
  const SplatScene posed = pose_state(cell, rig, binding, state, jobs);
  RenderParams params = cell.config.render;
  params.jobs = jobs;
  try {
    return rasterize(posed, scene_camera(cell.rig, camera), params);
  } catch (const Error& e) {
    fail(e.code(), prefix_t(state.t) + e.what());
  }
}

std::string frame_filename(std::int64_t t, const std::string& camera_id) {
  std::string digits = std::to_string(t);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return "t" + digits + "_" + camera_id + ".png";
}

std::vector<FramePlan> plan_frames(const TrajectoryLog& log, const std::vector<Camera>& cameras) {
  std::vector<FramePlan> plan;
  plan.reserve(log.states.size() * cameras.size());
  for (std::size_t s = 0; s < log.states.size(); ++s) {
    for (std::size_t c = 0; c < cameras.size(); ++c) {
      FramePlan f;
      f.t = log.states[s].t;
      f.camera_id = cameras[c].id;
      f.image_path = frame_filename(f.t, f.camera_id);
      f.action = log.states[s].action;
      f.state_index = s;
      f.camera_index = c;
      plan.push_back(std::move(f));
    }
  }
  return plan;
}

std::string manifest_header() { return "t,camera_id,image_path,px,py,pz,qw,qx,qy,qz"; }

std::string manifest_row(const FramePlan& f) {
  const Vec3& p = f.action.position;
  const Quat& q = f.action.orientation;
  std::string row = std::to_string(f.t) + "," + f.camera_id + "," + f.image_path;
  for (double v : {p.x(), p.y(), p.z(), q.w(), q.x(), q.y(), q.z()}) row += "," + format_double(v);
  return row;
}

std::vector<FramePlan> render_trajectory(const Workcell& cell, const TrajectoryLog& log, const fs::path& out_dir,
                                         const RenderOptions& options) {
  std::vector<FramePlan> plan = plan_frames(log, cell.cameras);
  for (const auto& state : log.states) {
    if (state.object_poses.size() != log.object_ids.size()) {
      fail(ErrorCode::kLengthMismatch, prefix_t(state.t) + "object pose count does not match the object ids");
    }
  }
  const ObjectBinding binding = bind_objects(cell.rig, log.object_ids);
  if (options.dry_run) return plan;

  const SceneRig& rig = binding.subset ? *binding.subset : cell.rig;
  std::vector<Camera> cameras;
  for (const auto& c : cell.cameras) cameras.push_back(scene_camera(cell.rig, c));
  fs::create_directories(out_dir);

  const unsigned jobs = options.jobs == 0 ? default_jobs() : options.jobs;
  const unsigned inner = log.states.size() < jobs ? jobs : 1;
  parallel_for(log.states.size(), jobs, [&](std::size_t s) {
    const TrajectoryState& state = log.states[s];
    const SplatScene posed = pose_state(cell, rig, binding, state, inner);
    RenderParams params = cell.config.render;
    params.jobs = inner;
    for (std::size_t c = 0; c < cameras.size(); ++c) {
      try {
        const Image image = rasterize(posed, cameras[c], params);
        write_file((out_dir / frame_filename(state.t, cameras[c].id)).string(), encode_png(image));
      } catch (const Error& e) {
        fail(e.code(), prefix_t(state.t) + e.what());
      }
    }
  });

  std::string manifest = manifest_header() + "\n";
  for (const auto& f : plan) manifest += manifest_row(f) + "\n";
  write_text(out_dir / kManifestFile, manifest);
  log_info("rendered {} frames into {}", plan.size(), out_dir.string());
  return plan;
}

std::vector<ManifestRow> parse_manifest(std::string_view csv) {
  std::vector<ManifestRow> rows;
  std::size_t row_no = 0;
  bool header = true;
  while (!csv.empty()) {
    const auto nl = csv.find('\n');
    std::string_view line = csv.substr(0, nl);
    csv.remove_prefix(nl == std::string_view::npos ? csv.size() : nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (header) {
      if (line != manifest_header()) fail(ErrorCode::kFormat, "manifest header must be '" + manifest_header() + "'");
      header = false;
      continue;
    }
    ++row_no;
    std::vector<std::string_view> fields;
    while (true) {
      const auto comma = line.find(',');
      fields.push_back(line.substr(0, comma));
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    if (fields.size() != 10) {
      fail(ErrorCode::kFormat, "manifest row " + std::to_string(row_no) + ": expected 10 fields");
    }
    ManifestRow r;
    r.t = parse_int(fields[0], row_no);
    r.camera_id = std::string(fields[1]);
    r.image_path = std::string(fields[2]);
    r.action.position =
        Vec3(parse_real(fields[3], row_no), parse_real(fields[4], row_no), parse_real(fields[5], row_no));
    r.action.orientation = Quat(parse_real(fields[6], row_no), parse_real(fields[7], row_no),
                                parse_real(fields[8], row_no), parse_real(fields[9], row_no));
    rows.push_back(std::move(r));
  }
  if (header) fail(ErrorCode::kFormat, "manifest is empty");
  return rows;
}

std::vector<ManifestRow> load_manifest(const std::string& path) { return parse_manifest(read_text(path)); }

std::size_t augment_dataset(const fs::path& in_dir, const fs::path& out_dir, const AugmentParams& params,
                            unsigned jobs) {
  params.validate();
  const fs::path manifest_path = in_dir / kManifestFile;
  const auto rows = load_manifest(manifest_path.string());
  fs::create_directories(out_dir);
  if (fs::equivalent(in_dir, out_dir)) fail(ErrorCode::kInvalidArgument, "augment output must differ from its input");
  parallel_for(rows.size(), jobs, [&](std::size_t i) {
    const fs::path rel(rows[i].image_path);
    if (rel.is_absolute() || rel.has_parent_path()) {
      fail(ErrorCode::kFormat, "manifest image path '" + rows[i].image_path + "' must be a bare file name");
    }
    const Image image = load_png((in_dir / rel).string());
    write_file((out_dir / rel).string(), encode_png(augment_image(image, params, i)));
  });
  write_text(out_dir / kManifestFile, read_text(manifest_path.string()));
  return rows.size();
}

std::string validate_config(const PipelineConfig& config) {
  const SplatScene scene = load_splat_ply(config.resolve(config.scene).string());
  if (scene.size() == 0) fail(ErrorCode::kEmptyScene, "scene " + config.scene + " has no Gaussians");
  const KinematicModel model = load_kinematic_model(config.resolve(config.kinematics).string());
  const auto cameras = load_cameras(config.resolve(config.cameras).string());
  auto check_alignment = [&](const AlignmentSpec& spec, const std::string& what) {
    if (spec.fixed) return;
    const auto points = load_points_xyz(config.resolve(spec.reference_points).string());
    if (points.size() < 3) {
      fail(ErrorCode::kDegenerateGeometry, what + " reference cloud needs at least 3 points");
    }
  };
  check_alignment(config.alignment, "robot");
  if (config.capture_q.size() != model.dof()) {
    fail(ErrorCode::kLengthMismatch, "capture q has " + std::to_string(config.capture_q.size()) +
                                         " values but the model has " + std::to_string(model.dof()) +
                                         " actuated joints");
  }
  forward_kinematics(model, JointState{config.capture_q, config.capture_aperture}, config.limits);
  for (const auto& [name, box] : config.link_boxes) {
    if (model.link_index(name) < 0) fail(ErrorCode::kNotFound, "segmentation box names unknown link '" + name + "'");
  }
  if (config.knn) {
    const auto training = load_labeled_points(config.resolve(config.knn->points).string(), &model);
    train_knn(training.points, training.labels, config.knn->k);
    for (int l : training.labels) {
      if (l >= static_cast<int>(model.links.size())) {
        fail(ErrorCode::kInvalidArgument, "knn label " + std::to_string(l) + " exceeds the link count");
      }
    }
  }
  for (const auto& obj : config.objects) {
    const SplatScene s = load_splat_ply(config.resolve(obj.scene).string());
    if (s.size() == 0) fail(ErrorCode::kEmptyScene, "object '" + obj.name + "' has no Gaussians");
    check_alignment(obj.alignment, "object '" + obj.name + "'");
  }
  return "ok: " + std::to_string(scene.size()) + " gaussians, " + std::to_string(model.links.size()) + " links, " +
         std::to_string(model.dof()) + " joints, " + std::to_string(cameras.size()) + " cameras, " +
         std::to_string(config.objects.size()) + " objects";
}

}  // namespace splatrig
