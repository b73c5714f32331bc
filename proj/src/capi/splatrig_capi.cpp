// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#include "splatrig/splatrig.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <exception>
#include <filesystem>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "augment.hpp"
#include "error.hpp"
#include "image.hpp"
#include "log.hpp"
#include "metrics.hpp"
#include "pipeline.hpp"
#include "renderer.hpp"
#include "splat_io.hpp"

struct splatrig_scene {
  splatrig::SplatScene scene;
};

struct splatrig_image {
  splatrig::Image image;
};

struct splatrig_pipeline {
  splatrig::PipelineConfig config;
  std::optional<splatrig::Workcell> cell;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
splatrig_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return SPLATRIG_OK;
  } catch (const splatrig::Error& e) {
    g_last_error = e.what();
    return static_cast<splatrig_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return SPLATRIG_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return SPLATRIG_ERR_INTERNAL;
}

template <typename T>
void require(const T* p, const char* what) {
  if (p == nullptr) splatrig::fail(splatrig::ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

void copy_out(const std::string& text, char* buffer, size_t size) {
  if (buffer == nullptr || size == 0) return;
  const size_t n = std::min(size - 1, text.size());
  std::memcpy(buffer, text.data(), n);
  buffer[n] = '\0';
}

splatrig::AugmentParams to_core(const splatrig_augment_params& p) {
  splatrig::AugmentParams a;
  a.noise_sigma = p.noise_sigma;
  a.erase_prob = p.erase_prob;
  a.erase_area_min = p.erase_area_min;
  a.erase_area_max = p.erase_area_max;
  a.brightness_lo = p.brightness_lo;
  a.brightness_hi = p.brightness_hi;
  a.contrast_lo = p.contrast_lo;
  a.contrast_hi = p.contrast_hi;
  a.seed = p.seed;
  return a;
}

splatrig_augment_params to_c(const splatrig::AugmentParams& a) {
  splatrig_augment_params p;
  p.noise_sigma = a.noise_sigma;
  p.erase_prob = a.erase_prob;
  p.erase_area_min = a.erase_area_min;
  p.erase_area_max = a.erase_area_max;
  p.brightness_lo = a.brightness_lo;
  p.brightness_hi = a.brightness_hi;
  p.contrast_lo = a.contrast_lo;
  p.contrast_hi = a.contrast_hi;
  p.seed = a.seed;
  return p;
}

const splatrig::Workcell& workcell(splatrig_pipeline* p) {
  if (!p->cell) p->cell = splatrig::open_workcell(p->config);
  return *p->cell;
}

splatrig::AlignmentRecord load_or_align(const splatrig::PipelineConfig& config) {
  const auto path = config.output_path() / splatrig::kAlignmentFile;
  if (std::filesystem::exists(path)) return splatrig::load_alignment(path.string());
  auto record = splatrig::run_alignment(config);
  std::filesystem::create_directories(config.output_path());
  splatrig::save_alignment(record, path.string());
  return record;
}

}  // namespace

extern "C" {

const char* splatrig_version(void) { return "0.1.0"; }

const char* splatrig_status_name(splatrig_status status) {
  if (status == SPLATRIG_OK) return "ok";
  return splatrig::error_code_name(static_cast<splatrig::ErrorCode>(status));
}

const char* splatrig_last_error(void) { return g_last_error.c_str(); }

splatrig_status splatrig_scene_load(const char* path, splatrig_scene** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new splatrig_scene{splatrig::load_splat_ply(path)};
  });
}

splatrig_status splatrig_scene_save(const splatrig_scene* scene, const char* path) {
  return guarded([&] {
    require(scene, "scene");
    require(path, "path");
    splatrig::save_splat_ply(scene->scene, path);
  });
}

size_t splatrig_scene_size(const splatrig_scene* scene) { return scene == nullptr ? 0 : scene->scene.size(); }

int splatrig_scene_sh_degree(const splatrig_scene* scene) { return scene == nullptr ? -1 : scene->scene.sh_degree; }

void splatrig_scene_free(splatrig_scene* scene) { delete scene; }

splatrig_status splatrig_image_create(int width, int height, const uint8_t* rgb, splatrig_image** out) {
  return guarded([&] {
    require(out, "out");
    if (width < 1 || height < 1) splatrig::fail(splatrig::ErrorCode::kInvalidArgument, "image size must be >= 1");
    auto img = std::make_unique<splatrig_image>();
    img->image = splatrig::Image(width, height);
    if (rgb != nullptr) std::memcpy(img->image.pixels.data(), rgb, img->image.pixels.size());
    *out = img.release();
  });
}

splatrig_status splatrig_image_load_png(const char* path, splatrig_image** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new splatrig_image{splatrig::load_png(path)};
  });
}

splatrig_status splatrig_image_save_png(const splatrig_image* image, const char* path) {
  return guarded([&] {
    require(image, "image");
    require(path, "path");
    splatrig::save_png(image->image, path);
  });
}

int splatrig_image_width(const splatrig_image* image) { return image == nullptr ? 0 : image->image.width; }

int splatrig_image_height(const splatrig_image* image) { return image == nullptr ? 0 : image->image.height; }

const uint8_t* splatrig_image_data(const splatrig_image* image) {
  return image == nullptr ? nullptr : image->image.pixels.data();
}

void splatrig_image_free(splatrig_image* image) { delete image; }

splatrig_status splatrig_image_metrics(const splatrig_image* reference, const splatrig_image* test, double* psnr,
                                       double* ssim) {
  return guarded([&] {
    require(reference, "reference");
    require(test, "test");
    const double p = splatrig::psnr(reference->image, test->image);
    const double s = splatrig::ssim(reference->image, test->image);
    if (psnr != nullptr) *psnr = p;
    if (ssim != nullptr) *ssim = s;
  });
}

void splatrig_camera_default(splatrig_camera* camera) {
  if (camera == nullptr) return;
  const splatrig::Camera c;
  *camera = splatrig_camera{c.fx, c.fy, c.cx, c.cy, c.width, c.height, {1.0, 0.0, 0.0, 0.0},
                            {0.0, 0.0, 0.0}, c.near, c.far};
}

splatrig_status splatrig_render(const splatrig_scene* scene, const splatrig_camera* camera, unsigned jobs,
                                splatrig_image** out) {
  return guarded([&] {
    require(scene, "scene");
    require(camera, "camera");
    require(out, "out");
    splatrig::Camera c;
    c.id = "camera";
    c.fx = camera->fx;
    c.fy = camera->fy;
    c.cx = camera->cx;
    c.cy = camera->cy;
    c.width = camera->width;
    c.height = camera->height;
    splatrig::Quat q(camera->rotation[0], camera->rotation[1], camera->rotation[2], camera->rotation[3]);
    if (std::abs(q.norm() - 1.0) > 1e-6) {
      splatrig::fail(splatrig::ErrorCode::kInvalidArgument, "camera rotation must be a unit quaternion");
    }
    c.world_to_cam = splatrig::RigidTransform(
        q, splatrig::Vec3(camera->translation[0], camera->translation[1], camera->translation[2]));
    c.near = camera->near_plane;
    c.far = camera->far_plane;
    splatrig::RenderParams params;
    params.jobs = jobs;
    *out = new splatrig_image{splatrig::rasterize(scene->scene, c, params)};
  });
}

void splatrig_augment_params_default(splatrig_augment_params* params) {
  if (params != nullptr) *params = to_c(splatrig::AugmentParams{});
}

splatrig_status splatrig_augment_image(const splatrig_image* image, const splatrig_augment_params* params,
                                       uint64_t index, splatrig_image** out) {
  return guarded([&] {
    require(image, "image");
    require(params, "params");
    require(out, "out");
    *out = new splatrig_image{splatrig::augment_image(image->image, to_core(*params), index)};
  });
}

splatrig_status splatrig_augment_dataset(const char* in_dir, const char* out_dir,
                                         const splatrig_augment_params* params, unsigned jobs, size_t* frames) {
  return guarded([&] {
    require(in_dir, "in_dir");
    require(out_dir, "out_dir");
    require(params, "params");
    const size_t n = splatrig::augment_dataset(in_dir, out_dir, to_core(*params), jobs);
    if (frames != nullptr) *frames = n;
  });
}

splatrig_status splatrig_pipeline_open(const char* config_path, splatrig_pipeline** out) {
  return guarded([&] {
    require(config_path, "config_path");
    require(out, "out");
    *out = new splatrig_pipeline{splatrig::load_pipeline_config(config_path), std::nullopt};
  });
}

void splatrig_pipeline_free(splatrig_pipeline* pipeline) { delete pipeline; }

splatrig_status splatrig_pipeline_set_output_dir(splatrig_pipeline* pipeline, const char* dir) {
  return guarded([&] {
    require(pipeline, "pipeline");
    require(dir, "dir");
    pipeline->config.output_dir = std::filesystem::absolute(dir).string();
    pipeline->cell.reset();
  });
}

splatrig_status splatrig_pipeline_set_jobs(splatrig_pipeline* pipeline, unsigned jobs) {
  return guarded([&] {
    require(pipeline, "pipeline");
    pipeline->config.jobs = jobs;
    if (pipeline->cell) pipeline->cell->config.jobs = jobs;
  });
}

splatrig_status splatrig_pipeline_set_seed(splatrig_pipeline* pipeline, uint64_t seed) {
  return guarded([&] {
    require(pipeline, "pipeline");
    pipeline->config.augment.seed = seed;
    if (pipeline->cell) pipeline->cell->config.augment.seed = seed;
  });
}

splatrig_status splatrig_pipeline_output_dir(const splatrig_pipeline* pipeline, char* buffer, size_t size) {
  return guarded([&] {
    require(pipeline, "pipeline");
    require(buffer, "buffer");
    const std::string dir = pipeline->config.output_path().string();
    if (dir.size() + 1 > size) splatrig::fail(splatrig::ErrorCode::kLimit, "buffer too small for output dir");
    copy_out(dir, buffer, size);
  });
}

splatrig_status splatrig_pipeline_augment_params(const splatrig_pipeline* pipeline, splatrig_augment_params* out) {
  return guarded([&] {
    require(pipeline, "pipeline");
    require(out, "out");
    *out = to_c(pipeline->config.augment);
  });
}

splatrig_status splatrig_pipeline_validate(const splatrig_pipeline* pipeline, char* summary, size_t size) {
  return guarded([&] {
    require(pipeline, "pipeline");
    copy_out(splatrig::validate_config(pipeline->config), summary, size);
  });
}

splatrig_status splatrig_pipeline_align(splatrig_pipeline* pipeline, splatrig_alignment_summary* out) {
  return guarded([&] {
    require(pipeline, "pipeline");
    const auto record = splatrig::run_alignment(pipeline->config);
    const auto dir = pipeline->config.output_path();
    std::filesystem::create_directories(dir);
    splatrig::save_alignment(record, (dir / splatrig::kAlignmentFile).string());
    if (std::filesystem::exists(dir / splatrig::kAssignmentFile)) {
      splatrig::log_warn("{} predates this alignment; rerun segment to refresh it",
                         (dir / splatrig::kAssignmentFile).string());
    }
    pipeline->cell.reset();
    if (out != nullptr) {
      const auto& r = record.robot;
      const auto& q = r.transform.quaternion();
      const auto& t = r.transform.translation();
      *out = splatrig_alignment_summary{{q.w(), q.x(), q.y(), q.z()}, {t.x(), t.y(), t.z()}, r.scale,
                                        r.rms_residual, r.iterations, r.converged ? 1 : 0};
    }
  });
}

splatrig_status splatrig_pipeline_segment(splatrig_pipeline* pipeline, splatrig_segment_summary* out) {
  return guarded([&] {
    require(pipeline, "pipeline");
    const auto& config = pipeline->config;
    const auto model = splatrig::load_kinematic_model(config.resolve(config.kinematics).string());
    const auto alignment = load_or_align(config);
    const auto assignment = splatrig::run_segmentation(config, model, alignment);
    std::filesystem::create_directories(config.output_path());
    splatrig::save_assignment(assignment, (config.output_path() / splatrig::kAssignmentFile).string());
    pipeline->cell.reset();
    if (out != nullptr) {
      splatrig_segment_summary s{assignment.labels.size(), 0, 0};
      for (const auto& l : assignment.labels) {
        if (l.is_static()) ++s.static_count;
        if (l.is_link()) ++s.link_count;
      }
      *out = s;
    }
  });
}

splatrig_status splatrig_pipeline_render_frame(splatrig_pipeline* pipeline, const char* trajectory_path, int64_t t,
                                               const char* camera_id, splatrig_image** out) {
  return guarded([&] {
    require(pipeline, "pipeline");
    require(camera_id, "camera_id");
    require(out, "out");
    const auto& cell = workcell(pipeline);
    const auto& camera = cell.camera(camera_id);
    splatrig::TrajectoryState state;
    std::vector<std::string> object_ids;
    if (trajectory_path == nullptr) {
      const auto q = cell.capture_state();
      state.t = t;
      state.q = q.values;
      state.aperture = q.aperture;
      for (const auto& obj : cell.rig.objects) {
        object_ids.push_back(obj.name);
        state.object_poses.emplace_back();
      }
    } else {
      const auto log = splatrig::load_trajectory(trajectory_path);
      const auto it = std::find_if(log.states.begin(), log.states.end(), [&](const auto& s) { return s.t == t; });
      if (it == log.states.end()) {
        splatrig::fail(splatrig::ErrorCode::kNotFound, "trajectory has no timestep " + std::to_string(t));
      }
      state = *it;
      object_ids = log.object_ids;
    }
    *out = new splatrig_image{splatrig::render_state(cell, state, object_ids, camera, cell.config.jobs)};
  });
}

splatrig_status splatrig_pipeline_render_trajectory(splatrig_pipeline* pipeline, const char* trajectory_path,
                                                    const char* out_dir, int dry_run, splatrig_frame_fn on_frame,
                                                    void* user, size_t* frames) {
  return guarded([&] {
    require(pipeline, "pipeline");
    require(trajectory_path, "trajectory_path");
    const auto log = splatrig::load_trajectory(trajectory_path);
    splatrig::RenderOptions options;
    options.jobs = pipeline->config.jobs;
    options.dry_run = dry_run != 0;
    const std::filesystem::path dir =
        out_dir != nullptr ? std::filesystem::path(out_dir) : pipeline->config.output_path();
    std::vector<splatrig::FramePlan> plan;
    if (options.dry_run) {
      const auto cameras = splatrig::load_cameras(pipeline->config.resolve(pipeline->config.cameras).string());
      plan = splatrig::plan_frames(log, cameras);
    } else {
      plan = splatrig::render_trajectory(workcell(pipeline), log, dir, options);
    }
    if (on_frame != nullptr) {
      for (const auto& f : plan) on_frame(user, f.t, f.camera_id.c_str(), f.image_path.c_str());
    }
    if (frames != nullptr) *frames = plan.size();
  });
}

}  // extern "C"
