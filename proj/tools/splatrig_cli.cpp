// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

// splatrig command-line tool. Talks to the library only through the C API.

#include <cinttypes>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "splatrig/splatrig.h"

namespace {

constexpr int kExitModuleError = 1;
constexpr int kExitUsage = 2;

struct ModuleError {
  splatrig_status status;
};

void check(splatrig_status status) {
  if (status != SPLATRIG_OK) throw ModuleError{status};
}

struct PipelineDeleter {
  void operator()(splatrig_pipeline* p) const { splatrig_pipeline_free(p); }
};
struct ImageDeleter {
  void operator()(splatrig_image* p) const { splatrig_image_free(p); }
};
using PipelinePtr = std::unique_ptr<splatrig_pipeline, PipelineDeleter>;
using ImagePtr = std::unique_ptr<splatrig_image, ImageDeleter>;

struct Options {
  std::string config;
  std::string out_dir;
  std::optional<unsigned> jobs;
  std::optional<std::uint64_t> seed;
  std::string traj;
  std::string camera;
  std::optional<std::int64_t> t;
  std::string output;
  std::string in_dir;
  std::string ref;
  std::string test;
  bool dry_run = false;
};

PipelinePtr open_pipeline(const Options& o) {
  splatrig_pipeline* raw = nullptr;
  check(splatrig_pipeline_open(o.config.c_str(), &raw));
  PipelinePtr p(raw);
  if (!o.out_dir.empty()) check(splatrig_pipeline_set_output_dir(p.get(), o.out_dir.c_str()));
  if (o.jobs) check(splatrig_pipeline_set_jobs(p.get(), *o.jobs));
  if (o.seed) check(splatrig_pipeline_set_seed(p.get(), *o.seed));
  return p;
}

int run_validate(const Options& o) {
  PipelinePtr p = open_pipeline(o);
  char summary[512];
  check(splatrig_pipeline_validate(p.get(), summary, sizeof(summary)));
  std::printf("%s\n", summary);
  return 0;
}

int run_align(const Options& o) {
  PipelinePtr p = open_pipeline(o);
  splatrig_alignment_summary s;
  check(splatrig_pipeline_align(p.get(), &s));
  std::printf("rms=%.9g scale=%.17g iterations=%d converged=%s\n", s.rms_residual, s.scale, s.iterations,
              s.converged ? "true" : "false");
  return 0;
}

int run_segment(const Options& o) {
  PipelinePtr p = open_pipeline(o);
  splatrig_segment_summary s;
  check(splatrig_pipeline_segment(p.get(), &s));
  std::printf("gaussians=%zu static=%zu link=%zu\n", s.total, s.static_count, s.link_count);
  return 0;
}

int run_render_frame(const Options& o) {
  PipelinePtr p = open_pipeline(o);
  splatrig_image* raw = nullptr;
  check(splatrig_pipeline_render_frame(p.get(), o.traj.empty() ? nullptr : o.traj.c_str(), o.t.value_or(0),
                                       o.camera.c_str(), &raw));
  ImagePtr image(raw);
  check(splatrig_image_save_png(image.get(), o.output.c_str()));
  std::printf("wrote %s (%dx%d)\n", o.output.c_str(), splatrig_image_width(image.get()),
              splatrig_image_height(image.get()));
  return 0;
}

void print_plan_row(void*, std::int64_t t, const char* camera_id, const char* image_path) {
  std::printf("%" PRId64 ",%s,%s\n", t, camera_id, image_path);
}

int run_render_traj(const Options& o) {
  PipelinePtr p = open_pipeline(o);
  std::size_t frames = 0;
  if (o.dry_run) {
    std::printf("t,camera_id,image_path\n");
    check(splatrig_pipeline_render_trajectory(p.get(), o.traj.c_str(), nullptr, 1, print_plan_row, nullptr,
                                              &frames));
    return 0;
  }
  check(splatrig_pipeline_render_trajectory(p.get(), o.traj.c_str(), nullptr, 0, nullptr, nullptr, &frames));
  char dir[4096];
  check(splatrig_pipeline_output_dir(p.get(), dir, sizeof(dir)));
  std::printf("frames=%zu dir=%s\n", frames, dir);
  return 0;
}

int run_augment(const Options& o) {
  splatrig_augment_params params;
  splatrig_augment_params_default(&params);
  if (!o.config.empty()) {
    PipelinePtr p = open_pipeline(o);
    check(splatrig_pipeline_augment_params(p.get(), &params));
  }
  if (o.seed) params.seed = *o.seed;
  std::size_t frames = 0;
  check(splatrig_augment_dataset(o.in_dir.c_str(), o.out_dir.c_str(), &params, o.jobs.value_or(0), &frames));
  std::printf("frames=%zu seed=%" PRIu64 "\n", frames, params.seed);
  return 0;
}

int run_metrics(const Options& o) {
  splatrig_image* a = nullptr;
  splatrig_image* b = nullptr;
  check(splatrig_image_load_png(o.ref.c_str(), &a));
  ImagePtr ref(a);
  check(splatrig_image_load_png(o.test.c_str(), &b));
  ImagePtr test(b);
  double psnr = 0.0;
  double ssim = 0.0;
  check(splatrig_image_metrics(ref.get(), test.get(), &psnr, &ssim));
  std::printf("psnr=%.6f ssim=%.6f\n", psnr, ssim);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"splatrig: rig Gaussian-splat workcells and render robot trajectories"};
  app.require_subcommand(1);
  app.set_version_flag("--version", splatrig_version());
  Options o;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", o.config, "pipeline config (JSON)")->check(CLI::ExistingFile);
    if (config_required) c->required();
    sub->add_option("--out", o.out_dir, "output directory (overrides config output_dir)");
    sub->add_option("--jobs", o.jobs, "worker threads (0 = all hardware threads)");
  };

  auto* validate = app.add_subcommand("validate-config", "check a config and every file it references");
  validate->add_option("config", o.config, "pipeline config (JSON)")->required()->check(CLI::ExistingFile);

  auto* align = app.add_subcommand("align", "register the scene and objects; writes alignment.json");
  add_common(align, true);

  auto* segment = app.add_subcommand("segment", "assign Gaussians to links; writes assignment.bin");
  add_common(segment, true);

  auto* frame = app.add_subcommand("render-frame", "render one state from one camera to a PNG");
  add_common(frame, true);
  frame->add_option("--camera", o.camera, "camera id")->required();
  frame->add_option("--output,-o", o.output, "PNG to write")->required();
  auto* traj_opt = frame->add_option("--traj", o.traj, "trajectory log (default: the capture pose)")
                       ->check(CLI::ExistingFile);
  frame->add_option("--t", o.t, "timestep to render")->needs(traj_opt);

  auto* traj = app.add_subcommand("render-traj", "render every (state, camera) frame and manifest.csv");
  add_common(traj, true);
  traj->add_option("--traj", o.traj, "trajectory log")->required()->check(CLI::ExistingFile);
  traj->add_flag("--dry-run", o.dry_run, "print the frame plan without rendering or writing files");

  auto* augment = app.add_subcommand("augment", "augment a rendered dataset");
  augment->add_option("--config", o.config, "pipeline config supplying augment parameters and seed")
      ->check(CLI::ExistingFile);
  augment->add_option("--in", o.in_dir, "directory holding manifest.csv and frames")
      ->required()
      ->check(CLI::ExistingDirectory);
  augment->add_option("--out", o.out_dir, "output directory")->required();
  augment->add_option("--seed", o.seed, "augmentation seed (overrides config seed)");
  augment->add_option("--jobs", o.jobs, "worker threads (0 = all hardware threads)");

  auto* metrics = app.add_subcommand("metrics", "PSNR and SSIM between two PNGs");
  metrics->add_option("--ref", o.ref, "reference PNG")->required()->check(CLI::ExistingFile);
  metrics->add_option("--test", o.test, "test PNG")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string message = e.what();
    for (char& c : message) {
      if (c == '\n' || c == '\r') c = ' ';
    }
    std::fprintf(stderr, "error: usage: %s\n", message.c_str());
    return kExitUsage;
  }

  try {
    if (validate->parsed()) return run_validate(o);
    if (align->parsed()) return run_align(o);
    if (segment->parsed()) return run_segment(o);
    if (frame->parsed()) return run_render_frame(o);
    if (traj->parsed()) return run_render_traj(o);
    if (augment->parsed()) return run_augment(o);
    if (metrics->parsed()) return run_metrics(o);
  } catch (const ModuleError& e) {
    std::string message = splatrig_last_error();
    for (char& c : message) {
      if (c == '\n' || c == '\r') c = ' ';
    }
    std::fprintf(stderr, "error: %s: %s\n", splatrig_status_name(e.status), message.c_str());
    return kExitModuleError;
  }
  return kExitUsage;
}
