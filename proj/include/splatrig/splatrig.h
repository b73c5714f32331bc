/* Copyright 2026 The splatrig Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to splatrig: loading, rigging and rendering Gaussian-splat
 * workcells and producing augmented training datasets.
 *
 * Every fallible call returns a splatrig_status. On failure a message for the
 * calling thread is available from splatrig_last_error() until the next call
 * on that thread. Handles are opaque and owned by the caller; free them with
 * the matching *_free function (NULL is accepted).
 */

#ifndef SPLATRIG_SPLATRIG_H_
#define SPLATRIG_SPLATRIG_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(SPLATRIG_BUILDING_LIBRARY)
#define SPLATRIG_API __declspec(dllexport)
#else
#define SPLATRIG_API __declspec(dllimport)
#endif
#else
#define SPLATRIG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum splatrig_status {
  SPLATRIG_OK = 0,
  SPLATRIG_ERR_INVALID_ARGUMENT = 1,
  SPLATRIG_ERR_FORMAT = 2,
  SPLATRIG_ERR_IO = 3,
  SPLATRIG_ERR_EMPTY_SCENE = 4,
  SPLATRIG_ERR_DEGENERATE_GEOMETRY = 5,
  SPLATRIG_ERR_NO_OVERLAP = 6,
  SPLATRIG_ERR_LIMIT = 7,
  SPLATRIG_ERR_LENGTH_MISMATCH = 8,
  SPLATRIG_ERR_NOT_FOUND = 9,
  SPLATRIG_ERR_INTERNAL = 10
} splatrig_status;

typedef struct splatrig_scene splatrig_scene;
typedef struct splatrig_image splatrig_image;
typedef struct splatrig_pipeline splatrig_pipeline;

SPLATRIG_API const char* splatrig_version(void);
/* Stable lower-case name such as "io" or "length_mismatch". */
SPLATRIG_API const char* splatrig_status_name(splatrig_status status);
/* Message of the last failed call on this thread; "" if none. */
SPLATRIG_API const char* splatrig_last_error(void);

/* Scenes (binary little-endian 3D Gaussian Splatting PLY). */
SPLATRIG_API splatrig_status splatrig_scene_load(const char* path, splatrig_scene** out);
SPLATRIG_API splatrig_status splatrig_scene_save(const splatrig_scene* scene, const char* path);
SPLATRIG_API size_t splatrig_scene_size(const splatrig_scene* scene);
SPLATRIG_API int splatrig_scene_sh_degree(const splatrig_scene* scene);
SPLATRIG_API void splatrig_scene_free(splatrig_scene* scene);

/* RGB8 images, row-major, 3 bytes per pixel. */
SPLATRIG_API splatrig_status splatrig_image_create(int width, int height, const uint8_t* rgb, splatrig_image** out);
SPLATRIG_API splatrig_status splatrig_image_load_png(const char* path, splatrig_image** out);
SPLATRIG_API splatrig_status splatrig_image_save_png(const splatrig_image* image, const char* path);
SPLATRIG_API int splatrig_image_width(const splatrig_image* image);
SPLATRIG_API int splatrig_image_height(const splatrig_image* image);
SPLATRIG_API const uint8_t* splatrig_image_data(const splatrig_image* image);
SPLATRIG_API void splatrig_image_free(splatrig_image* image);

/* PSNR in dB (+infinity for identical images) and mean SSIM. */
SPLATRIG_API splatrig_status splatrig_image_metrics(const splatrig_image* reference, const splatrig_image* test,
                                                   double* psnr, double* ssim);

/* Pinhole camera, +z forward, +x right, +y down. world_to_cam rotation is a
 * unit quaternion (w, x, y, z). */
typedef struct splatrig_camera {
  double fx, fy, cx, cy;
  int width, height;
  double rotation[4];
  double translation[3];
  double near_plane, far_plane;
} splatrig_camera;

SPLATRIG_API void splatrig_camera_default(splatrig_camera* camera);
/* Renders a scene directly with default render parameters. jobs = 0 uses
 * every hardware thread. */
SPLATRIG_API splatrig_status splatrig_render(const splatrig_scene* scene, const splatrig_camera* camera,
                                            unsigned jobs, splatrig_image** out);

typedef struct splatrig_augment_params {
  double noise_sigma;
  double erase_prob;
  double erase_area_min, erase_area_max;
  double brightness_lo, brightness_hi;
  double contrast_lo, contrast_hi;
  uint64_t seed;
} splatrig_augment_params;

SPLATRIG_API void splatrig_augment_params_default(splatrig_augment_params* params);
SPLATRIG_API splatrig_status splatrig_augment_image(const splatrig_image* image,
                                                   const splatrig_augment_params* params, uint64_t index,
                                                   splatrig_image** out);
/* Augments every frame of in_dir/manifest.csv into out_dir. */
SPLATRIG_API splatrig_status splatrig_augment_dataset(const char* in_dir, const char* out_dir,
                                                     const splatrig_augment_params* params, unsigned jobs,
                                                     size_t* frames);

/* Pipelines: a parsed configuration plus overrides. Relative paths in the
 * configuration resolve against its directory. */
SPLATRIG_API splatrig_status splatrig_pipeline_open(const char* config_path, splatrig_pipeline** out);
SPLATRIG_API void splatrig_pipeline_free(splatrig_pipeline* pipeline);
SPLATRIG_API splatrig_status splatrig_pipeline_set_output_dir(splatrig_pipeline* pipeline, const char* dir);
SPLATRIG_API splatrig_status splatrig_pipeline_set_jobs(splatrig_pipeline* pipeline, unsigned jobs);
SPLATRIG_API splatrig_status splatrig_pipeline_set_seed(splatrig_pipeline* pipeline, uint64_t seed);
SPLATRIG_API splatrig_status splatrig_pipeline_output_dir(const splatrig_pipeline* pipeline, char* buffer,
                                                         size_t size);
SPLATRIG_API splatrig_status splatrig_pipeline_augment_params(const splatrig_pipeline* pipeline,
                                                             splatrig_augment_params* out);

/* Loads every referenced file and checks every parameter block. On success
 * a one-line summary is copied into summary (may be NULL). */
SPLATRIG_API splatrig_status splatrig_pipeline_validate(const splatrig_pipeline* pipeline, char* summary,
                                                       size_t size);

typedef struct splatrig_alignment_summary {
  double rotation[4]; /* w, x, y, z */
  double translation[3];
  double scale;
  double rms_residual;
  int iterations;
  int converged;
} splatrig_alignment_summary;

/* Registers scene and objects, writes <output_dir>/alignment.json. */
SPLATRIG_API splatrig_status splatrig_pipeline_align(splatrig_pipeline* pipeline, splatrig_alignment_summary* out);

typedef struct splatrig_segment_summary {
  size_t total;
  size_t static_count;
  size_t link_count; /* Gaussians assigned to any link */
} splatrig_segment_summary;

/* Segments the scene (running alignment first if alignment.json is missing)
 * and writes <output_dir>/assignment.bin. */
SPLATRIG_API splatrig_status splatrig_pipeline_segment(splatrig_pipeline* pipeline, splatrig_segment_summary* out);

/* Renders timestep t of a trajectory log (or the capture pose when
 * trajectory_path is NULL) from one configured camera. */
SPLATRIG_API splatrig_status splatrig_pipeline_render_frame(splatrig_pipeline* pipeline,
                                                           const char* trajectory_path, int64_t t,
                                                           const char* camera_id, splatrig_image** out);

/* Called once per planned frame, in manifest order. */
typedef void (*splatrig_frame_fn)(void* user, int64_t t, const char* camera_id, const char* image_path);

/* Renders every (state, camera) frame into out_dir (NULL: the configured
 * output directory) and writes manifest.csv. With dry_run nonzero nothing is
 * rendered or written. */
SPLATRIG_API splatrig_status splatrig_pipeline_render_trajectory(splatrig_pipeline* pipeline,
                                                                const char* trajectory_path, const char* out_dir,
                                                                int dry_run, splatrig_frame_fn on_frame, void* user,
                                                                size_t* frames);

#ifdef __cplusplus
}
#endif

#endif /* SPLATRIG_SPLATRIG_H_ */
