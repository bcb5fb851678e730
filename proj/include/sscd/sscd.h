// Copyright 2026 The sscd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the sscd change-detection library.
 *
 * Every fallible call returns an int status: SSCD_OK (0) on success or one of
 * the SSCD_ERR_* codes. The message for the most recent failure on the calling
 * thread is available from sscd_last_error(). Objects are opaque handles that
 * the caller releases with the matching *_free function; out-parameters are
 * written only on success.
 */
#ifndef SSCD_SSCD_H
#define SSCD_SSCD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SSCD_API __declspec(dllexport)
#else
#define SSCD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum sscd_status {
  SSCD_OK = 0,
  SSCD_ERR_FORMAT = 1,
  SSCD_ERR_TRUNCATION = 2,
  SSCD_ERR_IO = 3,
  SSCD_ERR_TYPE = 4,
  SSCD_ERR_BOUNDS = 5,
  SSCD_ERR_CONFIG = 6,
  SSCD_ERR_SHAPE = 7,
  SSCD_ERR_CONTRACT = 8,
  SSCD_ERR_PARAMETER = 9,
  SSCD_ERR_CORRUPTION = 10,
  SSCD_ERR_DATA = 11,
  SSCD_ERR_STATE = 12,
  SSCD_ERR_DEGENERATE = 13,
  SSCD_ERR_SPEC = 14,
  SSCD_ERR_NUMERIC = 15,
  SSCD_ERR_INVALID_ARGUMENT = 16,
  SSCD_ERR_INTERNAL = 99
};

enum sscd_dtype { SSCD_DTYPE_F32 = 0, SSCD_DTYPE_U8 = 1 };
enum sscd_mode { SSCD_MODE_HOMOGENEOUS = 0, SSCD_MODE_HETEROGENEOUS = 1 };
enum sscd_map_state { SSCD_MAP_RAW = 0, SSCD_MAP_STANDARDIZED = 1, SSCD_MAP_FUSED = 2 };
enum sscd_threshold_strategy { SSCD_THRESHOLD_AUTO = 0, SSCD_THRESHOLD_MIN = 1, SSCD_THRESHOLD_ROSIN = 2 };
enum sscd_threshold_method { SSCD_METHOD_OPPOSITE_MIN = 0, SSCD_METHOD_ROSIN = 1 };
enum sscd_encoder_preset { SSCD_ENCODER_DESK = 0, SSCD_ENCODER_RESNET34_SMALL_INPUT = 1 };
enum sscd_change_shape { SSCD_SHAPE_SQUARE = 0, SSCD_SHAPE_RECT = 1 };

typedef struct sscd_raster sscd_raster;
typedef struct sscd_archive sscd_archive;
typedef struct sscd_checkpoint sscd_checkpoint;
typedef struct sscd_map sscd_map;

/* ---- general ---- */
SSCD_API const char* sscd_version(void);
/** Message of the last failed call on this thread ("" if none). */
SSCD_API const char* sscd_last_error(void);
/** Short symbolic name for a status code, e.g. "contract". */
SSCD_API const char* sscd_status_name(int status);
/** Deterministic seed derivation (splitmix64 of seed and tag). */
SSCD_API uint64_t sscd_mix_seed(uint64_t seed, uint64_t tag);

/* ---- rasters ---- */
SSCD_API int sscd_raster_read(const char* path, sscd_raster** out);
SSCD_API int sscd_raster_write(const sscd_raster* raster, const char* path);
/** Copies `width*height*bands` band-sequential values. */
SSCD_API int sscd_raster_create_f32(int width, int height, int bands, const float* data, sscd_raster** out);
SSCD_API int sscd_raster_create_u8(int width, int height, int bands, const uint8_t* data, sscd_raster** out);
SSCD_API int sscd_raster_info(const sscd_raster* raster, int* width, int* height, int* bands, int* dtype);
/** Borrowed pointer valid until the raster is freed; NULL on dtype mismatch. */
SSCD_API const float* sscd_raster_data_f32(const sscd_raster* raster);
SSCD_API const uint8_t* sscd_raster_data_u8(const sscd_raster* raster);
SSCD_API void sscd_raster_free(sscd_raster* raster);

/* ---- synthetic archives ---- */
typedef struct sscd_synth_params {
  uint64_t seed;
  int n_scenes;
  int n_dates;
  int size;
  /** Comma-separated modality names: "pseudo_optical", "pseudo_sar". */
  const char* modalities;
  int n_objects;
  int min_size;
  int max_size;
  double magnitude;
  int shape; /* sscd_change_shape */
} sscd_synth_params;

SSCD_API void sscd_synth_params_default(sscd_synth_params* params);
SSCD_API int sscd_synth_archive(const sscd_synth_params* params, const char* dir);

/* ---- archives ---- */
SSCD_API int sscd_archive_open(const char* dir, sscd_archive** out);
SSCD_API int sscd_archive_test_pair_count(const sscd_archive* archive, const char* modality1, const char* modality2,
                                          int* count);
/**
 * Fetches the index-th held-out pair. `scene_id` receives a NUL-terminated id
 * (truncated to `scene_id_len`). The three rasters are new handles.
 */
SSCD_API int sscd_archive_test_pair(const sscd_archive* archive, const char* modality1, const char* modality2,
                                    int index, char* scene_id, size_t scene_id_len, int* date1, int* date2,
                                    sscd_raster** image1, sscd_raster** image2, sscd_raster** ground_truth);
SSCD_API void sscd_archive_free(sscd_archive* archive);

/* ---- training and checkpoints ---- */
typedef struct sscd_train_params {
  int mode; /* sscd_mode */
  int patch_side;
  int batch_size;
  int steps;
  double learning_rate;
  double temperature;
  double beta;
  double ema_tau;
  uint64_t seed;
  int patches_per_image;
  const char* modality;
  const char* modality_b;
  int encoder_preset; /* sscd_encoder_preset */
} sscd_train_params;

SSCD_API void sscd_train_params_default(sscd_train_params* params);
/** Trains one model; writes a `step<TAB>loss` log when loss_log_path is non-NULL. */
SSCD_API int sscd_train(const sscd_archive* archive, const sscd_train_params* params, const char* loss_log_path,
                        sscd_checkpoint** out);

typedef struct sscd_checkpoint_info {
  int mode;
  int patch_side;
  int in_channels1;
  int in_channels2;
  int embed_dim;
  uint64_t steps;
  double final_loss;
  uint64_t seed;
} sscd_checkpoint_info;

SSCD_API int sscd_checkpoint_save(const sscd_checkpoint* checkpoint, const char* path);
SSCD_API int sscd_checkpoint_load(const char* path, sscd_checkpoint** out);
SSCD_API int sscd_checkpoint_get_info(const sscd_checkpoint* checkpoint, sscd_checkpoint_info* info);
SSCD_API void sscd_checkpoint_free(sscd_checkpoint* checkpoint);

/* ---- change intensity maps ---- */
/** Raw map from an ensemble of same-scale checkpoints (feature vectors averaged). */
SSCD_API int sscd_map_compute(const sscd_checkpoint* const* ensemble, size_t count, const sscd_raster* image1,
                              const sscd_raster* image2, int stride, int batch_size, sscd_map** out);
SSCD_API int sscd_map_standardize(const sscd_map* map, sscd_map** out);
SSCD_API int sscd_map_fuse(const sscd_map* const* maps, size_t count, sscd_map** out);
/** Writes a float32 raster plus a `.meta` sidecar. */
SSCD_API int sscd_map_save(const sscd_map* map, const char* path);
SSCD_API int sscd_map_load(const char* path, sscd_map** out);
SSCD_API int sscd_map_info(const sscd_map* map, int* width, int* height, int* state);
/** Borrowed pointer to width*height row-major values. */
SSCD_API const float* sscd_map_values(const sscd_map* map);
SSCD_API void sscd_map_free(sscd_map* map);

/* ---- thresholding ---- */
typedef struct sscd_threshold_decision {
  double t_min;
  double t_rosin; /* NaN when no usable histogram corner exists */
  double chosen;
  int method; /* sscd_threshold_method */
} sscd_threshold_decision;

SSCD_API int sscd_threshold_decide(const sscd_map* map, int strategy, int bins, sscd_threshold_decision* out);
/** Mask pixel = 1 iff value > t. */
SSCD_API int sscd_binarize(const sscd_map* map, double t, sscd_raster** out);
/** Writes the mask and a sidecar holding the source map's metadata and the decision. */
SSCD_API int sscd_mask_save(const sscd_raster* mask, const sscd_map* source, const sscd_threshold_decision* decision,
                            const char* path);

/* ---- metrics ---- */
typedef struct sscd_confusion {
  uint64_t tp;
  uint64_t fp;
  uint64_t fn;
  uint64_t tn;
} sscd_confusion;

typedef struct sscd_metrics {
  double pre;
  double rec;
  double oa;
  double f1;
  double kappa;
  double pe;
  int degenerate;
} sscd_metrics;

SSCD_API int sscd_confusion_counts(const sscd_raster* prediction, const sscd_raster* ground_truth,
                                   sscd_confusion* out);
SSCD_API int sscd_compute_metrics(const sscd_confusion* counts, sscd_metrics* out);
SSCD_API int sscd_metrics_write_json(const sscd_metrics* metrics, const sscd_confusion* counts, const char* path);
SSCD_API int sscd_roc_auc(const float* scores, const uint8_t* labels, size_t count, double* out);

#ifdef __cplusplus
}
#endif

#endif /* SSCD_SSCD_H */
