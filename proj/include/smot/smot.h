/* Copyright 2026 The SMOT Toolkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

/* Stable C interface of libsmot.
 *
 * Every function returns an smot_status. On failure a message is available
 * from smot_last_error() on the calling thread until the next call.
 * Buffers handed out through `char** out` are NUL-terminated, allocated by the
 * library and released with smot_buffer_free(). Handles are released with
 * their matching *_free function; passing NULL to a free function is a no-op.
 */

#ifndef SMOT_SMOT_H_
#define SMOT_SMOT_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SMOT_API __declspec(dllexport)
#else
#define SMOT_API __attribute__((visibility("default")))
#endif

typedef enum smot_status {
  SMOT_OK = 0,
  SMOT_ERR_SYNTAX = 1,
  SMOT_ERR_SCHEMA = 2,
  SMOT_ERR_RANGE = 3,
  SMOT_ERR_IO = 4,
  SMOT_ERR_MISSING_FILE = 5,
  SMOT_ERR_INVALID_ANNOTATION = 6,
  SMOT_ERR_INVALID_ARGUMENT = 7,
  SMOT_ERR_FRAME_ORDER = 8,
  SMOT_ERR_NUMERIC = 9,
  SMOT_ERR_DIM_MISMATCH = 10,
  SMOT_ERR_EMPTY_INPUT = 11,
  SMOT_ERR_LABEL_RANGE = 12,
  SMOT_ERR_INFEASIBLE_MOTION = 13,
  SMOT_ERR_EMPTY_GT = 14,
  SMOT_ERR_EMPTY_CORPUS = 15,
  SMOT_ERR_EMPTY_REFERENCE = 16,
  SMOT_ERR_NEGATIVE_SIZE = 17,
  SMOT_ERR_EMPTY_GRID = 18,
  SMOT_ERR_INTERNAL = 99
} smot_status;

SMOT_API const char* smot_version(void);
SMOT_API const char* smot_status_name(int status);
/* Message of the last failure on this thread; "" when none. */
SMOT_API const char* smot_last_error(void);
SMOT_API void smot_buffer_free(char* buffer);

/* ------------------------------------------------------------------------ */
/* Annotations                                                               */
/* ------------------------------------------------------------------------ */

typedef struct smot_annotation smot_annotation;

typedef enum smot_annotation_kind {
  SMOT_GROUND_TRUTH = 0,
  SMOT_PREDICTION = 1
} smot_annotation_kind;

typedef struct smot_annotation_info {
  int width;
  int height;
  int frame_count;
  double fps; /* 0 when absent */
  size_t tracks;
  size_t boxes;
  size_t interactions;
} smot_annotation_info;

SMOT_API int smot_annotation_load(const char* path, int kind, int strict,
                                  smot_annotation** out);
SMOT_API int smot_annotation_parse(const char* text, size_t length, int kind,
                                   int strict, smot_annotation** out);
SMOT_API int smot_annotation_serialize(const smot_annotation* ann, char** out);
SMOT_API int smot_annotation_save(const smot_annotation* ann, const char* path);
SMOT_API int smot_annotation_info_get(const smot_annotation* ann,
                                      smot_annotation_info* out);
/* Copies the video id into a library buffer. */
SMOT_API int smot_annotation_video_id(const smot_annotation* ann, char** out);
SMOT_API void smot_annotation_free(smot_annotation* ann);

typedef enum smot_format {
  SMOT_FORMAT_LINES = 0,    /* validate: one finding per line */
  SMOT_FORMAT_DOC = 1,      /* JSON document */
  SMOT_FORMAT_MARKDOWN = 2  /* stats, eval and report */
} smot_format;

/* Validates an annotation document, or every entry of a manifest when the
 * path ends in ".tsv". Files ending in ".pred" are checked as predictions.
 * Findings go to *out; *error_count receives the number of error findings.
 * Parse failures are reported as findings. Fails only on I/O problems. */
SMOT_API int smot_validate_path(const char* path, int format, char** out,
                                size_t* error_count);

/* ------------------------------------------------------------------------ */
/* Dataset statistics                                                        */
/* ------------------------------------------------------------------------ */

SMOT_API int smot_stats(const char* manifest_path, int format, char** out);

/* ------------------------------------------------------------------------ */
/* Tracking                                                                  */
/* ------------------------------------------------------------------------ */

typedef enum smot_algorithm { SMOT_ALGO_BYTE = 0, SMOT_ALGO_SORT = 1 } smot_algorithm;

typedef struct smot_tracker_options {
  int algorithm;
  double tau_p;
  double tau_high;
  double iou_gate;
  int max_lost;
  double low_score_floor; /* negative: use tau_p */
  int min_points;
} smot_tracker_options;

typedef struct smot_video_meta {
  const char* video_id; /* NULL: derived from the detections file name */
  int width;            /* 0: derived from detection extents */
  int height;
  int frame_count;      /* 0: last detection frame + 1 */
  double fps;           /* 0: absent */
} smot_video_meta;

SMOT_API void smot_tracker_options_default(smot_tracker_options* out);

/* Applies the fields present in a JSON config to *options and *meta. The
 * video_id string stays owned by the library until the next call on this
 * thread. */
SMOT_API int smot_tracker_options_from_json(const char* text, size_t length,
                                            smot_tracker_options* options,
                                            smot_video_meta* meta);

/* Effective options as a JSON object, for echoing into reports. */
SMOT_API int smot_tracker_options_to_json(const smot_tracker_options* options,
                                          char** out);

typedef struct smot_track_summary {
  size_t detections;
  size_t tracks;
  size_t boxes;
} smot_track_summary;

/* Runs the tracker over a detection file. Boxes are clipped to the frame.
 * meta may be NULL. */
SMOT_API int smot_track_file(const char* detections_path,
                             const smot_tracker_options* options,
                             const smot_video_meta* meta, smot_annotation** out,
                             smot_track_summary* summary);

/* ------------------------------------------------------------------------ */
/* Evaluation                                                                */
/* ------------------------------------------------------------------------ */

typedef struct smot_eval_options {
  const char* tasks;   /* "tracking,captions,interactions"; NULL means all */
  int format;          /* SMOT_FORMAT_DOC or SMOT_FORMAT_MARKDOWN */
  int jobs;
  int strict;
  int per_pair_instance_captions;
  double iou_threshold;
} smot_eval_options;

SMOT_API void smot_eval_options_default(smot_eval_options* out);

/* *warnings receives one line per warning (may be empty). */
SMOT_API int smot_eval(const char* gt_manifest, const char* pred_dir,
                       const smot_eval_options* options, char** out,
                       char** warnings);

/* Re-renders a report document. */
SMOT_API int smot_report_render(const char* doc, size_t length, int format,
                                char** out);

/* ------------------------------------------------------------------------ */
/* Synthetic data                                                            */
/* ------------------------------------------------------------------------ */

/* Writes a synthetic dataset described by a JSON config; *summary is a JSON
 * object with the manifest path, video count and realized perturbations. */
SMOT_API int smot_synth(const char* config_json, size_t length,
                        const char* out_dir, char** summary);

/* ------------------------------------------------------------------------ */
/* Fusion reference math                                                     */
/* ------------------------------------------------------------------------ */

typedef struct smot_fusion_options {
  uint64_t seed;
  int dim;
  int hidden;
  int frames;      /* video frames folded by the video fusion module */
  int targets;     /* trajectories */
  int track_len;   /* frames per trajectory */
  int classes;     /* interaction vocabulary size C (head outputs C + 1) */
  const char* variant; /* attention | mlp | concatenation | addition */
} smot_fusion_options;

SMOT_API void smot_fusion_options_default(smot_fusion_options* out);

/* Runs the seeded reference forward pass and writes inputs, parameters and
 * outputs to a binary matrix container. */
SMOT_API int smot_fusion_export(const smot_fusion_options* options,
                                const char* out_path);

/* One line per entry: "name rows cols". */
SMOT_API int smot_matrix_file_describe(const char* path, char** out);

#ifdef __cplusplus
}
#endif

#endif /* SMOT_SMOT_H_ */
