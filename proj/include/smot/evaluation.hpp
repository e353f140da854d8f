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

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smot/annotation_io.hpp"
#include "smot/metrics_semantic.hpp"
#include "smot/metrics_tracking.hpp"

namespace smot {

inline constexpr int kReportVersion = 1;

// Name of the tracker settings file `track` drops next to its output; eval
// echoes it into the report when found in the predictions directory.
inline constexpr std::string_view kTrackerEchoFile = "tracker_config.json";

struct EvalTasks {
  bool tracking = true;
  bool captions = true;
  bool interactions = true;
};

// "tracking,captions,interactions" in any order and subset.
// Throws Error{INVALID_ARGUMENT}.
EvalTasks parse_tasks(std::string_view csv);

struct EvalConfig {
  TrackingOptions tracking;
  EvalTasks tasks;
  CaptionAveraging instance_averaging = CaptionAveraging::kPooled;
  int bleu_n = 4;
  int cider_n = 4;
  bool strict = true;
  int jobs = 1;
};

// Per-video counts gathered in the first pass.
struct VideoEvaluation {
  std::string video_id;
  Split split = Split::kTest;
  std::string scenario;
  bool prediction_missing = false;
  TrackingCounts tracking;
  std::vector<CaptionPair> video_pairs;     // zero or one
  std::vector<CaptionPair> instance_pairs;
  InteractionCounts interactions;
};

struct VideoReport {
  VideoEvaluation eval;
  TrackingScores tracking;
  std::optional<CaptionScores> video_caption;
  std::optional<CaptionScores> instance_caption;
  InteractionScores interaction;
};

struct MetricReport {
  int report_version = kReportVersion;
  std::string tool_version;
  EvalConfig config;
  std::optional<std::string> tracker_echo;  // compact JSON object

  std::vector<VideoReport> videos;  // sorted by video_id
  TrackingCounts pooled_counts;
  TrackingScores pooled_tracking;
  std::optional<CaptionScores> pooled_video_caption;
  std::optional<CaptionScores> pooled_instance_caption;
  InteractionCounts pooled_interaction_counts;
  InteractionScores pooled_interaction;
  std::vector<std::string> warnings;
};

// Scores one video pair in memory (first pass only).
VideoEvaluation evaluate_video(const VideoAnnotation& gt, const VideoAnnotation& pred,
                               const EvalConfig& config);

// Second pass: caption IDF over the whole run, per-video scores, pooling.
MetricReport assemble_report(std::vector<VideoEvaluation> videos,
                             const EvalConfig& config);

// Loads <pred_dir>/<video_id>.pred for every manifest entry; a missing file
// becomes an empty prediction plus a warning. Output is independent of
// config.jobs. Throws Error{IO | SYNTAX | SCHEMA | RANGE}.
MetricReport evaluate_dataset(const DatasetManifest& gt,
                              const std::filesystem::path& pred_dir,
                              const EvalConfig& config);

// JSON document with sorted keys; rates in [0, 1], CIDEr in [0, 10].
std::string render_report_doc(const MetricReport& report);
// Tables in the published column order; tracking rates in percent.
std::string render_report_markdown(const MetricReport& report);

// Inverse of render_report_doc for everything the renderers read; HOTA
// per-alpha counts are not carried by the document. Throws
// Error{SYNTAX | SCHEMA}.
MetricReport parse_report_doc(std::string_view text);

}  // namespace smot
