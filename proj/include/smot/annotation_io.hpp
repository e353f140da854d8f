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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "smot/core_model.hpp"

namespace smot {

// ---------------------------------------------------------------------------
// Annotation documents
//
// One JSON object per video:
//   video_id, width, height, frame_count, fps (optional),
//   trajectories: [{track_id, points: [[frame, x, y, w, h], ...]}],
//   instance_captions: {track_id: text},
//   interactions: [{subject, predicate: {lemma, sense}, object}],
//   video_caption
// Frames inside annotation documents are 0-based.
// ---------------------------------------------------------------------------

struct ParseOptions {
  // Strict mode rejects documents that fail validate_annotation (RANGE).
  bool strict = true;
  AnnotationKind kind = AnnotationKind::kGroundTruth;
  const InteractionVocabulary* vocabulary = nullptr;
  // Receives one message per ignored unknown field.
  std::vector<std::string>* warnings = nullptr;
};

// Throws Error{SYNTAX | SCHEMA | RANGE}.
VideoAnnotation parse_video_annotation(std::string_view text,
                                       const ParseOptions& options = {});

// Canonical bytes: keys sorted, trajectories by track_id, points by frame,
// interactions sorted, coordinates with exactly 6 fractional digits.
// Throws Error{INVALID_ANNOTATION} when the annotation has structural errors
// (validated as a prediction, so captions may be absent).
std::string serialize_video_annotation(const VideoAnnotation& ann);

// Sorted copy matching the canonical serialization order.
VideoAnnotation canonicalize(VideoAnnotation ann);

VideoAnnotation load_video_annotation(const std::filesystem::path& path,
                                      const ParseOptions& options = {});
void save_video_annotation(const std::filesystem::path& path,
                           const VideoAnnotation& ann);

// ---------------------------------------------------------------------------
// Detection files: "frame,x,y,w,h,score" per line, 1-based frame on disk.
// ---------------------------------------------------------------------------

using DetectionsByFrame = std::map<int, std::vector<Detection>>;

struct DetectionParseOptions {
  bool strict = true;
  // Lenient mode skips bad lines and reports them here.
  std::vector<std::string>* warnings = nullptr;
};

// Throws Error{SYNTAX | NEGATIVE_SIZE | RANGE} naming the 1-based line.
DetectionsByFrame parse_detections(std::string_view text,
                                   const DetectionParseOptions& options = {});
std::string serialize_detections(const DetectionsByFrame& dets);

std::size_t detection_count(const DetectionsByFrame& dets);

// ---------------------------------------------------------------------------
// Interaction vocabulary: "lemma sense_index gloss" per line.
// ---------------------------------------------------------------------------

InteractionVocabulary parse_vocabulary(std::string_view text);
// The 20-entry sample shipped in data/interaction_vocabulary_sample.txt.
const InteractionVocabulary& sample_vocabulary();

// ---------------------------------------------------------------------------
// Dataset manifests: "video_id<TAB>annotation_path<TAB>scenario<TAB>split".
// Relative paths resolve against the manifest's directory.
// ---------------------------------------------------------------------------

enum class Split { kTrain, kTest };

std::string_view split_name(Split s);

struct ManifestEntry {
  std::string video_id;
  std::filesystem::path annotation_path;
  std::string scenario;
  Split split = Split::kTrain;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
  std::filesystem::path root;
  std::vector<ManifestEntry> entries;

  std::size_t count(Split s) const;
  const ManifestEntry* find(std::string_view video_id) const;
};

// Throws Error{SYNTAX | MISSING_FILE}. MISSING_FILE only in strict mode.
DatasetManifest parse_manifest(std::string_view text,
                               const std::filesystem::path& root,
                               bool strict = true);
// Throws Error{IO} when the manifest itself cannot be read.
DatasetManifest load_manifest(const std::filesystem::path& path,
                              bool strict = true);
std::string serialize_manifest(const DatasetManifest& manifest);

// ---------------------------------------------------------------------------
// Dataset statistics
// ---------------------------------------------------------------------------

// Sparse histogram; bin k holds values in [k*width, (k+1)*width).
struct Histogram {
  double bin_width = 1.0;
  std::map<std::int64_t, std::int64_t> bins;

  void add(double value);
  std::int64_t mass() const;
  Histogram& operator+=(const Histogram& other);

  friend bool operator==(const Histogram&, const Histogram&) = default;
};

struct StatsReport {
  std::int64_t video_count = 0;
  std::int64_t train_videos = 0;
  std::int64_t test_videos = 0;
  std::int64_t total_frames = 0;
  std::int64_t total_tracks = 0;
  std::int64_t total_boxes = 0;
  std::int64_t total_interactions = 0;
  std::int64_t total_instance_captions = 0;
  std::int64_t total_video_captions = 0;

  // Sequence lengths for videos with fps, accumulated in whole milliseconds so
  // that merging is exact.
  std::int64_t timed_videos = 0;
  std::int64_t total_length_ms = 0;
  std::optional<std::int64_t> min_length_ms;
  std::optional<std::int64_t> max_length_ms;
  // Videos without fps: lengths are histogrammed in frames instead.
  std::int64_t untimed_videos = 0;

  Histogram trajectory_length_s{1.0, {}};
  Histogram sequence_length_s{1.0, {}};
  Histogram trajectory_length_frames{1.0, {}};
  Histogram sequence_length_frames{1.0, {}};
  Histogram interactions_per_sequence{1.0, {}};
  Histogram instance_caption_words{1.0, {}};
  Histogram video_caption_words{1.0, {}};

  std::map<std::string, std::int64_t> word_frequency;

  StatsReport& operator+=(const StatsReport& other);

  friend bool operator==(const StatsReport&, const StatsReport&) = default;
};

std::string_view default_prepositions_text();
std::set<std::string> parse_word_list(std::string_view text);

struct StatsOptions {
  // Words excluded from the frequency table. Defaults to the shipped list.
  std::optional<std::set<std::string>> excluded_words;
  bool strict = true;
};

StatsReport video_stats(const VideoAnnotation& ann, Split split,
                        const std::set<std::string>& excluded_words);

// Throws the parse error of the first failing file, prefixed with its path.
StatsReport dataset_stats(const DatasetManifest& manifest,
                          const StatsOptions& options = {});

std::string render_stats_doc(const StatsReport& stats);
StatsReport parse_stats_doc(std::string_view text);
std::string render_stats_markdown(const StatsReport& stats,
                                  std::size_t top_words = 20);

// Reads a whole file; throws Error{IO}.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

// Fixed-point text for a double, locale independent.
std::string format_fixed(double value, int digits = 6);

}  // namespace smot
