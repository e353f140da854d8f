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
#include <string>
#include <string_view>
#include <vector>

#include "smot/annotation_io.hpp"
#include "smot/core_model.hpp"

namespace smot {

// ---------------------------------------------------------------------------
// Caption grammar: "<name> ::= alt | alt" rules, '#' comments.
// ---------------------------------------------------------------------------

class CaptionGrammar {
 public:
  // Throws Error{SYNTAX}.
  static CaptionGrammar parse(std::string_view text);
  // The grammar shipped in data/caption_grammar.txt.
  static const CaptionGrammar& builtin();

  // Expands <symbol>. Nonterminals found in `bound` are substituted
  // verbatim; the others are expanded from rules, choosing alternatives with
  // draws (seed, stream, 0), (seed, stream, 1), ...
  // Throws Error{INVALID_ARGUMENT} on an unknown symbol.
  std::string expand(const std::string& symbol,
                     const std::map<std::string, std::string>& bound,
                     std::uint64_t seed, std::uint64_t stream) const;

  bool has_rule(const std::string& symbol) const;

 private:
  std::map<std::string, std::vector<std::vector<std::string>>> rules_;
};

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

// Explicit constant-velocity motion of one target (pixels, pixels/frame).
struct TargetMotion {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
};

struct ScenarioConfig {
  std::uint64_t seed = 0;
  std::string video_id = "synth_0000";
  int frame_count = 100;
  double fps = 10.0;
  int width = 1280;
  int height = 720;
  int target_count = 5;
  double box_width = 48.0;
  double box_height = 96.0;
  double max_speed = 4.0;  // pixels per frame along each axis
  // Empty: drawn from the seed. Otherwise one entry per target.
  std::vector<TargetMotion> motions;
  // Empty: drawn from the seed.
  std::string scene;
  // Scripted triplets over the generated ids (t001, t002, ...).
  std::vector<InteractionTriplet> interactions;
  // Additional distinct triplets drawn from the sample vocabulary.
  int random_interactions = 0;
  double detection_score = 0.95;
};

struct Scenario {
  VideoAnnotation ground_truth;
  DetectionsByFrame detections;
  std::string scene;
};

// Coordinates are multiples of 1/64 px so text round trips are exact.
// Throws Error{INFEASIBLE_MOTION | INVALID_ARGUMENT}.
Scenario generate_scenario(const ScenarioConfig& cfg);

// Track id of the i-th generated target (0-based): "t001", ...
std::string synth_track_id(int index);

// ---------------------------------------------------------------------------
// Perturbations
// ---------------------------------------------------------------------------

struct BoxRef {
  TrackId track;
  int frame = 0;
};

// From `frame` onward the predicted ids of tracks a and b are exchanged.
struct IdSwap {
  int frame = 0;
  TrackId a;
  TrackId b;
};

struct PerturbationConfig {
  std::uint64_t seed = 0;
  std::vector<BoxRef> drop_boxes;
  double drop_rate = 0.0;
  double jitter_px = 0.0;
  // Probability of one spurious box per frame.
  double fp_rate = 0.0;
  std::vector<IdSwap> id_swaps;
  double caption_word_drop = 0.0;
};

struct PerturbationCounts {
  std::int64_t boxes_dropped = 0;
  std::int64_t false_positives = 0;
  std::int64_t swaps_applied = 0;
  std::int64_t boxes_jittered = 0;
  std::int64_t caption_words_dropped = 0;

  friend bool operator==(const PerturbationCounts&,
                         const PerturbationCounts&) = default;
};

struct Perturbed {
  VideoAnnotation prediction;
  PerturbationCounts counts;
};

// Order: drops (addressed by ground-truth id), id swaps, jitter, spurious
// boxes, caption word drops. Tracks left without points are removed with
// their captions and interactions. Throws Error{INVALID_ARGUMENT} on rates
// outside [0, 1].
Perturbed perturb(const VideoAnnotation& gt, const PerturbationConfig& p);

// ---------------------------------------------------------------------------
// Datasets on disk
// ---------------------------------------------------------------------------

struct DatasetConfig {
  std::string prefix = "synth";
  int videos = 10;
  double train_fraction = 0.7;
  ScenarioConfig scenario;  // seed is mixed with the video index
  PerturbationConfig perturbation;
  bool write_predictions = true;
};

// Throws Error{SYNTAX | SCHEMA | RANGE}.
DatasetConfig parse_dataset_config(std::string_view json_text);

struct DatasetSummary {
  std::filesystem::path manifest;
  std::vector<std::string> video_ids;
  PerturbationCounts counts;
};

// Writes annotations/<id>.json, detections/<id>.txt, predictions/<id>.pred
// and manifest.tsv under `out_dir`.
DatasetSummary write_synthetic_dataset(const DatasetConfig& cfg,
                                       const std::filesystem::path& out_dir);

}  // namespace smot
