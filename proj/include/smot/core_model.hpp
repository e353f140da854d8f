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

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace smot {

// Axis-aligned box in continuous pixel coordinates: top-left corner + size.
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double area() const { return w * h; }
  bool valid() const { return w > 0.0 && h > 0.0; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// Intersection over union. Returns 0 for disjoint boxes.
double iou(const BoundingBox& a, const BoundingBox& b);

struct Detection {
  int frame = 0;  // 0-based
  BoundingBox box;
  double score = 0.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct TrackPoint {
  int frame = 0;  // 0-based
  BoundingBox box;

  friend bool operator==(const TrackPoint&, const TrackPoint&) = default;
};

using TrackId = std::string;

struct Trajectory {
  TrackId track_id;
  std::vector<TrackPoint> points;  // strictly increasing frame

  const TrackPoint* find(int frame) const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct InteractionSense {
  std::string lemma;
  int sense = 1;

  // "hold(v.01)"
  std::string to_string() const;

  friend auto operator<=>(const InteractionSense&,
                          const InteractionSense&) = default;
};

struct InteractionTriplet {
  TrackId subject;
  InteractionSense predicate;
  TrackId object;

  friend auto operator<=>(const InteractionTriplet&,
                          const InteractionTriplet&) = default;
};

struct VideoAnnotation {
  std::string video_id;
  int width = 0;
  int height = 0;
  int frame_count = 0;
  std::optional<double> fps;
  std::vector<Trajectory> trajectories;
  std::map<TrackId, std::string> instance_captions;
  std::vector<InteractionTriplet> interactions;
  std::string video_caption;

  const Trajectory* find_track(const TrackId& id) const;
  std::size_t box_count() const;

  friend bool operator==(const VideoAnnotation&,
                         const VideoAnnotation&) = default;
};

// Configured set of admissible interaction senses.
class InteractionVocabulary {
 public:
  struct Entry {
    InteractionSense sense;
    std::string gloss;
  };

  InteractionVocabulary() = default;
  explicit InteractionVocabulary(std::vector<Entry> entries);

  bool contains(const InteractionSense& sense) const;
  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }
  // Position of `sense` in file order, or -1.
  int index_of(const InteractionSense& sense) const;

 private:
  std::vector<Entry> entries_;
};

enum class Severity { kError, kWarning };

struct Finding {
  Severity severity = Severity::kError;
  std::string code;
  std::string location;
  std::string message;

  friend bool operator==(const Finding&, const Finding&) = default;
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool empty() const { return findings.empty(); }
  bool has_errors() const;
  std::size_t error_count() const;

  friend bool operator==(const ValidationReport&,
                         const ValidationReport&) = default;
};

// Ground truth must caption every track; predictions may omit captions.
enum class AnnotationKind { kGroundTruth, kPrediction };

struct ValidationOptions {
  AnnotationKind kind = AnnotationKind::kGroundTruth;
  // When set, every interaction predicate must be a member.
  const InteractionVocabulary* vocabulary = nullptr;
};

// Reports every violated invariant; never throws. Findings are ordered by
// location, then code.
ValidationReport validate_annotation(const VideoAnnotation& ann,
                                     const ValidationOptions& options = {});

}  // namespace smot
