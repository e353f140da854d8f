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

#include "smot/core_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>
#include <tuple>

#include "smot/error.hpp"

namespace smot {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSyntax: return "SYNTAX";
    case ErrorCode::kSchema: return "SCHEMA";
    case ErrorCode::kRange: return "RANGE";
    case ErrorCode::kIo: return "IO";
    case ErrorCode::kMissingFile: return "MISSING_FILE";
    case ErrorCode::kInvalidAnnotation: return "INVALID_ANNOTATION";
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kFrameOrder: return "FRAME_ORDER";
    case ErrorCode::kNumeric: return "NUMERIC";
    case ErrorCode::kDimMismatch: return "DIM_MISMATCH";
    case ErrorCode::kEmptyInput: return "EMPTY_INPUT";
    case ErrorCode::kLabelRange: return "LABEL_RANGE";
    case ErrorCode::kInfeasibleMotion: return "INFEASIBLE_MOTION";
    case ErrorCode::kEmptyGroundTruth: return "EMPTY_GT";
    case ErrorCode::kEmptyCorpus: return "EMPTY_CORPUS";
    case ErrorCode::kEmptyReference: return "EMPTY_REFERENCE";
    case ErrorCode::kNegativeSize: return "NEGATIVE_SIZE";
    case ErrorCode::kEmptyGrid: return "EMPTY_GRID";
    case ErrorCode::kInternal: return "INTERNAL";
  }
  return "UNKNOWN";
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

const TrackPoint* Trajectory::find(int frame) const {
  auto it = std::lower_bound(
      points.begin(), points.end(), frame,
      [](const TrackPoint& p, int f) { return p.frame < f; });
  if (it == points.end() || it->frame != frame) return nullptr;
  return &*it;
}

std::string InteractionSense::to_string() const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "(v.%02d)", sense);
  return lemma + buf;
}

const Trajectory* VideoAnnotation::find_track(const TrackId& id) const {
  for (const auto& t : trajectories) {
    if (t.track_id == id) return &t;
  }
  return nullptr;
}

std::size_t VideoAnnotation::box_count() const {
  std::size_t n = 0;
  for (const auto& t : trajectories) n += t.points.size();
  return n;
}

InteractionVocabulary::InteractionVocabulary(std::vector<Entry> entries)
    : entries_(std::move(entries)) {}

bool InteractionVocabulary::contains(const InteractionSense& sense) const {
  return index_of(sense) >= 0;
}

int InteractionVocabulary::index_of(const InteractionSense& sense) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].sense == sense) return static_cast<int>(i);
  }
  return -1;
}

bool ValidationReport::has_errors() const { return error_count() > 0; }

std::size_t ValidationReport::error_count() const {
  return static_cast<std::size_t>(
      std::count_if(findings.begin(), findings.end(), [](const Finding& f) {
        return f.severity == Severity::kError;
      }));
}

namespace {

// Absorbs rounding in coordinates that were written with 6 decimals.
constexpr double kBoundsSlack = 1e-6;

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

class Collector {
 public:
  void error(std::string code, std::string location, std::string message) {
    add(Severity::kError, std::move(code), std::move(location),
        std::move(message));
  }
  void warning(std::string code, std::string location, std::string message) {
    add(Severity::kWarning, std::move(code), std::move(location),
        std::move(message));
  }

  ValidationReport finish() && {
    std::stable_sort(report_.findings.begin(), report_.findings.end(),
                     [](const Finding& a, const Finding& b) {
                       return std::tie(a.location, a.code) <
                              std::tie(b.location, b.code);
                     });
    return std::move(report_);
  }

 private:
  void add(Severity s, std::string code, std::string location,
           std::string message) {
    report_.findings.push_back(
        {s, std::move(code), std::move(location), std::move(message)});
  }

  ValidationReport report_;
};

std::string track_location(const Trajectory& t) {
  return "trajectories[" + t.track_id + "]";
}

void check_box(const VideoAnnotation& ann, const BoundingBox& b,
               const std::string& where, Collector& out) {
  const bool finite = std::isfinite(b.x) && std::isfinite(b.y) &&
                      std::isfinite(b.w) && std::isfinite(b.h);
  if (!finite) {
    out.error("NON_FINITE_BOX", where, "box has a non-finite coordinate");
    return;
  }
  if (!b.valid()) {
    out.error("NON_POSITIVE_SIZE", where, "box width and height must be > 0");
    return;
  }
  if (ann.width <= 0 || ann.height <= 0) return;  // reported elsewhere
  if (b.x < -kBoundsSlack || b.y < -kBoundsSlack ||
      b.right() > ann.width + kBoundsSlack ||
      b.bottom() > ann.height + kBoundsSlack) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "box (%.3f,%.3f,%.3f,%.3f) exceeds frame %dx%d", b.x, b.y,
                  b.w, b.h, ann.width, ann.height);
    out.error("BOX_OUT_OF_BOUNDS", where, buf);
  }
}

}  // namespace

ValidationReport validate_annotation(const VideoAnnotation& ann,
                                     const ValidationOptions& options) {
  Collector out;
  const bool gt = options.kind == AnnotationKind::kGroundTruth;

  if (ann.video_id.empty()) {
    out.error("EMPTY_VIDEO_ID", "video_id", "video_id must be non-empty");
  }
  if (ann.width <= 0 || ann.height <= 0) {
    out.error("BAD_DIMENSIONS", "width", "video width and height must be > 0");
  }
  if (ann.frame_count <= 0) {
    out.error("BAD_FRAME_COUNT", "frame_count", "frame_count must be > 0");
  }
  if (ann.fps && !(*ann.fps > 0.0 && std::isfinite(*ann.fps))) {
    out.error("BAD_FPS", "fps", "fps must be a positive number");
  }
  if (gt && ann.trajectories.empty()) {
    out.warning("NO_TRACKS", "trajectories", "annotation has no trajectories");
  }

  std::set<TrackId> ids;
  for (const auto& t : ann.trajectories) {
    const std::string loc = track_location(t);
    if (t.track_id.empty()) {
      out.error("EMPTY_TRACK_ID", loc, "track_id must be non-empty");
    }
    if (!ids.insert(t.track_id).second) {
      out.error("DUPLICATE_TRACK_ID", loc, "track_id '" + t.track_id +
                                               "' appears more than once");
    }
    if (t.points.empty()) {
      out.error("EMPTY_TRAJECTORY", loc, "trajectory has no points");
    }
    for (std::size_t i = 0; i < t.points.size(); ++i) {
      const auto& p = t.points[i];
      const std::string where = loc + ".points[" + std::to_string(i) + "]";
      if (i > 0 && p.frame <= t.points[i - 1].frame) {
        out.error("FRAME_ORDER", where,
                  "frame indices must be strictly increasing");
      }
      if (p.frame < 0 || (ann.frame_count > 0 && p.frame >= ann.frame_count)) {
        out.error("FRAME_OUT_OF_RANGE", where,
                  "frame " + std::to_string(p.frame) + " outside [0, " +
                      std::to_string(ann.frame_count) + ")");
      }
      check_box(ann, p.box, where, out);
    }
    auto cap = ann.instance_captions.find(t.track_id);
    if (cap == ann.instance_captions.end()) {
      if (gt) {
        out.error("MISSING_CAPTION", loc, "track has no instance caption");
      }
    } else if (is_blank(cap->second)) {
      out.warning("EMPTY_CAPTION", "instance_captions[" + t.track_id + "]",
                  "instance caption is empty");
    }
  }

  for (const auto& [id, text] : ann.instance_captions) {
    if (!ids.count(id)) {
      out.error("ORPHAN_CAPTION", "instance_captions[" + id + "]",
                "caption refers to an unknown track");
    }
  }

  std::set<InteractionTriplet> seen;
  for (std::size_t i = 0; i < ann.interactions.size(); ++i) {
    const auto& r = ann.interactions[i];
    const std::string loc = "interactions[" + std::to_string(i) + "]";
    if (r.subject == r.object) {
      out.error("SELF_INTERACTION", loc,
                "subject and object are the same track '" + r.subject + "'");
    }
    if (!ids.count(r.subject)) {
      out.error("UNRESOLVED_TRACK", loc,
                "subject '" + r.subject + "' is not a trajectory");
    }
    if (!ids.count(r.object)) {
      out.error("UNRESOLVED_TRACK", loc,
                "object '" + r.object + "' is not a trajectory");
    }
    if (r.predicate.lemma.empty() || r.predicate.sense < 1) {
      out.error("BAD_PREDICATE", loc,
                "predicate needs a lemma and a positive sense index");
    } else if (options.vocabulary &&
               !options.vocabulary->contains(r.predicate)) {
      out.error("UNKNOWN_PREDICATE", loc,
                r.predicate.to_string() + " is not in the vocabulary");
    }
    if (!seen.insert(r).second) {
      out.warning("DUPLICATE_INTERACTION", loc,
                  "identical triplet appears more than once");
    }
  }

  if (is_blank(ann.video_caption)) {
    out.warning("EMPTY_CAPTION", "video_caption", "video caption is empty");
  }

  return std::move(out).finish();
}

}  // namespace smot
