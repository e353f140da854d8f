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
#include <optional>
#include <vector>

#include "smot/core_model.hpp"

namespace smot {

inline constexpr double kDefaultIouThreshold = 0.5;

// 0.05, 0.10, ..., 0.95
std::vector<double> default_hota_alphas();

// ---------------------------------------------------------------------------
// CLEAR
// ---------------------------------------------------------------------------

struct ClearCounts {
  std::int64_t gt_boxes = 0;
  std::int64_t pred_boxes = 0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t idsw = 0;

  // Empty when there are no ground-truth boxes.
  std::optional<double> mota() const;

  ClearCounts& operator+=(const ClearCounts& o);
  friend bool operator==(const ClearCounts&, const ClearCounts&) = default;
};

ClearCounts clear_counts(const std::vector<Trajectory>& gt,
                         const std::vector<Trajectory>& pred,
                         double iou_thresh = kDefaultIouThreshold);

struct ClearScores {
  double mota = 0.0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t idsw = 0;
  std::int64_t gt_boxes = 0;
};

// Throws Error{EMPTY_GT} when the ground truth holds no boxes.
ClearScores clear_metrics(const VideoAnnotation& gt,
                          const std::vector<Trajectory>& pred,
                          double iou_thresh = kDefaultIouThreshold);

// ---------------------------------------------------------------------------
// Identity metrics and the track-level correspondence
// ---------------------------------------------------------------------------

struct IdCounts {
  std::int64_t idtp = 0;
  std::int64_t idfp = 0;
  std::int64_t idfn = 0;

  // Each rate is 0 when its denominator is 0.
  double idp() const;
  double idr() const;
  double idf1() const;

  IdCounts& operator+=(const IdCounts& o);
  friend bool operator==(const IdCounts&, const IdCounts&) = default;
};

struct CorrespondencePair {
  TrackId gt;
  TrackId pred;
  std::int64_t overlap = 0;  // frames with IoU >= threshold

  friend bool operator==(const CorrespondencePair&,
                         const CorrespondencePair&) = default;
};

// Partial bijection between ground-truth and predicted tracks, sorted by gt.
struct TrajectoryCorrespondence {
  std::vector<CorrespondencePair> pairs;

  const TrackId* pred_for(const TrackId& gt) const;
  const TrackId* gt_for(const TrackId& pred) const;
};

struct IdResult {
  IdCounts counts;
  TrajectoryCorrespondence correspondence;
};

IdResult id_counts(const std::vector<Trajectory>& gt,
                   const std::vector<Trajectory>& pred,
                   double iou_thresh = kDefaultIouThreshold);

struct IdScores {
  double idp = 0.0;
  double idr = 0.0;
  double idf1 = 0.0;
  IdCounts counts;
  TrajectoryCorrespondence correspondence;
};

// Throws Error{EMPTY_GT}.
IdScores id_metrics(const VideoAnnotation& gt,
                    const std::vector<Trajectory>& pred,
                    double iou_thresh = kDefaultIouThreshold);

// ---------------------------------------------------------------------------
// HOTA
// ---------------------------------------------------------------------------

struct HotaAlphaCounts {
  std::int64_t tp = 0;
  std::int64_t fn = 0;
  std::int64_t fp = 0;
  double ass_sum = 0.0;  // sum over true positives of their association score
  double loc_sum = 0.0;  // sum over true positives of their IoU

  friend bool operator==(const HotaAlphaCounts&,
                         const HotaAlphaCounts&) = default;
};

struct HotaScores {
  double hota = 0.0;
  double deta = 0.0;
  double assa = 0.0;
  double loca = 0.0;
};

struct HotaCounts {
  std::vector<double> alphas;
  std::vector<HotaAlphaCounts> per_alpha;

  // Throws Error{DIM_MISMATCH} when the alpha lists differ.
  HotaCounts& operator+=(const HotaCounts& o);
  HotaScores scores() const;
  friend bool operator==(const HotaCounts&, const HotaCounts&) = default;
};

HotaCounts hota_counts(const std::vector<Trajectory>& gt,
                       const std::vector<Trajectory>& pred,
                       const std::vector<double>& alphas = default_hota_alphas());

// Throws Error{EMPTY_GT}.
HotaScores hota_metrics(const VideoAnnotation& gt,
                        const std::vector<Trajectory>& pred,
                        const std::vector<double>& alphas = default_hota_alphas());

// ---------------------------------------------------------------------------
// Combined tracking evaluation with poolable counts
// ---------------------------------------------------------------------------

struct TrackingOptions {
  double iou_thresh = kDefaultIouThreshold;
  std::vector<double> alphas = default_hota_alphas();
};

struct TrackingScores {
  bool empty_gt = false;  // MOTA undefined; rates reported as 0
  double hota = 0.0;
  double deta = 0.0;
  double assa = 0.0;
  double loca = 0.0;
  double mota = 0.0;
  double idf1 = 0.0;
  double idp = 0.0;
  double idr = 0.0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t idsw = 0;
  std::int64_t gt_boxes = 0;
};

struct TrackingCounts {
  ClearCounts clear;
  IdCounts id;
  HotaCounts hota;

  TrackingCounts& operator+=(const TrackingCounts& o);
  TrackingScores scores() const;
};

struct TrackingEvaluation {
  TrackingCounts counts;
  TrajectoryCorrespondence correspondence;
};

TrackingEvaluation evaluate_tracking(const std::vector<Trajectory>& gt,
                                     const std::vector<Trajectory>& pred,
                                     const TrackingOptions& options = {});

}  // namespace smot
