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
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "smot/annotation_io.hpp"
#include "smot/core_model.hpp"

namespace smot {

std::vector<Detection> filter_proposals(const std::vector<Detection>& dets,
                                        double tau_p);

// ---------------------------------------------------------------------------
// Constant-velocity Kalman filter over (cx, cy, aspect, height).
// ---------------------------------------------------------------------------

using StateVector = Eigen::Matrix<double, 8, 1>;
using StateCovariance = Eigen::Matrix<double, 8, 8>;

struct KalmanState {
  StateVector mean = StateVector::Zero();
  StateCovariance covariance = StateCovariance::Zero();

  BoundingBox box() const;
};

// Standard deviations are multiples of the box height. The three scales
// multiply the initial, process and measurement noise separately; setting a
// scale to zero removes that noise source.
struct KalmanNoise {
  double position_weight = 1.0 / 20.0;
  double velocity_weight = 1.0 / 160.0;
  double init_scale = 1.0;
  double process_scale = 1.0;
  double measurement_scale = 1.0;
};

KalmanState kalman_init(const BoundingBox& box, const KalmanNoise& noise = {});
KalmanState kalman_predict(const KalmanState& state,
                           const KalmanNoise& noise = {});
// Throws Error{NUMERIC} when the innovation covariance is singular and the
// innovation does not lie in its range.
KalmanState kalman_update(const KalmanState& state, const BoundingBox& box,
                          const KalmanNoise& noise = {});

// ---------------------------------------------------------------------------
// Tracker
// ---------------------------------------------------------------------------

enum class Algorithm { kByte, kSort };

std::string_view algorithm_name(Algorithm a);
// Throws Error{INVALID_ARGUMENT}.
Algorithm parse_algorithm(std::string_view name);

struct TrackerConfig {
  double tau_p = 0.3;
  double tau_high = 0.6;
  double iou_gate = 0.1;
  int max_lost = 30;
  Algorithm algorithm = Algorithm::kByte;
  // Lower bound of the second BYTE stage; defaults to tau_p.
  std::optional<double> low_score_floor;
  // Trajectories with fewer accepted points are dropped by run_tracker.
  int min_points = 1;
  KalmanNoise noise;
};

// Throws Error{INVALID_ARGUMENT} on inconsistent thresholds.
void validate_config(const TrackerConfig& cfg);

enum class Lifecycle { kActive, kLost, kRemoved };

struct TrackHandle {
  TrackId track_id;
  Lifecycle lifecycle = Lifecycle::kActive;
  int frames_since_seen = 0;
  KalmanState kalman;
  std::vector<TrackPoint> history;
};

struct TrackerState {
  // Creation order. Removed tracks stay here so their history survives.
  std::vector<TrackHandle> tracks;
  std::uint64_t next_id = 1;
  std::optional<int> last_frame;
};

// One frame of two-stage association. Every detection must carry `frame`.
// Throws Error{FRAME_ORDER} when frame <= the last processed frame.
TrackerState byte_step(TrackerState state, int frame,
                       const std::vector<Detection>& dets,
                       const TrackerConfig& cfg);

// Single-stage baseline over every detection >= tau_p.
TrackerState sort_step(TrackerState state, int frame,
                       const std::vector<Detection>& dets,
                       const TrackerConfig& cfg);

// Dispatches on cfg.algorithm.
TrackerState tracker_step(TrackerState state, int frame,
                          const std::vector<Detection>& dets,
                          const TrackerConfig& cfg);

// Filters by tau_p, steps every frame from the first to the last detection
// frame, and returns trajectories in creation order.
std::vector<Trajectory> run_tracker(const DetectionsByFrame& dets,
                                    const TrackerConfig& cfg);

std::vector<Trajectory> trajectories_of(const TrackerState& state,
                                        int min_points = 1);

}  // namespace smot
