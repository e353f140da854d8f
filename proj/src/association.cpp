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

#include "smot/association.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "smot/assignment.hpp"
#include "smot/error.hpp"

namespace smot {

std::vector<Detection> filter_proposals(const std::vector<Detection>& dets,
                                        double tau_p) {
  std::vector<Detection> out;
  out.reserve(dets.size());
  for (const auto& d : dets) {
    if (d.score >= tau_p) out.push_back(d);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kalman filter
// ---------------------------------------------------------------------------

namespace {

using MeasVector = Eigen::Matrix<double, 4, 1>;
using MeasCovariance = Eigen::Matrix<double, 4, 4>;
using Gain = Eigen::Matrix<double, 8, 4>;
using Observation = Eigen::Matrix<double, 4, 8>;

MeasVector measure(const BoundingBox& b) {
  MeasVector z;
  z << b.x + b.w / 2.0, b.y + b.h / 2.0, b.w / b.h, b.h;
  return z;
}

StateCovariance symmetrized(const StateCovariance& p) {
  return 0.5 * (p + p.transpose());
}

Observation observation() {
  Observation h = Observation::Zero();
  for (int i = 0; i < 4; ++i) h(i, i) = 1.0;
  return h;
}

}  // namespace

BoundingBox KalmanState::box() const {
  const double h = mean(3);
  const double w = mean(2) * h;
  return {mean(0) - w / 2.0, mean(1) - h / 2.0, w, h};
}

KalmanState kalman_init(const BoundingBox& box, const KalmanNoise& noise) {
  KalmanState s;
  s.mean.head<4>() = measure(box);
  const double h = box.h;
  const double p = noise.position_weight * h;
  const double v = noise.velocity_weight * h;
  StateVector sigma;
  sigma << 2 * p, 2 * p, 1e-2, 2 * p, 10 * v, 10 * v, 1e-5, 10 * v;
  sigma *= noise.init_scale;
  s.covariance = sigma.array().square().matrix().asDiagonal();
  return s;
}

KalmanState kalman_predict(const KalmanState& state, const KalmanNoise& noise) {
  StateCovariance f = StateCovariance::Identity();
  for (int i = 0; i < 4; ++i) f(i, i + 4) = 1.0;

  const double h = state.mean(3);
  const double p = noise.position_weight * h;
  const double v = noise.velocity_weight * h;
  StateVector sigma;
  sigma << p, p, 1e-2, p, v, v, 1e-5, v;
  sigma *= noise.process_scale;
  const StateCovariance q = sigma.array().square().matrix().asDiagonal();

  KalmanState out;
  out.mean = f * state.mean;
  out.covariance = symmetrized(f * state.covariance * f.transpose() + q);
  return out;
}

KalmanState kalman_update(const KalmanState& state, const BoundingBox& box,
                          const KalmanNoise& noise) {
  const Observation hm = observation();
  const MeasVector z = measure(box);

  const double h = state.mean(3);
  MeasVector sigma;
  sigma << noise.position_weight * h, noise.position_weight * h, 1e-1,
      noise.position_weight * h;
  sigma *= noise.measurement_scale;
  const MeasCovariance r = sigma.array().square().matrix().asDiagonal();

  MeasCovariance s = hm * state.covariance * hm.transpose() + r;
  s = 0.5 * (s + s.transpose());
  const MeasVector innovation = z - hm * state.mean;

  // Pseudo-inverse through the eigen-decomposition so that exactly
  // determined states (zero covariance) still accept consistent boxes.
  Eigen::SelfAdjointEigenSolver<MeasCovariance> eig(s);
  const MeasVector lambda = eig.eigenvalues();
  const MeasCovariance vecs = eig.eigenvectors();
  const double tol = 1e-12 * std::max(1.0, lambda.cwiseAbs().maxCoeff());
  MeasVector inv_lambda = MeasVector::Zero();
  double null_residual = 0.0;
  for (int i = 0; i < 4; ++i) {
    if (lambda(i) > tol) {
      inv_lambda(i) = 1.0 / lambda(i);
    } else {
      const double c = vecs.col(i).dot(innovation);
      null_residual += c * c;
    }
  }
  if (!std::isfinite(lambda.sum()) ||
      std::sqrt(null_residual) > 1e-6 * std::max(1.0, z.cwiseAbs().maxCoeff())) {
    fail(ErrorCode::kNumeric, "innovation covariance is not invertible");
  }
  const MeasCovariance s_inv = vecs * inv_lambda.asDiagonal() * vecs.transpose();

  const Gain k = state.covariance * hm.transpose() * s_inv;
  KalmanState out;
  out.mean = state.mean + k * innovation;
  const StateCovariance a = StateCovariance::Identity() - k * hm;
  out.covariance = symmetrized(a * state.covariance * a.transpose() +
                               k * r * k.transpose());
  // A valid measurement must leave a valid box behind.
  if (!(out.mean(3) > 0.0)) out.mean(3) = z(3);
  if (!(out.mean(2) > 0.0)) out.mean(2) = z(2);
  return out;
}

// ---------------------------------------------------------------------------
// Tracker
// ---------------------------------------------------------------------------

std::string_view algorithm_name(Algorithm a) {
  return a == Algorithm::kByte ? "byte" : "sort";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "byte") return Algorithm::kByte;
  if (name == "sort") return Algorithm::kSort;
  fail(ErrorCode::kInvalidArgument,
       "unknown algorithm '" + std::string(name) + "' (expected byte|sort)");
}

void validate_config(const TrackerConfig& cfg) {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(cfg.tau_p) || !unit(cfg.tau_high) || cfg.tau_p > cfg.tau_high) {
    fail(ErrorCode::kInvalidArgument,
         "thresholds must satisfy 0 <= tau_p <= tau_high <= 1");
  }
  if (!unit(cfg.iou_gate)) {
    fail(ErrorCode::kInvalidArgument, "iou_gate must lie in [0, 1]");
  }
  if (cfg.max_lost < 0) {
    fail(ErrorCode::kInvalidArgument, "max_lost must be non-negative");
  }
  if (cfg.low_score_floor &&
      (!unit(*cfg.low_score_floor) || *cfg.low_score_floor > cfg.tau_high)) {
    fail(ErrorCode::kInvalidArgument,
         "low_score_floor must lie in [0, tau_high]");
  }
  if (cfg.min_points < 1) {
    fail(ErrorCode::kInvalidArgument, "min_points must be at least 1");
  }
}

namespace {

// Gated 1 - IoU matching of the listed tracks against the listed detections.
// Returns (track index, detection index) pairs in state/detection indices.
std::vector<std::pair<std::size_t, std::size_t>> match(
    const TrackerState& state, const std::vector<std::size_t>& tracks,
    const std::vector<Detection>& dets, const std::vector<std::size_t>& cols,
    double gate) {
  if (tracks.empty() || cols.empty()) return {};
  CostMatrix cost(tracks.size(), cols.size(), 1.0);
  for (std::size_t r = 0; r < tracks.size(); ++r) {
    const BoundingBox predicted = state.tracks[tracks[r]].kalman.box();
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const double overlap = iou(predicted, dets[cols[c]].box);
      cost(r, c) = 1.0 - overlap;
      if (overlap < gate) cost.forbid(r, c);
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& [r, c] : hungarian_assign(cost)) {
    out.emplace_back(tracks[r], cols[c]);
  }
  return out;
}

TrackerState step(TrackerState state, int frame,
                  const std::vector<Detection>& dets, const TrackerConfig& cfg,
                  bool two_stage) {
  validate_config(cfg);
  if (state.last_frame && frame <= *state.last_frame) {
    fail(ErrorCode::kFrameOrder,
         "frame " + std::to_string(frame) + " does not follow frame " +
             std::to_string(*state.last_frame));
  }
  for (const auto& d : dets) {
    if (d.frame != frame) {
      fail(ErrorCode::kInvalidArgument,
           "detection frame " + std::to_string(d.frame) +
               " differs from step frame " + std::to_string(frame));
    }
    if (!d.box.valid()) fail(ErrorCode::kNegativeSize, "detection box size");
  }

  const int elapsed = state.last_frame ? frame - *state.last_frame : 1;
  for (auto& t : state.tracks) {
    if (t.lifecycle == Lifecycle::kRemoved) continue;
    for (int i = 0; i < elapsed; ++i) {
      if (t.lifecycle != Lifecycle::kActive) t.kalman.mean(7) = 0.0;
      t.kalman = kalman_predict(t.kalman, cfg.noise);
    }
  }

  const double split = two_stage ? cfg.tau_high : cfg.tau_p;
  const double floor = cfg.low_score_floor.value_or(cfg.tau_p);
  std::vector<std::size_t> high, low;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (dets[i].score >= split) {
      high.push_back(i);
    } else if (two_stage && dets[i].score >= floor) {
      low.push_back(i);
    }
  }

  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < state.tracks.size(); ++i) {
    if (state.tracks[i].lifecycle != Lifecycle::kRemoved) pool.push_back(i);
  }

  std::vector<char> track_hit(state.tracks.size(), 0);
  std::vector<char> det_hit(dets.size(), 0);
  auto accept = [&](std::size_t ti, std::size_t di) {
    TrackHandle& t = state.tracks[ti];
    t.kalman = kalman_update(t.kalman, dets[di].box, cfg.noise);
    t.history.push_back({frame, dets[di].box});
    t.lifecycle = Lifecycle::kActive;
    t.frames_since_seen = 0;
    track_hit[ti] = 1;
    det_hit[di] = 1;
  };

  for (const auto& [ti, di] : match(state, pool, dets, high, cfg.iou_gate)) {
    accept(ti, di);
  }

  if (two_stage) {
    std::vector<std::size_t> remaining;
    for (std::size_t ti : pool) {
      if (!track_hit[ti] && state.tracks[ti].lifecycle == Lifecycle::kActive) {
        remaining.push_back(ti);
      }
    }
    for (const auto& [ti, di] : match(state, remaining, dets, low, cfg.iou_gate)) {
      accept(ti, di);
    }
  }

  for (std::size_t ti : pool) {
    if (track_hit[ti]) continue;
    TrackHandle& t = state.tracks[ti];
    t.frames_since_seen = frame - t.history.back().frame;
    t.lifecycle = t.frames_since_seen > cfg.max_lost ? Lifecycle::kRemoved
                                                     : Lifecycle::kLost;
  }

  for (std::size_t di : high) {
    if (det_hit[di]) continue;
    TrackHandle t;
    t.track_id = std::to_string(state.next_id++);
    t.kalman = kalman_init(dets[di].box, cfg.noise);
    t.history.push_back({frame, dets[di].box});
    state.tracks.push_back(std::move(t));
  }

  state.last_frame = frame;
  return state;
}

}  // namespace

TrackerState byte_step(TrackerState state, int frame,
                       const std::vector<Detection>& dets,
                       const TrackerConfig& cfg) {
  return step(std::move(state), frame, dets, cfg, true);
}

TrackerState sort_step(TrackerState state, int frame,
                       const std::vector<Detection>& dets,
                       const TrackerConfig& cfg) {
  return step(std::move(state), frame, dets, cfg, false);
}

TrackerState tracker_step(TrackerState state, int frame,
                          const std::vector<Detection>& dets,
                          const TrackerConfig& cfg) {
  return cfg.algorithm == Algorithm::kByte
             ? byte_step(std::move(state), frame, dets, cfg)
             : sort_step(std::move(state), frame, dets, cfg);
}

std::vector<Trajectory> trajectories_of(const TrackerState& state,
                                        int min_points) {
  std::vector<Trajectory> out;
  for (const auto& t : state.tracks) {
    if (static_cast<int>(t.history.size()) < min_points) continue;
    out.push_back({t.track_id, t.history});
  }
  return out;
}

std::vector<Trajectory> run_tracker(const DetectionsByFrame& dets,
                                    const TrackerConfig& cfg) {
  validate_config(cfg);
  if (dets.empty()) return {};
  const int first = dets.begin()->first;
  const int last = dets.rbegin()->first;
  TrackerState state;
  const std::vector<Detection> none;
  for (int frame = first; frame <= last; ++frame) {
    auto it = dets.find(frame);
    const auto& raw = it == dets.end() ? none : it->second;
    state = tracker_step(std::move(state), frame, filter_proposals(raw, cfg.tau_p),
                         cfg);
  }
  return trajectories_of(state, cfg.min_points);
}

}  // namespace smot
