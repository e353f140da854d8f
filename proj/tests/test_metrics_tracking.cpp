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

#include <cmath>

#include <gtest/gtest.h>

#include "smot/error.hpp"
#include "smot/metrics_tracking.hpp"
#include "support/oracles.hpp"

namespace smot {
namespace {

using oracle::straight_track;

std::vector<Trajectory> two_tracks() {
  return {straight_track("g1", 0, 9, 10, 10, 2, 0), straight_track("g2", 0, 9, 300, 10, 2, 0)};
}

TEST(TrackingMetrics, IdentityPredictionIsPerfect) {
  const auto gt = two_tracks();
  const auto s = evaluate_tracking(gt, gt).counts.scores();
  EXPECT_DOUBLE_EQ(s.mota, 1.0);
  EXPECT_DOUBLE_EQ(s.idf1, 1.0);
  EXPECT_DOUBLE_EQ(s.hota, 1.0);
  EXPECT_DOUBLE_EQ(s.loca, 1.0);
  EXPECT_EQ(s.idsw, 0);
  EXPECT_EQ(s.fp + s.fn, 0);
}

TEST(TrackingMetrics, OmittedTrackCountsAsMisses) {
  const auto gt = two_tracks();
  const auto c = clear_counts(gt, {gt[0]});
  EXPECT_EQ(c.fn, 10);
  EXPECT_EQ(c.fp, 0);
  EXPECT_DOUBLE_EQ(*c.mota(), 0.5);
  const auto id = id_counts(gt, {gt[0]}).counts;
  EXPECT_DOUBLE_EQ(id.idp(), 1.0);
  EXPECT_DOUBLE_EQ(id.idr(), 0.5);
}

TEST(TrackingMetrics, MidpointSwap) {
  const auto fx = oracle::midpoint_swap_fixture();
  const auto c = clear_counts(fx.gt, fx.pred);
  EXPECT_EQ(c.idsw, 2);
  EXPECT_DOUBLE_EQ(*c.mota(), 0.9);
  const auto id = id_counts(fx.gt, fx.pred);
  EXPECT_EQ(id.counts.idtp, 10);
  EXPECT_DOUBLE_EQ(id.counts.idf1(), 0.5);
  EXPECT_EQ(id.correspondence.pairs.size(), 2u);
}

TEST(TrackingMetrics, SplitTrack) {
  const auto fx = oracle::split_track_fixture();
  const auto h = hota_counts(fx.gt, fx.pred).scores();
  EXPECT_NEAR(h.deta, 1.0, 1e-12);
  EXPECT_NEAR(h.assa, 0.5, 1e-12);
  EXPECT_NEAR(h.hota, std::sqrt(0.5), 1e-12);
  EXPECT_EQ(clear_counts(fx.gt, fx.pred).idsw, 1);
}

TEST(TrackingMetrics, EmptyPrediction) {
  const auto gt = two_tracks();
  const auto s = evaluate_tracking(gt, {}).counts.scores();
  EXPECT_EQ(s.hota, 0.0);
  EXPECT_EQ(s.fn, 20);
  EXPECT_DOUBLE_EQ(s.mota, 0.0);
  EXPECT_DOUBLE_EQ(s.loca, 1.0);
}

TEST(TrackingMetrics, EmptyGroundTruth) {
  VideoAnnotation empty;
  empty.width = empty.height = 100;
  empty.frame_count = 10;
  EXPECT_THROW(clear_metrics(empty, two_tracks()), Error);
  const auto s = evaluate_tracking({}, two_tracks()).counts.scores();
  EXPECT_TRUE(s.empty_gt);
  EXPECT_EQ(s.fp, 20);
}

TEST(TrackingMetrics, ThresholdControlsMatching) {
  const std::vector<Trajectory> gt = {straight_track("g", 0, 4, 0, 0, 0, 0, 10, 10)};
  const std::vector<Trajectory> pred = {straight_track("p", 0, 4, 5, 0, 0, 0, 10, 10)};
  // IoU is 1/3 everywhere.
  EXPECT_EQ(clear_counts(gt, pred, 0.5).tp, 0);
  EXPECT_EQ(clear_counts(gt, pred, 0.3).tp, 5);
}

TEST(TrackingMetrics, PooledCountsAreAdditive) {
  const CounterRng rng(41, 0);
  std::uint64_t k = 0;
  auto random_tracks = [&](const std::string& prefix) {
    std::vector<Trajectory> out;
    const int n = 1 + static_cast<int>(rng.bits(k++) % 4);
    for (int i = 0; i < n; ++i) {
      const int first = static_cast<int>(rng.bits(k++) % 10);
      const int last = first + static_cast<int>(rng.bits(k++) % 15);
      const double x0 = rng.uniform(k++, 0, 80);
      const double y0 = rng.uniform(k++, 0, 80);
      const double vx = rng.uniform(k++, -3, 3);
      out.push_back(straight_track(prefix + std::to_string(i), first, last, x0, y0, vx, 0, 30, 30));
    }
    return out;
  };
  for (int trial = 0; trial < 50; ++trial) {
    const auto g1 = random_tracks("a"), p1 = random_tracks("p");
    const auto g2 = random_tracks("b"), p2 = random_tracks("q");
    auto pooled = evaluate_tracking(g1, p1).counts;
    pooled += evaluate_tracking(g2, p2).counts;
    const auto a = evaluate_tracking(g1, p1).counts;
    const auto b = evaluate_tracking(g2, p2).counts;
    EXPECT_EQ(pooled.clear.tp, a.clear.tp + b.clear.tp);
    EXPECT_EQ(pooled.clear.idsw, a.clear.idsw + b.clear.idsw);
    EXPECT_EQ(pooled.id.idtp, a.id.idtp + b.id.idtp);
    for (std::size_t i = 0; i < pooled.hota.per_alpha.size(); ++i) {
      EXPECT_EQ(pooled.hota.per_alpha[i].tp, a.hota.per_alpha[i].tp + b.hota.per_alpha[i].tp);
    }
    const auto s = pooled.scores();
    EXPECT_GE(s.hota, 0.0);
    EXPECT_LE(s.hota, 1.0);
    EXPECT_LE(s.mota, 1.0);
    EXPECT_LE(s.idf1, 1.0);
  }
}

TEST(TrackingMetrics, MismatchedAlphasRejected) {
  HotaCounts a = hota_counts({}, {}, {0.5});
  const HotaCounts b = hota_counts({}, {}, {0.5, 0.6});
  try {
    a += b;
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimMismatch);
  }
}

}  // namespace
}  // namespace smot
