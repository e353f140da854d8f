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

#include <gtest/gtest.h>

#include "smot/core_model.hpp"
#include "smot/text.hpp"
#include "support/oracles.hpp"

namespace smot {
namespace {

VideoAnnotation small_video() {
  VideoAnnotation a;
  a.video_id = "v";
  a.width = 100;
  a.height = 100;
  a.frame_count = 10;
  a.fps = 10.0;
  a.trajectories = {{"a", {{0, {0, 0, 10, 10}}, {1, {1, 0, 10, 10}}}},
                    {"b", {{0, {50, 50, 10, 10}}}}};
  a.instance_captions = {{"a", "a man walks"}, {"b", "a woman sits"}};
  a.interactions = {{"a", {"hold", 1}, "b"}};
  a.video_caption = "two people";
  return a;
}

std::vector<std::string> codes(const ValidationReport& r) {
  std::vector<std::string> out;
  for (const auto& f : r.findings) out.push_back(f.code);
  return out;
}

TEST(Iou, IdenticalBoxes) { EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {0, 0, 10, 10}), 1.0); }

TEST(Iou, DisjointBoxes) { EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {20, 20, 5, 5}), 0.0); }

TEST(Iou, HalfShift) { EXPECT_NEAR(iou({0, 0, 10, 10}, {5, 0, 10, 10}), 1.0 / 3.0, 1e-15); }

TEST(Iou, SymmetricAndBounded) {
  const CounterRng rng(3, 0);
  for (std::uint64_t k = 0; k < 500; ++k) {
    const BoundingBox a{rng.uniform(8 * k, 0, 50), rng.uniform(8 * k + 1, 0, 50),
                        rng.uniform(8 * k + 2, 1, 30), rng.uniform(8 * k + 3, 1, 30)};
    const BoundingBox b{rng.uniform(8 * k + 4, 0, 50), rng.uniform(8 * k + 5, 0, 50),
                        rng.uniform(8 * k + 6, 1, 30), rng.uniform(8 * k + 7, 1, 30)};
    const double v = iou(a, b);
    EXPECT_EQ(v, iou(b, a));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Validate, WellFormedIsEmpty) {
  EXPECT_TRUE(validate_annotation(small_video()).empty());
}

TEST(Validate, SelfInteraction) {
  auto a = small_video();
  a.interactions = {{"a", {"hold", 1}, "a"}};
  EXPECT_EQ(codes(validate_annotation(a)), std::vector<std::string>{"SELF_INTERACTION"});
}

TEST(Validate, BoxOutOfBounds) {
  auto a = small_video();
  a.trajectories[1].points[0].box = {95, 0, 10, 10};  // x + w = width + 5
  EXPECT_EQ(codes(validate_annotation(a)), std::vector<std::string>{"BOX_OUT_OF_BOUNDS"});
}

TEST(Validate, StructuralErrors) {
  auto a = small_video();
  a.trajectories.push_back({"a", {{2, {0, 0, 1, 1}}}});
  a.trajectories[0].points.push_back({0, {0, 0, 1, 1}});
  a.interactions.push_back({"a", {"hold", 1}, "ghost"});
  const auto r = validate_annotation(a);
  const auto c = codes(r);
  EXPECT_NE(std::find(c.begin(), c.end(), "DUPLICATE_TRACK_ID"), c.end());
  EXPECT_NE(std::find(c.begin(), c.end(), "FRAME_ORDER"), c.end());
  EXPECT_NE(std::find(c.begin(), c.end(), "UNRESOLVED_TRACK"), c.end());
  EXPECT_TRUE(r.has_errors());
}

TEST(Validate, PredictionsMayOmitCaptions) {
  auto a = small_video();
  a.instance_captions.clear();
  EXPECT_EQ(codes(validate_annotation(a)), (std::vector<std::string>{"MISSING_CAPTION", "MISSING_CAPTION"}));
  EXPECT_TRUE(validate_annotation(a, {AnnotationKind::kPrediction, nullptr}).empty());
}

TEST(Validate, VocabularyMembership) {
  auto a = small_video();
  a.interactions = {{"a", {"juggle", 7}, "b"}};
  const InteractionVocabulary vocab({{{"hold", 1}, "grasp"}});
  EXPECT_TRUE(validate_annotation(a).empty());
  EXPECT_EQ(codes(validate_annotation(a, {AnnotationKind::kGroundTruth, &vocab})),
            std::vector<std::string>{"UNKNOWN_PREDICATE"});
}

TEST(Validate, EmptyGroundTruthWarnsOnly) {
  auto a = small_video();
  a.trajectories.clear();
  a.instance_captions.clear();
  a.interactions.clear();
  const auto r = validate_annotation(a);
  EXPECT_FALSE(r.has_errors());
  EXPECT_EQ(codes(r), std::vector<std::string>{"NO_TRACKS"});
}

TEST(Validate, PureAndIdempotent) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    auto a = oracle::random_annotation(s);
    a.trajectories.front().points.front().box.w = -1;
    EXPECT_EQ(validate_annotation(a), validate_annotation(a));
  }
}

TEST(Tokenize, Examples) {
  EXPECT_EQ(tokenize("The man runs."), (TokenSequence{"the", "man", "runs"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_EQ(tokenize("A  double  space"), (TokenSequence{"a", "double", "space"}));
}

}  // namespace
}  // namespace smot
