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

#include "smot/error.hpp"
#include "smot/metrics_semantic.hpp"
#include "smot/metrics_tracking.hpp"
#include "smot/synth.hpp"
#include "support/temp_dir.hpp"

namespace smot {
namespace {

ScenarioConfig two_targets(int frames) {
  ScenarioConfig c;
  c.seed = 17;
  c.frame_count = frames;
  c.width = 640;
  c.height = 480;
  c.target_count = 2;
  c.motions = {{10, 10, 2, 0}, {10, 300, 2, 0}};
  return c;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

TEST(Grammar, ParseAndExpand) {
  const auto g = CaptionGrammar::parse(
      "# comment\n<s> ::= <who> waits | <who> leaves\n<who> ::= a man | a woman\n");
  EXPECT_TRUE(g.has_rule("<s>"));
  const auto text = g.expand("<s>", {}, 1, 2);
  EXPECT_TRUE(text == "a man waits" || text == "a man leaves" || text == "a woman waits" ||
              text == "a woman leaves")
      << text;
  EXPECT_EQ(g.expand("<s>", {}, 1, 2), text);
  EXPECT_EQ(g.expand("<s>", {{"<who>", "the dog"}}, 1, 2).rfind("the dog", 0), 0u);
  EXPECT_EQ(code_of([&] { g.expand("<nope>", {}, 1, 2); }), ErrorCode::kInvalidArgument);
}

TEST(Grammar, SyntaxErrors) {
  EXPECT_EQ(code_of([] { CaptionGrammar::parse("<s> a b\n"); }), ErrorCode::kSyntax);
  EXPECT_EQ(code_of([] { CaptionGrammar::parse("<s> ::= a | \n"); }), ErrorCode::kSyntax);
  EXPECT_EQ(code_of([] { CaptionGrammar::parse("<s> ::= a\n<s> ::= b\n"); }), ErrorCode::kSyntax);
  EXPECT_NO_THROW(CaptionGrammar::builtin());
}

TEST(Scenario, TwoTargetsFiftyFrames) {
  const auto s = generate_scenario(two_targets(50));
  const auto& gt = s.ground_truth;
  ASSERT_EQ(gt.trajectories.size(), 2u);
  EXPECT_EQ(gt.trajectories[0].track_id, "t001");
  EXPECT_EQ(gt.trajectories[0].points.size(), 50u);
  EXPECT_EQ(gt.box_count(), 100u);
  EXPECT_EQ(detection_count(s.detections), 100u);
  EXPECT_EQ(s.detections.at(7)[0].score, 0.95);
  EXPECT_TRUE(validate_annotation(gt).empty());
  EXPECT_EQ(gt.instance_captions.size(), 2u);
  EXPECT_FALSE(gt.video_caption.empty());
}

TEST(Scenario, ScriptedInteraction) {
  auto c = two_targets(20);
  c.interactions = {{"t001", {"talk_to", 1}, "t002"}};
  const auto gt = generate_scenario(c).ground_truth;
  ASSERT_EQ(gt.interactions.size(), 1u);
  EXPECT_EQ(gt.interactions[0], c.interactions[0]);
}

TEST(Scenario, DeterministicBytes) {
  ScenarioConfig c;
  c.seed = 99;
  c.random_interactions = 3;
  const auto a = generate_scenario(c), b = generate_scenario(c);
  EXPECT_EQ(serialize_video_annotation(a.ground_truth), serialize_video_annotation(b.ground_truth));
  EXPECT_EQ(serialize_detections(a.detections), serialize_detections(b.detections));
  c.seed = 100;
  EXPECT_NE(serialize_video_annotation(generate_scenario(c).ground_truth),
            serialize_video_annotation(a.ground_truth));
}

TEST(Scenario, RandomScenariosAreValid) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    ScenarioConfig c;
    c.seed = seed;
    c.frame_count = 60;
    c.random_interactions = 2;
    const auto s = generate_scenario(c);
    ASSERT_TRUE(validate_annotation(s.ground_truth, {AnnotationKind::kGroundTruth, &sample_vocabulary()})
                    .empty())
        << "seed " << seed;
    EXPECT_EQ(parse_video_annotation(serialize_video_annotation(s.ground_truth)), s.ground_truth);
  }
}

TEST(Scenario, InfeasibleMotion) {
  auto c = two_targets(100);
  c.motions[0].vx = 10;  // leaves a 640 px frame
  EXPECT_EQ(code_of([&] { generate_scenario(c); }), ErrorCode::kInfeasibleMotion);
  c = two_targets(10);
  c.box_width = 1000;
  EXPECT_EQ(code_of([&] { generate_scenario(c); }), ErrorCode::kInfeasibleMotion);
  c = two_targets(10);
  c.motions.pop_back();
  EXPECT_EQ(code_of([&] { generate_scenario(c); }), ErrorCode::kInvalidArgument);
}

TEST(Perturb, ZeroConfigIsIdentity) {
  ScenarioConfig c;
  c.seed = 5;
  c.random_interactions = 2;
  const auto gt = generate_scenario(c).ground_truth;
  const auto out = perturb(gt, {});
  EXPECT_EQ(out.prediction, gt);
  EXPECT_EQ(out.counts, PerturbationCounts{});
}

TEST(Perturb, ExactDropsGiveExactMota) {
  const auto gt = generate_scenario(two_targets(50)).ground_truth;
  PerturbationConfig p;
  p.drop_boxes = {{"t001", 3}, {"t001", 4}, {"t002", 10}, {"t002", 49}, {"t001", 0}};
  const auto out = perturb(gt, p);
  EXPECT_EQ(out.counts.boxes_dropped, 5);
  EXPECT_EQ(out.prediction.box_count(), 95u);
  const auto c = clear_counts(gt.trajectories, out.prediction.trajectories);
  EXPECT_EQ(*c.mota(), 1.0 - 5.0 / 100.0);
}

TEST(Perturb, DropRateIsReplayableAndExact) {
  const auto gt = generate_scenario(two_targets(50)).ground_truth;
  PerturbationConfig p;
  p.seed = 8;
  p.drop_rate = 0.2;
  const auto a = perturb(gt, p), b = perturb(gt, p);
  EXPECT_EQ(a.prediction, b.prediction);
  const auto n = a.counts.boxes_dropped;
  EXPECT_GT(n, 0);
  const auto c = clear_counts(gt.trajectories, a.prediction.trajectories);
  EXPECT_DOUBLE_EQ(*c.mota(), 1.0 - static_cast<double>(n) / 100.0);
}

TEST(Perturb, MidpointSwap) {
  const auto gt = generate_scenario(two_targets(10)).ground_truth;
  PerturbationConfig p;
  p.id_swaps = {{5, "t001", "t002"}};
  const auto out = perturb(gt, p);
  EXPECT_EQ(out.counts.swaps_applied, 1);
  const auto c = clear_counts(gt.trajectories, out.prediction.trajectories);
  EXPECT_EQ(c.idsw, 2);
  EXPECT_DOUBLE_EQ(*c.mota(), 0.9);
  EXPECT_DOUBLE_EQ(id_counts(gt.trajectories, out.prediction.trajectories).counts.idf1(), 0.5);
}

TEST(Perturb, FalsePositivesAvoidTargets) {
  const auto gt = generate_scenario(two_targets(40)).ground_truth;
  PerturbationConfig p;
  p.seed = 3;
  p.fp_rate = 1.0;
  const auto out = perturb(gt, p);
  EXPECT_GT(out.counts.false_positives, 0);
  const auto c = clear_counts(gt.trajectories, out.prediction.trajectories);
  EXPECT_EQ(c.fp, out.counts.false_positives);
  EXPECT_EQ(c.fn, 0);
  EXPECT_TRUE(validate_annotation(out.prediction, {AnnotationKind::kPrediction, nullptr}).empty());
}

TEST(Perturb, JitterStaysInFrame) {
  ScenarioConfig c;
  c.seed = 12;
  const auto gt = generate_scenario(c).ground_truth;
  PerturbationConfig p;
  p.seed = 4;
  p.jitter_px = 6;
  const auto out = perturb(gt, p);
  EXPECT_EQ(out.counts.boxes_jittered, static_cast<std::int64_t>(gt.box_count()));
  EXPECT_TRUE(validate_annotation(out.prediction, {AnnotationKind::kPrediction, nullptr}).empty());
  EXPECT_EQ(parse_video_annotation(serialize_video_annotation(out.prediction)), out.prediction);
}

TEST(Perturb, RatesChecked) {
  const auto gt = generate_scenario(two_targets(5)).ground_truth;
  PerturbationConfig p;
  p.drop_rate = 1.5;
  EXPECT_EQ(code_of([&] { perturb(gt, p); }), ErrorCode::kInvalidArgument);
}

TEST(Dataset, ConfigParsing) {
  const auto cfg = parse_dataset_config(R"({"videos": 3, "seed": 4, "targets": 2,
      "perturbation": {"drop": [{"track": "t001", "frame": 2}]}})");
  EXPECT_EQ(cfg.videos, 3);
  EXPECT_EQ(cfg.scenario.target_count, 2);
  ASSERT_EQ(cfg.perturbation.drop_boxes.size(), 1u);
  EXPECT_EQ(code_of([] { parse_dataset_config(R"({"vidoes": 3})"); }), ErrorCode::kSchema);
  EXPECT_EQ(code_of([] { parse_dataset_config(R"({"train_fraction": 2})"); }), ErrorCode::kRange);
  EXPECT_EQ(code_of([] { parse_dataset_config("{"); }), ErrorCode::kSyntax);
}

TEST(Dataset, WritesLoadableManifest) {
  test::TempDir dir;
  DatasetConfig cfg;
  cfg.videos = 4;
  cfg.scenario.frame_count = 20;
  cfg.perturbation.drop_rate = 0.1;
  const auto summary = write_synthetic_dataset(cfg, dir.path());
  const auto m = load_manifest(summary.manifest);
  ASSERT_EQ(m.entries.size(), 4u);
  EXPECT_EQ(m.count(Split::kTrain), 3u);
  for (const auto& e : m.entries) {
    EXPECT_NO_THROW(load_video_annotation(e.annotation_path));
    EXPECT_TRUE(std::filesystem::exists(dir.path() / "predictions" / (e.video_id + ".pred")));
    EXPECT_TRUE(std::filesystem::exists(dir.path() / "detections" / (e.video_id + ".txt")));
  }
  test::TempDir again;
  write_synthetic_dataset(cfg, again.path());
  EXPECT_EQ(read_file(again.path() / "manifest.tsv"), read_file(dir.path() / "manifest.tsv"));
  EXPECT_EQ(read_file(again.path() / "predictions" / "synth_0002.pred"),
            read_file(dir.path() / "predictions" / "synth_0002.pred"));
}

}  // namespace
}  // namespace smot
