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
#include "smot/evaluation.hpp"
#include "smot/synth.hpp"
#include "support/temp_dir.hpp"

namespace smot {
namespace {

DatasetConfig small_dataset(int videos) {
  DatasetConfig cfg;
  cfg.videos = videos;
  cfg.scenario.frame_count = 30;
  cfg.scenario.target_count = 3;
  cfg.scenario.random_interactions = 2;
  return cfg;
}

TEST(Tasks, Parse) {
  const auto t = parse_tasks("captions,tracking");
  EXPECT_TRUE(t.tracking);
  EXPECT_TRUE(t.captions);
  EXPECT_FALSE(t.interactions);
  EXPECT_THROW(parse_tasks("tracking,dancing"), Error);
  EXPECT_THROW(parse_tasks(""), Error);
}

TEST(Evaluate, PerfectPredictions) {
  test::TempDir dir;
  const auto summary = write_synthetic_dataset(small_dataset(3), dir.path());
  const auto r = evaluate_dataset(load_manifest(summary.manifest), dir.path() / "predictions", {});
  ASSERT_EQ(r.videos.size(), 3u);
  const auto& t = r.pooled_tracking;
  EXPECT_NEAR(t.hota, 1.0, 1e-9);
  EXPECT_NEAR(t.deta, 1.0, 1e-9);
  EXPECT_NEAR(t.assa, 1.0, 1e-9);
  EXPECT_NEAR(t.loca, 1.0, 1e-9);
  EXPECT_EQ(t.mota, 1.0);
  EXPECT_EQ(t.idf1, 1.0);
  EXPECT_EQ(t.fp + t.fn + t.idsw, 0);
  ASSERT_TRUE(r.pooled_video_caption && r.pooled_instance_caption);
  EXPECT_NEAR(r.pooled_video_caption->bleu, 1.0, 1e-12);
  EXPECT_NEAR(r.pooled_instance_caption->rouge, 1.0, 1e-12);
  EXPECT_EQ(r.pooled_interaction.f1, 1.0);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Evaluate, DroppedBoxesEndToEnd) {
  test::TempDir dir;
  auto cfg = small_dataset(1);
  cfg.scenario.target_count = 2;
  cfg.scenario.frame_count = 50;
  cfg.perturbation.drop_boxes = {{"t001", 1}, {"t001", 2}, {"t002", 3}, {"t002", 4}, {"t002", 5}};
  const auto summary = write_synthetic_dataset(cfg, dir.path());
  const auto r = evaluate_dataset(load_manifest(summary.manifest), dir.path() / "predictions", {});
  EXPECT_EQ(r.pooled_tracking.fn, 5);
  EXPECT_EQ(r.pooled_tracking.mota, 0.95);
}

TEST(Evaluate, JobCountDoesNotChangeReport) {
  test::TempDir dir;
  auto cfg = small_dataset(9);
  cfg.perturbation.drop_rate = 0.1;
  cfg.perturbation.jitter_px = 3;
  cfg.perturbation.fp_rate = 0.2;
  cfg.perturbation.caption_word_drop = 0.2;
  const auto summary = write_synthetic_dataset(cfg, dir.path());
  const auto m = load_manifest(summary.manifest);
  EvalConfig serial, parallel;
  parallel.jobs = 8;
  const auto a = render_report_doc(evaluate_dataset(m, dir.path() / "predictions", serial));
  const auto b = render_report_doc(evaluate_dataset(m, dir.path() / "predictions", parallel));
  EXPECT_EQ(a, b);
}

TEST(Evaluate, PooledEqualsSumOfVideos) {
  test::TempDir dir;
  auto cfg = small_dataset(5);
  cfg.perturbation.drop_rate = 0.15;
  cfg.perturbation.fp_rate = 0.3;
  const auto summary = write_synthetic_dataset(cfg, dir.path());
  const auto r = evaluate_dataset(load_manifest(summary.manifest), dir.path() / "predictions", {});
  std::int64_t fp = 0, fn = 0, idtp = 0, itp = 0;
  for (const auto& v : r.videos) {
    fp += v.eval.tracking.clear.fp;
    fn += v.eval.tracking.clear.fn;
    idtp += v.eval.tracking.id.idtp;
    itp += v.eval.interactions.tp;
  }
  EXPECT_EQ(r.pooled_counts.clear.fp, fp);
  EXPECT_EQ(r.pooled_counts.clear.fn, fn);
  EXPECT_EQ(r.pooled_counts.id.idtp, idtp);
  EXPECT_EQ(r.pooled_interaction_counts.tp, itp);
  for (std::size_t i = 1; i < r.videos.size(); ++i) {
    EXPECT_LT(r.videos[i - 1].eval.video_id, r.videos[i].eval.video_id);
  }
}

TEST(Evaluate, MissingPredictionWarns) {
  test::TempDir dir;
  const auto summary = write_synthetic_dataset(small_dataset(2), dir.path());
  std::filesystem::remove(dir.path() / "predictions" / "synth_0001.pred");
  const auto r = evaluate_dataset(load_manifest(summary.manifest), dir.path() / "predictions", {});
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("synth_0001"), std::string::npos);
  EXPECT_TRUE(r.videos[1].eval.prediction_missing);
  EXPECT_EQ(r.videos[1].tracking.hota, 0.0);
  EXPECT_EQ(r.videos[0].tracking.hota, 1.0);
}

TEST(Evaluate, InvalidPredictionRejectedUnlessLenient) {
  test::TempDir dir;
  const auto summary = write_synthetic_dataset(small_dataset(1), dir.path());
  const auto pred = dir.path() / "predictions" / "synth_0000.pred";
  std::string text = read_file(pred);
  const auto at = text.find("\"width\": ");
  text.replace(at, text.find('\n', at) - at, "\"width\": 10");
  write_file(pred, text);
  const auto m = load_manifest(summary.manifest);
  try {
    evaluate_dataset(m, dir.path() / "predictions", {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRange);
    EXPECT_NE(std::string(e.what()).find("synth_0000.pred"), std::string::npos);
  }
  EvalConfig lenient;
  lenient.strict = false;
  EXPECT_NO_THROW(evaluate_dataset(m, dir.path() / "predictions", lenient));
}

TEST(Evaluate, TaskSubset) {
  test::TempDir dir;
  const auto summary = write_synthetic_dataset(small_dataset(2), dir.path());
  EvalConfig only_tracking;
  only_tracking.tasks = parse_tasks("tracking");
  const auto r = evaluate_dataset(load_manifest(summary.manifest), dir.path() / "predictions",
                                  only_tracking);
  EXPECT_FALSE(r.pooled_video_caption.has_value());
  const auto doc = render_report_doc(r);
  EXPECT_NE(doc.find("\"tasks\""), std::string::npos);
}

TEST(Report, DocRoundTrip) {
  test::TempDir dir;
  auto cfg = small_dataset(4);
  cfg.perturbation.drop_rate = 0.2;
  cfg.perturbation.id_swaps = {{15, "t001", "t002"}};
  const auto summary = write_synthetic_dataset(cfg, dir.path());
  const auto r = evaluate_dataset(load_manifest(summary.manifest), dir.path() / "predictions", {});
  const auto doc = render_report_doc(r);
  const auto back = parse_report_doc(doc);
  EXPECT_EQ(render_report_doc(back), doc);
  EXPECT_EQ(render_report_markdown(back), render_report_markdown(r));
  EXPECT_THROW(parse_report_doc("{\"report_version\": 1}"), Error);
}

TEST(Report, MarkdownColumns) {
  test::TempDir dir;
  const auto summary = write_synthetic_dataset(small_dataset(2), dir.path());
  const auto md = render_report_markdown(
      evaluate_dataset(load_manifest(summary.manifest), dir.path() / "predictions", {}));
  EXPECT_NE(md.find("| Video | HOTA | AssA | DetA | LocA | MOTA | FN | FP | IDs | IDR | IDP | IDF1 |"),
            std::string::npos);
  EXPECT_NE(md.find("| 100.00 |"), std::string::npos);
  EXPECT_NE(md.find("**pooled**"), std::string::npos);
}

}  // namespace
}  // namespace smot
