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

// Exercises the shared library through smot.h only.

#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include <gtest/gtest.h>

#include "smot/smot.h"
#include "support/temp_dir.hpp"

extern "C" int smot_c_header_probe(void);

namespace {

struct Buf {
  char* p = nullptr;
  ~Buf() { smot_buffer_free(p); }
  std::string str() const { return p ? p : ""; }
};

void put(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream(path, std::ios::binary) << text;
}

constexpr const char* kDoc = R"({"video_id": "c", "width": 64, "height": 48, "frame_count": 3,
  "trajectories": [{"track_id": "p", "points": [[0, 1, 2, 3, 4], [2, 2, 2, 3, 4]]}],
  "instance_captions": {"p": "a person"}, "interactions": [], "video_caption": "one person"})";

TEST(CApi, HeaderCompilesAsC) { EXPECT_EQ(smot_c_header_probe(), SMOT_OK); }

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STREQ(smot_version(), "0.1.0");
  EXPECT_STREQ(smot_status_name(SMOT_ERR_SYNTAX), "SYNTAX");
  EXPECT_STREQ(smot_status_name(SMOT_ERR_EMPTY_GT), "EMPTY_GT");
  EXPECT_STREQ(smot_status_name(SMOT_OK), "OK");
}

TEST(CApi, AnnotationLifecycle) {
  smot_annotation* ann = nullptr;
  ASSERT_EQ(smot_annotation_parse(kDoc, std::strlen(kDoc), SMOT_GROUND_TRUTH, 1, &ann), SMOT_OK);
  smot_annotation_info info{};
  ASSERT_EQ(smot_annotation_info_get(ann, &info), SMOT_OK);
  EXPECT_EQ(info.width, 64);
  EXPECT_EQ(info.tracks, 1u);
  EXPECT_EQ(info.boxes, 2u);
  EXPECT_EQ(info.fps, 0.0);
  Buf id, bytes;
  ASSERT_EQ(smot_annotation_video_id(ann, &id.p), SMOT_OK);
  EXPECT_EQ(id.str(), "c");
  ASSERT_EQ(smot_annotation_serialize(ann, &bytes.p), SMOT_OK);
  smot_annotation* again = nullptr;
  ASSERT_EQ(smot_annotation_parse(bytes.p, std::strlen(bytes.p), SMOT_GROUND_TRUTH, 1, &again),
            SMOT_OK);
  Buf bytes2;
  ASSERT_EQ(smot_annotation_serialize(again, &bytes2.p), SMOT_OK);
  EXPECT_EQ(bytes.str(), bytes2.str());
  smot_annotation_free(again);
  smot_annotation_free(ann);
  smot_annotation_free(nullptr);
}

TEST(CApi, ErrorsCarryCodeAndMessage) {
  smot_annotation* ann = nullptr;
  EXPECT_EQ(smot_annotation_parse("{", 1, SMOT_GROUND_TRUTH, 1, &ann), SMOT_ERR_SYNTAX);
  EXPECT_EQ(ann, nullptr);
  EXPECT_STRNE(smot_last_error(), "");
  EXPECT_EQ(smot_annotation_load("/nonexistent/x.json", SMOT_GROUND_TRUTH, 1, &ann), SMOT_ERR_IO);
  EXPECT_EQ(smot_annotation_parse(nullptr, 4, SMOT_GROUND_TRUTH, 1, &ann),
            SMOT_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(smot_annotation_parse(kDoc, std::strlen(kDoc), SMOT_GROUND_TRUTH, 1, nullptr),
            SMOT_ERR_INVALID_ARGUMENT);
  // A null pointer with zero length is the empty document.
  EXPECT_EQ(smot_annotation_parse(nullptr, 0, SMOT_GROUND_TRUTH, 1, &ann), SMOT_ERR_SYNTAX);
  EXPECT_EQ(smot_annotation_info_get(nullptr, nullptr), SMOT_ERR_INVALID_ARGUMENT);
}

TEST(CApi, ValidateReportsFindings) {
  smot::test::TempDir dir;
  std::string bad = kDoc;
  bad.replace(bad.find("[2, 2, 2, 3, 4]"), 15, "[2, 62, 2, 3, 4]");
  put(dir.path() / "bad.json", bad);
  put(dir.path() / "good.json", kDoc);
  Buf out;
  size_t errors = 0;
  ASSERT_EQ(smot_validate_path((dir.path() / "good.json").c_str(), SMOT_FORMAT_LINES, &out.p, &errors),
            SMOT_OK);
  EXPECT_EQ(errors, 0u);
  EXPECT_EQ(out.str(), "");
  Buf out2;
  ASSERT_EQ(smot_validate_path((dir.path() / "bad.json").c_str(), SMOT_FORMAT_LINES, &out2.p, &errors),
            SMOT_OK);
  EXPECT_EQ(errors, 1u);
  EXPECT_EQ(out2.str().rfind("error\tBOX_OUT_OF_BOUNDS\t", 0), 0u) << out2.str();
  Buf out3;
  EXPECT_EQ(smot_validate_path((dir.path() / "absent.json").c_str(), SMOT_FORMAT_LINES, &out3.p,
                               &errors),
            SMOT_ERR_IO);
}

TEST(CApi, TrackerOptionsJson) {
  smot_tracker_options opts;
  smot_tracker_options_default(&opts);
  EXPECT_EQ(opts.algorithm, SMOT_ALGO_BYTE);
  EXPECT_DOUBLE_EQ(opts.tau_p, 0.3);
  smot_video_meta meta{nullptr, 0, 0, 0, 0.0};
  const std::string cfg = R"({"algorithm": "sort", "tau_p": 0.5, "video": {"width": 320}})";
  ASSERT_EQ(smot_tracker_options_from_json(cfg.data(), cfg.size(), &opts, &meta), SMOT_OK);
  EXPECT_EQ(opts.algorithm, SMOT_ALGO_SORT);
  EXPECT_DOUBLE_EQ(opts.tau_p, 0.5);
  EXPECT_EQ(meta.width, 320);
  Buf echo;
  ASSERT_EQ(smot_tracker_options_to_json(&opts, &echo.p), SMOT_OK);
  EXPECT_NE(echo.str().find("\"sort\""), std::string::npos);
  const std::string unknown = R"({"tau_q": 1})";
  EXPECT_EQ(smot_tracker_options_from_json(unknown.data(), unknown.size(), &opts, &meta),
            SMOT_ERR_SCHEMA);
}

TEST(CApi, TrackFile) {
  smot::test::TempDir dir;
  std::string dets;
  for (int f = 1; f <= 5; ++f) {
    dets += std::to_string(f) + "," + std::to_string(10 + 2 * f) + ",10,20,40,0.9\n";
    dets += std::to_string(f) + "," + std::to_string(200 - 2 * f) + ",10,20,40,0.8\n";
  }
  put(dir.path() / "cam.txt", dets);
  smot_tracker_options opts;
  smot_tracker_options_default(&opts);
  smot_annotation* ann = nullptr;
  smot_track_summary summary{};
  ASSERT_EQ(smot_track_file((dir.path() / "cam.txt").c_str(), &opts, nullptr, &ann, &summary),
            SMOT_OK);
  EXPECT_EQ(summary.detections, 10u);
  EXPECT_EQ(summary.tracks, 2u);
  EXPECT_EQ(summary.boxes, 10u);
  Buf id;
  smot_annotation_video_id(ann, &id.p);
  EXPECT_EQ(id.str(), "cam");
  smot_annotation_free(ann);
}

TEST(CApi, SynthEvalReport) {
  smot::test::TempDir dir;
  const std::string cfg = R"({"videos": 3, "frame_count": 20, "targets": 2})";
  Buf summary;
  ASSERT_EQ(smot_synth(cfg.data(), cfg.size(), dir.path().c_str(), &summary.p), SMOT_OK)
      << smot_last_error();
  EXPECT_NE(summary.str().find("manifest"), std::string::npos);
  smot_eval_options opts;
  smot_eval_options_default(&opts);
  Buf doc, warnings;
  ASSERT_EQ(smot_eval((dir.path() / "manifest.tsv").c_str(), (dir.path() / "predictions").c_str(),
                      &opts, &doc.p, &warnings.p),
            SMOT_OK)
      << smot_last_error();
  EXPECT_EQ(warnings.str(), "");
  Buf md;
  ASSERT_EQ(smot_report_render(doc.p, std::strlen(doc.p), SMOT_FORMAT_MARKDOWN, &md.p), SMOT_OK);
  EXPECT_EQ(md.str().rfind("# Evaluation report", 0), 0u);
  Buf stats;
  ASSERT_EQ(smot_stats((dir.path() / "manifest.tsv").c_str(), SMOT_FORMAT_DOC, &stats.p), SMOT_OK);
  EXPECT_NE(stats.str().find("\"video_count\": 3"), std::string::npos);

  Buf none;
  EXPECT_EQ(smot_eval((dir.path() / "manifest.tsv").c_str(), (dir.path() / "nowhere").c_str(), &opts,
                      &none.p, nullptr),
            SMOT_ERR_IO);
}

TEST(CApi, FusionExport) {
  smot::test::TempDir dir;
  smot_fusion_options opts;
  smot_fusion_options_default(&opts);
  EXPECT_EQ(opts.dim, 256);
  EXPECT_EQ(opts.classes, 335);
  opts.dim = opts.hidden = 8;
  const auto path = (dir.path() / "f.bin").string();
  ASSERT_EQ(smot_fusion_export(&opts, path.c_str()), SMOT_OK) << smot_last_error();
  Buf listing;
  ASSERT_EQ(smot_matrix_file_describe(path.c_str(), &listing.p), SMOT_OK);
  EXPECT_NE(listing.str().find("logits.0_1 1 336\n"), std::string::npos) << listing.str();
  EXPECT_NE(listing.str().find("video 16 8\n"), std::string::npos);
  opts.variant = "bogus";
  EXPECT_EQ(smot_fusion_export(&opts, path.c_str()), SMOT_ERR_INVALID_ARGUMENT);
}

}  // namespace
