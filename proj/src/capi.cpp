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

#include "smot/smot.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>
#include <string>

#include <json.hpp>

#include "smot/annotation_io.hpp"
#include "smot/association.hpp"
#include "smot/embedded_data.hpp"
#include "smot/error.hpp"
#include "smot/evaluation.hpp"
#include "smot/fusion.hpp"
#include "smot/synth.hpp"

struct smot_annotation {
  smot::VideoAnnotation value;
};

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

thread_local std::string g_last_error;
thread_local std::string g_video_id;

template <typename Fn>
int guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return SMOT_OK;
  } catch (const smot::Error& e) {
    g_last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SMOT_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SMOT_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) smot::fail(smot::ErrorCode::kInvalidArgument, what);
}

char* to_buffer(std::string_view s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

smot::AnnotationKind to_kind(int kind) {
  require(kind == SMOT_GROUND_TRUTH || kind == SMOT_PREDICTION, "unknown annotation kind");
  return kind == SMOT_PREDICTION ? smot::AnnotationKind::kPrediction
                                 : smot::AnnotationKind::kGroundTruth;
}

// ---- validation ----------------------------------------------------------

struct FileFindings {
  std::string path;
  std::vector<smot::Finding> findings;
};

bool io_like(smot::ErrorCode c) {
  return c == smot::ErrorCode::kIo || c == smot::ErrorCode::kMissingFile;
}

FileFindings validate_one(const fs::path& path, bool missing_is_finding) {
  FileFindings out{path.string(), {}};
  const auto kind = path.extension() == ".pred" ? smot::AnnotationKind::kPrediction
                                                : smot::AnnotationKind::kGroundTruth;
  std::string text;
  try {
    text = smot::read_file(path);
  } catch (const smot::Error& e) {
    if (!missing_is_finding) throw;
    out.findings.push_back({smot::Severity::kError, "MISSING_FILE", "file", e.what()});
    return out;
  }
  smot::ParseOptions opts;
  opts.strict = false;
  opts.kind = kind;
  std::vector<std::string> unknown;
  opts.warnings = &unknown;
  smot::VideoAnnotation ann;
  try {
    ann = smot::parse_video_annotation(text, opts);
  } catch (const smot::Error& e) {
    if (io_like(e.code())) throw;
    out.findings.push_back({smot::Severity::kError,
                            std::string(smot::error_code_name(e.code())), "document",
                            e.what()});
    return out;
  }
  smot::ValidationOptions vopts;
  vopts.kind = kind;
  out.findings = smot::validate_annotation(ann, vopts).findings;
  for (const auto& w : unknown) {
    out.findings.push_back({smot::Severity::kWarning, "UNKNOWN_FIELD", "document", w});
  }
  return out;
}

std::string render_findings(const std::vector<FileFindings>& files, int format,
                            std::size_t& errors) {
  errors = 0;
  std::size_t warnings = 0;
  for (const auto& f : files) {
    for (const auto& x : f.findings) {
      (x.severity == smot::Severity::kError ? errors : warnings)++;
    }
  }
  if (format == SMOT_FORMAT_DOC) {
    json doc;
    doc["error_count"] = errors;
    doc["warning_count"] = warnings;
    json arr = json::array();
    for (const auto& f : files) {
      json fj;
      fj["path"] = f.path;
      fj["findings"] = json::array();
      for (const auto& x : f.findings) {
        fj["findings"].push_back({{"severity", x.severity == smot::Severity::kError ? "error" : "warning"},
                                  {"code", x.code},
                                  {"location", x.location},
                                  {"message", x.message}});
      }
      arr.push_back(std::move(fj));
    }
    doc["files"] = arr;
    return doc.dump(2) + "\n";
  }
  require(format == SMOT_FORMAT_LINES, "validate supports the lines and doc formats");
  std::string out;
  for (const auto& f : files) {
    for (const auto& x : f.findings) {
      out += x.severity == smot::Severity::kError ? "error" : "warning";
      out += '\t' + x.code + '\t' + f.path + '\t' + x.location + '\t' + x.message + '\n';
    }
  }
  return out;
}

// ---- tracker options -------------------------------------------------------

smot::TrackerConfig to_config(const smot_tracker_options& o) {
  require(o.algorithm == SMOT_ALGO_BYTE || o.algorithm == SMOT_ALGO_SORT,
          "unknown tracker algorithm");
  smot::TrackerConfig c;
  c.algorithm = o.algorithm == SMOT_ALGO_SORT ? smot::Algorithm::kSort : smot::Algorithm::kByte;
  c.tau_p = o.tau_p;
  c.tau_high = o.tau_high;
  c.iou_gate = o.iou_gate;
  c.max_lost = o.max_lost;
  if (o.low_score_floor >= 0.0) c.low_score_floor = o.low_score_floor;
  c.min_points = o.min_points;
  smot::validate_config(c);
  return c;
}

template <typename T>
void take(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    smot::fail(smot::ErrorCode::kSchema, std::string("field '") + key + "' has the wrong type");
  }
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> known,
                    const std::string& where) {
  if (!obj.is_object()) smot::fail(smot::ErrorCode::kSchema, where + " must be an object");
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || item.key() == k;
    if (!ok) smot::fail(smot::ErrorCode::kSchema, where + ": unknown field '" + item.key() + "'");
  }
}

smot::BoundingBox clip(const smot::BoundingBox& b, double w, double h) {
  const double x0 = std::max(0.0, b.x), y0 = std::max(0.0, b.y);
  const double x1 = std::min(w, b.right()), y1 = std::min(h, b.bottom());
  return {x0, y0, x1 - x0, y1 - y0};
}

// ---- fusion ------------------------------------------------------------------

std::vector<smot::NamedMatrix> fusion_forward(const smot_fusion_options& o) {
  require(o.dim > 0 && o.hidden > 0 && o.frames > 0 && o.targets > 0 &&
              o.track_len > 0 && o.classes > 0,
          "fusion dimensions must be positive");
  const auto variant = smot::parse_fusion_variant(o.variant ? o.variant : "attention");
  const auto params = smot::FusionParams::seeded(o.seed, o.dim, o.hidden);
  const auto head = smot::InteractionHeadParams::seeded(o.seed, o.dim, o.hidden, o.classes);
  const smot::Matrix proj = smot::seeded_matrix(o.seed, 110, o.dim, o.dim, o.dim);

  // Inputs live on streams far above the parameter streams.
  constexpr int kTokens = 16;
  std::vector<smot::FeatureMatrix> frames;
  for (int i = 0; i < o.frames; ++i) {
    frames.push_back(smot::seeded_features(o.seed, 1000 + i, kTokens, o.dim));
  }
  std::vector<smot::FeatureMatrix> trajs;
  std::vector<smot::NamedMatrix> out;
  for (int j = 0; j < o.targets; ++j) {
    std::vector<smot::FeatureMatrix> per_frame;
    for (int t = 0; t < o.track_len; ++t) {
      per_frame.push_back(smot::seeded_features(
          o.seed, 100000 + static_cast<std::uint64_t>(j) * 1000 + t, 4, o.dim));
    }
    trajs.push_back(smot::tfm_fuse(per_frame, variant, params));
    out.emplace_back("trajectory." + std::to_string(j), trajs.back().mat());
  }
  const auto video = smot::vfm_fold(frames, variant, params);
  out.emplace_back("video", video.mat());
  out.emplace_back("caption_context",
                   smot::caption_context(video, trajs, params.attention, proj).mat());
  if (o.targets >= 2) {
    out.emplace_back("logits.0_1", smot::interaction_logits(trajs[0], trajs[1],
                                                            params.attention, head));
    out.emplace_back("logits.1_0", smot::interaction_logits(trajs[1], trajs[0],
                                                            params.attention, head));
  }
  out.emplace_back("param.w_q", params.attention.w_q);
  out.emplace_back("param.w_k", params.attention.w_k);
  out.emplace_back("param.w_v", params.attention.w_v);
  out.emplace_back("param.head.hidden.w", head.hidden.w);
  out.emplace_back("param.head.hidden.b", head.hidden.b);
  out.emplace_back("param.head.out.w", head.out.w);
  out.emplace_back("param.head.out.b", head.out.b);
  out.emplace_back("param.caption_proj", proj);
  return out;
}

}  // namespace

extern "C" {

const char* smot_version(void) { return smot::embedded::kVersion.data(); }

const char* smot_status_name(int status) {
  if (status == SMOT_OK) return "OK";
  return smot::error_code_name(static_cast<smot::ErrorCode>(status)).data();
}

const char* smot_last_error(void) { return g_last_error.c_str(); }

void smot_buffer_free(char* buffer) { std::free(buffer); }

int smot_annotation_load(const char* path, int kind, int strict, smot_annotation** out) {
  return guarded([&] {
    require(path && out, "null argument");
    smot::ParseOptions opts;
    opts.strict = strict != 0;
    opts.kind = to_kind(kind);
    auto h = std::make_unique<smot_annotation>();
    h->value = smot::load_video_annotation(path, opts);
    *out = h.release();
  });
}

int smot_annotation_parse(const char* text, size_t length, int kind, int strict,
                          smot_annotation** out) {
  return guarded([&] {
    require((text || length == 0) && out, "null argument");
    smot::ParseOptions opts;
    opts.strict = strict != 0;
    opts.kind = to_kind(kind);
    auto h = std::make_unique<smot_annotation>();
    h->value = smot::parse_video_annotation(std::string_view(text, length), opts);
    *out = h.release();
  });
}

int smot_annotation_serialize(const smot_annotation* ann, char** out) {
  return guarded([&] {
    require(ann && out, "null argument");
    *out = to_buffer(smot::serialize_video_annotation(ann->value));
  });
}

int smot_annotation_save(const smot_annotation* ann, const char* path) {
  return guarded([&] {
    require(ann && path, "null argument");
    smot::save_video_annotation(path, ann->value);
  });
}

int smot_annotation_info_get(const smot_annotation* ann, smot_annotation_info* out) {
  return guarded([&] {
    require(ann && out, "null argument");
    const auto& a = ann->value;
    *out = {a.width, a.height, a.frame_count, a.fps.value_or(0.0), a.trajectories.size(),
            a.box_count(), a.interactions.size()};
  });
}

int smot_annotation_video_id(const smot_annotation* ann, char** out) {
  return guarded([&] {
    require(ann && out, "null argument");
    *out = to_buffer(ann->value.video_id);
  });
}

void smot_annotation_free(smot_annotation* ann) { delete ann; }

int smot_validate_path(const char* path, int format, char** out, size_t* error_count) {
  return guarded([&] {
    require(path && out && error_count, "null argument");
    const fs::path p(path);
    std::vector<FileFindings> files;
    if (p.extension() == ".tsv") {
      const auto manifest = smot::load_manifest(p, /*strict=*/false);
      for (const auto& e : manifest.entries) {
        files.push_back(validate_one(e.annotation_path, /*missing_is_finding=*/true));
      }
    } else {
      files.push_back(validate_one(p, false));
    }
    *out = to_buffer(render_findings(files, format, *error_count));
  });
}

int smot_stats(const char* manifest_path, int format, char** out) {
  return guarded([&] {
    require(manifest_path && out, "null argument");
    const auto manifest = smot::load_manifest(manifest_path);
    const auto stats = smot::dataset_stats(manifest);
    require(format == SMOT_FORMAT_DOC || format == SMOT_FORMAT_MARKDOWN,
            "stats supports the doc and markdown formats");
    *out = to_buffer(format == SMOT_FORMAT_DOC ? smot::render_stats_doc(stats)
                                               : smot::render_stats_markdown(stats));
  });
}

void smot_tracker_options_default(smot_tracker_options* out) {
  if (!out) return;
  const smot::TrackerConfig c;
  *out = {SMOT_ALGO_BYTE, c.tau_p, c.tau_high, c.iou_gate, c.max_lost, -1.0, c.min_points};
}

int smot_tracker_options_from_json(const char* text, size_t length,
                                   smot_tracker_options* options, smot_video_meta* meta) {
  return guarded([&] {
    require(text && options, "null argument");
    json doc;
    try {
      doc = json::parse(std::string_view(text, length));
    } catch (const json::parse_error& e) {
      smot::fail(smot::ErrorCode::kSyntax, std::string("tracker config: ") + e.what());
    }
    reject_unknown(doc,
                   {"algorithm", "tau_p", "tau_high", "iou_gate", "max_lost",
                    "low_score_floor", "min_points", "video"},
                   "tracker config");
    smot_tracker_options o = *options;
    if (doc.contains("algorithm")) {
      std::string name;
      take(doc, "algorithm", name);
      o.algorithm = smot::parse_algorithm(name) == smot::Algorithm::kSort ? SMOT_ALGO_SORT
                                                                         : SMOT_ALGO_BYTE;
    }
    take(doc, "tau_p", o.tau_p);
    take(doc, "tau_high", o.tau_high);
    take(doc, "iou_gate", o.iou_gate);
    take(doc, "max_lost", o.max_lost);
    take(doc, "low_score_floor", o.low_score_floor);
    take(doc, "min_points", o.min_points);
    if (doc.contains("video")) {
      require(meta != nullptr, "config carries video metadata but no target was given");
      const json& v = doc.at("video");
      reject_unknown(v, {"video_id", "width", "height", "frame_count", "fps"}, "video");
      smot_video_meta m = *meta;
      if (v.contains("video_id")) {
        take(v, "video_id", g_video_id);
        m.video_id = g_video_id.c_str();
      }
      take(v, "width", m.width);
      take(v, "height", m.height);
      take(v, "frame_count", m.frame_count);
      take(v, "fps", m.fps);
      *meta = m;
    }
    to_config(o);  // validates
    *options = o;
  });
}

int smot_tracker_options_to_json(const smot_tracker_options* options, char** out) {
  return guarded([&] {
    require(options && out, "null argument");
    const auto c = to_config(*options);
    json j;
    j["algorithm"] = std::string(smot::algorithm_name(c.algorithm));
    j["tau_p"] = c.tau_p;
    j["tau_high"] = c.tau_high;
    j["iou_gate"] = c.iou_gate;
    j["max_lost"] = c.max_lost;
    j["low_score_floor"] = c.low_score_floor.value_or(c.tau_p);
    j["min_points"] = c.min_points;
    *out = to_buffer(j.dump());
  });
}

int smot_track_file(const char* detections_path, const smot_tracker_options* options,
                    const smot_video_meta* meta, smot_annotation** out,
                    smot_track_summary* summary) {
  return guarded([&] {
    require(detections_path && options && out, "null argument");
    const auto cfg = to_config(*options);
    const fs::path path(detections_path);
    const auto dets = smot::parse_detections(smot::read_file(path));

    smot::VideoAnnotation ann;
    ann.video_id = meta && meta->video_id ? meta->video_id : path.stem().string();
    double max_x = 0.0, max_y = 0.0;
    for (const auto& [frame, list] : dets) {
      for (const auto& d : list) {
        max_x = std::max(max_x, d.box.right());
        max_y = std::max(max_y, d.box.bottom());
      }
    }
    ann.width = meta && meta->width > 0 ? meta->width
                                        : std::max(1, static_cast<int>(std::ceil(max_x)));
    ann.height = meta && meta->height > 0 ? meta->height
                                          : std::max(1, static_cast<int>(std::ceil(max_y)));
    ann.frame_count = meta && meta->frame_count > 0
                          ? meta->frame_count
                          : (dets.empty() ? 1 : dets.rbegin()->first + 1);
    if (meta && meta->fps > 0.0) ann.fps = meta->fps;

    std::vector<smot::Trajectory> trajs;
    if (!dets.empty()) trajs = smot::run_tracker(dets, cfg);
    for (auto& t : trajs) {
      std::vector<smot::TrackPoint> kept;
      for (auto& pt : t.points) {
        if (pt.frame >= ann.frame_count) continue;
        pt.box = clip(pt.box, ann.width, ann.height);
        if (pt.box.valid()) kept.push_back(pt);
      }
      t.points = std::move(kept);
      if (!t.points.empty()) ann.trajectories.push_back(std::move(t));
    }
    if (summary) {
      *summary = {smot::detection_count(dets), ann.trajectories.size(), ann.box_count()};
    }
    auto h = std::make_unique<smot_annotation>();
    h->value = std::move(ann);
    *out = h.release();
  });
}

void smot_eval_options_default(smot_eval_options* out) {
  if (!out) return;
  *out = {nullptr, SMOT_FORMAT_DOC, 1, 1, 0, smot::kDefaultIouThreshold};
}

int smot_eval(const char* gt_manifest, const char* pred_dir, const smot_eval_options* options,
              char** out, char** warnings) {
  return guarded([&] {
    require(gt_manifest && pred_dir && options && out, "null argument");
    require(options->format == SMOT_FORMAT_DOC || options->format == SMOT_FORMAT_MARKDOWN,
            "eval supports the doc and markdown formats");
    require(options->iou_threshold > 0.0 && options->iou_threshold <= 1.0,
            "IoU threshold must lie in (0, 1]");
    if (!fs::is_directory(pred_dir)) {
      smot::fail(smot::ErrorCode::kIo, std::string("not a directory: ") + pred_dir);
    }
    smot::EvalConfig cfg;
    if (options->tasks) cfg.tasks = smot::parse_tasks(options->tasks);
    cfg.jobs = std::max(1, options->jobs);
    cfg.strict = options->strict != 0;
    cfg.instance_averaging = options->per_pair_instance_captions
                                 ? smot::CaptionAveraging::kPerPair
                                 : smot::CaptionAveraging::kPooled;
    cfg.tracking.iou_thresh = options->iou_threshold;
    const auto manifest = smot::load_manifest(gt_manifest);
    const auto report = smot::evaluate_dataset(manifest, pred_dir, cfg);
    std::string text = options->format == SMOT_FORMAT_DOC
                           ? smot::render_report_doc(report)
                           : smot::render_report_markdown(report);
    std::string warn;
    for (const auto& w : report.warnings) warn += w + "\n";
    char* body = to_buffer(text);
    if (warnings) {
      try {
        *warnings = to_buffer(warn);
      } catch (...) {
        std::free(body);
        throw;
      }
    }
    *out = body;
  });
}

int smot_report_render(const char* doc, size_t length, int format, char** out) {
  return guarded([&] {
    require((doc || length == 0) && out, "null argument");
    const auto report = smot::parse_report_doc(std::string_view(doc, length));
    require(format == SMOT_FORMAT_DOC || format == SMOT_FORMAT_MARKDOWN,
            "report supports the doc and markdown formats");
    *out = to_buffer(format == SMOT_FORMAT_DOC ? smot::render_report_doc(report)
                                               : smot::render_report_markdown(report));
  });
}

int smot_synth(const char* config_json, size_t length, const char* out_dir, char** summary) {
  return guarded([&] {
    require(config_json && out_dir, "null argument");
    const auto cfg = smot::parse_dataset_config(std::string_view(config_json, length));
    const auto s = smot::write_synthetic_dataset(cfg, out_dir);
    if (summary) {
      json j;
      j["manifest"] = s.manifest.string();
      j["videos"] = s.video_ids.size();
      j["boxes_dropped"] = s.counts.boxes_dropped;
      j["false_positives"] = s.counts.false_positives;
      j["swaps_applied"] = s.counts.swaps_applied;
      j["boxes_jittered"] = s.counts.boxes_jittered;
      j["caption_words_dropped"] = s.counts.caption_words_dropped;
      *summary = to_buffer(j.dump(2) + "\n");
    }
  });
}

void smot_fusion_options_default(smot_fusion_options* out) {
  if (!out) return;
  *out = {0, smot::kDefaultFeatureDim, smot::kDefaultFeatureDim, 4, 2, 3, 335, "attention"};
}

int smot_fusion_export(const smot_fusion_options* options, const char* out_path) {
  return guarded([&] {
    require(options && out_path, "null argument");
    smot::write_file(out_path, smot::encode_matrices(fusion_forward(*options)));
  });
}

int smot_matrix_file_describe(const char* path, char** out) {
  return guarded([&] {
    require(path && out, "null argument");
    const auto entries = smot::decode_matrices(smot::read_file(path));
    std::string text;
    for (const auto& [name, m] : entries) {
      text += name + ' ' + std::to_string(m.rows()) + ' ' + std::to_string(m.cols()) + '\n';
    }
    *out = to_buffer(text);
  });
}

}  // extern "C"
