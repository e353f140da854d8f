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

#include "smot/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "smot/embedded_data.hpp"
#include "smot/error.hpp"
#include "smot/text.hpp"

namespace smot {

EvalTasks parse_tasks(std::string_view csv) {
  EvalTasks t{false, false, false};
  std::size_t start = 0;
  bool any = false;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    const std::string_view item =
        trim(csv.substr(start, comma == std::string_view::npos ? csv.npos : comma - start));
    if (item == "tracking") t.tracking = true;
    else if (item == "captions") t.captions = true;
    else if (item == "interactions") t.interactions = true;
    else fail(ErrorCode::kInvalidArgument, "unknown task '" + std::string(item) + "'");
    any = true;
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (!any) fail(ErrorCode::kInvalidArgument, "no tasks selected");
  return t;
}

VideoEvaluation evaluate_video(const VideoAnnotation& gt, const VideoAnnotation& pred,
                               const EvalConfig& config) {
  VideoEvaluation v;
  v.video_id = gt.video_id;
  // The correspondence drives captions and interactions too.
  TrackingEvaluation te = evaluate_tracking(gt.trajectories, pred.trajectories,
                                            config.tracking);
  if (config.tasks.tracking) v.tracking = te.counts;
  if (config.tasks.captions) {
    v.video_pairs.push_back(make_caption_pair(pred.video_caption, gt.video_caption));
    v.instance_pairs = instance_caption_pairs(gt, pred, te.correspondence);
  }
  if (config.tasks.interactions) {
    const InteractionScores s =
        interaction_prf(gt.interactions, pred.interactions, te.correspondence);
    v.interactions = {s.tp, s.fp, s.fn};
  }
  return v;
}

namespace {

std::optional<CaptionScores> maybe_score(const std::vector<CaptionPair>& pairs,
                                         const CiderScorer& scorer,
                                         CaptionAveraging averaging, int bleu_n) {
  if (pairs.empty()) return std::nullopt;
  return score_captions(pairs, scorer, averaging, bleu_n);
}

std::vector<TokenSequence> references_of(const std::vector<VideoEvaluation>& videos,
                                         bool instance) {
  std::vector<TokenSequence> refs;
  for (const auto& v : videos) {
    for (const auto& p : instance ? v.instance_pairs : v.video_pairs) {
      refs.push_back(p.reference);
    }
  }
  return refs;
}

template <typename Fn>
void run_pool(std::size_t count, int jobs, Fn&& work) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
  std::vector<std::exception_ptr> errors(count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        work(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            work(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  // First failure in input order, whatever the scheduling.
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

MetricReport assemble_report(std::vector<VideoEvaluation> videos,
                             const EvalConfig& config) {
  std::sort(videos.begin(), videos.end(),
            [](const VideoEvaluation& a, const VideoEvaluation& b) {
              return a.video_id < b.video_id;
            });
  MetricReport r;
  r.tool_version = std::string(embedded::kVersion);
  r.config = config;

  // IDF tables are built once over the whole run and shared read-only.
  const CiderScorer video_scorer(references_of(videos, false), config.cider_n);
  const CiderScorer instance_scorer(references_of(videos, true), config.cider_n);

  std::vector<CaptionPair> all_video, all_instance;
  for (auto& v : videos) {
    VideoReport vr;
    vr.tracking = v.tracking.scores();
    if (config.tasks.captions) {
      vr.video_caption = maybe_score(v.video_pairs, video_scorer,
                                     CaptionAveraging::kPooled, config.bleu_n);
      vr.instance_caption = maybe_score(v.instance_pairs, instance_scorer,
                                        config.instance_averaging, config.bleu_n);
      all_video.insert(all_video.end(), v.video_pairs.begin(), v.video_pairs.end());
      all_instance.insert(all_instance.end(), v.instance_pairs.begin(),
                          v.instance_pairs.end());
    }
    vr.interaction = interaction_scores(v.interactions);
    r.pooled_counts += v.tracking;
    r.pooled_interaction_counts += v.interactions;
    vr.eval = std::move(v);
    r.videos.push_back(std::move(vr));
  }
  r.pooled_tracking = r.pooled_counts.scores();
  if (config.tasks.captions) {
    // Video captions: one pair per video, so corpus BLEU is the only sensible
    // pooling; instances follow the configured averaging.
    r.pooled_video_caption = maybe_score(all_video, video_scorer,
                                         CaptionAveraging::kPooled, config.bleu_n);
    r.pooled_instance_caption = maybe_score(all_instance, instance_scorer,
                                            config.instance_averaging, config.bleu_n);
  }
  r.pooled_interaction = interaction_scores(r.pooled_interaction_counts);
  return r;
}

MetricReport evaluate_dataset(const DatasetManifest& gt,
                              const std::filesystem::path& pred_dir,
                              const EvalConfig& config) {
  const std::size_t n = gt.entries.size();
  std::vector<VideoEvaluation> evals(n);
  std::vector<std::string> warnings(n);

  run_pool(n, config.jobs, [&](std::size_t i) {
    const ManifestEntry& e = gt.entries[i];
    ParseOptions gt_opts;
    gt_opts.strict = config.strict;
    gt_opts.kind = AnnotationKind::kGroundTruth;
    // Load errors already carry the file path.
    VideoAnnotation truth = load_video_annotation(e.annotation_path, gt_opts);
    truth.video_id = e.video_id;

    const auto pred_path = pred_dir / (e.video_id + ".pred");
    VideoAnnotation pred;
    bool missing = false;
    if (!std::filesystem::exists(pred_path)) {
      missing = true;
      pred.video_id = e.video_id;
      pred.width = truth.width;
      pred.height = truth.height;
      pred.frame_count = truth.frame_count;
      warnings[i] = "missing prediction for " + e.video_id + "; scored as empty";
    } else {
      ParseOptions p_opts;
      p_opts.strict = config.strict;
      p_opts.kind = AnnotationKind::kPrediction;
      pred = load_video_annotation(pred_path, p_opts);
    }
    VideoEvaluation v = evaluate_video(truth, pred, config);
    v.split = e.split;
    v.scenario = e.scenario;
    v.prediction_missing = missing;
    evals[i] = std::move(v);
  });

  MetricReport r = assemble_report(std::move(evals), config);
  std::vector<std::pair<std::string, std::string>> keyed;
  for (std::size_t i = 0; i < n; ++i) {
    if (!warnings[i].empty()) keyed.emplace_back(gt.entries[i].video_id, warnings[i]);
  }
  std::sort(keyed.begin(), keyed.end());
  for (auto& [id, w] : keyed) r.warnings.push_back(std::move(w));

  const auto echo = pred_dir / std::string(kTrackerEchoFile);
  if (std::filesystem::exists(echo)) {
    try {
      r.tracker_echo = nlohmann::json::parse(read_file(echo)).dump();
    } catch (const nlohmann::json::exception& ex) {
      fail(ErrorCode::kSyntax, echo.string() + ": " + ex.what());
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace {

using json = nlohmann::json;

json tracking_json(const TrackingScores& s) {
  json j;
  j["status"] = s.empty_gt ? "empty_gt" : "ok";
  j["HOTA"] = s.hota;
  j["AssA"] = s.assa;
  j["DetA"] = s.deta;
  j["LocA"] = s.loca;
  j["MOTA"] = s.empty_gt ? json(nullptr) : json(s.mota);
  j["FN"] = s.fn;
  j["FP"] = s.fp;
  j["IDs"] = s.idsw;
  j["IDR"] = s.idr;
  j["IDP"] = s.idp;
  j["IDF1"] = s.idf1;
  return j;
}

json counts_json(const TrackingCounts& c) {
  return {{"gt_boxes", c.clear.gt_boxes}, {"pred_boxes", c.clear.pred_boxes},
          {"tp", c.clear.tp},             {"fp", c.clear.fp},
          {"fn", c.clear.fn},             {"idsw", c.clear.idsw},
          {"idtp", c.id.idtp},            {"idfp", c.id.idfp},
          {"idfn", c.id.idfn}};
}

json caption_json(const std::optional<CaptionScores>& s) {
  if (!s) return nullptr;
  return {{"BLEU", s->bleu}, {"ROUGE", s->rouge}, {"METEOR", s->meteor}, {"CIDEr", s->cider}};
}

json interaction_json(const InteractionScores& s) {
  return {{"Prcn", s.precision}, {"Rcll", s.recall}, {"F1", s.f1},
          {"TP", s.tp},          {"FP", s.fp},       {"FN", s.fn}};
}

void fill_blocks(json& j, const EvalTasks& tasks, const TrackingScores& tracking,
                 const TrackingCounts& counts, const std::optional<CaptionScores>& video,
                 const std::optional<CaptionScores>& instance,
                 const InteractionScores& interaction) {
  if (tasks.tracking) {
    j["tracking"] = tracking_json(tracking);
    j["tracking_counts"] = counts_json(counts);
  }
  if (tasks.captions) {
    j["video_caption"] = caption_json(video);
    j["instance_caption"] = caption_json(instance);
  }
  if (tasks.interactions) j["interaction"] = interaction_json(interaction);
}

std::string tasks_text(const EvalTasks& t) {
  std::string s;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!s.empty()) s += ',';
    s += name;
  };
  add(t.tracking, "tracking");
  add(t.captions, "captions");
  add(t.interactions, "interactions");
  return s;
}

}  // namespace

std::string render_report_doc(const MetricReport& r) {
  json doc;
  doc["report_version"] = r.report_version;
  doc["tool_version"] = r.tool_version;
  json cfg;
  cfg["iou_threshold"] = r.config.tracking.iou_thresh;
  cfg["hota_alphas"] = r.config.tracking.alphas;
  cfg["tasks"] = tasks_text(r.config.tasks);
  cfg["bleu_n"] = r.config.bleu_n;
  cfg["cider_n"] = r.config.cider_n;
  cfg["rouge_beta"] = 1.2;
  cfg["instance_caption_averaging"] =
      r.config.instance_averaging == CaptionAveraging::kPooled ? "pooled" : "per_pair";
  cfg["strict"] = r.config.strict;
  if (r.tracker_echo) cfg["tracker"] = json::parse(*r.tracker_echo);
  doc["config"] = cfg;

  json pooled;
  pooled["video_count"] = r.videos.size();
  fill_blocks(pooled, r.config.tasks, r.pooled_tracking, r.pooled_counts,
              r.pooled_video_caption, r.pooled_instance_caption, r.pooled_interaction);
  doc["pooled"] = pooled;

  json videos = json::array();
  for (const auto& v : r.videos) {
    json j;
    j["video_id"] = v.eval.video_id;
    j["split"] = std::string(split_name(v.eval.split));
    j["scenario"] = v.eval.scenario;
    j["prediction"] = v.eval.prediction_missing ? "missing" : "ok";
    fill_blocks(j, r.config.tasks, v.tracking, v.eval.tracking, v.video_caption,
                v.instance_caption, v.interaction);
    videos.push_back(std::move(j));
  }
  doc["videos"] = videos;
  doc["warnings"] = r.warnings;
  return doc.dump(2) + "\n";
}

namespace {

std::string pct(double v) { return format_fixed(100.0 * v, 2); }
std::string frac(double v) { return format_fixed(v, 3); }

std::string tracking_row(const std::string& name, const TrackingScores& s) {
  std::ostringstream o;
  o << "| " << name << " | " << pct(s.hota) << " | " << pct(s.assa) << " | "
    << pct(s.deta) << " | " << pct(s.loca) << " | "
    << (s.empty_gt ? std::string("n/a") : pct(s.mota)) << " | " << s.fn << " | "
    << s.fp << " | " << s.idsw << " | " << pct(s.idr) << " | " << pct(s.idp)
    << " | " << pct(s.idf1) << " |\n";
  return o.str();
}

std::string caption_cells(const std::optional<CaptionScores>& s) {
  if (!s) return " n/a | n/a | n/a | n/a |";
  return " " + frac(s->bleu) + " | " + frac(s->rouge) + " | " + frac(s->meteor) +
         " | " + frac(s->cider) + " |";
}

}  // namespace

std::string render_report_markdown(const MetricReport& r) {
  std::ostringstream o;
  o << "# Evaluation report\n\n";
  o << "report_version " << r.report_version << ", tool " << r.tool_version
    << ", IoU threshold " << format_fixed(r.config.tracking.iou_thresh, 2)
    << ", tasks " << tasks_text(r.config.tasks) << "\n";
  if (r.tracker_echo) o << "\ntracker: `" << *r.tracker_echo << "`\n";

  if (r.config.tasks.tracking) {
    o << "\n## Tracking\n\n"
      << "| Video | HOTA | AssA | DetA | LocA | MOTA | FN | FP | IDs | IDR | IDP | IDF1 |\n"
      << "|---|---|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& v : r.videos) o << tracking_row(v.eval.video_id, v.tracking);
    o << tracking_row("**pooled**", r.pooled_tracking);
  }
  if (r.config.tasks.captions || r.config.tasks.interactions) {
    o << "\n## Semantics\n\n| Video |";
    std::string rule = "|---|";
    if (r.config.tasks.captions) {
      o << " Video BLEU | Video ROUGE | Video METEOR | Video CIDEr |"
           " Instance BLEU | Instance ROUGE | Instance METEOR | Instance CIDEr |";
      rule += "---|---|---|---|---|---|---|---|";
    }
    if (r.config.tasks.interactions) {
      o << " Prcn | Rcll | F1 |";
      rule += "---|---|---|";
    }
    o << "\n" << rule << "\n";
    auto row = [&](const std::string& name, const std::optional<CaptionScores>& vc,
                   const std::optional<CaptionScores>& ic, const InteractionScores& is) {
      o << "| " << name << " |";
      if (r.config.tasks.captions) o << caption_cells(vc) << caption_cells(ic);
      if (r.config.tasks.interactions) {
        o << " " << frac(is.precision) << " | " << frac(is.recall) << " | "
          << frac(is.f1) << " |";
      }
      o << "\n";
    };
    for (const auto& v : r.videos) {
      row(v.eval.video_id, v.video_caption, v.instance_caption, v.interaction);
    }
    row("**pooled**", r.pooled_video_caption, r.pooled_instance_caption,
        r.pooled_interaction);
  }
  if (!r.warnings.empty()) {
    o << "\n## Warnings\n\n";
    for (const auto& w : r.warnings) o << "- " << w << "\n";
  }
  return o.str();
}

// ---------------------------------------------------------------------------
// Parsing a rendered report
// ---------------------------------------------------------------------------

namespace {

TrackingScores tracking_from(const json& j) {
  TrackingScores s;
  s.empty_gt = j.at("status").get<std::string>() == "empty_gt";
  s.hota = j.at("HOTA").get<double>();
  s.assa = j.at("AssA").get<double>();
  s.deta = j.at("DetA").get<double>();
  s.loca = j.at("LocA").get<double>();
  s.mota = j.at("MOTA").is_null() ? 0.0 : j.at("MOTA").get<double>();
  s.fn = j.at("FN").get<std::int64_t>();
  s.fp = j.at("FP").get<std::int64_t>();
  s.idsw = j.at("IDs").get<std::int64_t>();
  s.idr = j.at("IDR").get<double>();
  s.idp = j.at("IDP").get<double>();
  s.idf1 = j.at("IDF1").get<double>();
  return s;
}

TrackingCounts counts_from(const json& j) {
  TrackingCounts c;
  c.clear.gt_boxes = j.at("gt_boxes").get<std::int64_t>();
  c.clear.pred_boxes = j.at("pred_boxes").get<std::int64_t>();
  c.clear.tp = j.at("tp").get<std::int64_t>();
  c.clear.fp = j.at("fp").get<std::int64_t>();
  c.clear.fn = j.at("fn").get<std::int64_t>();
  c.clear.idsw = j.at("idsw").get<std::int64_t>();
  c.id.idtp = j.at("idtp").get<std::int64_t>();
  c.id.idfp = j.at("idfp").get<std::int64_t>();
  c.id.idfn = j.at("idfn").get<std::int64_t>();
  return c;
}

std::optional<CaptionScores> caption_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return CaptionScores{j.at("BLEU").get<double>(), j.at("ROUGE").get<double>(),
                       j.at("METEOR").get<double>(), j.at("CIDEr").get<double>()};
}

InteractionScores interaction_from(const json& j) {
  InteractionScores s;
  s.precision = j.at("Prcn").get<double>();
  s.recall = j.at("Rcll").get<double>();
  s.f1 = j.at("F1").get<double>();
  s.tp = j.at("TP").get<std::int64_t>();
  s.fp = j.at("FP").get<std::int64_t>();
  s.fn = j.at("FN").get<std::int64_t>();
  return s;
}

}  // namespace

MetricReport parse_report_doc(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kSyntax, std::string("report: ") + e.what());
  }
  MetricReport r;
  try {
    r.report_version = doc.at("report_version").get<int>();
    if (r.report_version != kReportVersion) {
      fail(ErrorCode::kSchema,
           "unsupported report_version " + std::to_string(r.report_version));
    }
    r.tool_version = doc.at("tool_version").get<std::string>();
    const json& cfg = doc.at("config");
    r.config.tracking.iou_thresh = cfg.at("iou_threshold").get<double>();
    r.config.tracking.alphas = cfg.at("hota_alphas").get<std::vector<double>>();
    r.config.tasks = parse_tasks(cfg.at("tasks").get<std::string>());
    r.config.bleu_n = cfg.at("bleu_n").get<int>();
    r.config.cider_n = cfg.at("cider_n").get<int>();
    r.config.instance_averaging =
        cfg.at("instance_caption_averaging").get<std::string>() == "per_pair"
            ? CaptionAveraging::kPerPair
            : CaptionAveraging::kPooled;
    r.config.strict = cfg.at("strict").get<bool>();
    if (cfg.contains("tracker")) r.tracker_echo = cfg.at("tracker").dump();

    const EvalTasks& tasks = r.config.tasks;
    const json& pooled = doc.at("pooled");
    if (tasks.tracking) {
      r.pooled_tracking = tracking_from(pooled.at("tracking"));
      r.pooled_counts = counts_from(pooled.at("tracking_counts"));
    }
    if (tasks.captions) {
      r.pooled_video_caption = caption_from(pooled.at("video_caption"));
      r.pooled_instance_caption = caption_from(pooled.at("instance_caption"));
    }
    if (tasks.interactions) {
      r.pooled_interaction = interaction_from(pooled.at("interaction"));
      r.pooled_interaction_counts = {r.pooled_interaction.tp, r.pooled_interaction.fp,
                                     r.pooled_interaction.fn};
    }
    for (const json& j : doc.at("videos")) {
      VideoReport v;
      v.eval.video_id = j.at("video_id").get<std::string>();
      v.eval.split = j.at("split").get<std::string>() == "train" ? Split::kTrain
                                                                 : Split::kTest;
      v.eval.scenario = j.at("scenario").get<std::string>();
      v.eval.prediction_missing = j.at("prediction").get<std::string>() == "missing";
      if (tasks.tracking) {
        v.tracking = tracking_from(j.at("tracking"));
        v.eval.tracking = counts_from(j.at("tracking_counts"));
      }
      if (tasks.captions) {
        v.video_caption = caption_from(j.at("video_caption"));
        v.instance_caption = caption_from(j.at("instance_caption"));
      }
      if (tasks.interactions) {
        v.interaction = interaction_from(j.at("interaction"));
        v.eval.interactions = {v.interaction.tp, v.interaction.fp, v.interaction.fn};
      }
      r.videos.push_back(std::move(v));
    }
    r.warnings = doc.at("warnings").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kSchema, std::string("report: ") + e.what());
  }
  return r;
}

}  // namespace smot
