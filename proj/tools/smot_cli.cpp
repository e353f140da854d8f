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

// smot command-line tool. Talks to the library through smot.h only.
//
// Exit codes: 0 success, 1 domain or validation failure, 2 I/O failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "smot/smot.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitIo = 2;

struct BufferDeleter {
  void operator()(char* p) const { smot_buffer_free(p); }
};
using Buffer = std::unique_ptr<char, BufferDeleter>;

struct AnnotationDeleter {
  void operator()(smot_annotation* p) const { smot_annotation_free(p); }
};

int exit_for(int status) {
  if (status == SMOT_OK) return kExitOk;
  return status == SMOT_ERR_IO || status == SMOT_ERR_MISSING_FILE ? kExitIo : kExitDomain;
}

int report_failure(const char* what, int status) {
  std::cerr << "smot " << what << ": " << smot_status_name(status) << ": "
            << smot_last_error() << "\n";
  return exit_for(status);
}

std::optional<std::string> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) return std::nullopt;
  return ss.str();
}

// Writes to `path`, or stdout when empty. Returns an exit code.
int emit(const std::string& path, const char* text) {
  if (path.empty() || path == "-") {
    std::fputs(text, stdout);
    return std::fflush(stdout) == 0 ? kExitOk : kExitIo;
  }
  std::error_code ec;
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) {
    std::cerr << "smot: cannot write " << path << "\n";
    return kExitIo;
  }
  return kExitOk;
}

int format_code(const std::string& name) {
  if (name == "lines") return SMOT_FORMAT_LINES;
  if (name == "doc") return SMOT_FORMAT_DOC;
  return SMOT_FORMAT_MARKDOWN;  // "markdown" or "markdown-table"
}

int jobs_from_env(int fallback) {
  const char* env = std::getenv("SMOT_JOBS");
  if (!env || !*env) return fallback;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) {
    std::cerr << "smot: ignoring SMOT_JOBS='" << env << "'\n";
    return fallback;
  }
  return static_cast<int>(v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic multi-object tracking toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(smot_version()));

  // validate
  std::string validate_path, validate_format = "lines";
  auto* validate = app.add_subcommand("validate", "Check an annotation file or a manifest");
  validate->add_option("path", validate_path, "Annotation (.json/.pred) or manifest (.tsv)")
      ->required();
  validate->add_option("--format", validate_format)
      ->check(CLI::IsMember({"lines", "doc"}));

  // stats
  std::string stats_manifest, stats_format = "doc", stats_out;
  auto* stats = app.add_subcommand("stats", "Dataset statistics");
  stats->add_option("--manifest", stats_manifest)->required();
  stats->add_option("--format", stats_format)
      ->check(CLI::IsMember({"doc", "markdown", "markdown-table"}));
  stats->add_option("--out", stats_out, "Output file (default stdout)");

  // track
  std::string track_dets, track_config, track_out, track_algo, track_video_id;
  std::optional<double> tau_p, tau_high, iou_gate;
  std::optional<int> max_lost, min_points;
  auto* track = app.add_subcommand("track", "Run BYTE or SORT over a detection file");
  track->add_option("--detections", track_dets)->required();
  track->add_option("--config", track_config, "JSON tracker config");
  track->add_option("--algo", track_algo)->check(CLI::IsMember({"byte", "sort"}));
  track->add_option("--tau-p", tau_p);
  track->add_option("--tau-high", tau_high);
  track->add_option("--max-lost", max_lost);
  track->add_option("--iou-gate", iou_gate);
  track->add_option("--min-points", min_points);
  track->add_option("--video-id", track_video_id);
  track->add_option("--out", track_out, "Prediction document to write")->required();

  // eval
  std::string eval_gt, eval_pred, eval_tasks = "tracking,captions,interactions",
                                  eval_format = "doc", eval_out;
  int eval_jobs = 1;
  bool eval_lenient = false, eval_per_pair = false;
  double eval_iou = 0.5;
  auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
  eval->add_option("--gt", eval_gt, "Ground-truth manifest")->required();
  eval->add_option("--pred", eval_pred, "Directory of <video_id>.pred files")->required();
  eval->add_option("--tasks", eval_tasks);
  eval->add_option("--format", eval_format)
      ->check(CLI::IsMember({"doc", "markdown", "markdown-table"}));
  eval->add_option("--jobs", eval_jobs)->check(CLI::PositiveNumber);
  eval->add_option("--out", eval_out, "Output file (default stdout)");
  eval->add_option("--iou", eval_iou, "Box match threshold for CLEAR and ID metrics");
  eval->add_flag("--lenient", eval_lenient, "Accept documents that fail validation");
  eval->add_flag("--per-pair-instance", eval_per_pair,
                 "Average instance-caption BLEU per track instead of pooling");

  // synth
  std::string synth_config, synth_out;
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset");
  synth->add_option("--config", synth_config, "JSON dataset config")->required();
  synth->add_option("--out", synth_out, "Output directory")->required();

  // report
  std::string report_in, report_format = "markdown-table", report_out;
  auto* report = app.add_subcommand("report", "Re-render a report document");
  report->add_option("--in", report_in)->required();
  report->add_option("--format", report_format)
      ->check(CLI::IsMember({"doc", "markdown", "markdown-table"}));
  report->add_option("--out", report_out);

  // fusion
  smot_fusion_options fusion_opts;
  smot_fusion_options_default(&fusion_opts);
  std::string fusion_variant = fusion_opts.variant, fusion_out, fusion_describe;
  auto* fusion = app.add_subcommand("fusion", "Seeded fusion forward pass to a matrix file");
  fusion->add_option("--seed", fusion_opts.seed);
  fusion->add_option("--dim", fusion_opts.dim);
  fusion->add_option("--hidden", fusion_opts.hidden);
  fusion->add_option("--frames", fusion_opts.frames);
  fusion->add_option("--targets", fusion_opts.targets);
  fusion->add_option("--track-len", fusion_opts.track_len);
  fusion->add_option("--classes", fusion_opts.classes);
  fusion->add_option("--variant", fusion_variant)
      ->check(CLI::IsMember({"attention", "mlp", "concatenation", "addition"}));
  auto* fusion_out_opt = fusion->add_option("--out", fusion_out, "Matrix container to write");
  auto* describe_opt =
      fusion->add_option("--describe", fusion_describe, "List the entries of a container");
  fusion_out_opt->excludes(describe_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitDomain;
  }

  if (*validate) {
    char* raw = nullptr;
    size_t errors = 0;
    const int st = smot_validate_path(validate_path.c_str(), format_code(validate_format),
                                      &raw, &errors);
    if (st != SMOT_OK) return report_failure("validate", st);
    Buffer out(raw);
    if (const int rc = emit("", out.get()); rc != kExitOk) return rc;
    return errors == 0 ? kExitOk : kExitDomain;
  }

  if (*stats) {
    char* raw = nullptr;
    const int st = smot_stats(stats_manifest.c_str(), format_code(stats_format), &raw);
    if (st != SMOT_OK) return report_failure("stats", st);
    Buffer out(raw);
    return emit(stats_out, out.get());
  }

  if (*track) {
    smot_tracker_options opts;
    smot_tracker_options_default(&opts);
    smot_video_meta meta{nullptr, 0, 0, 0, 0.0};
    if (!track_config.empty()) {
      const auto text = slurp(track_config);
      if (!text) {
        std::cerr << "smot track: cannot read " << track_config << "\n";
        return kExitIo;
      }
      const int st = smot_tracker_options_from_json(text->data(), text->size(), &opts, &meta);
      if (st != SMOT_OK) return report_failure("track", st);
    }
    // Flags win over the config file.
    if (!track_algo.empty()) opts.algorithm = track_algo == "sort" ? SMOT_ALGO_SORT : SMOT_ALGO_BYTE;
    if (tau_p) opts.tau_p = *tau_p;
    if (tau_high) opts.tau_high = *tau_high;
    if (max_lost) opts.max_lost = *max_lost;
    if (iou_gate) opts.iou_gate = *iou_gate;
    if (min_points) opts.min_points = *min_points;
    if (!track_video_id.empty()) meta.video_id = track_video_id.c_str();

    smot_annotation* raw_ann = nullptr;
    smot_track_summary summary{};
    int st = smot_track_file(track_dets.c_str(), &opts, &meta, &raw_ann, &summary);
    if (st != SMOT_OK) return report_failure("track", st);
    std::unique_ptr<smot_annotation, AnnotationDeleter> ann(raw_ann);
    st = smot_annotation_save(ann.get(), track_out.c_str());
    if (st != SMOT_OK) return report_failure("track", st);

    char* echo_raw = nullptr;
    st = smot_tracker_options_to_json(&opts, &echo_raw);
    if (st != SMOT_OK) return report_failure("track", st);
    Buffer echo(echo_raw);
    const auto echo_path =
        std::filesystem::path(track_out).parent_path() / "tracker_config.json";
    if (const int rc = emit(echo_path.string(), (std::string(echo.get()) + "\n").c_str());
        rc != kExitOk) {
      return rc;
    }
    std::printf("detections %zu tracks %zu boxes %zu\n", summary.detections, summary.tracks,
                summary.boxes);
    return kExitOk;
  }

  if (*eval) {
    smot_eval_options opts;
    smot_eval_options_default(&opts);
    opts.tasks = eval_tasks.c_str();
    opts.format = format_code(eval_format);
    opts.jobs = jobs_from_env(eval_jobs);
    opts.strict = eval_lenient ? 0 : 1;
    opts.per_pair_instance_captions = eval_per_pair ? 1 : 0;
    opts.iou_threshold = eval_iou;
    char* raw = nullptr;
    char* warn_raw = nullptr;
    const int st = smot_eval(eval_gt.c_str(), eval_pred.c_str(), &opts, &raw, &warn_raw);
    if (st != SMOT_OK) return report_failure("eval", st);
    Buffer out(raw), warnings(warn_raw);
    if (warnings && *warnings.get()) std::cerr << "warning: " << warnings.get();
    return emit(eval_out, out.get());
  }

  if (*synth) {
    const auto text = slurp(synth_config);
    if (!text) {
      std::cerr << "smot synth: cannot read " << synth_config << "\n";
      return kExitIo;
    }
    char* raw = nullptr;
    const int st = smot_synth(text->data(), text->size(), synth_out.c_str(), &raw);
    if (st != SMOT_OK) return report_failure("synth", st);
    Buffer out(raw);
    return emit("", out.get());
  }

  if (*report) {
    const auto text = slurp(report_in);
    if (!text) {
      std::cerr << "smot report: cannot read " << report_in << "\n";
      return kExitIo;
    }
    char* raw = nullptr;
    const int st =
        smot_report_render(text->data(), text->size(), format_code(report_format), &raw);
    if (st != SMOT_OK) return report_failure("report", st);
    Buffer out(raw);
    return emit(report_out, out.get());
  }

  if (*fusion) {
    if (!fusion_describe.empty()) {
      char* raw = nullptr;
      const int st = smot_matrix_file_describe(fusion_describe.c_str(), &raw);
      if (st != SMOT_OK) return report_failure("fusion", st);
      Buffer out(raw);
      return emit("", out.get());
    }
    if (fusion_out.empty()) {
      std::cerr << "smot fusion: one of --out or --describe is required\n";
      return kExitDomain;
    }
    fusion_opts.variant = fusion_variant.c_str();
    const int st = smot_fusion_export(&fusion_opts, fusion_out.c_str());
    if (st != SMOT_OK) return report_failure("fusion", st);
    std::printf("wrote %s\n", fusion_out.c_str());
    return kExitOk;
  }
  return kExitDomain;
}
