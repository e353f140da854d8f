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

#include "smot/annotation_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "smot/embedded_data.hpp"
#include "smot/error.hpp"
#include "smot/text.hpp"

namespace smot {

using json = nlohmann::json;

std::string format_fixed(double value, int digits) {
  if (value == 0.0) value = 0.0;  // drop the sign of -0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value,
                           std::chars_format::fixed, digits);
  if (res.ec != std::errc()) fail(ErrorCode::kRange, "number not printable");
  std::string out(buf, res.ptr);
  // Values that round to zero may still carry a '-'.
  if (out.front() == '-' &&
      out.find_first_not_of("-0.") == std::string::npos) {
    out.erase(0, 1);
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorCode::kIo, "cannot read '" + path.string() + "'");
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "short write to '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Annotation parsing
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void schema_error(const std::string& field,
                               const std::string& what) {
  fail(ErrorCode::kSchema, "field '" + field + "': " + what);
}

const json& require(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(key, "missing required field");
  return *it;
}

int as_int(const json& v, const std::string& field) {
  if (v.is_number_integer()) {
    const auto i = v.get<std::int64_t>();
    if (i < std::numeric_limits<int>::min() ||
        i > std::numeric_limits<int>::max()) {
      schema_error(field, "integer out of range");
    }
    return static_cast<int>(i);
  }
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::abs(d) < 2e9) return static_cast<int>(d);
  }
  schema_error(field, "expected an integer");
}

double as_double(const json& v, const std::string& field) {
  if (!v.is_number()) schema_error(field, "expected a number");
  return v.get<double>();
}

std::string as_string(const json& v, const std::string& field) {
  if (!v.is_string()) schema_error(field, "expected a string");
  return v.get<std::string>();
}

void warn_unknown(const json& obj, std::initializer_list<const char*> known,
                  const std::string& where, const ParseOptions& options) {
  if (!options.warnings) return;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const bool is_known = std::any_of(
        known.begin(), known.end(),
        [&](const char* k) { return it.key() == k; });
    if (!is_known) {
      options.warnings->push_back("ignored unknown field '" + where +
                                  it.key() + "'");
    }
  }
}

Trajectory parse_trajectory(const json& t, std::size_t index,
                            const ParseOptions& options) {
  const std::string where = "trajectories[" + std::to_string(index) + "]";
  if (!t.is_object()) schema_error(where, "expected an object");
  warn_unknown(t, {"track_id", "points"}, where + ".", options);
  Trajectory traj;
  traj.track_id = as_string(require(t, "track_id"), where + ".track_id");
  const json& pts = require(t, "points");
  if (!pts.is_array()) schema_error(where + ".points", "expected an array");
  traj.points.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::string pw = where + ".points[" + std::to_string(i) + "]";
    const json& p = pts[i];
    if (!p.is_array() || p.size() != 5) {
      schema_error(pw, "expected [frame, x, y, w, h]");
    }
    traj.points.push_back({as_int(p[0], pw),
                           {as_double(p[1], pw), as_double(p[2], pw),
                            as_double(p[3], pw), as_double(p[4], pw)}});
  }
  return traj;
}

}  // namespace

VideoAnnotation parse_video_annotation(std::string_view text,
                                       const ParseOptions& options) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kSyntax, e.what());
  }
  if (!doc.is_object()) fail(ErrorCode::kSyntax, "top level must be an object");

  warn_unknown(doc,
               {"video_id", "width", "height", "frame_count", "fps",
                "trajectories", "instance_captions", "interactions",
                "video_caption"},
               "", options);

  VideoAnnotation ann;
  ann.video_id = as_string(require(doc, "video_id"), "video_id");
  ann.width = as_int(require(doc, "width"), "width");
  ann.height = as_int(require(doc, "height"), "height");
  ann.frame_count = as_int(require(doc, "frame_count"), "frame_count");
  if (auto it = doc.find("fps"); it != doc.end() && !it->is_null()) {
    ann.fps = as_double(*it, "fps");
  }

  const json& trajs = require(doc, "trajectories");
  if (!trajs.is_array()) schema_error("trajectories", "expected an array");
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    ann.trajectories.push_back(parse_trajectory(trajs[i], i, options));
  }

  const json& caps = require(doc, "instance_captions");
  if (!caps.is_object()) schema_error("instance_captions", "expected an object");
  for (auto it = caps.begin(); it != caps.end(); ++it) {
    ann.instance_captions[it.key()] =
        as_string(it.value(), "instance_captions." + it.key());
  }

  const json& inters = require(doc, "interactions");
  if (!inters.is_array()) schema_error("interactions", "expected an array");
  for (std::size_t i = 0; i < inters.size(); ++i) {
    const std::string w = "interactions[" + std::to_string(i) + "]";
    const json& r = inters[i];
    if (!r.is_object()) schema_error(w, "expected an object");
    warn_unknown(r, {"subject", "predicate", "object"}, w + ".", options);
    const json& pred = require(r, "predicate");
    if (!pred.is_object()) schema_error(w + ".predicate", "expected an object");
    InteractionTriplet t;
    t.subject = as_string(require(r, "subject"), w + ".subject");
    t.object = as_string(require(r, "object"), w + ".object");
    t.predicate.lemma = as_string(require(pred, "lemma"), w + ".lemma");
    t.predicate.sense = as_int(require(pred, "sense"), w + ".sense");
    ann.interactions.push_back(std::move(t));
  }

  ann.video_caption = as_string(require(doc, "video_caption"), "video_caption");

  if (options.strict) {
    const ValidationReport report =
        validate_annotation(ann, {options.kind, options.vocabulary});
    if (report.has_errors()) {
      const Finding& first = *std::find_if(
          report.findings.begin(), report.findings.end(),
          [](const Finding& f) { return f.severity == Severity::kError; });
      fail(ErrorCode::kRange, first.code + " at " + first.location + ": " +
                                  first.message);
    }
  }
  return ann;
}

// ---------------------------------------------------------------------------
// Canonical serialization
// ---------------------------------------------------------------------------

VideoAnnotation canonicalize(VideoAnnotation ann) {
  std::stable_sort(ann.trajectories.begin(), ann.trajectories.end(),
                   [](const Trajectory& a, const Trajectory& b) {
                     return a.track_id < b.track_id;
                   });
  for (auto& t : ann.trajectories) {
    std::stable_sort(t.points.begin(), t.points.end(),
                     [](const TrackPoint& a, const TrackPoint& b) {
                       return a.frame < b.frame;
                     });
  }
  std::stable_sort(ann.interactions.begin(), ann.interactions.end());
  return ann;
}

namespace {

std::string quoted(const std::string& s) { return json(s).dump(); }

}  // namespace

std::string serialize_video_annotation(const VideoAnnotation& input) {
  const ValidationReport report =
      validate_annotation(input, {AnnotationKind::kPrediction, nullptr});
  if (report.has_errors()) {
    const Finding& first = *std::find_if(
        report.findings.begin(), report.findings.end(),
        [](const Finding& f) { return f.severity == Severity::kError; });
    fail(ErrorCode::kInvalidAnnotation,
         first.code + " at " + first.location + ": " + first.message);
  }
  const VideoAnnotation ann = canonicalize(input);

  std::string out;
  out += "{\n";
  if (ann.fps) out += "  \"fps\": " + format_fixed(*ann.fps) + ",\n";
  out += "  \"frame_count\": " + std::to_string(ann.frame_count) + ",\n";
  out += "  \"height\": " + std::to_string(ann.height) + ",\n";

  out += "  \"instance_captions\": {";
  if (ann.instance_captions.empty()) {
    out += "},\n";
  } else {
    out += "\n";
    std::size_t i = 0;
    for (const auto& [id, text] : ann.instance_captions) {
      out += "    " + quoted(id) + ": " + quoted(text);
      out += (++i < ann.instance_captions.size()) ? ",\n" : "\n";
    }
    out += "  },\n";
  }

  out += "  \"interactions\": [";
  if (ann.interactions.empty()) {
    out += "],\n";
  } else {
    out += "\n";
    for (std::size_t i = 0; i < ann.interactions.size(); ++i) {
      const auto& r = ann.interactions[i];
      out += "    {\"object\": " + quoted(r.object) +
             ", \"predicate\": {\"lemma\": " + quoted(r.predicate.lemma) +
             ", \"sense\": " + std::to_string(r.predicate.sense) +
             "}, \"subject\": " + quoted(r.subject) + "}";
      out += (i + 1 < ann.interactions.size()) ? ",\n" : "\n";
    }
    out += "  ],\n";
  }

  out += "  \"trajectories\": [";
  if (ann.trajectories.empty()) {
    out += "],\n";
  } else {
    out += "\n";
    for (std::size_t i = 0; i < ann.trajectories.size(); ++i) {
      const auto& t = ann.trajectories[i];
      out += "    {\n      \"points\": [\n";
      for (std::size_t j = 0; j < t.points.size(); ++j) {
        const auto& p = t.points[j];
        out += "        [" + std::to_string(p.frame) + ", " +
               format_fixed(p.box.x) + ", " + format_fixed(p.box.y) + ", " +
               format_fixed(p.box.w) + ", " + format_fixed(p.box.h) + "]";
        out += (j + 1 < t.points.size()) ? ",\n" : "\n";
      }
      out += "      ],\n      \"track_id\": " + quoted(t.track_id) + "\n    }";
      out += (i + 1 < ann.trajectories.size()) ? ",\n" : "\n";
    }
    out += "  ],\n";
  }

  out += "  \"video_caption\": " + quoted(ann.video_caption) + ",\n";
  out += "  \"video_id\": " + quoted(ann.video_id) + ",\n";
  out += "  \"width\": " + std::to_string(ann.width) + "\n";
  out += "}\n";
  return out;
}

VideoAnnotation load_video_annotation(const std::filesystem::path& path,
                                      const ParseOptions& options) {
  const std::string bytes = read_file(path);
  try {
    return parse_video_annotation(bytes, options);
  } catch (const Error& e) {
    fail(e.code(), path.string() + ": " + e.what());
  }
}

void save_video_annotation(const std::filesystem::path& path,
                           const VideoAnnotation& ann) {
  write_file(path, serialize_video_annotation(ann));
}

// ---------------------------------------------------------------------------
// Detections
// ---------------------------------------------------------------------------

namespace {

bool parse_number(std::string_view field, double& out) {
  field = trim(field);
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  auto res = std::from_chars(field.data(), field.data() + field.size(), out);
  return res.ec == std::errc() && res.ptr == field.data() + field.size() &&
         std::isfinite(out);
}

}  // namespace

DetectionsByFrame parse_detections(std::string_view text,
                                   const DetectionParseOptions& options) {
  DetectionsByFrame out;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = trim(lines[i]);
    if (line.empty()) continue;
    const std::string lineno = "line " + std::to_string(i + 1);

    auto reject = [&](ErrorCode code, const std::string& why) {
      if (options.strict) fail(code, lineno + ": " + why);
      if (options.warnings) options.warnings->push_back(lineno + ": " + why);
    };

    double v[6];
    std::size_t n = 0;
    std::size_t start = 0;
    bool ok = true;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string_view field = line.substr(
          start, comma == std::string_view::npos ? std::string_view::npos
                                                 : comma - start);
      if (n >= 6 || !parse_number(field, v[n])) {
        ok = false;
        break;
      }
      ++n;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!ok || n != 6) {
      reject(ErrorCode::kSyntax, "expected 'frame,x,y,w,h,score'");
      continue;
    }
    if (std::floor(v[0]) != v[0] || v[0] < 1 || v[0] > 1e9) {
      reject(ErrorCode::kSyntax, "frame must be an integer >= 1");
      continue;
    }
    if (v[3] <= 0.0 || v[4] <= 0.0) {
      reject(ErrorCode::kNegativeSize, "box width and height must be > 0");
      continue;
    }
    if (v[5] < 0.0 || v[5] > 1.0) {
      reject(ErrorCode::kRange, "score must lie in [0, 1]");
      continue;
    }
    const int frame = static_cast<int>(v[0]) - 1;
    out[frame].push_back({frame, {v[1], v[2], v[3], v[4]}, v[5]});
  }
  return out;
}

std::string serialize_detections(const DetectionsByFrame& dets) {
  std::string out;
  for (const auto& [frame, list] : dets) {
    for (const auto& d : list) {
      out += std::to_string(frame + 1) + "," + format_fixed(d.box.x) + "," +
             format_fixed(d.box.y) + "," + format_fixed(d.box.w) + "," +
             format_fixed(d.box.h) + "," + format_fixed(d.score) + "\n";
    }
  }
  return out;
}

std::size_t detection_count(const DetectionsByFrame& dets) {
  std::size_t n = 0;
  for (const auto& [frame, list] : dets) n += list.size();
  return n;
}

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

InteractionVocabulary parse_vocabulary(std::string_view text) {
  std::vector<InteractionVocabulary::Entry> entries;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const std::string lineno = "vocabulary line " + std::to_string(i + 1);
    const std::size_t sp1 = line.find_first_of(" \t");
    if (sp1 == std::string_view::npos) {
      fail(ErrorCode::kSyntax, lineno + ": expected 'lemma sense gloss'");
    }
    std::string_view rest = trim(line.substr(sp1));
    const std::size_t sp2 = rest.find_first_of(" \t");
    std::string_view sense_text = rest.substr(0, sp2);
    if (sense_text.rfind("v.", 0) == 0) sense_text.remove_prefix(2);
    int sense = 0;
    auto res = std::from_chars(sense_text.data(),
                               sense_text.data() + sense_text.size(), sense);
    if (res.ec != std::errc() ||
        res.ptr != sense_text.data() + sense_text.size() || sense < 1) {
      fail(ErrorCode::kSyntax, lineno + ": sense index must be a positive integer");
    }
    InteractionVocabulary::Entry e;
    e.sense = {std::string(line.substr(0, sp1)), sense};
    e.gloss = sp2 == std::string_view::npos ? std::string()
                                            : std::string(trim(rest.substr(sp2)));
    for (const auto& prev : entries) {
      if (prev.sense == e.sense) {
        fail(ErrorCode::kSyntax, lineno + ": duplicate entry " +
                                     e.sense.to_string());
      }
    }
    entries.push_back(std::move(e));
  }
  return InteractionVocabulary(std::move(entries));
}

const InteractionVocabulary& sample_vocabulary() {
  static const InteractionVocabulary vocab =
      parse_vocabulary(embedded::kInteractionVocabularySample);
  return vocab;
}

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

std::string_view split_name(Split s) {
  return s == Split::kTrain ? "train" : "test";
}

std::size_t DatasetManifest::count(Split s) const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(),
                    [s](const ManifestEntry& e) { return e.split == s; }));
}

const ManifestEntry* DatasetManifest::find(std::string_view video_id) const {
  for (const auto& e : entries) {
    if (e.video_id == video_id) return &e;
  }
  return nullptr;
}

DatasetManifest parse_manifest(std::string_view text,
                               const std::filesystem::path& root,
                               bool strict) {
  DatasetManifest m;
  m.root = root;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = lines[i];
    if (trim(line).empty() || trim(line).front() == '#') continue;
    const std::string lineno = "manifest line " + std::to_string(i + 1);
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      fields.push_back(trim(line.substr(
          start, tab == std::string_view::npos ? std::string_view::npos
                                               : tab - start)));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 4 || fields[0].empty() || fields[1].empty()) {
      fail(ErrorCode::kSyntax,
           lineno + ": expected video_id<TAB>path<TAB>scenario<TAB>split");
    }
    ManifestEntry e;
    e.video_id = std::string(fields[0]);
    std::filesystem::path p{std::string(fields[1])};
    e.annotation_path = p.is_absolute() ? p : root / p;
    e.scenario = std::string(fields[2]);
    if (fields[3] == "train") {
      e.split = Split::kTrain;
    } else if (fields[3] == "test") {
      e.split = Split::kTest;
    } else {
      fail(ErrorCode::kSyntax, lineno + ": split must be 'train' or 'test'");
    }
    if (m.find(e.video_id)) {
      fail(ErrorCode::kSyntax, lineno + ": duplicate video_id '" +
                                   e.video_id + "'");
    }
    if (strict && !std::filesystem::exists(e.annotation_path)) {
      fail(ErrorCode::kMissingFile,
           lineno + ": '" + e.annotation_path.string() + "' does not exist");
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path, bool strict) {
  const std::string text = read_file(path);
  std::filesystem::path root = path.parent_path();
  if (root.empty()) root = ".";
  return parse_manifest(text, root, strict);
}

std::string serialize_manifest(const DatasetManifest& manifest) {
  std::string out;
  for (const auto& e : manifest.entries) {
    std::filesystem::path p = e.annotation_path;
    if (!manifest.root.empty()) {
      const auto rel = p.lexically_relative(manifest.root);
      if (!rel.empty() && rel.native().rfind("..", 0) != 0) p = rel;
    }
    out += e.video_id + "\t" + p.generic_string() + "\t" + e.scenario + "\t" +
           std::string(split_name(e.split)) + "\n";
  }
  return out;
}

}  // namespace smot
