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

#include "smot/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "smot/embedded_data.hpp"
#include "smot/error.hpp"
#include "smot/rng.hpp"
#include "smot/text.hpp"

namespace smot {

// ---------------------------------------------------------------------------
// Grammar
// ---------------------------------------------------------------------------

namespace {

bool is_symbol(std::string_view t) {
  return t.size() > 2 && t.front() == '<' && t.back() == '>';
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

CaptionGrammar CaptionGrammar::parse(std::string_view text) {
  CaptionGrammar g;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const std::string where = "grammar line " + std::to_string(i + 1);
    const std::size_t arrow = line.find("::=");
    if (arrow == std::string_view::npos) fail(ErrorCode::kSyntax, where + ": missing '::='");
    const std::string lhs(trim(line.substr(0, arrow)));
    if (!is_symbol(lhs)) fail(ErrorCode::kSyntax, where + ": rule name must be <name>");
    auto& alts = g.rules_[lhs];
    if (!alts.empty()) fail(ErrorCode::kSyntax, where + ": duplicate rule " + lhs);
    std::string_view rhs = line.substr(arrow + 3);
    while (true) {
      const std::size_t bar = rhs.find('|');
      auto alt = words(rhs.substr(0, bar));
      if (alt.empty()) fail(ErrorCode::kSyntax, where + ": empty alternative");
      alts.push_back(std::move(alt));
      if (bar == std::string_view::npos) break;
      rhs.remove_prefix(bar + 1);
    }
  }
  return g;
}

const CaptionGrammar& CaptionGrammar::builtin() {
  static const CaptionGrammar g = parse(embedded::kCaptionGrammar);
  return g;
}

bool CaptionGrammar::has_rule(const std::string& symbol) const {
  return rules_.count(symbol) != 0;
}

std::string CaptionGrammar::expand(const std::string& symbol,
                                   const std::map<std::string, std::string>& bound,
                                   std::uint64_t seed, std::uint64_t stream) const {
  const CounterRng rng(seed, stream);
  std::uint64_t counter = 0;
  std::vector<std::string> out;
  auto rec = [&](auto&& self, const std::string& sym, int depth) -> void {
    if (depth > 32) fail(ErrorCode::kInvalidArgument, "grammar recursion too deep");
    if (auto b = bound.find(sym); b != bound.end()) {
      out.push_back(b->second);
      return;
    }
    auto it = rules_.find(sym);
    if (it == rules_.end()) fail(ErrorCode::kInvalidArgument, "unknown grammar symbol " + sym);
    const auto& alts = it->second;
    const auto& alt = alts[rng.bits(counter++) % alts.size()];
    for (const auto& tok : alt) {
      if (is_symbol(tok)) self(self, tok, depth + 1);
      else out.push_back(tok);
    }
  };
  rec(rec, symbol, 0);
  std::string joined;
  for (const auto& w : out) {
    if (!joined.empty()) joined.push_back(' ');
    joined += w;
  }
  return joined;
}

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

namespace {

constexpr double kGrid = 64.0;

double quantize(double v) { return std::round(v * kGrid) / kGrid; }
double quantize_down(double v) { return std::floor(v * kGrid) / kGrid; }

enum Stream : std::uint64_t {
  kMotionStream = 1,        // + target index
  kSceneStream = 90,
  kVideoCaptionStream = 91,
  kInteractionStream = 92,
  kCaptionStream = 1000,    // + target index
  kDropStream = 11,
  kJitterStream = 12,
  kFalsePositiveStream = 13,
  kWordDropStream = 14,
};

const char* const kScenes[] = {"street", "park", "square", "mall", "station", "campus"};

std::string count_word(int n) {
  static const char* const names[] = {
      "no", "one", "two", "three", "four", "five", "six", "seven", "eight",
      "nine", "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
      "sixteen", "seventeen", "eighteen", "nineteen", "twenty"};
  if (n >= 0 && n <= 20) return names[n];
  return std::to_string(n);
}

std::string direction_word(double vx, double vy) {
  if (vx == 0.0 && vy == 0.0) return "in place";
  if (std::abs(vx) >= std::abs(vy)) return vx < 0.0 ? "left" : "right";
  return vy < 0.0 ? "up" : "down";
}

bool motion_fits(const TargetMotion& m, const ScenarioConfig& cfg) {
  const double last = static_cast<double>(cfg.frame_count - 1);
  for (double t : {0.0, last}) {
    const double x = m.x + m.vx * t;
    const double y = m.y + m.vy * t;
    if (x < 0.0 || y < 0.0 || x + cfg.box_width > cfg.width ||
        y + cfg.box_height > cfg.height) {
      return false;
    }
  }
  return true;
}

// One axis of a seeded motion: velocity bounded so that some start fits.
std::pair<double, double> draw_axis(const CounterRng& rng, std::uint64_t counter,
                                    double extent, double size, double max_speed,
                                    int frames) {
  const double room = extent - size;
  const double span = static_cast<double>(frames - 1);
  const double vmax = span > 0.0 ? std::min(max_speed, room / span) : max_speed;
  double v = quantize_down(rng.uniform(counter, -vmax, vmax));
  if (std::abs(v) * span > room) v = 0.0;
  const double lo = std::max(0.0, -v * span);
  const double hi = std::min(room, room - v * span);
  const double start = lo + quantize_down(rng.uniform01(counter + 1) * (hi - lo));
  return {start, v};
}

}  // namespace

std::string synth_track_id(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "t%03d", index + 1);
  return buf;
}

Scenario generate_scenario(const ScenarioConfig& cfg) {
  if (cfg.frame_count < 1 || cfg.width < 1 || cfg.height < 1 || cfg.target_count < 0 ||
      !(cfg.fps > 0.0) || !(cfg.max_speed >= 0.0) || cfg.random_interactions < 0 ||
      !(cfg.detection_score >= 0.0 && cfg.detection_score <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "invalid scenario configuration");
  }
  const double bw = quantize(cfg.box_width);
  const double bh = quantize(cfg.box_height);
  if (!(bw > 0.0) || !(bh > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "box size must be positive");
  }
  if (bw > cfg.width || bh > cfg.height) {
    fail(ErrorCode::kInfeasibleMotion, "box does not fit inside the frame");
  }
  if (!cfg.motions.empty() &&
      cfg.motions.size() != static_cast<std::size_t>(cfg.target_count)) {
    fail(ErrorCode::kInvalidArgument, "motions must list every target");
  }
  ScenarioConfig q = cfg;
  q.box_width = bw;
  q.box_height = bh;

  Scenario out;
  VideoAnnotation& gt = out.ground_truth;
  gt.video_id = cfg.video_id;
  gt.width = cfg.width;
  gt.height = cfg.height;
  gt.frame_count = cfg.frame_count;
  gt.fps = cfg.fps;

  const auto& grammar = CaptionGrammar::builtin();
  for (int i = 0; i < cfg.target_count; ++i) {
    TargetMotion m;
    if (!cfg.motions.empty()) {
      const auto& e = cfg.motions[static_cast<std::size_t>(i)];
      m = {quantize(e.x), quantize(e.y), quantize(e.vx), quantize(e.vy)};
      if (!motion_fits(m, q)) {
        fail(ErrorCode::kInfeasibleMotion,
             "target " + synth_track_id(i) + " leaves the frame");
      }
    } else {
      const CounterRng rng(cfg.seed, kMotionStream + static_cast<std::uint64_t>(i));
      std::tie(m.x, m.vx) = draw_axis(rng, 0, cfg.width, bw, cfg.max_speed, cfg.frame_count);
      std::tie(m.y, m.vy) = draw_axis(rng, 2, cfg.height, bh, cfg.max_speed, cfg.frame_count);
    }
    Trajectory t;
    t.track_id = synth_track_id(i);
    for (int f = 0; f < cfg.frame_count; ++f) {
      const BoundingBox box{m.x + m.vx * f, m.y + m.vy * f, bw, bh};
      t.points.push_back({f, box});
      out.detections[f].push_back({f, box, cfg.detection_score});
    }
    gt.instance_captions[t.track_id] =
        grammar.expand("<instance>", {{"<direction>", direction_word(m.vx, m.vy)}},
                       cfg.seed, kCaptionStream + static_cast<std::uint64_t>(i));
    gt.trajectories.push_back(std::move(t));
  }

  out.scene = cfg.scene;
  if (out.scene.empty()) {
    const CounterRng rng(cfg.seed, kSceneStream);
    out.scene = kScenes[rng.bits(0) % std::size(kScenes)];
  }
  gt.video_caption = grammar.expand(
      "<video>", {{"<count>", count_word(cfg.target_count)}, {"<scene>", out.scene}},
      cfg.seed, kVideoCaptionStream);

  std::set<InteractionTriplet> triplets;
  for (const auto& tr : cfg.interactions) {
    if (!gt.find_track(tr.subject) || !gt.find_track(tr.object) ||
        tr.subject == tr.object) {
      fail(ErrorCode::kInvalidArgument,
           "scripted interaction must join two distinct generated tracks");
    }
    triplets.insert(tr);
  }
  if (cfg.random_interactions > 0) {
    if (cfg.target_count < 2) {
      fail(ErrorCode::kInvalidArgument, "random interactions need two targets");
    }
    const auto& vocab = sample_vocabulary().entries();
    const CounterRng rng(cfg.seed, kInteractionStream);
    const auto n = static_cast<std::uint64_t>(cfg.target_count);
    int added = 0;
    for (std::uint64_t k = 0;
         added < cfg.random_interactions && k < 64ull * static_cast<std::uint64_t>(cfg.random_interactions);
         ++k) {
      const auto s = rng.bits(3 * k) % n;
      const auto o = rng.bits(3 * k + 1) % n;
      if (s == o) continue;
      InteractionTriplet tr{synth_track_id(static_cast<int>(s)),
                            vocab[rng.bits(3 * k + 2) % vocab.size()].sense,
                            synth_track_id(static_cast<int>(o))};
      if (triplets.insert(tr).second) ++added;
    }
  }
  gt.interactions.assign(triplets.begin(), triplets.end());
  return out;
}

// ---------------------------------------------------------------------------
// Perturbations
// ---------------------------------------------------------------------------

Perturbed perturb(const VideoAnnotation& gt, const PerturbationConfig& p) {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(p.drop_rate) || !unit(p.fp_rate) || !unit(p.caption_word_drop) ||
      !(p.jitter_px >= 0.0)) {
    fail(ErrorCode::kInvalidArgument, "perturbation rates must lie in [0, 1]");
  }
  Perturbed out;
  VideoAnnotation& pred = out.prediction;
  pred = gt;
  PerturbationCounts& counts = out.counts;

  // Drops, addressed by ground-truth identity.
  std::set<std::pair<TrackId, int>> drop;
  for (const auto& r : p.drop_boxes) drop.insert({r.track, r.frame});
  if (p.drop_rate > 0.0) {
    const CounterRng rng(p.seed, kDropStream);
    std::uint64_t k = 0;
    for (const auto& t : pred.trajectories) {
      for (const auto& pt : t.points) {
        if (rng.uniform01(k++) < p.drop_rate) drop.insert({t.track_id, pt.frame});
      }
    }
  }
  for (auto& t : pred.trajectories) {
    const auto before = t.points.size();
    std::erase_if(t.points, [&](const TrackPoint& pt) {
      return drop.count({t.track_id, pt.frame}) != 0;
    });
    counts.boxes_dropped += static_cast<std::int64_t>(before - t.points.size());
  }

  for (const auto& s : p.id_swaps) {
    auto find = [&](const TrackId& id) -> Trajectory* {
      for (auto& t : pred.trajectories) {
        if (t.track_id == id) return &t;
      }
      return nullptr;
    };
    Trajectory* a = find(s.a);
    Trajectory* b = find(s.b);
    if (!a || !b || a == b) continue;
    auto split = [&](std::vector<TrackPoint>& pts) {
      auto it = std::lower_bound(pts.begin(), pts.end(), s.frame,
                                 [](const TrackPoint& x, int f) { return x.frame < f; });
      std::vector<TrackPoint> tail(it, pts.end());
      pts.erase(it, pts.end());
      return tail;
    };
    auto tail_a = split(a->points);
    auto tail_b = split(b->points);
    a->points.insert(a->points.end(), tail_b.begin(), tail_b.end());
    b->points.insert(b->points.end(), tail_a.begin(), tail_a.end());
    ++counts.swaps_applied;
  }

  const double w_frame = pred.width;
  const double h_frame = pred.height;
  if (p.jitter_px > 0.0) {
    const CounterRng rng(p.seed, kJitterStream);
    std::uint64_t k = 0;
    for (auto& t : pred.trajectories) {
      for (auto& pt : t.points) {
        const double j = p.jitter_px;
        BoundingBox b = pt.box;
        const double dx = quantize(rng.uniform(4 * k, -j, j));
        const double dy = quantize(rng.uniform(4 * k + 1, -j, j));
        const double dw = quantize(rng.uniform(4 * k + 2, -j, j));
        const double dh = quantize(rng.uniform(4 * k + 3, -j, j));
        ++k;
        b.w = std::clamp(b.w + dw, std::min(1.0, w_frame), w_frame);
        b.h = std::clamp(b.h + dh, std::min(1.0, h_frame), h_frame);
        b.x = std::clamp(b.x + dx, 0.0, w_frame - b.w);
        b.y = std::clamp(b.y + dy, 0.0, h_frame - b.h);
        pt.box = b;
        ++counts.boxes_jittered;
      }
    }
  }

  if (p.fp_rate > 0.0) {
    const CounterRng rng(p.seed, kFalsePositiveStream);
    std::map<int, std::vector<BoundingBox>> occupied;
    for (const VideoAnnotation* side : {&gt, static_cast<const VideoAnnotation*>(&pred)}) {
      for (const auto& t : side->trajectories) {
        for (const auto& pt : t.points) occupied[pt.frame].push_back(pt.box);
      }
    }
    int serial = 0;
    for (int f = 0; f < pred.frame_count; ++f) {
      const auto base = static_cast<std::uint64_t>(f) * 64;
      if (rng.uniform01(base) >= p.fp_rate) continue;
      auto& boxes = occupied[f];
      const double bw = quantize(std::min(48.0, w_frame));
      const double bh = quantize(std::min(96.0, h_frame));
      for (std::uint64_t attempt = 0; attempt < 16; ++attempt) {
        const BoundingBox cand{
            quantize_down(rng.uniform01(base + 1 + 2 * attempt) * (w_frame - bw)),
            quantize_down(rng.uniform01(base + 2 + 2 * attempt) * (h_frame - bh)), bw, bh};
        const bool clear = std::all_of(boxes.begin(), boxes.end(), [&](const BoundingBox& o) {
          return iou(cand, o) < 0.1;
        });
        if (!clear) continue;
        char id[16];
        std::snprintf(id, sizeof(id), "fp%05d", ++serial);
        pred.trajectories.push_back({id, {{f, cand}}});
        boxes.push_back(cand);
        ++counts.false_positives;
        break;
      }
    }
  }

  // Tracks emptied by drops disappear with their semantics.
  std::set<TrackId> gone;
  for (const auto& t : pred.trajectories) {
    if (t.points.empty()) gone.insert(t.track_id);
  }
  std::erase_if(pred.trajectories, [](const Trajectory& t) { return t.points.empty(); });
  for (const auto& id : gone) pred.instance_captions.erase(id);
  std::erase_if(pred.interactions, [&](const InteractionTriplet& tr) {
    return gone.count(tr.subject) || gone.count(tr.object);
  });

  if (p.caption_word_drop > 0.0) {
    const CounterRng rng(p.seed, kWordDropStream);
    std::uint64_t k = 0;
    auto thin = [&](std::string& caption) {
      std::string kept;
      for (const auto& w : words(caption)) {
        if (rng.uniform01(k++) < p.caption_word_drop) {
          ++counts.caption_words_dropped;
          continue;
        }
        if (!kept.empty()) kept.push_back(' ');
        kept += w;
      }
      caption = kept;
    };
    for (auto& [id, caption] : pred.instance_captions) thin(caption);
    thin(pred.video_caption);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dataset config and writer
// ---------------------------------------------------------------------------

namespace {

using json = nlohmann::json;

void check_keys(const json& obj, std::initializer_list<const char*> known,
                const std::string& where) {
  if (!obj.is_object()) fail(ErrorCode::kSchema, where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(known.begin(), known.end(),
                     [&](const char* k) { return key == k; }) == known.end()) {
      fail(ErrorCode::kSchema, where + ": unknown field '" + key + "'");
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::kSchema, std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

DatasetConfig parse_dataset_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kSyntax, std::string("config: ") + e.what());
  }
  check_keys(doc,
             {"prefix", "videos", "train_fraction", "seed", "frame_count", "fps",
              "width", "height", "targets", "box_width", "box_height", "max_speed",
              "scene", "interactions_per_video", "detection_score",
              "write_predictions", "perturbation"},
             "config");
  DatasetConfig cfg;
  ScenarioConfig& s = cfg.scenario;
  read(doc, "prefix", cfg.prefix);
  read(doc, "videos", cfg.videos);
  read(doc, "train_fraction", cfg.train_fraction);
  read(doc, "write_predictions", cfg.write_predictions);
  read(doc, "seed", s.seed);
  read(doc, "frame_count", s.frame_count);
  read(doc, "fps", s.fps);
  read(doc, "width", s.width);
  read(doc, "height", s.height);
  read(doc, "targets", s.target_count);
  read(doc, "box_width", s.box_width);
  read(doc, "box_height", s.box_height);
  read(doc, "max_speed", s.max_speed);
  read(doc, "scene", s.scene);
  read(doc, "interactions_per_video", s.random_interactions);
  read(doc, "detection_score", s.detection_score);

  if (doc.contains("perturbation")) {
    const json& p = doc.at("perturbation");
    check_keys(p,
               {"seed", "drop_rate", "jitter_px", "fp_rate", "caption_word_drop",
                "drop", "id_swaps"},
               "perturbation");
    PerturbationConfig& pc = cfg.perturbation;
    read(p, "seed", pc.seed);
    read(p, "drop_rate", pc.drop_rate);
    read(p, "jitter_px", pc.jitter_px);
    read(p, "fp_rate", pc.fp_rate);
    read(p, "caption_word_drop", pc.caption_word_drop);
    if (p.contains("drop")) {
      for (const auto& d : p.at("drop")) {
        check_keys(d, {"track", "frame"}, "perturbation.drop[]");
        BoxRef r;
        read(d, "track", r.track);
        read(d, "frame", r.frame);
        pc.drop_boxes.push_back(r);
      }
    }
    if (p.contains("id_swaps")) {
      for (const auto& d : p.at("id_swaps")) {
        check_keys(d, {"frame", "a", "b"}, "perturbation.id_swaps[]");
        IdSwap w;
        read(d, "frame", w.frame);
        read(d, "a", w.a);
        read(d, "b", w.b);
        pc.id_swaps.push_back(w);
      }
    }
  }
  if (cfg.videos < 0 || !(cfg.train_fraction >= 0.0 && cfg.train_fraction <= 1.0)) {
    fail(ErrorCode::kRange, "videos must be >= 0 and train_fraction in [0, 1]");
  }
  return cfg;
}

DatasetSummary write_synthetic_dataset(const DatasetConfig& cfg,
                                       const std::filesystem::path& out_dir) {
  DatasetSummary summary;
  DatasetManifest manifest;
  manifest.root = out_dir;
  const int train = static_cast<int>(std::lround(cfg.videos * cfg.train_fraction));
  for (int i = 0; i < cfg.videos; ++i) {
    char id[64];
    std::snprintf(id, sizeof(id), "%s_%04d", cfg.prefix.c_str(), i);
    ScenarioConfig sc = cfg.scenario;
    sc.seed = splitmix64(cfg.scenario.seed + static_cast<std::uint64_t>(i));
    sc.video_id = id;
    const Scenario scenario = generate_scenario(sc);

    const auto ann_path = out_dir / "annotations" / (std::string(id) + ".json");
    save_video_annotation(ann_path, scenario.ground_truth);
    write_file(out_dir / "detections" / (std::string(id) + ".txt"),
               serialize_detections(scenario.detections));
    if (cfg.write_predictions) {
      PerturbationConfig pc = cfg.perturbation;
      pc.seed = splitmix64(cfg.perturbation.seed ^ (0xA5A5ull + static_cast<std::uint64_t>(i)));
      const Perturbed pred = perturb(scenario.ground_truth, pc);
      save_video_annotation(out_dir / "predictions" / (std::string(id) + ".pred"),
                            pred.prediction);
      summary.counts.boxes_dropped += pred.counts.boxes_dropped;
      summary.counts.false_positives += pred.counts.false_positives;
      summary.counts.swaps_applied += pred.counts.swaps_applied;
      summary.counts.boxes_jittered += pred.counts.boxes_jittered;
      summary.counts.caption_words_dropped += pred.counts.caption_words_dropped;
    }
    manifest.entries.push_back(
        {id, ann_path, scenario.scene, i < train ? Split::kTrain : Split::kTest});
    summary.video_ids.push_back(id);
  }
  summary.manifest = out_dir / "manifest.tsv";
  write_file(summary.manifest, serialize_manifest(manifest));
  return summary;
}

}  // namespace smot
