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

#include <algorithm>
#include <cmath>
#include <vector>

#include <json.hpp>

#include "smot/annotation_io.hpp"
#include "smot/embedded_data.hpp"
#include "smot/error.hpp"
#include "smot/text.hpp"

namespace smot {

using json = nlohmann::json;

void Histogram::add(double value) {
  const auto bin = static_cast<std::int64_t>(std::floor(value / bin_width));
  ++bins[bin];
}

std::int64_t Histogram::mass() const {
  std::int64_t m = 0;
  for (const auto& [bin, count] : bins) m += count;
  return m;
}

Histogram& Histogram::operator+=(const Histogram& other) {
  if (bin_width != other.bin_width) {
    fail(ErrorCode::kInvalidArgument, "cannot merge histograms with different bins");
  }
  for (const auto& [bin, count] : other.bins) bins[bin] += count;
  return *this;
}

StatsReport& StatsReport::operator+=(const StatsReport& o) {
  video_count += o.video_count;
  train_videos += o.train_videos;
  test_videos += o.test_videos;
  total_frames += o.total_frames;
  total_tracks += o.total_tracks;
  total_boxes += o.total_boxes;
  total_interactions += o.total_interactions;
  total_instance_captions += o.total_instance_captions;
  total_video_captions += o.total_video_captions;
  timed_videos += o.timed_videos;
  total_length_ms += o.total_length_ms;
  if (o.min_length_ms) {
    min_length_ms = min_length_ms ? std::min(*min_length_ms, *o.min_length_ms)
                                  : *o.min_length_ms;
  }
  if (o.max_length_ms) {
    max_length_ms = max_length_ms ? std::max(*max_length_ms, *o.max_length_ms)
                                  : *o.max_length_ms;
  }
  untimed_videos += o.untimed_videos;
  trajectory_length_s += o.trajectory_length_s;
  sequence_length_s += o.sequence_length_s;
  trajectory_length_frames += o.trajectory_length_frames;
  sequence_length_frames += o.sequence_length_frames;
  interactions_per_sequence += o.interactions_per_sequence;
  instance_caption_words += o.instance_caption_words;
  video_caption_words += o.video_caption_words;
  for (const auto& [word, count] : o.word_frequency) word_frequency[word] += count;
  return *this;
}

std::string_view default_prepositions_text() {
  return embedded::kPrepositions;
}

std::set<std::string> parse_word_list(std::string_view text) {
  std::set<std::string> words;
  for (std::string_view line : split_lines(text)) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    for (auto& tok : tokenize(line)) words.insert(std::move(tok));
  }
  return words;
}

namespace {

void count_words(const TokenSequence& tokens,
                 const std::set<std::string>& excluded,
                 std::map<std::string, std::int64_t>& freq) {
  for (const auto& t : tokens) {
    if (!excluded.count(t)) ++freq[t];
  }
}

}  // namespace

StatsReport video_stats(const VideoAnnotation& ann, Split split,
                        const std::set<std::string>& excluded_words) {
  StatsReport s;
  s.video_count = 1;
  (split == Split::kTrain ? s.train_videos : s.test_videos) = 1;
  s.total_frames = ann.frame_count;
  s.total_tracks = static_cast<std::int64_t>(ann.trajectories.size());
  s.total_boxes = static_cast<std::int64_t>(ann.box_count());
  s.total_interactions = static_cast<std::int64_t>(ann.interactions.size());
  s.total_video_captions = trim(ann.video_caption).empty() ? 0 : 1;

  if (ann.fps) {
    const double fps = *ann.fps;
    const double seconds = ann.frame_count / fps;
    const auto ms = static_cast<std::int64_t>(std::llround(seconds * 1000.0));
    s.timed_videos = 1;
    s.total_length_ms = ms;
    s.min_length_ms = ms;
    s.max_length_ms = ms;
    s.sequence_length_s.add(seconds);
    for (const auto& t : ann.trajectories) {
      if (t.points.empty()) continue;
      const int span = t.points.back().frame - t.points.front().frame + 1;
      s.trajectory_length_s.add(span / fps);
    }
  } else {
    s.untimed_videos = 1;
    s.sequence_length_frames.add(ann.frame_count);
    for (const auto& t : ann.trajectories) {
      if (t.points.empty()) continue;
      s.trajectory_length_frames.add(t.points.back().frame -
                                     t.points.front().frame + 1);
    }
  }
  s.interactions_per_sequence.add(static_cast<double>(ann.interactions.size()));

  for (const auto& [id, text] : ann.instance_captions) {
    const TokenSequence tokens = tokenize(text);
    if (tokens.empty()) continue;
    ++s.total_instance_captions;
    s.instance_caption_words.add(static_cast<double>(tokens.size()));
    count_words(tokens, excluded_words, s.word_frequency);
  }
  const TokenSequence vtokens = tokenize(ann.video_caption);
  s.video_caption_words.add(static_cast<double>(vtokens.size()));
  count_words(vtokens, excluded_words, s.word_frequency);
  return s;
}

StatsReport dataset_stats(const DatasetManifest& manifest,
                          const StatsOptions& options) {
  const std::set<std::string> excluded =
      options.excluded_words ? *options.excluded_words
                             : parse_word_list(default_prepositions_text());
  ParseOptions popts;
  popts.strict = options.strict;
  StatsReport total;
  for (const auto& entry : manifest.entries) {
    const VideoAnnotation ann =
        load_video_annotation(entry.annotation_path, popts);
    total += video_stats(ann, entry.split, excluded);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Report documents
// ---------------------------------------------------------------------------

namespace {

constexpr int kStatsVersion = 1;

json histogram_json(const Histogram& h) {
  json bins = json::array();
  for (const auto& [bin, count] : h.bins) bins.push_back({bin, count});
  return {{"bin_width", h.bin_width}, {"bins", bins}};
}

Histogram histogram_from(const json& j) {
  Histogram h;
  h.bin_width = j.at("bin_width").get<double>();
  for (const auto& b : j.at("bins")) {
    h.bins[b.at(0).get<std::int64_t>()] = b.at(1).get<std::int64_t>();
  }
  return h;
}

std::vector<std::pair<std::string, std::int64_t>> ranked_words(
    const StatsReport& s) {
  std::vector<std::pair<std::string, std::int64_t>> words(
      s.word_frequency.begin(), s.word_frequency.end());
  std::stable_sort(words.begin(), words.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;
  });
  return words;
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

std::string render_stats_doc(const StatsReport& s) {
  json words = json::array();
  for (const auto& [word, count] : ranked_words(s)) words.push_back({word, count});
  json doc = {
      {"stats_version", kStatsVersion},
      {"video_count", s.video_count},
      {"train_videos", s.train_videos},
      {"test_videos", s.test_videos},
      {"total_frames", s.total_frames},
      {"total_tracks", s.total_tracks},
      {"total_boxes", s.total_boxes},
      {"total_interactions", s.total_interactions},
      {"total_instance_captions", s.total_instance_captions},
      {"total_video_captions", s.total_video_captions},
      {"timed_videos", s.timed_videos},
      {"total_length_ms", s.total_length_ms},
      {"min_length_ms", optional_json(s.min_length_ms)},
      {"max_length_ms", optional_json(s.max_length_ms)},
      {"untimed_videos", s.untimed_videos},
      {"histograms",
       {{"trajectory_length_s", histogram_json(s.trajectory_length_s)},
        {"sequence_length_s", histogram_json(s.sequence_length_s)},
        {"trajectory_length_frames", histogram_json(s.trajectory_length_frames)},
        {"sequence_length_frames", histogram_json(s.sequence_length_frames)},
        {"interactions_per_sequence",
         histogram_json(s.interactions_per_sequence)},
        {"instance_caption_words", histogram_json(s.instance_caption_words)},
        {"video_caption_words", histogram_json(s.video_caption_words)}}},
      {"word_frequency", words},
  };
  return doc.dump(2) + "\n";
}

StatsReport parse_stats_doc(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kSyntax, e.what());
  }
  try {
    if (doc.at("stats_version").get<int>() != kStatsVersion) {
      fail(ErrorCode::kSchema, "unsupported stats_version");
    }
    StatsReport s;
    s.video_count = doc.at("video_count").get<std::int64_t>();
    s.train_videos = doc.at("train_videos").get<std::int64_t>();
    s.test_videos = doc.at("test_videos").get<std::int64_t>();
    s.total_frames = doc.at("total_frames").get<std::int64_t>();
    s.total_tracks = doc.at("total_tracks").get<std::int64_t>();
    s.total_boxes = doc.at("total_boxes").get<std::int64_t>();
    s.total_interactions = doc.at("total_interactions").get<std::int64_t>();
    s.total_instance_captions =
        doc.at("total_instance_captions").get<std::int64_t>();
    s.total_video_captions = doc.at("total_video_captions").get<std::int64_t>();
    s.timed_videos = doc.at("timed_videos").get<std::int64_t>();
    s.total_length_ms = doc.at("total_length_ms").get<std::int64_t>();
    if (!doc.at("min_length_ms").is_null()) {
      s.min_length_ms = doc.at("min_length_ms").get<std::int64_t>();
    }
    if (!doc.at("max_length_ms").is_null()) {
      s.max_length_ms = doc.at("max_length_ms").get<std::int64_t>();
    }
    s.untimed_videos = doc.at("untimed_videos").get<std::int64_t>();
    const json& h = doc.at("histograms");
    s.trajectory_length_s = histogram_from(h.at("trajectory_length_s"));
    s.sequence_length_s = histogram_from(h.at("sequence_length_s"));
    s.trajectory_length_frames = histogram_from(h.at("trajectory_length_frames"));
    s.sequence_length_frames = histogram_from(h.at("sequence_length_frames"));
    s.interactions_per_sequence =
        histogram_from(h.at("interactions_per_sequence"));
    s.instance_caption_words = histogram_from(h.at("instance_caption_words"));
    s.video_caption_words = histogram_from(h.at("video_caption_words"));
    for (const auto& w : doc.at("word_frequency")) {
      s.word_frequency[w.at(0).get<std::string>()] = w.at(1).get<std::int64_t>();
    }
    return s;
  } catch (const json::exception& e) {
    fail(ErrorCode::kSchema, e.what());
  }
}

namespace {

void histogram_table(std::string& out, const std::string& title,
                     const std::string& unit, const Histogram& h) {
  if (h.bins.empty()) return;
  out += "\n### " + title + "\n\n| " + unit + " | count |\n|---:|---:|\n";
  for (const auto& [bin, count] : h.bins) {
    const double lo = bin * h.bin_width;
    out += "| " + format_fixed(lo, h.bin_width >= 1.0 ? 0 : 2) + " | " +
           std::to_string(count) + " |\n";
  }
}

}  // namespace

std::string render_stats_markdown(const StatsReport& s, std::size_t top_words) {
  std::string out = "## Dataset summary\n\n| field | value |\n|---|---:|\n";
  auto row = [&out](const std::string& k, const std::string& v) {
    out += "| " + k + " | " + v + " |\n";
  };
  row("Videos", std::to_string(s.video_count));
  row("Train / test", std::to_string(s.train_videos) + " / " +
                          std::to_string(s.test_videos));
  if (s.timed_videos > 0) {
    row("Min. length (s)", format_fixed(*s.min_length_ms / 1000.0, 1));
    row("Avg. length (s)",
        format_fixed(s.total_length_ms / 1000.0 / s.timed_videos, 1));
    row("Max. length (s)", format_fixed(*s.max_length_ms / 1000.0, 1));
    row("Total length (s)", format_fixed(s.total_length_ms / 1000.0, 0));
  }
  if (s.untimed_videos > 0) row("Videos without fps", std::to_string(s.untimed_videos));
  row("Total tracks", std::to_string(s.total_tracks));
  row("Total boxes", std::to_string(s.total_boxes));
  row("Total frames", std::to_string(s.total_frames));
  row("Instance captions", std::to_string(s.total_instance_captions));
  row("Instance interactions", std::to_string(s.total_interactions));
  row("Video summaries", std::to_string(s.total_video_captions));

  histogram_table(out, "Trajectory length", "seconds", s.trajectory_length_s);
  histogram_table(out, "Sequence length", "seconds", s.sequence_length_s);
  histogram_table(out, "Trajectory length (no fps)", "frames",
                  s.trajectory_length_frames);
  histogram_table(out, "Sequence length (no fps)", "frames",
                  s.sequence_length_frames);
  histogram_table(out, "Interactions per sequence", "interactions",
                  s.interactions_per_sequence);
  histogram_table(out, "Instance caption length", "words",
                  s.instance_caption_words);
  histogram_table(out, "Video caption length", "words", s.video_caption_words);

  const auto words = ranked_words(s);
  if (!words.empty()) {
    out += "\n### Most frequent words\n\n| word | count |\n|---|---:|\n";
    for (std::size_t i = 0; i < words.size() && i < top_words; ++i) {
      out += "| " + words[i].first + " | " + std::to_string(words[i].second) +
             " |\n";
    }
  }
  return out;
}

}  // namespace smot
