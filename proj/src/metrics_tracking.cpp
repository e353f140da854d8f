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

#include "smot/metrics_tracking.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "smot/assignment.hpp"
#include "smot/error.hpp"

namespace smot {

std::vector<double> default_hota_alphas() {
  std::vector<double> out;
  for (int i = 1; i <= 19; ++i) out.push_back(0.05 * i);
  return out;
}

namespace {

void check_threshold(double t, const char* what) {
  if (!(t > 0.0 && t <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, std::string(what) + " must lie in (0, 1]");
  }
}

// Tracks in id order, so results do not depend on list order.
std::vector<const Trajectory*> sorted_tracks(const std::vector<Trajectory>& ts) {
  std::vector<const Trajectory*> out;
  out.reserve(ts.size());
  for (const auto& t : ts) out.push_back(&t);
  std::stable_sort(out.begin(), out.end(),
                   [](const Trajectory* a, const Trajectory* b) {
                     return a->track_id < b->track_id;
                   });
  return out;
}

struct FrameView {
  std::vector<std::size_t> gt;    // track indices
  std::vector<BoundingBox> gt_box;
  std::vector<std::size_t> pred;
  std::vector<BoundingBox> pred_box;

  double sim(std::size_t i, std::size_t j) const {
    return iou(gt_box[i], pred_box[j]);
  }
};

std::map<int, FrameView> frame_views(const std::vector<const Trajectory*>& gt,
                                     const std::vector<const Trajectory*>& pred) {
  std::map<int, FrameView> frames;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    for (const auto& p : gt[i]->points) {
      auto& f = frames[p.frame];
      f.gt.push_back(i);
      f.gt_box.push_back(p.box);
    }
  }
  for (std::size_t j = 0; j < pred.size(); ++j) {
    for (const auto& p : pred[j]->points) {
      auto& f = frames[p.frame];
      f.pred.push_back(j);
      f.pred_box.push_back(p.box);
    }
  }
  return frames;
}

std::int64_t box_count(const std::vector<Trajectory>& ts) {
  std::int64_t n = 0;
  for (const auto& t : ts) n += static_cast<std::int64_t>(t.points.size());
  return n;
}

void require_boxes(const VideoAnnotation& gt) {
  if (gt.box_count() == 0) {
    fail(ErrorCode::kEmptyGroundTruth,
         "ground truth of '" + gt.video_id + "' has no boxes");
  }
}

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

// ---------------------------------------------------------------------------
// CLEAR
// ---------------------------------------------------------------------------

std::optional<double> ClearCounts::mota() const {
  if (gt_boxes == 0) return std::nullopt;
  return 1.0 - static_cast<double>(fn + fp + idsw) / static_cast<double>(gt_boxes);
}

ClearCounts& ClearCounts::operator+=(const ClearCounts& o) {
  gt_boxes += o.gt_boxes;
  pred_boxes += o.pred_boxes;
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  idsw += o.idsw;
  return *this;
}

ClearCounts clear_counts(const std::vector<Trajectory>& gt_tracks,
                         const std::vector<Trajectory>& pred_tracks,
                         double iou_thresh) {
  check_threshold(iou_thresh, "iou_thresh");
  const auto gt = sorted_tracks(gt_tracks);
  const auto pred = sorted_tracks(pred_tracks);

  ClearCounts counts;
  constexpr long kNone = -1;
  std::vector<long> last_match(gt.size(), kNone);   // last pred ever matched
  std::vector<long> prev_match(gt.size(), kNone);   // pred matched at frame-1
  int prev_frame = 0;
  bool have_prev = false;

  for (const auto& [frame, view] : frame_views(gt, pred)) {
    const bool consecutive = have_prev && frame == prev_frame + 1;
    const std::size_t ng = view.gt.size();
    const std::size_t np = view.pred.size();
    counts.gt_boxes += static_cast<std::int64_t>(ng);
    counts.pred_boxes += static_cast<std::int64_t>(np);

    std::vector<long> gt_to(ng, kNone);
    std::vector<char> pred_used(np, 0);

    // Pairs from the previous frame keep priority while they still overlap.
    if (consecutive) {
      for (std::size_t i = 0; i < ng; ++i) {
        const long want = prev_match[view.gt[i]];
        if (want == kNone) continue;
        for (std::size_t j = 0; j < np; ++j) {
          if (static_cast<long>(view.pred[j]) != want || pred_used[j]) continue;
          if (view.sim(i, j) >= iou_thresh) {
            gt_to[i] = static_cast<long>(j);
            pred_used[j] = 1;
          }
          break;
        }
      }
    }

    std::vector<std::size_t> rows, cols;
    for (std::size_t i = 0; i < ng; ++i) {
      if (gt_to[i] == kNone) rows.push_back(i);
    }
    for (std::size_t j = 0; j < np; ++j) {
      if (!pred_used[j]) cols.push_back(j);
    }
    if (!rows.empty() && !cols.empty()) {
      CostMatrix cost(rows.size(), cols.size(), 1.0);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
          const double s = view.sim(rows[r], cols[c]);
          cost(r, c) = 1.0 - s;
          if (s < iou_thresh) cost.forbid(r, c);
        }
      }
      for (const auto& [r, c] : hungarian_assign(cost)) {
        gt_to[rows[r]] = static_cast<long>(cols[c]);
      }
    }

    std::fill(prev_match.begin(), prev_match.end(), kNone);
    std::int64_t matched = 0;
    for (std::size_t i = 0; i < ng; ++i) {
      if (gt_to[i] == kNone) continue;
      ++matched;
      const std::size_t g = view.gt[i];
      const long p = static_cast<long>(view.pred[static_cast<std::size_t>(gt_to[i])]);
      if (last_match[g] != kNone && last_match[g] != p) ++counts.idsw;
      last_match[g] = p;
      prev_match[g] = p;
    }
    counts.tp += matched;
    counts.fn += static_cast<std::int64_t>(ng) - matched;
    counts.fp += static_cast<std::int64_t>(np) - matched;
    prev_frame = frame;
    have_prev = true;
  }
  return counts;
}

ClearScores clear_metrics(const VideoAnnotation& gt,
                          const std::vector<Trajectory>& pred,
                          double iou_thresh) {
  require_boxes(gt);
  const ClearCounts c = clear_counts(gt.trajectories, pred, iou_thresh);
  return {*c.mota(), c.fp, c.fn, c.idsw, c.gt_boxes};
}

// ---------------------------------------------------------------------------
// Identity metrics
// ---------------------------------------------------------------------------

double IdCounts::idp() const {
  return ratio(static_cast<double>(idtp), static_cast<double>(idtp + idfp));
}
double IdCounts::idr() const {
  return ratio(static_cast<double>(idtp), static_cast<double>(idtp + idfn));
}
double IdCounts::idf1() const {
  return ratio(2.0 * static_cast<double>(idtp),
               static_cast<double>(2 * idtp + idfp + idfn));
}

IdCounts& IdCounts::operator+=(const IdCounts& o) {
  idtp += o.idtp;
  idfp += o.idfp;
  idfn += o.idfn;
  return *this;
}

const TrackId* TrajectoryCorrespondence::pred_for(const TrackId& gt) const {
  for (const auto& p : pairs) {
    if (p.gt == gt) return &p.pred;
  }
  return nullptr;
}

const TrackId* TrajectoryCorrespondence::gt_for(const TrackId& pred) const {
  for (const auto& p : pairs) {
    if (p.pred == pred) return &p.gt;
  }
  return nullptr;
}

IdResult id_counts(const std::vector<Trajectory>& gt_tracks,
                   const std::vector<Trajectory>& pred_tracks,
                   double iou_thresh) {
  check_threshold(iou_thresh, "iou_thresh");
  const auto gt = sorted_tracks(gt_tracks);
  const auto pred = sorted_tracks(pred_tracks);
  const std::size_t ng = gt.size();
  const std::size_t np = pred.size();

  std::vector<std::int64_t> overlap(ng * np, 0);
  for (const auto& [frame, view] : frame_views(gt, pred)) {
    for (std::size_t i = 0; i < view.gt.size(); ++i) {
      for (std::size_t j = 0; j < view.pred.size(); ++j) {
        if (view.sim(i, j) >= iou_thresh) ++overlap[view.gt[i] * np + view.pred[j]];
      }
    }
  }

  IdResult result;
  const std::int64_t gt_total = box_count(gt_tracks);
  const std::int64_t pred_total = box_count(pred_tracks);

  if (ng > 0 && np > 0) {
    // Square problem with a bench row per prediction and a bench column per
    // ground-truth track, so either side may stay unmatched.
    CostMatrix cost(ng + np, np + ng, 0.0);
    for (std::size_t g = 0; g < ng; ++g) {
      const auto len_g = static_cast<double>(gt[g]->points.size());
      for (std::size_t p = 0; p < np; ++p) {
        const auto len_p = static_cast<double>(pred[p]->points.size());
        const auto o = static_cast<double>(overlap[g * np + p]);
        cost(g, p) = (len_g - o) + (len_p - o);
      }
      for (std::size_t b = 0; b < ng; ++b) {
        if (b == g) cost(g, np + b) = len_g;
        else cost.forbid(g, np + b);
      }
    }
    for (std::size_t b = 0; b < np; ++b) {
      for (std::size_t p = 0; p < np; ++p) {
        if (b == p) cost(ng + b, p) = static_cast<double>(pred[p]->points.size());
        else cost.forbid(ng + b, p);
      }
    }
    for (const auto& [r, c] : hungarian_assign(cost)) {
      if (r >= ng || c >= np) continue;
      const std::int64_t o = overlap[r * np + c];
      if (o == 0) continue;
      result.counts.idtp += o;
      result.correspondence.pairs.push_back({gt[r]->track_id, pred[c]->track_id, o});
    }
  }
  result.counts.idfn = gt_total - result.counts.idtp;
  result.counts.idfp = pred_total - result.counts.idtp;
  return result;
}

IdScores id_metrics(const VideoAnnotation& gt,
                    const std::vector<Trajectory>& pred, double iou_thresh) {
  require_boxes(gt);
  IdResult r = id_counts(gt.trajectories, pred, iou_thresh);
  return {r.counts.idp(), r.counts.idr(), r.counts.idf1(), r.counts,
          std::move(r.correspondence)};
}

// ---------------------------------------------------------------------------
// HOTA
// ---------------------------------------------------------------------------

HotaCounts& HotaCounts::operator+=(const HotaCounts& o) {
  if (alphas.empty() && per_alpha.empty()) {
    *this = o;
    return *this;
  }
  if (alphas != o.alphas) {
    fail(ErrorCode::kDimMismatch, "HOTA counts use different alpha lists");
  }
  for (std::size_t a = 0; a < per_alpha.size(); ++a) {
    per_alpha[a].tp += o.per_alpha[a].tp;
    per_alpha[a].fn += o.per_alpha[a].fn;
    per_alpha[a].fp += o.per_alpha[a].fp;
    per_alpha[a].ass_sum += o.per_alpha[a].ass_sum;
    per_alpha[a].loc_sum += o.per_alpha[a].loc_sum;
  }
  return *this;
}

HotaScores HotaCounts::scores() const {
  HotaScores s;
  if (per_alpha.empty()) return s;
  for (const auto& c : per_alpha) {
    const double tp = static_cast<double>(c.tp);
    const double deta = tp / std::max(1.0, tp + static_cast<double>(c.fn + c.fp));
    const double assa = c.ass_sum / std::max(1.0, tp);
    s.deta += deta;
    s.assa += assa;
    s.hota += std::sqrt(deta * assa);
    // An empty true-positive set localizes perfectly by convention.
    s.loca += std::max(1e-10, c.loc_sum) / std::max(1e-10, tp);
  }
  const double n = static_cast<double>(per_alpha.size());
  s.hota /= n;
  s.deta /= n;
  s.assa /= n;
  s.loca /= n;
  return s;
}

HotaCounts hota_counts(const std::vector<Trajectory>& gt_tracks,
                       const std::vector<Trajectory>& pred_tracks,
                       const std::vector<double>& alphas) {
  if (alphas.empty()) fail(ErrorCode::kInvalidArgument, "empty alpha list");
  for (double a : alphas) check_threshold(a, "alpha");
  const auto gt = sorted_tracks(gt_tracks);
  const auto pred = sorted_tracks(pred_tracks);
  const std::size_t ng = gt.size();
  const std::size_t np = pred.size();
  const auto frames = frame_views(gt, pred);

  // Global alignment between every track pair, accumulated over frames.
  std::vector<double> potential(ng * np, 0.0);
  std::vector<double> gt_len(ng, 0.0), pred_len(np, 0.0);
  for (const auto& [frame, view] : frames) {
    const std::size_t fg = view.gt.size();
    const std::size_t fp = view.pred.size();
    std::vector<double> sim(fg * fp), row_sum(fg, 0.0), col_sum(fp, 0.0);
    for (std::size_t i = 0; i < fg; ++i) {
      for (std::size_t j = 0; j < fp; ++j) {
        sim[i * fp + j] = view.sim(i, j);
        row_sum[i] += sim[i * fp + j];
        col_sum[j] += sim[i * fp + j];
      }
    }
    for (std::size_t i = 0; i < fg; ++i) {
      for (std::size_t j = 0; j < fp; ++j) {
        const double s = sim[i * fp + j];
        const double denom = row_sum[i] + col_sum[j] - s;
        if (denom > 1e-12) potential[view.gt[i] * np + view.pred[j]] += s / denom;
      }
    }
    for (std::size_t g : view.gt) gt_len[g] += 1.0;
    for (std::size_t p : view.pred) pred_len[p] += 1.0;
  }
  std::vector<double> align(ng * np, 0.0);
  for (std::size_t g = 0; g < ng; ++g) {
    for (std::size_t p = 0; p < np; ++p) {
      const double m = potential[g * np + p];
      align[g * np + p] = m / (gt_len[g] + pred_len[p] - m);
    }
  }

  HotaCounts out;
  out.alphas = alphas;
  out.per_alpha.resize(alphas.size());
  std::vector<std::vector<std::int64_t>> match_count(
      alphas.size(), std::vector<std::int64_t>(ng * np, 0));

  for (const auto& [frame, view] : frames) {
    const std::size_t fg = view.gt.size();
    const std::size_t fp = view.pred.size();
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      auto& c = out.per_alpha[a];
      std::int64_t tp = 0;
      if (fg > 0 && fp > 0) {
        CostMatrix cost(fg, fp, 0.0);
        for (std::size_t i = 0; i < fg; ++i) {
          for (std::size_t j = 0; j < fp; ++j) {
            const double s = view.sim(i, j);
            cost(i, j) = -align[view.gt[i] * np + view.pred[j]] * s;
            if (s < alphas[a]) cost.forbid(i, j);
          }
        }
        for (const auto& [i, j] : hungarian_assign(cost)) {
          ++tp;
          ++match_count[a][view.gt[i] * np + view.pred[j]];
          c.loc_sum += view.sim(i, j);
        }
      }
      c.tp += tp;
      c.fn += static_cast<std::int64_t>(fg) - tp;
      c.fp += static_cast<std::int64_t>(fp) - tp;
    }
  }

  for (std::size_t a = 0; a < alphas.size(); ++a) {
    double ass = 0.0;
    for (std::size_t g = 0; g < ng; ++g) {
      for (std::size_t p = 0; p < np; ++p) {
        const auto m = static_cast<double>(match_count[a][g * np + p]);
        if (m == 0.0) continue;
        ass += m * (m / (gt_len[g] + pred_len[p] - m));
      }
    }
    out.per_alpha[a].ass_sum = ass;
  }
  return out;
}

HotaScores hota_metrics(const VideoAnnotation& gt,
                        const std::vector<Trajectory>& pred,
                        const std::vector<double>& alphas) {
  require_boxes(gt);
  return hota_counts(gt.trajectories, pred, alphas).scores();
}

// ---------------------------------------------------------------------------
// Combined
// ---------------------------------------------------------------------------

TrackingCounts& TrackingCounts::operator+=(const TrackingCounts& o) {
  clear += o.clear;
  id += o.id;
  hota += o.hota;
  return *this;
}

TrackingScores TrackingCounts::scores() const {
  TrackingScores s;
  const HotaScores h = hota.scores();
  s.hota = h.hota;
  s.deta = h.deta;
  s.assa = h.assa;
  s.loca = h.loca;
  const auto mota = clear.mota();
  s.empty_gt = !mota.has_value();
  s.mota = mota.value_or(0.0);
  s.idf1 = id.idf1();
  s.idp = id.idp();
  s.idr = id.idr();
  s.fp = clear.fp;
  s.fn = clear.fn;
  s.idsw = clear.idsw;
  s.gt_boxes = clear.gt_boxes;
  return s;
}

TrackingEvaluation evaluate_tracking(const std::vector<Trajectory>& gt,
                                     const std::vector<Trajectory>& pred,
                                     const TrackingOptions& options) {
  TrackingEvaluation ev;
  ev.counts.clear = clear_counts(gt, pred, options.iou_thresh);
  IdResult id = id_counts(gt, pred, options.iou_thresh);
  ev.counts.id = id.counts;
  ev.correspondence = std::move(id.correspondence);
  ev.counts.hota = hota_counts(gt, pred, options.alphas);
  return ev;
}

}  // namespace smot
