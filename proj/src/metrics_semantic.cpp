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

#include "smot/metrics_semantic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "smot/error.hpp"

namespace smot {

namespace {

std::string ngram_key(const TokenSequence& t, std::size_t start, int n) {
  std::string key;
  for (int k = 0; k < n; ++k) {
    if (k) key.push_back('\x1f');
    key += t[start + static_cast<std::size_t>(k)];
  }
  return key;
}

std::map<std::string, std::int64_t> ngram_counts(const TokenSequence& t, int n) {
  std::map<std::string, std::int64_t> out;
  const auto un = static_cast<std::size_t>(n);
  if (t.size() < un) return out;
  for (std::size_t i = 0; i + un <= t.size(); ++i) ++out[ngram_key(t, i, n)];
  return out;
}

void check_order(int n) {
  if (n < 1) fail(ErrorCode::kInvalidArgument, "n-gram order must be >= 1");
}

}  // namespace

CaptionPair make_caption_pair(std::string_view hypothesis,
                              std::string_view reference) {
  return {tokenize(hypothesis), tokenize(reference)};
}

// ---------------------------------------------------------------------------
// BLEU
// ---------------------------------------------------------------------------

double bleu(const std::vector<CaptionPair>& pairs, int max_n) {
  check_order(max_n);
  if (pairs.empty()) fail(ErrorCode::kEmptyCorpus, "BLEU needs at least one pair");
  std::vector<std::int64_t> matched(static_cast<std::size_t>(max_n), 0);
  std::vector<std::int64_t> total(static_cast<std::size_t>(max_n), 0);
  std::int64_t hyp_len = 0, ref_len = 0;
  for (const auto& p : pairs) {
    hyp_len += static_cast<std::int64_t>(p.hypothesis.size());
    ref_len += static_cast<std::int64_t>(p.reference.size());
    for (int n = 1; n <= max_n; ++n) {
      const auto hyp = ngram_counts(p.hypothesis, n);
      const auto ref = ngram_counts(p.reference, n);
      for (const auto& [g, c] : hyp) {
        total[static_cast<std::size_t>(n - 1)] += c;
        auto it = ref.find(g);
        if (it != ref.end()) {
          matched[static_cast<std::size_t>(n - 1)] += std::min(c, it->second);
        }
      }
    }
  }
  if (hyp_len == 0) return 0.0;
  double log_sum = 0.0;
  for (int n = 0; n < max_n; ++n) {
    const auto i = static_cast<std::size_t>(n);
    if (matched[i] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matched[i]) /
                        static_cast<double>(total[i]));
  }
  const double bp =
      hyp_len < ref_len
          ? std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len))
          : 1.0;
  return bp * std::exp(log_sum / max_n);
}

// ---------------------------------------------------------------------------
// ROUGE-L
// ---------------------------------------------------------------------------

double rouge_l(const TokenSequence& hyp, const TokenSequence& ref, double beta) {
  if (ref.empty()) fail(ErrorCode::kEmptyReference, "ROUGE-L needs a reference");
  if (hyp.empty()) return 0.0;
  std::vector<std::size_t> prev(ref.size() + 1, 0), cur(ref.size() + 1, 0);
  for (std::size_t i = 1; i <= hyp.size(); ++i) {
    for (std::size_t j = 1; j <= ref.size(); ++j) {
      cur[j] = hyp[i - 1] == ref[j - 1] ? prev[j - 1] + 1
                                         : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  const auto lcs = static_cast<double>(prev[ref.size()]);
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(hyp.size());
  const double r = lcs / static_cast<double>(ref.size());
  const double b2 = beta * beta;
  return (1.0 + b2) * p * r / (r + b2 * p);
}

// ---------------------------------------------------------------------------
// METEOR-lite
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kStemPrefix = 4;

bool stem_match(const std::string& a, const std::string& b) {
  if (a.size() < kStemPrefix || b.size() < kStemPrefix) return false;
  return a.compare(0, kStemPrefix, b, 0, kStemPrefix) == 0;
}

constexpr long kUnaligned = -1;

// One alignment stage over still-unaligned tokens. Prefers the reference
// position right after the previous hypothesis token's partner, then the
// leftmost candidate.
template <typename Eq>
void align_stage(const TokenSequence& hyp, const TokenSequence& ref,
                 std::vector<long>& hyp_to_ref, std::vector<char>& ref_used,
                 Eq eq) {
  for (std::size_t i = 0; i < hyp.size(); ++i) {
    if (hyp_to_ref[i] != kUnaligned) continue;
    long pick = kUnaligned;
    if (i > 0 && hyp_to_ref[i - 1] != kUnaligned) {
      const auto next = static_cast<std::size_t>(hyp_to_ref[i - 1] + 1);
      if (next < ref.size() && !ref_used[next] && eq(hyp[i], ref[next])) {
        pick = static_cast<long>(next);
      }
    }
    for (std::size_t j = 0; pick == kUnaligned && j < ref.size(); ++j) {
      if (!ref_used[j] && eq(hyp[i], ref[j])) pick = static_cast<long>(j);
    }
    if (pick != kUnaligned) {
      hyp_to_ref[i] = pick;
      ref_used[static_cast<std::size_t>(pick)] = 1;
    }
  }
}

}  // namespace

double meteor_lite(const TokenSequence& hyp, const TokenSequence& ref) {
  if (ref.empty()) fail(ErrorCode::kEmptyReference, "METEOR needs a reference");
  if (hyp.empty()) return 0.0;
  std::vector<long> hyp_to_ref(hyp.size(), kUnaligned);
  std::vector<char> ref_used(ref.size(), 0);
  align_stage(hyp, ref, hyp_to_ref, ref_used,
              [](const std::string& a, const std::string& b) { return a == b; });
  align_stage(hyp, ref, hyp_to_ref, ref_used, stem_match);

  std::size_t matches = 0, chunks = 0;
  long prev_ref = kUnaligned;
  bool prev_aligned = false;
  for (std::size_t i = 0; i < hyp.size(); ++i) {
    const long r = hyp_to_ref[i];
    if (r == kUnaligned) {
      prev_aligned = false;
      continue;
    }
    ++matches;
    if (!prev_aligned || r != prev_ref + 1) ++chunks;
    prev_ref = r;
    prev_aligned = true;
  }
  if (matches == 0) return 0.0;
  const double m = static_cast<double>(matches);
  const double p = m / static_cast<double>(hyp.size());
  const double r = m / static_cast<double>(ref.size());
  const double fmean = 10.0 * p * r / (r + 9.0 * p);
  const double frag = static_cast<double>(chunks) / m;
  const double penalty = 0.5 * frag * frag * frag;
  return fmean * (1.0 - penalty);
}

// ---------------------------------------------------------------------------
// CIDEr
// ---------------------------------------------------------------------------

CiderScorer::CiderScorer(const std::vector<TokenSequence>& references, int max_n)
    : max_n_(max_n) {
  check_order(max_n);
  for (const auto& ref : references) {
    if (ref.empty()) continue;
    ++documents_;
    for (int n = 1; n <= max_n_; ++n) {
      for (const auto& [g, c] : ngram_counts(ref, n)) ++document_frequency_[g];
    }
  }
}

std::map<std::string, double> CiderScorer::tf_idf(const TokenSequence& tokens,
                                                  int n) const {
  std::map<std::string, double> out;
  const double docs = static_cast<double>(documents_);
  for (const auto& [g, c] : ngram_counts(tokens, n)) {
    auto it = document_frequency_.find(g);
    const double df = it == document_frequency_.end()
                          ? 1.0
                          : static_cast<double>(std::max<std::int64_t>(1, it->second));
    const double idf = docs > 0.0 ? std::log(docs / df) : 0.0;
    out[g] = static_cast<double>(c) * idf;
  }
  return out;
}

double CiderScorer::pair_similarity(const TokenSequence& hyp,
                                    const TokenSequence& ref) const {
  double sum = 0.0;
  for (int n = 1; n <= max_n_; ++n) {
    const auto h = tf_idf(hyp, n);
    const auto r = tf_idf(ref, n);
    double dot = 0.0, hh = 0.0, rr = 0.0;
    for (const auto& [g, v] : h) {
      hh += v * v;
      auto it = r.find(g);
      if (it != r.end()) dot += v * it->second;
    }
    for (const auto& [g, v] : r) rr += v * v;
    if (hh > 0.0 && rr > 0.0) sum += dot / (std::sqrt(hh) * std::sqrt(rr));
  }
  return sum / max_n_;
}

double CiderScorer::corpus_score(const std::vector<CaptionPair>& pairs) const {
  if (pairs.empty()) fail(ErrorCode::kEmptyCorpus, "CIDEr needs at least one pair");
  double sum = 0.0;
  for (const auto& p : pairs) sum += pair_similarity(p.hypothesis, p.reference);
  return 10.0 * sum / static_cast<double>(pairs.size());
}

double cider(const std::vector<CaptionPair>& pairs, int max_n) {
  if (pairs.empty()) fail(ErrorCode::kEmptyCorpus, "CIDEr needs at least one pair");
  std::vector<TokenSequence> refs;
  refs.reserve(pairs.size());
  for (const auto& p : pairs) refs.push_back(p.reference);
  return CiderScorer(refs, max_n).corpus_score(pairs);
}

// ---------------------------------------------------------------------------
// Aggregated caption scores
// ---------------------------------------------------------------------------

CaptionScores score_captions(const std::vector<CaptionPair>& pairs,
                             const CiderScorer& cider_scorer,
                             CaptionAveraging averaging, int bleu_n) {
  if (pairs.empty()) fail(ErrorCode::kEmptyCorpus, "no caption pairs to score");
  CaptionScores s;
  const double n = static_cast<double>(pairs.size());
  if (averaging == CaptionAveraging::kPooled) {
    s.bleu = bleu(pairs, bleu_n);
  } else {
    for (const auto& p : pairs) s.bleu += bleu({p}, bleu_n);
    s.bleu /= n;
  }
  for (const auto& p : pairs) {
    if (p.reference.empty()) continue;
    s.rouge += rouge_l(p.hypothesis, p.reference);
    s.meteor += meteor_lite(p.hypothesis, p.reference);
  }
  s.rouge /= n;
  s.meteor /= n;
  s.cider = cider_scorer.corpus_score(pairs);
  return s;
}

std::vector<CaptionPair> instance_caption_pairs(
    const VideoAnnotation& gt, const VideoAnnotation& pred,
    const TrajectoryCorrespondence& correspondence) {
  auto caption_of = [](const VideoAnnotation& a, const TrackId& id) {
    auto it = a.instance_captions.find(id);
    return it == a.instance_captions.end() ? std::string_view{}
                                           : std::string_view{it->second};
  };

  std::set<TrackId> gt_ids;
  for (const auto& t : gt.trajectories) gt_ids.insert(t.track_id);
  std::set<TrackId> pred_ids;
  for (const auto& t : pred.trajectories) pred_ids.insert(t.track_id);

  std::vector<CaptionPair> out;
  for (const auto& id : gt_ids) {
    const TrackId* partner = correspondence.pred_for(id);
    const std::string_view hyp = partner ? caption_of(pred, *partner) : "";
    out.push_back(make_caption_pair(hyp, caption_of(gt, id)));
  }
  for (const auto& id : pred_ids) {
    if (correspondence.gt_for(id)) continue;
    const std::string_view hyp = caption_of(pred, id);
    if (tokenize(hyp).empty()) continue;
    out.push_back(make_caption_pair(hyp, ""));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Interactions
// ---------------------------------------------------------------------------

InteractionCounts& InteractionCounts::operator+=(const InteractionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  return *this;
}

InteractionScores interaction_scores(const InteractionCounts& c) {
  InteractionScores s;
  s.tp = c.tp;
  s.fp = c.fp;
  s.fn = c.fn;
  const double tp = static_cast<double>(c.tp);
  if (c.tp + c.fp > 0) s.precision = tp / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) s.recall = tp / static_cast<double>(c.tp + c.fn);
  if (s.precision + s.recall > 0.0) {
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  }
  return s;
}

InteractionScores interaction_prf(const std::vector<InteractionTriplet>& gt,
                                  const std::vector<InteractionTriplet>& pred,
                                  const TrajectoryCorrespondence& corr) {
  std::vector<char> consumed(gt.size(), 0);
  InteractionCounts c;
  for (const auto& p : pred) {
    const TrackId* subject = corr.gt_for(p.subject);
    const TrackId* object = corr.gt_for(p.object);
    bool hit = false;
    if (subject && object) {
      for (std::size_t i = 0; i < gt.size(); ++i) {
        if (consumed[i]) continue;
        if (gt[i].subject == *subject && gt[i].object == *object &&
            gt[i].predicate == p.predicate) {
          consumed[i] = 1;
          hit = true;
          break;
        }
      }
    }
    if (hit) ++c.tp;
    else ++c.fp;
  }
  c.fn = static_cast<std::int64_t>(gt.size()) - c.tp;
  return interaction_scores(c);
}

}  // namespace smot
