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

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "smot/core_model.hpp"
#include "smot/metrics_tracking.hpp"
#include "smot/text.hpp"

namespace smot {

struct CaptionPair {
  TokenSequence hypothesis;
  TokenSequence reference;
};

CaptionPair make_caption_pair(std::string_view hypothesis,
                              std::string_view reference);

// Corpus BLEU with uniform weights over n = 1..max_n, no smoothing.
// Throws Error{EMPTY_CORPUS}.
double bleu(const std::vector<CaptionPair>& pairs, int max_n = 4);

// LCS F-measure. Throws Error{EMPTY_REFERENCE}.
double rouge_l(const TokenSequence& hypothesis, const TokenSequence& reference,
               double beta = 1.2);

// Exact then prefix-stem unigram alignment with a fragmentation penalty.
// Throws Error{EMPTY_REFERENCE}.
double meteor_lite(const TokenSequence& hypothesis,
                   const TokenSequence& reference);

// TF-IDF n-gram cosine. The document frequencies come from the reference set
// given at construction and are read-only afterwards.
class CiderScorer {
 public:
  explicit CiderScorer(const std::vector<TokenSequence>& references,
                       int max_n = 4);

  // Mean over n of the cosine similarity, in [0, 1].
  double pair_similarity(const TokenSequence& hypothesis,
                         const TokenSequence& reference) const;
  // 10 x mean pair similarity. Throws Error{EMPTY_CORPUS}.
  double corpus_score(const std::vector<CaptionPair>& pairs) const;

  std::size_t document_count() const { return documents_; }

 private:
  using Ngram = std::string;
  std::map<Ngram, double> tf_idf(const TokenSequence& tokens, int n) const;

  int max_n_;
  std::size_t documents_ = 0;
  std::map<Ngram, std::int64_t> document_frequency_;
};

// Builds the IDF table from the pairs' own references.
double cider(const std::vector<CaptionPair>& pairs, int max_n = 4);

struct CaptionScores {
  double bleu = 0.0;
  double rouge = 0.0;
  double meteor = 0.0;
  double cider = 0.0;
};

enum class CaptionAveraging {
  kPooled,   // corpus BLEU over all pairs
  kPerPair,  // BLEU averaged over single-pair corpora
};

// ROUGE-L, METEOR-lite and CIDEr are means over pairs in both modes. Pairs
// with an empty reference score 0. Throws Error{EMPTY_CORPUS}.
CaptionScores score_captions(const std::vector<CaptionPair>& pairs,
                             const CiderScorer& cider,
                             CaptionAveraging averaging = CaptionAveraging::kPooled,
                             int bleu_n = 4);

// Instance-caption pairs aligned through the correspondence: one pair per
// ground-truth track (empty hypothesis when unmatched or uncaptioned) and one
// pair with an empty reference per captioned prediction left unmatched.
std::vector<CaptionPair> instance_caption_pairs(
    const VideoAnnotation& gt, const VideoAnnotation& pred,
    const TrajectoryCorrespondence& correspondence);

// ---------------------------------------------------------------------------
// Interactions
// ---------------------------------------------------------------------------

struct InteractionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;

  InteractionCounts& operator+=(const InteractionCounts& o);
  friend bool operator==(const InteractionCounts&,
                         const InteractionCounts&) = default;
};

struct InteractionScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
};

InteractionScores interaction_scores(const InteractionCounts& counts);

// Directed, exact-sense matching through the correspondence. Predictions on
// tracks without a ground-truth partner count as false positives.
InteractionScores interaction_prf(const std::vector<InteractionTriplet>& gt,
                                  const std::vector<InteractionTriplet>& pred,
                                  const TrajectoryCorrespondence& correspondence);

}  // namespace smot
