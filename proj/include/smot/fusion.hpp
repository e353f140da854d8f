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
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "smot/core_model.hpp"

namespace smot {

inline constexpr int kDefaultFeatureDim = 256;

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

// Dense rows x dim matrix of finite reals.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(Eigen::Index rows, Eigen::Index dim, double fill = 0.0)
      : m_(Matrix::Constant(rows, dim, fill)) {}
  // Throws Error{NUMERIC} on non-finite entries.
  explicit FeatureMatrix(Matrix m);

  Eigen::Index rows() const { return m_.rows(); }
  Eigen::Index dim() const { return m_.cols(); }
  double operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }
  double& operator()(Eigen::Index r, Eigen::Index c) { return m_(r, c); }

  const Matrix& mat() const { return m_; }

  friend bool operator==(const FeatureMatrix& a, const FeatureMatrix& b) {
    return a.m_.rows() == b.m_.rows() && a.m_.cols() == b.m_.cols() &&
           a.m_ == b.m_;
  }

 private:
  Matrix m_;
};

// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], one counter stream per tensor.
Matrix seeded_matrix(std::uint64_t seed, std::uint64_t stream, Eigen::Index rows,
                     Eigen::Index cols, double fan_in);
FeatureMatrix seeded_features(std::uint64_t seed, std::uint64_t stream,
                              Eigen::Index rows, Eigen::Index dim,
                              double scale = 1.0);

struct AttentionParams {
  Matrix w_q, w_k, w_v;  // d x d

  Eigen::Index dim() const { return w_q.rows(); }
  static AttentionParams seeded(std::uint64_t seed, int d = kDefaultFeatureDim);
};

// Row-vector affine map x -> x W + b.
struct Linear {
  Matrix w;       // in x out
  RowVector b;    // out

  Matrix apply(const Matrix& x) const;
  static Linear seeded(std::uint64_t seed, std::uint64_t stream, int in, int out);
  static Linear identity(int d);
};

// in -> hidden (tanh) -> out.
struct Mlp {
  Linear hidden;
  Linear out;

  Matrix apply(const Matrix& x) const;
  static Mlp seeded(std::uint64_t seed, std::uint64_t stream, int in,
                    int hidden_dim, int out);
};

enum class FusionVariant { kAttention, kMlp, kConcatenation, kAddition };

std::string_view fusion_variant_name(FusionVariant v);
// Throws Error{INVALID_ARGUMENT}.
FusionVariant parse_fusion_variant(std::string_view name);

// Every parameter any fusion variant needs.
struct FusionParams {
  AttentionParams attention;
  Mlp pair_mlp;        // 2d -> hidden -> d, video MLP variant
  Linear pair_linear;  // 2d -> d, video concatenation variant
  Mlp row_mlp;         // d -> hidden -> d, trajectory MLP variant

  static FusionParams seeded(std::uint64_t seed, int d = kDefaultFeatureDim,
                             int hidden = kDefaultFeatureDim);
};

FeatureMatrix softmax_rows(const FeatureMatrix& m);

// softmax_rows((z Wq)(u Wk)^T / sqrt(d)). Throws Error{DIM_MISMATCH}.
FeatureMatrix attention_weights(const FeatureMatrix& z, const FeatureMatrix& u,
                                const AttentionParams& p);
FeatureMatrix cross_attention(const FeatureMatrix& z, const FeatureMatrix& u,
                              const AttentionParams& p);
FeatureMatrix self_attention(const FeatureMatrix& z, const AttentionParams& p);

// Frame feature map: height x width cells, each a d-vector.
struct FeatureGrid {
  int height = 0;
  int width = 0;
  Matrix cells;  // (height * width) x d, row index y * width + x

  Eigen::Index dim() const { return cells.cols(); }
};

// 4 x d target feature: the box is mapped to grid cells (nearest cell,
// at least one cell per axis), average-pooled into 4 x 4 bins and the bins
// are averaged along the horizontal axis. Throws Error{EMPTY_GRID}.
FeatureMatrix roi_target_feature(const FeatureGrid& grid, const BoundingBox& box,
                                 double frame_width, double frame_height);

// Throws Error{EMPTY_INPUT | DIM_MISMATCH}.
FeatureMatrix vfm_fold(const std::vector<FeatureMatrix>& frames,
                       FusionVariant variant, const FusionParams& p);
FeatureMatrix tfm_fuse(const std::vector<FeatureMatrix>& target_feats,
                       FusionVariant variant, const FusionParams& p);

// Folds cross-attention over the trajectories in the given order, then
// applies the d x d projection. Throws Error{EMPTY_INPUT | DIM_MISMATCH}.
FeatureMatrix caption_context(const FeatureMatrix& video_feat,
                              const std::vector<FeatureMatrix>& traj_feats,
                              const AttentionParams& p, const Matrix& proj);
FeatureMatrix instance_context(const FeatureMatrix& traj_feat,
                               const Matrix& proj);

// ---------------------------------------------------------------------------
// Interaction head
// ---------------------------------------------------------------------------

struct InteractionHeadParams {
  Linear hidden;  // d -> hidden
  Linear out;     // hidden -> C + 1; the last class means "no interaction"

  int classes() const { return static_cast<int>(out.w.cols()); }
  static InteractionHeadParams seeded(std::uint64_t seed, int d, int hidden,
                                      int vocabulary_size);
};

struct HeadExample {
  RowVector pooled;  // d
  int label = 0;
};

// Pooled row mean of CA(active, passive) through the head. Returns C + 1
// raw logits. Throws Error{DIM_MISMATCH}.
RowVector interaction_logits(const FeatureMatrix& active,
                             const FeatureMatrix& passive,
                             const AttentionParams& p,
                             const InteractionHeadParams& h);

RowVector head_logits(const InteractionHeadParams& h, const RowVector& pooled);

// Mean cross-entropy and its analytic gradient (same shapes as the head).
// Throw Error{LABEL_RANGE | EMPTY_INPUT | DIM_MISMATCH}.
double interaction_head_loss(const InteractionHeadParams& h,
                             const std::vector<HeadExample>& batch);
InteractionHeadParams interaction_head_gradient(
    const InteractionHeadParams& h, const std::vector<HeadExample>& batch);

// ---------------------------------------------------------------------------
// Binary matrix container: "SMOTMAT1", u64 count, then per entry
// u32 name length, name bytes, u64 rows, u64 cols, rows*cols f64 row-major.
// All integers and floats little-endian.
// ---------------------------------------------------------------------------

using NamedMatrix = std::pair<std::string, Matrix>;

std::string encode_matrices(const std::vector<NamedMatrix>& entries);
// Throws Error{SYNTAX}.
std::vector<NamedMatrix> decode_matrices(std::string_view bytes);

}  // namespace smot
