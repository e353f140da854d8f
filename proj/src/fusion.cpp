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

#include "smot/fusion.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "smot/error.hpp"
#include "smot/rng.hpp"

namespace smot {

FeatureMatrix::FeatureMatrix(Matrix m) : m_(std::move(m)) {
  if (!m_.allFinite()) fail(ErrorCode::kNumeric, "feature matrix has non-finite entries");
}

Matrix seeded_matrix(std::uint64_t seed, std::uint64_t stream, Eigen::Index rows,
                     Eigen::Index cols, double fan_in) {
  const CounterRng rng(seed, stream);
  const double a = 1.0 / std::sqrt(fan_in);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = rng.uniform(static_cast<std::uint64_t>(r * cols + c), -a, a);
    }
  }
  return m;
}

FeatureMatrix seeded_features(std::uint64_t seed, std::uint64_t stream,
                              Eigen::Index rows, Eigen::Index dim, double scale) {
  // fan_in chosen so the bound equals `scale`.
  return FeatureMatrix(seeded_matrix(seed, stream, rows, dim, 1.0 / (scale * scale)));
}

AttentionParams AttentionParams::seeded(std::uint64_t seed, int d) {
  return {seeded_matrix(seed, 1, d, d, d), seeded_matrix(seed, 2, d, d, d),
          seeded_matrix(seed, 3, d, d, d)};
}

Matrix Linear::apply(const Matrix& x) const {
  if (x.cols() != w.rows()) {
    fail(ErrorCode::kDimMismatch, "linear layer expects " +
                                      std::to_string(w.rows()) + " inputs, got " +
                                      std::to_string(x.cols()));
  }
  Matrix y = x * w;
  y.rowwise() += b;
  return y;
}

Linear Linear::seeded(std::uint64_t seed, std::uint64_t stream, int in, int out) {
  return {seeded_matrix(seed, stream, in, out, in),
          seeded_matrix(seed, stream + 1, 1, out, in)};
}

Linear Linear::identity(int d) {
  return {Matrix::Identity(d, d), RowVector::Zero(d)};
}

Matrix Mlp::apply(const Matrix& x) const {
  return out.apply(hidden.apply(x).array().tanh().matrix());
}

Mlp Mlp::seeded(std::uint64_t seed, std::uint64_t stream, int in, int hidden_dim,
                int out) {
  return {Linear::seeded(seed, stream, in, hidden_dim),
          Linear::seeded(seed, stream + 2, hidden_dim, out)};
}

std::string_view fusion_variant_name(FusionVariant v) {
  switch (v) {
    case FusionVariant::kAttention: return "attention";
    case FusionVariant::kMlp: return "mlp";
    case FusionVariant::kConcatenation: return "concatenation";
    case FusionVariant::kAddition: return "addition";
  }
  return "attention";
}

FusionVariant parse_fusion_variant(std::string_view name) {
  for (auto v : {FusionVariant::kAttention, FusionVariant::kMlp,
                 FusionVariant::kConcatenation, FusionVariant::kAddition}) {
    if (fusion_variant_name(v) == name) return v;
  }
  fail(ErrorCode::kInvalidArgument, "unknown fusion variant '" + std::string(name) + "'");
}

FusionParams FusionParams::seeded(std::uint64_t seed, int d, int hidden) {
  return {AttentionParams::seeded(seed, d), Mlp::seeded(seed, 10, 2 * d, hidden, d),
          Linear::seeded(seed, 20, 2 * d, d), Mlp::seeded(seed, 30, d, hidden, d)};
}

// ---------------------------------------------------------------------------
// Attention
// ---------------------------------------------------------------------------

namespace {

Matrix softmax(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double top = m.row(r).maxCoeff();
    out.row(r) = (m.row(r).array() - top).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

void require_rows(const FeatureMatrix& m, const char* what) {
  if (m.rows() == 0 || m.dim() == 0) {
    fail(ErrorCode::kEmptyInput, std::string(what) + " is empty");
  }
}

void check_attention(const FeatureMatrix& z, const FeatureMatrix& u,
                     const AttentionParams& p) {
  require_rows(z, "query");
  require_rows(u, "key/value");
  const Eigen::Index d = p.dim();
  for (const Matrix* w : {&p.w_q, &p.w_k, &p.w_v}) {
    if (w->rows() != d || w->cols() != d) {
      fail(ErrorCode::kDimMismatch, "attention weights must be d x d");
    }
  }
  if (z.dim() != d || u.dim() != d) {
    fail(ErrorCode::kDimMismatch,
         "attention dimension " + std::to_string(d) + " does not match inputs (" +
             std::to_string(z.dim()) + ", " + std::to_string(u.dim()) + ")");
  }
}

Matrix weights_of(const FeatureMatrix& z, const FeatureMatrix& u,
                  const AttentionParams& p) {
  const Matrix q = z.mat() * p.w_q;
  const Matrix k = u.mat() * p.w_k;
  const double scale = 1.0 / std::sqrt(static_cast<double>(p.dim()));
  return softmax((q * k.transpose()) * scale);
}

}  // namespace

FeatureMatrix softmax_rows(const FeatureMatrix& m) {
  return FeatureMatrix(softmax(m.mat()));
}

FeatureMatrix attention_weights(const FeatureMatrix& z, const FeatureMatrix& u,
                                const AttentionParams& p) {
  check_attention(z, u, p);
  return FeatureMatrix(weights_of(z, u, p));
}

FeatureMatrix cross_attention(const FeatureMatrix& z, const FeatureMatrix& u,
                              const AttentionParams& p) {
  check_attention(z, u, p);
  return FeatureMatrix(weights_of(z, u, p) * (u.mat() * p.w_v));
}

FeatureMatrix self_attention(const FeatureMatrix& z, const AttentionParams& p) {
  return cross_attention(z, z, p);
}

// ---------------------------------------------------------------------------
// RoI target feature
// ---------------------------------------------------------------------------

namespace {

// Cell span [lo, hi) of a box edge pair on an axis with `cells` cells.
std::pair<int, int> cell_span(double start, double end, double extent, int cells) {
  auto nearest = [&](double v) {
    const double g = v / extent * cells;
    return std::clamp(static_cast<int>(std::floor(g + 0.5)), 0, cells);
  };
  int lo = nearest(start);
  int hi = nearest(end);
  if (hi <= lo) {
    hi = lo + 1;
    if (hi > cells) {
      hi = cells;
      lo = cells - 1;
    }
  }
  return {lo, hi};
}

constexpr int kBins = 4;

std::pair<int, int> bin_span(int b, int n) {
  const int lo = (b * n) / kBins;
  const int hi = ((b + 1) * n + kBins - 1) / kBins;
  return {lo, std::max(hi, lo + 1)};
}

}  // namespace

FeatureMatrix roi_target_feature(const FeatureGrid& grid, const BoundingBox& box,
                                 double frame_width, double frame_height) {
  if (grid.height <= 0 || grid.width <= 0 || grid.cells.cols() == 0 ||
      grid.cells.rows() != static_cast<Eigen::Index>(grid.height) * grid.width) {
    fail(ErrorCode::kEmptyGrid, "feature grid is empty or malformed");
  }
  if (!box.valid() || !(frame_width > 0.0) || !(frame_height > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "box and frame size must be positive");
  }
  const auto [x0, x1] = cell_span(box.x, box.right(), frame_width, grid.width);
  const auto [y0, y1] = cell_span(box.y, box.bottom(), frame_height, grid.height);
  const int nx = x1 - x0;
  const int ny = y1 - y0;
  const Eigen::Index d = grid.dim();

  Matrix out = Matrix::Zero(kBins, d);
  for (int by = 0; by < kBins; ++by) {
    const auto [ry0, ry1] = bin_span(by, ny);
    RowVector row_sum = RowVector::Zero(d);
    for (int bx = 0; bx < kBins; ++bx) {
      const auto [rx0, rx1] = bin_span(bx, nx);
      RowVector bin = RowVector::Zero(d);
      for (int y = y0 + ry0; y < y0 + ry1; ++y) {
        for (int x = x0 + rx0; x < x0 + rx1; ++x) {
          bin += grid.cells.row(static_cast<Eigen::Index>(y) * grid.width + x);
        }
      }
      row_sum += bin / static_cast<double>((ry1 - ry0) * (rx1 - rx0));
    }
    out.row(by) = row_sum / static_cast<double>(kBins);
  }
  return FeatureMatrix(std::move(out));
}

// ---------------------------------------------------------------------------
// Fusion modules
// ---------------------------------------------------------------------------

namespace {

void check_uniform(const std::vector<FeatureMatrix>& ms, bool same_rows,
                   const char* what) {
  if (ms.empty()) fail(ErrorCode::kEmptyInput, std::string(what) + " list is empty");
  for (const auto& m : ms) {
    require_rows(m, what);
    if (m.dim() != ms.front().dim() || (same_rows && m.rows() != ms.front().rows())) {
      fail(ErrorCode::kDimMismatch, std::string(what) + " shapes differ");
    }
  }
}

Matrix hconcat(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

Matrix mean_of(const std::vector<FeatureMatrix>& ms) {
  Matrix sum = ms.front().mat();
  for (std::size_t i = 1; i < ms.size(); ++i) sum += ms[i].mat();
  return sum / static_cast<double>(ms.size());
}

}  // namespace

FeatureMatrix vfm_fold(const std::vector<FeatureMatrix>& frames,
                       FusionVariant variant, const FusionParams& p) {
  const bool same_rows = variant != FusionVariant::kAttention;
  check_uniform(frames, same_rows, "frame feature");
  if (frames.size() == 1) return frames.front();

  switch (variant) {
    case FusionVariant::kAttention: {
      FeatureMatrix acc = frames.front();
      for (std::size_t i = 1; i < frames.size(); ++i) {
        acc = cross_attention(acc, frames[i], p.attention);
      }
      return acc;
    }
    case FusionVariant::kMlp:
    case FusionVariant::kConcatenation: {
      Matrix acc = frames.front().mat();
      for (std::size_t i = 1; i < frames.size(); ++i) {
        const Matrix joined = hconcat(acc, frames[i].mat());
        acc = variant == FusionVariant::kMlp ? p.pair_mlp.apply(joined)
                                             : p.pair_linear.apply(joined);
      }
      return FeatureMatrix(std::move(acc));
    }
    case FusionVariant::kAddition:
      return FeatureMatrix(mean_of(frames));
  }
  fail(ErrorCode::kInvalidArgument, "unknown fusion variant");
}

FeatureMatrix tfm_fuse(const std::vector<FeatureMatrix>& target_feats,
                       FusionVariant variant, const FusionParams& p) {
  check_uniform(target_feats, true, "target feature");
  const Eigen::Index block = target_feats.front().rows();
  const Eigen::Index d = target_feats.front().dim();
  Matrix stacked(block * static_cast<Eigen::Index>(target_feats.size()), d);
  for (std::size_t i = 0; i < target_feats.size(); ++i) {
    stacked.middleRows(block * static_cast<Eigen::Index>(i), block) =
        target_feats[i].mat();
  }
  switch (variant) {
    case FusionVariant::kConcatenation:
      return self_attention(FeatureMatrix(std::move(stacked)), p.attention);
    case FusionVariant::kAttention:
      return cross_attention(FeatureMatrix(mean_of(target_feats)),
                             FeatureMatrix(std::move(stacked)), p.attention);
    case FusionVariant::kMlp:
      return FeatureMatrix(p.row_mlp.apply(stacked));
    case FusionVariant::kAddition:
      return FeatureMatrix(mean_of(target_feats));
  }
  fail(ErrorCode::kInvalidArgument, "unknown fusion variant");
}

FeatureMatrix caption_context(const FeatureMatrix& video_feat,
                              const std::vector<FeatureMatrix>& traj_feats,
                              const AttentionParams& p, const Matrix& proj) {
  if (traj_feats.empty()) fail(ErrorCode::kEmptyInput, "no trajectory features");
  if (proj.rows() != p.dim() || proj.cols() != p.dim()) {
    fail(ErrorCode::kDimMismatch, "projection must be d x d");
  }
  FeatureMatrix ctx = video_feat;
  for (const auto& t : traj_feats) ctx = cross_attention(ctx, t, p);
  return FeatureMatrix(ctx.mat() * proj);
}

FeatureMatrix instance_context(const FeatureMatrix& traj_feat, const Matrix& proj) {
  require_rows(traj_feat, "trajectory feature");
  if (proj.rows() != traj_feat.dim() || proj.cols() != traj_feat.dim()) {
    fail(ErrorCode::kDimMismatch, "projection must be d x d");
  }
  return FeatureMatrix(traj_feat.mat() * proj);
}

// ---------------------------------------------------------------------------
// Interaction head
// ---------------------------------------------------------------------------

InteractionHeadParams InteractionHeadParams::seeded(std::uint64_t seed, int d,
                                                    int hidden, int vocabulary_size) {
  return {Linear::seeded(seed, 100, d, hidden),
          Linear::seeded(seed, 102, hidden, vocabulary_size + 1)};
}

namespace {

void check_head(const InteractionHeadParams& h) {
  if (h.hidden.w.cols() != h.hidden.b.size() || h.out.w.cols() != h.out.b.size() ||
      h.hidden.w.cols() != h.out.w.rows() || h.out.w.cols() < 1) {
    fail(ErrorCode::kDimMismatch, "interaction head layers do not chain");
  }
}

// Log-sum-exp stabilized log-probabilities.
RowVector log_softmax(const RowVector& z) {
  const double top = z.maxCoeff();
  const double lse = top + std::log((z.array() - top).exp().sum());
  return (z.array() - lse).matrix();
}

void check_batch(const InteractionHeadParams& h,
                 const std::vector<HeadExample>& batch) {
  check_head(h);
  if (batch.empty()) fail(ErrorCode::kEmptyInput, "empty batch");
  for (const auto& ex : batch) {
    if (ex.pooled.size() != h.hidden.w.rows()) {
      fail(ErrorCode::kDimMismatch, "pooled feature size does not match the head");
    }
    if (ex.label < 0 || ex.label >= h.classes()) {
      fail(ErrorCode::kLabelRange, "label " + std::to_string(ex.label) +
                                       " outside [0, " +
                                       std::to_string(h.classes() - 1) + "]");
    }
  }
}

}  // namespace

RowVector head_logits(const InteractionHeadParams& h, const RowVector& pooled) {
  check_head(h);
  const Matrix a = h.hidden.apply(pooled).array().tanh().matrix();
  return h.out.apply(a).row(0);
}

RowVector interaction_logits(const FeatureMatrix& active,
                             const FeatureMatrix& passive,
                             const AttentionParams& p,
                             const InteractionHeadParams& h) {
  check_head(h);
  if (h.hidden.w.rows() != p.dim()) {
    fail(ErrorCode::kDimMismatch, "head input size differs from attention dimension");
  }
  const FeatureMatrix fused = cross_attention(active, passive, p);
  const RowVector pooled = fused.mat().colwise().mean();
  return head_logits(h, pooled);
}

double interaction_head_loss(const InteractionHeadParams& h,
                             const std::vector<HeadExample>& batch) {
  check_batch(h, batch);
  // One stacked pass; summation order is still example order.
  const auto n = static_cast<Eigen::Index>(batch.size());
  Matrix x(n, h.hidden.w.rows());
  for (Eigen::Index i = 0; i < n; ++i) x.row(i) = batch[static_cast<std::size_t>(i)].pooled;
  Matrix a = x * h.hidden.w;
  a.rowwise() += h.hidden.b;
  a = a.array().tanh().matrix();
  // Column per example keeps each softmax contiguous.
  Matrix logits = h.out.w.transpose() * a.transpose();
  logits.colwise() += h.out.b.transpose();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double top = logits.col(i).maxCoeff();
    const double lse = top + std::log((logits.col(i).array() - top).exp().sum());
    sum -= logits(batch[static_cast<std::size_t>(i)].label, i) - lse;
  }
  return sum / static_cast<double>(n);
}

InteractionHeadParams interaction_head_gradient(
    const InteractionHeadParams& h, const std::vector<HeadExample>& batch) {
  check_batch(h, batch);
  InteractionHeadParams g{
      {Matrix::Zero(h.hidden.w.rows(), h.hidden.w.cols()),
       RowVector::Zero(h.hidden.b.size())},
      {Matrix::Zero(h.out.w.rows(), h.out.w.cols()), RowVector::Zero(h.out.b.size())}};
  for (const auto& ex : batch) {
    const RowVector a = h.hidden.apply(ex.pooled).row(0).array().tanh().matrix();
    const RowVector logits = h.out.apply(a).row(0);
    RowVector dlogits = log_softmax(logits).array().exp().matrix();
    dlogits(ex.label) -= 1.0;
    g.out.w.noalias() += a.transpose() * dlogits;
    g.out.b += dlogits;
    const RowVector da = dlogits * h.out.w.transpose();
    const RowVector dz = (da.array() * (1.0 - a.array().square())).matrix();
    g.hidden.w.noalias() += ex.pooled.transpose() * dz;
    g.hidden.b += dz;
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  g.hidden.w *= inv;
  g.hidden.b *= inv;
  g.out.w *= inv;
  g.out.b *= inv;
  return g;
}

// ---------------------------------------------------------------------------
// Binary container
// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view kMagic = "SMOTMAT1";

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint64_t u64() { return uint(8); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(uint(4)); }
  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) fail(ErrorCode::kSyntax, "matrix container is truncated");
  }
  std::uint64_t uint(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += static_cast<std::size_t>(width);
    return v;
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_matrices(const std::vector<NamedMatrix>& entries) {
  std::string out(kMagic);
  put_u64(out, entries.size());
  for (const auto& [name, m] : entries) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_u64(out, static_cast<std::uint64_t>(m.rows()));
    put_u64(out, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        put_u64(out, std::bit_cast<std::uint64_t>(m(r, c)));
      }
    }
  }
  return out;
}

std::vector<NamedMatrix> decode_matrices(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(kMagic.size()) != kMagic) {
    fail(ErrorCode::kSyntax, "not a matrix container (bad magic)");
  }
  const std::uint64_t count = in.u64();
  std::vector<NamedMatrix> out;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = in.u32();
    std::string name(in.take(name_len));
    const std::uint64_t rows = in.u64();
    const std::uint64_t cols = in.u64();
    if (cols != 0 && rows > in.remaining() / 8 / cols) {
      fail(ErrorCode::kSyntax, "matrix '" + name + "' exceeds the container");
    }
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        m(r, c) = std::bit_cast<double>(in.u64());
      }
    }
    out.emplace_back(std::move(name), std::move(m));
  }
  if (in.remaining() != 0) fail(ErrorCode::kSyntax, "trailing bytes after container");
  return out;
}

}  // namespace smot
